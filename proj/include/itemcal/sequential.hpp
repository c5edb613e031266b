#pragma once

// Fixed-size confidence ellipsoid machinery: the chi-square critical value,
// the eigenvalue stopping rule and coverage of the resulting ellipsoid.

#include "itemcal/irt_model.hpp"

namespace itemcal {

struct StoppingConfig {
  double d = 0.5;       // bound on the half-length of the ellipsoid's longest axis
  double alpha = 0.05;  // miscoverage probability
  int n0 = 1;           // minimum sample size before stopping is allowed

  void validate() const;
};

struct StoppingDecision {
  bool stop = false;
  long n = 0;
  double lambda_min = 0.0;
  double threshold = 0.0;  // chi2 critical value / d^2
};

/// Upper-alpha quantile of chi-square(df): Q(df/2, x/2) = alpha.
double chi_square_critical(double alpha, int df = 3);

/// Smallest eigenvalue of the symmetric part of `m`.
double min_eigenvalue(const Mat3& m);

StoppingDecision stopping_check(const Mat3& information, long n, const StoppingConfig& cfg);

/// Joint coverage event: (gamma_hat - gamma0)' J (gamma_hat - gamma0) <= C_alpha^2.
bool ellipsoid_contains(const Gamma& gamma_hat, const Mat3& information, const Gamma& gamma0,
                        double alpha);

struct MarginalCoverage {
  bool a = false;
  bool b = false;
  bool c = false;
};

/// Per-parameter coverage of (a, b, c): the ellipsoid is mapped to natural
/// coordinates with the delta method and projected onto each axis.
/// Throws Error(SingularInformation) when J cannot be inverted.
MarginalCoverage marginal_coverage(const Gamma& gamma_hat, const Mat3& information,
                                   const ItemParams& item_true, double alpha);

/// Delta-method covariance of (a, b, c) at gamma_hat: T J^-1 T'.
Mat3 natural_covariance(const Gamma& gamma_hat, const Mat3& information);

}  // namespace itemcal
