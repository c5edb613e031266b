#pragma once

// Maximum likelihood estimation of the item parameters from observed traits.

#include <span>
#include <vector>

#include "itemcal/irt_model.hpp"

namespace itemcal {

struct FitOptions {
  int max_iter = 100;
  double grad_tol = 1e-8;   // per observation; the score tolerance is grad_tol * n
  double step_tol = 1e-10;  // relative to 1 + |gamma|
  int max_halvings = 30;
  ParamBounds bounds{0.2, 3.0, -4.0, 4.0, 0.001, 0.5};

  void validate() const;
};

enum class FitStatus { Converged, NonConvergence, SingularInformation };

const char* to_string(FitStatus s) noexcept;

struct FitResult {
  Gamma gamma;  // best point found, also when status != Converged
  FitStatus status = FitStatus::NonConvergence;
  int iterations = 0;
  bool bound_active = false;
  double log_likelihood = 0.0;
  Vec3 score = Vec3::Zero();
  Mat3 information = Mat3::Zero();  // observed information at `gamma`
  std::vector<double> trace;        // log-likelihood after each accepted step, starting point first

  bool converged() const { return status == FitStatus::Converged; }
  ItemParams item() const { return from_gamma(gamma); }
};

/// Proportion correct among the low-ability starter sample, clamped to
/// [0.001, c_max].
double initial_c_estimate(std::span<const Observation> data, double c_max = 0.5);

/// Maximizes the likelihood over (beta1, beta2) with c held at `c_fixed`.
/// Throws Error(DegenerateData) for all-equal responses or fewer than two
/// distinct traits.
FitResult fit_ab_given_c(std::span<const Observation> data, double c_fixed,
                         const FitOptions& opts = {});

/// Full three-parameter MLE by damped Newton on the observed information,
/// starting from `init`. Throws Error(DegenerateData) for all-equal responses
/// or fewer than three distinct traits.
FitResult fit_mle(std::span<const Observation> data, const Gamma& init,
                  const FitOptions& opts = {});

}  // namespace itemcal
