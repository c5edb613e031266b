#include "itemcal/sequential.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>

#include "itemcal/error.hpp"

namespace itemcal {

void StoppingConfig::validate() const {
  if (!(d > 0.0) || !std::isfinite(d)) throw Error(ErrorCode::Config, "stopping: d must be > 0");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw Error(ErrorCode::Config, "stopping: alpha must lie in (0, 1)");
  if (n0 < 1) throw Error(ErrorCode::Config, "stopping: n0 must be >= 1");
}

double chi_square_critical(double alpha, int df) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw Error(ErrorCode::Domain, "chi_square_critical: alpha must lie in (0, 1)");
  if (df < 1) throw Error(ErrorCode::Domain, "chi_square_critical: df must be >= 1");

  const double shape = 0.5 * df;
  auto upper_tail_excess = [&](double x) {
    return boost::math::gamma_q(shape, 0.5 * x) - alpha;
  };

  double hi = static_cast<double>(df);
  while (upper_tail_excess(hi) > 0.0) hi *= 2.0;
  const double lo = 0.0;

  auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-10; };
  std::uintmax_t max_iter = 500;
  const auto [left, right] = boost::math::tools::bisect(upper_tail_excess, lo, hi, tol, max_iter);
  return 0.5 * (left + right);
}

double min_eigenvalue(const Mat3& m) {
  const Mat3 sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Mat3> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()[0];
}

StoppingDecision stopping_check(const Mat3& information, long n, const StoppingConfig& cfg) {
  StoppingDecision out;
  out.n = n;
  out.lambda_min = min_eigenvalue(information);
  out.threshold = chi_square_critical(cfg.alpha, 3) / (cfg.d * cfg.d);
  out.stop = n >= cfg.n0 && out.lambda_min >= out.threshold;
  return out;
}

bool ellipsoid_contains(const Gamma& gamma_hat, const Mat3& information, const Gamma& gamma0,
                        double alpha) {
  const Vec3 diff = gamma_hat.vec() - gamma0.vec();
  const double q = diff.dot(information * diff);
  return q <= chi_square_critical(alpha, 3);
}

Mat3 natural_covariance(const Gamma& gamma_hat, const Mat3& information) {
  Eigen::FullPivLU<Mat3> lu(information);
  if (!lu.isInvertible())
    throw Error(ErrorCode::SingularInformation, "information matrix is not invertible");
  const Mat3 cov_gamma = lu.inverse();

  // (a, b, c) = (beta2, -beta1 / beta2, c)
  const double b1 = gamma_hat.beta1;
  const double b2 = gamma_hat.beta2;
  Mat3 t;
  t << 0.0, 1.0, 0.0,
       -1.0 / b2, b1 / (b2 * b2), 0.0,
       0.0, 0.0, 1.0;
  return t * cov_gamma * t.transpose();
}

MarginalCoverage marginal_coverage(const Gamma& gamma_hat, const Mat3& information,
                                   const ItemParams& item_true, double alpha) {
  const Mat3 cov = natural_covariance(gamma_hat, information);
  const double crit = chi_square_critical(alpha, 3);
  const ItemParams est{gamma_hat.beta2, -gamma_hat.beta1 / gamma_hat.beta2, gamma_hat.c};

  auto covered = [&](double e, double t, int j) {
    const double var = cov(j, j);
    if (!(var >= 0.0)) return false;
    return std::abs(e - t) <= std::sqrt(crit * var);
  };
  return {covered(est.a, item_true.a, 0), covered(est.b, item_true.b, 1),
          covered(est.c, item_true.c, 2)};
}

}  // namespace itemcal
