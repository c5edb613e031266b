#include "itemcal/estimation.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "itemcal/error.hpp"

namespace itemcal {

void FitOptions::validate() const {
  if (max_iter < 1) throw Error(ErrorCode::Config, "fit: max_iter must be >= 1");
  if (!(grad_tol > 0.0) || !(step_tol > 0.0))
    throw Error(ErrorCode::Config, "fit: tolerances must be > 0");
}

const char* to_string(FitStatus s) noexcept {
  switch (s) {
    case FitStatus::Converged: return "converged";
    case FitStatus::NonConvergence: return "non-convergence";
    case FitStatus::SingularInformation: return "singular-information";
  }
  return "?";
}

double initial_c_estimate(std::span<const Observation> data, double c_max) {
  if (data.empty()) throw Error(ErrorCode::DegenerateData, "initial_c_estimate: no responses");
  double correct = 0.0;
  for (const auto& o : data) correct += o.y;
  return std::clamp(correct / static_cast<double>(data.size()), 0.001, c_max);
}

namespace {

using Mask = std::array<bool, 3>;

void check_data(std::span<const Observation> data, std::size_t min_distinct, const char* who) {
  std::vector<double> distinct;
  long ones = 0;
  for (const auto& o : data) {
    if (distinct.size() < min_distinct &&
        std::find(distinct.begin(), distinct.end(), o.theta) == distinct.end())
      distinct.push_back(o.theta);
    ones += o.y;
  }
  const long n = static_cast<long>(data.size());
  if (ones == 0 || ones == n)
    throw Error(ErrorCode::DegenerateData, std::string(who) + ": responses are all equal");
  if (distinct.size() < min_distinct)
    throw Error(ErrorCode::DegenerateData, std::string(who) + ": too few distinct traits");
}

struct Projected {
  Gamma g;
  bool clamped = false;
};

// Clamps in natural coordinates, then maps back.
Projected project(const Vec3& v, const ParamBounds& bounds) {
  Projected out;
  const double a = std::clamp(v[1], bounds.a_min, bounds.a_max);
  const double b_raw = -v[0] / std::max(v[1], bounds.a_min);
  const double b = std::clamp(b_raw, bounds.b_min, bounds.b_max);
  const double c = std::clamp(v[2], bounds.c_min, bounds.c_max);
  out.clamped = a != v[1] || b != b_raw || c != v[2];
  out.g = {-a * b, a, c};
  return out;
}

bool at_bound(const Gamma& g, const ParamBounds& bounds) {
  const double b = -g.beta1 / g.beta2;
  return g.beta2 <= bounds.a_min || g.beta2 >= bounds.a_max || b <= bounds.b_min ||
         b >= bounds.b_max || g.c <= bounds.c_min || g.c >= bounds.c_max;
}

// Coordinates sitting on a bound with the score pushing outward are held
// fixed for the current iteration. Only a (beta2) and c map one-to-one onto
// gamma coordinates; a bound on b is handled by projection.
Mask active_free(const Mask& free, const Gamma& g, const Vec3& score, const ParamBounds& bounds) {
  Mask out = free;
  if (out[1] && ((g.beta2 <= bounds.a_min && score[1] < 0) || (g.beta2 >= bounds.a_max && score[1] > 0)))
    out[1] = false;
  if (out[2] && ((g.c <= bounds.c_min && score[2] < 0) || (g.c >= bounds.c_max && score[2] > 0)))
    out[2] = false;
  return out;
}

double masked_inf_norm(const Vec3& v, const Mask& m) {
  double r = 0.0;
  for (int i = 0; i < 3; ++i)
    if (m[static_cast<std::size_t>(i)]) r = std::max(r, std::abs(v[i]));
  return r;
}

// Newton (or scaled gradient when the restricted information is not positive
// definite) direction on the free coordinates; zeros elsewhere.
Vec3 direction(const LikelihoodTerms& t, const Mask& free, bool newton, bool* used_newton) {
  std::vector<int> idx;
  for (int i = 0; i < 3; ++i)
    if (free[static_cast<std::size_t>(i)]) idx.push_back(i);
  const int k = static_cast<int>(idx.size());
  Eigen::MatrixXd h(k, k);
  Eigen::VectorXd g(k);
  for (int r = 0; r < k; ++r) {
    g[r] = t.score[idx[static_cast<std::size_t>(r)]];
    for (int c = 0; c < k; ++c)
      h(r, c) = t.information(idx[static_cast<std::size_t>(r)], idx[static_cast<std::size_t>(c)]);
  }

  Eigen::VectorXd step;
  *used_newton = false;
  if (newton) {
    Eigen::LLT<Eigen::MatrixXd> llt(h);
    if (llt.info() == Eigen::Success) {
      step = llt.solve(g);
      *used_newton = step.allFinite();
    }
  }
  if (!*used_newton) {
    double scale = 0.0;
    for (int r = 0; r < k; ++r) scale = std::max(scale, std::abs(h(r, r)));
    step = g / std::max(scale, 1.0);
  }

  Vec3 out = Vec3::Zero();
  for (int r = 0; r < k; ++r) out[idx[static_cast<std::size_t>(r)]] = step[r];
  return out;
}

FitResult newton_ascent(std::span<const Observation> data, const Gamma& init, const FitOptions& opts,
                        const Mask& free) {
  opts.validate();
  const double n = static_cast<double>(data.size());
  const double grad_tol = opts.grad_tol * std::max(n, 1.0);

  FitResult res;
  res.gamma = project(init.vec(), opts.bounds).g;
  LikelihoodTerms cur = likelihood_terms(res.gamma, data);
  res.trace.push_back(cur.log_likelihood);

  bool done = false;
  for (int iter = 0; iter < opts.max_iter && !done; ++iter) {
    res.iterations = iter + 1;
    const Mask act = active_free(free, res.gamma, cur.score, opts.bounds);
    if (masked_inf_norm(cur.score, act) <= grad_tol) {
      res.status = FitStatus::Converged;
      done = true;
      break;
    }

    bool accepted = false;
    bool newton_small = false;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      bool used_newton = false;
      const Vec3 dir = direction(cur, act, attempt == 0, &used_newton);
      if (attempt == 1 && used_newton) break;
      const double scale = 1.0 + res.gamma.vec().cwiseAbs().maxCoeff();
      if (used_newton && dir.cwiseAbs().maxCoeff() <= opts.step_tol * scale) newton_small = true;

      double t = 1.0;
      for (int h = 0; h <= opts.max_halvings; ++h, t *= 0.5) {
        const Projected cand = project(res.gamma.vec() + t * dir, opts.bounds);
        if ((cand.g.vec() - res.gamma.vec()).cwiseAbs().maxCoeff() <= opts.step_tol * scale) {
          break;
        }
        LikelihoodTerms next = likelihood_terms(cand.g, data);
        if (next.log_likelihood >= cur.log_likelihood) {
          res.gamma = cand.g;
          cur = std::move(next);
          res.trace.push_back(cur.log_likelihood);
          accepted = true;
          break;
        }
      }
      if (!used_newton) break;
    }

    if (!accepted) {
      // No representable ascent: either a bound holds the iterate or the
      // Newton step has shrunk below step_tol.
      if (newton_small || at_bound(res.gamma, opts.bounds)) {
        res.status = FitStatus::Converged;
      } else {
        const Vec3 dir = [&] {
          bool dummy = false;
          return direction(cur, act, true, &dummy);
        }();
        const double predicted = cur.score.dot(dir);
        res.status = predicted <= 1e-12 * (1.0 + std::abs(cur.log_likelihood))
                         ? FitStatus::Converged
                         : FitStatus::NonConvergence;
      }
      done = true;
    }
  }
  if (!done) res.status = FitStatus::NonConvergence;

  res.log_likelihood = cur.log_likelihood;
  res.score = cur.score;
  res.information = cur.information;
  res.bound_active = at_bound(res.gamma, opts.bounds);

  if (res.status == FitStatus::Converged) {
    Mat3 sub = Mat3::Identity();
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        if (free[static_cast<std::size_t>(r)] && free[static_cast<std::size_t>(c)])
          sub(r, c) = cur.information(r, c);
    Eigen::FullPivLU<Mat3> lu(sub);
    if (!lu.isInvertible() || !sub.allFinite()) res.status = FitStatus::SingularInformation;
  }
  return res;
}

}  // namespace

FitResult fit_ab_given_c(std::span<const Observation> data, double c_fixed, const FitOptions& opts) {
  check_data(data, 2, "fit_ab_given_c");
  if (!(c_fixed >= 0.0 && c_fixed < 1.0))
    throw Error(ErrorCode::Domain, "fit_ab_given_c: c must lie in [0, 1)");
  FitOptions local = opts;
  local.bounds.c_min = std::min(local.bounds.c_min, c_fixed);
  local.bounds.c_max = std::max(local.bounds.c_max, c_fixed);
  return newton_ascent(data, Gamma{0.0, 1.0, c_fixed}, local, {true, true, false});
}

FitResult fit_mle(std::span<const Observation> data, const Gamma& init, const FitOptions& opts) {
  check_data(data, 3, "fit_mle");
  return newton_ascent(data, init, opts, {true, true, true});
}

}  // namespace itemcal
