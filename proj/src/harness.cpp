#include "itemcal/harness.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "itemcal/error.hpp"

namespace itemcal {

std::string_view to_string(Strategy s) noexcept {
  switch (s) {
    case Strategy::TwoStage: return "two_stage";
    case Strategy::StrictDOpt: return "strict_dopt";
    case Strategy::Random: return "random";
  }
  return "?";
}

Strategy parse_strategy(std::string_view name) {
  if (name == "two_stage") return Strategy::TwoStage;
  if (name == "strict_dopt") return Strategy::StrictDOpt;
  if (name == "random") return Strategy::Random;
  throw Error(ErrorCode::Config, "unknown strategy '" + std::string(name) +
                                     "' (expected two_stage, strict_dopt or random)");
}

std::vector<ItemParams> default_grid() {
  std::vector<ItemParams> grid;
  for (double a : {0.5, 1.0, 1.5, 2.0})
    for (double b : {-2.0, -1.0, 0.0, 1.0, 2.0}) grid.push_back({a, b, 0.1});
  return grid;
}

void StudyConfig::validate() const {
  if (replications < 1) throw Error(ErrorCode::Config, "replications must be >= 1");
  if (grid.empty()) throw Error(ErrorCode::Config, "item grid is empty");
  stopping.validate();
  design.validate();
  pool.validate();
  fit.validate();
  const ParamBounds& bd = fit.bounds;
  if (!(bd.a_min > 0.0 && bd.a_min < bd.a_max && bd.b_min < bd.b_max && bd.c_min >= 0.0 &&
        bd.c_min < bd.c_max && bd.c_max < 1.0))
    throw Error(ErrorCode::Config, "parameter bounds are inconsistent");
  for (const auto& item : grid) {
    try {
      itemcal::validate(item);
    } catch (const Error& e) {
      throw Error(ErrorCode::Config, std::string("grid: ") + e.what());
    }
  }
  if (design.pool_range.lo != pool.pool_range.lo || design.pool_range.hi != pool.pool_range.hi)
    throw Error(ErrorCode::Config, "design and pool ranges differ");
  if (!(design.theta_c > design.pool_range.lo && design.theta_c <= design.pool_range.hi))
    throw Error(ErrorCode::Config, "theta_c must lie inside the pool range");
  if (max_examinees < design.n_init_ab + design.n_init_c)
    throw Error(ErrorCode::Config, "max_examinees is smaller than the initial sample");
  if (!(c_start >= bd.c_min && c_start <= bd.c_max))
    throw Error(ErrorCode::Config, "c_start must lie inside the c bounds");
  if (!(max_failure_rate >= 0.0 && max_failure_rate <= 1.0))
    throw Error(ErrorCode::Config, "max_failure_rate must lie in [0, 1]");
}

namespace {

class Calibration {
 public:
  Calibration(const ItemParams& item_true, const StudyConfig& cfg, std::uint64_t seed,
              const IterationObserver& observer)
      : item_(item_true), cfg_(cfg), rng_(seed), observer_(observer) {
    result_.item_true = item_true;
    result_.seed = seed;
    result_.threshold = chi_square_critical(cfg.stopping.alpha, 3) / (cfg.stopping.d * cfg.stopping.d);
  }

  CalibrationResult run() {
    switch (cfg_.strategy) {
      case Strategy::TwoStage: start_two_stage(); break;
      case Strategy::StrictDOpt:
      case Strategy::Random: start_comparator(); break;
    }
    iterate();
    finish();
    return result_;
  }

 private:
  void administer(const DesignRequest& req) {
    const auto examinees = recruit(req, state_.next_index, cfg_.pool, rng_);
    auto ex = examinees.begin();
    for (const auto& target : req.targets) {
      for (int k = 0; k < target.count; ++k, ++ex) {
        ResponseRecord r;
        r.obs = {ex->theta_observed, respond(*ex, item_, rng_)};
        r.theta_true = ex->theta_true;
        r.tag = target.tag;
        state_.add(r);
      }
    }
    state_.next_index += static_cast<long>(examinees.size());
  }

  void adopt(const FitResult& fit) {
    last_fit_ = fit;
    have_fit_ = true;
    state_.gamma_hat = fit.gamma;
    state_.estimate = from_gamma(fit.gamma);
    state_.information = fit.information;
  }

  // Returns false when the data cannot support a fit yet.
  bool refit() {
    try {
      adopt(fit_mle(state_.observations, state_.gamma_hat, cfg_.fit));
      return true;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateData) throw;
      have_fit_ = false;
      return false;
    }
  }

  void set_profile_estimate(double c) {
    ItemParams est{1.0, 0.0, c};
    try {
      const FitResult ab = fit_ab_given_c(state_.observations, c, cfg_.fit);
      est = ab.item();
      est.c = c;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateData) throw;
    }
    state_.estimate = est;
    state_.gamma_hat = to_gamma(est);
  }

  // Initial sample: c from low-ability examinees, then (a, b) with c fixed.
  void start_two_stage() {
    const DesignConfig& d = cfg_.design;
    DesignRequest c_req;
    c_req.targets.push_back({Interval{d.pool_range.lo, d.theta_c}, d.n_init_c, BatchTag::InitialC});
    administer(c_req);
    const double c0 = initial_c_estimate(state_.observations, cfg_.fit.bounds.c_max);

    DesignRequest ab_req;
    ab_req.targets.push_back({d.pool_range, d.n_init_ab, BatchTag::InitialAb});
    administer(ab_req);
    set_profile_estimate(std::clamp(c0, cfg_.fit.bounds.c_min, cfg_.fit.bounds.c_max));
  }

  void start_comparator() {
    const DesignConfig& d = cfg_.design;
    const int n = d.comparator_initial_size();
    if (cfg_.strategy == Strategy::Random) {
      administer(random_batch(n, d.random_sd, d.pool_range, rng_));
    } else {
      DesignRequest req;
      req.targets.push_back({d.pool_range, n, BatchTag::InitialAb});
      administer(req);
    }
    set_profile_estimate(cfg_.c_start);
    refit();
  }

  DesignRequest next_request() {
    const DesignConfig& d = cfg_.design;
    switch (cfg_.strategy) {
      case Strategy::TwoStage: {
        DesignRequest req = two_stage_batch(state_, d);
        if (req.c_range_fallback) ++result_.c_fallbacks;
        return req;
      }
      case Strategy::StrictDOpt:
        if (grid_.empty()) grid_ = make_grid(d.pool_range, d.dopt_grid_points);
        return strict_d_optimal_batch(state_, d.dopt_batch, grid_);
      case Strategy::Random:
        return random_batch(d.dopt_batch, d.random_sd, d.pool_range, rng_);
    }
    return {};
  }

  // Design batches until the stopping rule or the examinee cap.
  void iterate() {
    while (state_.size() < cfg_.max_examinees) {
      DesignRequest req = next_request();
      const long room = cfg_.max_examinees - state_.size();
      if (req.total() > room) req = req.truncated(static_cast<int>(room));
      administer(req);
      ++state_.iterations;

      StoppingDecision decision;
      if (refit()) {
        decision = stopping_check(state_.information, state_.size(), cfg_.stopping);
        if (!last_fit_.converged()) decision.stop = false;
      } else {
        decision.n = state_.size();
        decision.threshold = result_.threshold;
      }
      result_.lambda_min = decision.lambda_min;
      if (observer_) observer_(state_, decision);
      if (decision.stop) {
        result_.stopped = true;
        return;
      }
    }
  }

  void finish() {
    if (!have_fit_) refit();
    result_.n_used = state_.size();
    result_.iterations = state_.iterations;
    result_.gamma_hat = state_.gamma_hat;
    result_.estimates = state_.estimate;
    if (!have_fit_) {
      result_.fit_status = FitStatus::NonConvergence;
      return;
    }
    result_.fit_status = last_fit_.status;
    result_.lambda_min = min_eigenvalue(state_.information);
    if (!last_fit_.converged()) return;

    const double alpha = cfg_.stopping.alpha;
    try {
      result_.marginal = marginal_coverage(state_.gamma_hat, state_.information, item_, alpha);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingularInformation) throw;
      result_.fit_status = FitStatus::SingularInformation;
      return;
    }
    result_.joint_covered = ellipsoid_contains(state_.gamma_hat, state_.information, to_gamma(item_), alpha);
    result_.converged = true;
  }

  const ItemParams item_;
  const StudyConfig& cfg_;
  Rng rng_;
  const IterationObserver& observer_;
  CalibrationState state_;
  CalibrationResult result_;
  FitResult last_fit_;
  bool have_fit_ = false;
  std::vector<double> grid_;
};

MeanSd mean_sd(const std::vector<double>& xs) {
  MeanSd out;
  if (xs.empty()) {
    out.mean = out.sd = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  double sum = 0.0;
  for (double x : xs) sum += x;
  out.mean = sum / static_cast<double>(xs.size());
  if (xs.size() < 2) {
    out.sd = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  double ss = 0.0;
  for (double x : xs) ss += (x - out.mean) * (x - out.mean);
  out.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  return out;
}

double mse(const std::vector<double>& xs, double truth) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  double ss = 0.0;
  for (double x : xs) ss += (x - truth) * (x - truth);
  return ss / static_cast<double>(xs.size());
}

}  // namespace

CalibrationResult run_calibration(const ItemParams& item_true, const StudyConfig& cfg,
                                  std::uint64_t seed, const IterationObserver& observer) {
  cfg.validate();
  validate(item_true);
  return Calibration(item_true, cfg, seed, observer).run();
}

McSummary summarize(Strategy strategy, const ItemParams& item_true,
                    std::span<const CalibrationResult> runs) {
  McSummary s;
  s.strategy = strategy;
  s.item_true = item_true;
  s.replications = static_cast<int>(runs.size());

  std::vector<double> as, bs, cs, ns;
  double cov_a = 0, cov_b = 0, cov_c = 0, cov_j = 0;
  for (const auto& r : runs) {
    ns.push_back(static_cast<double>(r.n_used));
    if (!r.stopped) ++s.cap_reached;
    if (!r.converged) {
      ++s.nonconverged;
      continue;
    }
    as.push_back(r.estimates.a);
    bs.push_back(r.estimates.b);
    cs.push_back(r.estimates.c);
    cov_a += r.marginal.a;
    cov_b += r.marginal.b;
    cov_c += r.marginal.c;
    cov_j += r.joint_covered;
  }
  s.included = static_cast<int>(as.size());
  s.a_hat = mean_sd(as);
  s.b_hat = mean_sd(bs);
  s.c_hat = mean_sd(cs);
  s.mse_a = mse(as, item_true.a);
  s.mse_b = mse(bs, item_true.b);
  s.mse_c = mse(cs, item_true.c);
  s.n_used = mean_sd(ns);
  const double inc = s.included > 0 ? s.included : std::numeric_limits<double>::quiet_NaN();
  s.cov_a = cov_a / inc;
  s.cov_b = cov_b / inc;
  s.cov_c = cov_c / inc;
  s.cov_joint = cov_j / inc;
  return s;
}

double MonteCarloOutput::failure_rate() const {
  long total = 0, failed = 0;
  for (const auto& s : summaries) {
    total += s.replications;
    failed += s.nonconverged;
  }
  return total > 0 ? static_cast<double>(failed) / static_cast<double>(total) : 0.0;
}

MonteCarloOutput run_monte_carlo(const StudyConfig& cfg, unsigned threads) {
  cfg.validate();
  const std::size_t cells = cfg.grid.size();
  const std::size_t reps = static_cast<std::size_t>(cfg.replications);

  MonteCarloOutput out;
  out.runs.assign(cells, std::vector<CalibrationResult>(reps));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (std::size_t job = next++; job < cells * reps; job = next++) {
      const std::size_t cell = job / reps;
      const std::size_t rep = job % reps;
      const std::uint64_t seed = derive_seed(cfg.master_seed, cell, rep);
      try {
        out.runs[cell][rep] = run_calibration(cfg.grid[cell], cfg, seed);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::Config || e.code() == ErrorCode::Domain) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = cells * reps;
          return;
        }
        // Numerical failures count against the replication only.
        CalibrationResult& r = out.runs[cell][rep];
        r.item_true = cfg.grid[cell];
        r.seed = seed;
        r.converged = false;
      }
    }
  };

  const unsigned n_threads = std::max(1u, threads);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  for (std::size_t cell = 0; cell < cells; ++cell)
    out.summaries.push_back(summarize(cfg.strategy, cfg.grid[cell], out.runs[cell]));
  return out;
}

}  // namespace itemcal
