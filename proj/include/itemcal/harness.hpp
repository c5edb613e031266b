#pragma once

// End-to-end calibration runs for the three selection strategies and the
// Monte Carlo study that aggregates them over a grid of items.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "itemcal/design.hpp"
#include "itemcal/estimation.hpp"
#include "itemcal/sequential.hpp"
#include "itemcal/simulation.hpp"

namespace itemcal {

enum class Strategy { TwoStage, StrictDOpt, Random };

std::string_view to_string(Strategy s) noexcept;
/// Accepts "two_stage", "strict_dopt" and "random". Throws Error(Config).
Strategy parse_strategy(std::string_view name);

/// a in {0.5, 1, 1.5, 2} x b in {-2, ..., 2} with c = 0.1, a-major.
std::vector<ItemParams> default_grid();

struct StudyConfig {
  Strategy strategy = Strategy::TwoStage;
  std::vector<ItemParams> grid = default_grid();
  int replications = 200;
  StoppingConfig stopping{0.5, 0.05, 110};
  DesignConfig design;
  PoolConfig pool;
  FitOptions fit;
  long max_examinees = 50000;
  std::uint64_t master_seed = 1;
  double c_start = 0.2;  // starting guess for c when the c-only step is skipped
  double max_failure_rate = 0.05;

  void validate() const;
  /// Pool range is shared between design and pool settings.
  void set_pool_range(const Interval& r) {
    design.pool_range = r;
    pool.pool_range = r;
  }
};

struct CalibrationResult {
  ItemParams item_true;
  ItemParams estimates;
  Gamma gamma_hat;
  long n_used = 0;
  bool stopped = false;
  bool converged = false;  // final fit converged with an invertible information matrix
  FitStatus fit_status = FitStatus::NonConvergence;
  bool joint_covered = false;
  MarginalCoverage marginal;
  std::uint64_t seed = 0;
  int iterations = 0;
  int c_fallbacks = 0;  // batches whose c-range was replaced by the pool-floor fallback
  double lambda_min = 0.0;
  double threshold = 0.0;
};

/// Called after every design iteration with the state and the stopping
/// decision taken on it.
using IterationObserver = std::function<void(const CalibrationState&, const StoppingDecision&)>;

CalibrationResult run_calibration(const ItemParams& item_true, const StudyConfig& cfg,
                                  std::uint64_t seed, const IterationObserver& observer = {});

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;  // sample SD; NaN with fewer than two values
};

struct McSummary {
  Strategy strategy = Strategy::TwoStage;
  ItemParams item_true;
  int replications = 0;
  int included = 0;  // converged runs entering estimate and coverage aggregates
  int nonconverged = 0;
  int cap_reached = 0;
  MeanSd a_hat, b_hat, c_hat;
  double mse_a = 0.0, mse_b = 0.0, mse_c = 0.0;
  MeanSd n_used;  // over all runs
  double cov_a = 0.0, cov_b = 0.0, cov_c = 0.0, cov_joint = 0.0;
};

McSummary summarize(Strategy strategy, const ItemParams& item_true,
                    std::span<const CalibrationResult> runs);

struct MonteCarloOutput {
  std::vector<McSummary> summaries;                  // one per grid cell
  std::vector<std::vector<CalibrationResult>> runs;  // [cell][replication]

  double failure_rate() const;
};

/// Runs cfg.replications calibrations per grid cell with cfg.strategy.
/// Replication r of cell k is seeded with derive_seed(master_seed, k, r), so
/// output is identical for every thread count.
MonteCarloOutput run_monte_carlo(const StudyConfig& cfg, unsigned threads = 1);

}  // namespace itemcal
