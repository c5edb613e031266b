#pragma once

// Examinee selection: the two-stage design (a low-ability batch for the
// guessing parameter plus a D-optimal pair for discrimination/difficulty),
// the greedy strict D-optimal comparator and the random-design comparator.

#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "itemcal/irt_model.hpp"
#include "itemcal/rng.hpp"

namespace itemcal {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double clamp(double x) const { return x < lo ? lo : (x > hi ? hi : x); }
  bool contains(double x) const { return x >= lo && x <= hi; }
};

/// A single trait value or a range to draw uniformly from, `count` times.
struct DesignTarget {
  std::variant<double, Interval> where;
  int count = 1;
  BatchTag tag = BatchTag::AbBatch;
};

struct DesignRequest {
  std::vector<DesignTarget> targets;
  bool c_range_fallback = false;  // the c-range fell below the pool and was replaced

  int total() const;
  /// Keeps the first `n` examinees of the request.
  DesignRequest truncated(int n) const;
};

struct DesignConfig {
  double p0 = 0.99;
  double theta_c = -2.0;
  Interval pool_range{-3.6, 3.6};
  int n_init_ab = 100;
  int n_init_c = 10;
  int batch_ab = 10;
  int batch_c = 5;
  int dopt_batch = 15;
  int dopt_grid_points = 721;
  double random_sd = 1.16;

  void validate() const;
  /// Initial sample of the comparators, which skip the guessing-parameter step.
  int comparator_initial_size() const { return n_init_ab + n_init_c; }
};

/// Everything accumulated during one calibration run.
struct CalibrationState {
  std::vector<ResponseRecord> records;
  std::vector<Observation> observations;  // mirrors records; the estimators' view
  ItemParams estimate;
  Gamma gamma_hat;
  Mat3 information = Mat3::Zero();
  int iterations = 0;
  long next_index = 1;

  void add(const ResponseRecord& r) {
    records.push_back(r);
    observations.push_back(r.obs);
  }
  long size() const { return static_cast<long>(records.size()); }
};

/// Trait below which the item is answered correctly with probability at most
/// c + (1 - p0): b - log((p0 - c) / (1 - p0)) / a.
double theta_lower_bound(const ItemParams& item_est, double p0);

/// Traits where G hits the 17.6% and 82.4% logistic quantiles.
std::pair<double, double> d_optimal_pair(const ItemParams& item_est);

/// Logit of the upper D-optimal quantile, log(0.824 / 0.176).
double d_optimal_offset();

DesignRequest two_stage_batch(const CalibrationState& state, const DesignConfig& cfg);

/// Greedy batch maximizing det(J + sum of single-point informations).
DesignRequest strict_d_optimal_batch(const CalibrationState& state, int batch_size,
                                     std::span<const double> grid);

/// `points` equispaced traits covering `range` inclusive.
std::vector<double> make_grid(const Interval& range, int points);

DesignRequest random_batch(int batch_size, double sd, const Interval& pool_range, Rng& rng);

}  // namespace itemcal
