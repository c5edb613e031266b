#include "itemcal/design.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>

#include "itemcal/error.hpp"

namespace itemcal {

namespace {
constexpr double kLowerQuantile = 0.176;
constexpr double kUpperQuantile = 0.824;
constexpr double kFallbackWidth = 0.5;
}  // namespace

int DesignRequest::total() const {
  int n = 0;
  for (const auto& t : targets) n += t.count;
  return n;
}

DesignRequest DesignRequest::truncated(int n) const {
  DesignRequest out;
  out.c_range_fallback = c_range_fallback;
  for (const auto& t : targets) {
    if (n <= 0) break;
    DesignTarget kept = t;
    kept.count = std::min(t.count, n);
    n -= kept.count;
    out.targets.push_back(kept);
  }
  return out;
}

void DesignConfig::validate() const {
  if (!(p0 > 0.5 && p0 < 1.0)) throw Error(ErrorCode::Config, "design: p0 must lie in (0.5, 1)");
  if (!(pool_range.lo < pool_range.hi)) throw Error(ErrorCode::Config, "design: empty pool range");
  if (n_init_ab < 1 || n_init_c < 1 || batch_ab < 1 || batch_c < 1 || dopt_batch < 1)
    throw Error(ErrorCode::Config, "design: sample and batch sizes must be >= 1");
  if (dopt_grid_points < 2) throw Error(ErrorCode::Config, "design: D-optimal grid needs >= 2 points");
  if (!(random_sd > 0.0)) throw Error(ErrorCode::Config, "design: random_sd must be > 0");
}

double theta_lower_bound(const ItemParams& item_est, double p0) {
  validate(item_est);
  if (!(p0 > item_est.c) || !(p0 < 1.0))
    throw Error(ErrorCode::Domain, "theta_lower_bound: requires c < p0 < 1");
  return item_est.b - std::log((p0 - item_est.c) / (1.0 - p0)) / item_est.a;
}

double d_optimal_offset() { return std::log(kUpperQuantile / kLowerQuantile); }

std::pair<double, double> d_optimal_pair(const ItemParams& item_est) {
  validate(item_est);
  const double half = d_optimal_offset() / item_est.a;
  return {item_est.b - half, item_est.b + half};
}

DesignRequest two_stage_batch(const CalibrationState& state, const DesignConfig& cfg) {
  const Interval& pool = cfg.pool_range;
  DesignRequest req;

  const double theta_l = theta_lower_bound(state.estimate, cfg.p0);
  Interval c_range{pool.lo, std::min(theta_l, pool.hi)};
  if (theta_l <= pool.lo) {
    c_range = {pool.lo, std::min(pool.lo + kFallbackWidth, pool.hi)};
    req.c_range_fallback = true;
  }
  req.targets.push_back({c_range, cfg.batch_c, BatchTag::CBatch});

  const auto [low, high] = d_optimal_pair(state.estimate);
  const int n_low = (cfg.batch_ab + 1) / 2;
  const int n_high = cfg.batch_ab - n_low;
  req.targets.push_back({pool.clamp(low), n_low, BatchTag::AbBatch});
  if (n_high > 0) req.targets.push_back({pool.clamp(high), n_high, BatchTag::AbBatch});
  return req;
}

std::vector<double> make_grid(const Interval& range, int points) {
  std::vector<double> grid(static_cast<std::size_t>(points));
  const double step = (range.hi - range.lo) / (points - 1);
  for (int i = 0; i < points; ++i) grid[static_cast<std::size_t>(i)] = range.lo + step * i;
  grid.back() = range.hi;
  return grid;
}

DesignRequest strict_d_optimal_batch(const CalibrationState& state, int batch_size,
                                     std::span<const double> grid) {
  if (grid.empty()) throw Error(ErrorCode::Domain, "strict_d_optimal_batch: empty grid");
  DesignRequest req;
  Mat3 running = 0.5 * (state.information + state.information.transpose());

  std::vector<Mat3> point_info;
  point_info.reserve(grid.size());
  for (double t : grid) point_info.push_back(fisher_information_point(state.gamma_hat, t));

  for (int k = 0; k < batch_size; ++k) {
    std::size_t best = 0;
    double best_det = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double det = (running + point_info[i]).determinant();
      if (det > best_det) {
        best_det = det;
        best = i;
      }
    }
    running += point_info[best];
    req.targets.push_back({grid[best], 1, BatchTag::DOpt});
  }
  return req;
}

DesignRequest random_batch(int batch_size, double sd, const Interval& pool_range, Rng& rng) {
  if (!(sd > 0.0)) throw Error(ErrorCode::Domain, "random_batch: sd must be > 0");
  DesignRequest req;
  req.targets.reserve(static_cast<std::size_t>(batch_size));
  for (int k = 0; k < batch_size; ++k) {
    double t;
    do {
      t = rng.normal(0.0, sd);
    } while (!pool_range.contains(t));
    req.targets.push_back({t, 1, BatchTag::Random});
  }
  return req;
}

}  // namespace itemcal
