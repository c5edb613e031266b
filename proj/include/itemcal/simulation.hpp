#pragma once

// Synthetic examinee pool with the decaying measurement-error schedule.

#include <cstdint>
#include <vector>

#include "itemcal/design.hpp"

namespace itemcal {

struct PoolConfig {
  Interval pool_range{-3.6, 3.6};
  double error_scale = 0.5;
  double error_log_exponent = 1.1;

  void validate() const;
};

struct Examinee {
  double theta_observed = 0.0;
  double theta_true = 0.0;
  long index = 0;  // recruitment order within the run, starting at 1
};

/// error_scale / (sqrt(m) * log(m)^exponent) with m = max(n, 2).
double measurement_error_sd(long n, const PoolConfig& cfg);

/// Places one examinee per requested slot. The observed trait is the target
/// (or a uniform draw inside the target range); the true trait is the
/// observed one minus N(0, sd(index)^2) noise, clamped to the pool.
std::vector<Examinee> recruit(const DesignRequest& request, long next_index, const PoolConfig& cfg,
                              Rng& rng);

/// Draws a response at the examinee's true trait.
int respond(const Examinee& e, const ItemParams& item_true, Rng& rng);

}  // namespace itemcal
