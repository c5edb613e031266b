#include "itemcal/simulation.hpp"

#include <algorithm>
#include <cmath>

#include "itemcal/error.hpp"

namespace itemcal {

void PoolConfig::validate() const {
  if (!(pool_range.lo < pool_range.hi)) throw Error(ErrorCode::Config, "pool: empty pool range");
  if (!(error_scale >= 0.0)) throw Error(ErrorCode::Config, "pool: error_scale must be >= 0");
  if (!std::isfinite(error_log_exponent))
    throw Error(ErrorCode::Config, "pool: error_log_exponent must be finite");
}

double measurement_error_sd(long n, const PoolConfig& cfg) {
  if (n < 1) throw Error(ErrorCode::Domain, "measurement_error_sd: index must be >= 1");
  const double m = static_cast<double>(std::max(n, 2L));
  return cfg.error_scale / (std::sqrt(m) * std::pow(std::log(m), cfg.error_log_exponent));
}

std::vector<Examinee> recruit(const DesignRequest& request, long next_index, const PoolConfig& cfg,
                              Rng& rng) {
  std::vector<Examinee> out;
  out.reserve(static_cast<std::size_t>(request.total()));
  long index = next_index;
  for (const DesignTarget& target : request.targets) {
    for (int k = 0; k < target.count; ++k) {
      Examinee e;
      e.index = index++;
      if (const auto* point = std::get_if<double>(&target.where)) {
        e.theta_observed = *point;
      } else {
        const Interval& r = std::get<Interval>(target.where);
        e.theta_observed = r.lo < r.hi ? rng.uniform(r.lo, r.hi) : r.lo;
      }
      const double sd = measurement_error_sd(e.index, cfg);
      const double noise = sd > 0.0 ? rng.normal(0.0, sd) : 0.0;
      e.theta_true = cfg.pool_range.clamp(e.theta_observed - noise);
      out.push_back(e);
    }
  }
  return out;
}

int respond(const Examinee& e, const ItemParams& item_true, Rng& rng) {
  return rng.bernoulli(icc(e.theta_true, item_true)) ? 1 : 0;
}

}  // namespace itemcal
