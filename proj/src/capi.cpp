#include "itemcal/itemcal.h"

#include <cstring>
#include <exception>
#include <new>
#include <optional>
#include <string>

#include "itemcal/config_file.hpp"
#include "itemcal/curves.hpp"
#include "itemcal/design.hpp"
#include "itemcal/error.hpp"
#include "itemcal/harness.hpp"
#include "itemcal/report.hpp"
#include "itemcal/sequential.hpp"

struct itemcal_config {
  itemcal::StudyConfig cfg;
};

struct itemcal_study {
  itemcal::Strategy strategy;
  itemcal::MonteCarloOutput output;
};

namespace {

thread_local std::string g_last_error;

itemcal_status map_code(itemcal::ErrorCode code) {
  using itemcal::ErrorCode;
  switch (code) {
    case ErrorCode::Domain: return ITEMCAL_E_DOMAIN;
    case ErrorCode::Config: return ITEMCAL_E_CONFIG;
    case ErrorCode::Io: return ITEMCAL_E_IO;
    case ErrorCode::NonConvergence: return ITEMCAL_E_NONCONVERGENCE;
    case ErrorCode::DegenerateData: return ITEMCAL_E_DEGENERATE_DATA;
    case ErrorCode::SingularInformation: return ITEMCAL_E_SINGULAR_INFORMATION;
  }
  return ITEMCAL_E_INTERNAL;
}

itemcal_status fail(itemcal_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

template <class F>
itemcal_status guarded(F&& body) {
  try {
    g_last_error.clear();
    return body();
  } catch (const itemcal::Error& e) {
    return fail(map_code(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(ITEMCAL_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(ITEMCAL_E_INTERNAL, e.what());
  } catch (...) {
    return fail(ITEMCAL_E_INTERNAL, "unknown exception");
  }
}

itemcal::ItemParams to_cpp(const itemcal_item& it) { return {it.a, it.b, it.c}; }
itemcal_item to_c(const itemcal::ItemParams& it) { return {it.a, it.b, it.c}; }

itemcal::Strategy to_cpp(itemcal_strategy s) {
  switch (s) {
    case ITEMCAL_TWO_STAGE: return itemcal::Strategy::TwoStage;
    case ITEMCAL_STRICT_DOPT: return itemcal::Strategy::StrictDOpt;
    case ITEMCAL_RANDOM: return itemcal::Strategy::Random;
  }
  throw itemcal::Error(itemcal::ErrorCode::Config, "invalid strategy value");
}

itemcal_strategy to_c(itemcal::Strategy s) {
  switch (s) {
    case itemcal::Strategy::TwoStage: return ITEMCAL_TWO_STAGE;
    case itemcal::Strategy::StrictDOpt: return ITEMCAL_STRICT_DOPT;
    case itemcal::Strategy::Random: return ITEMCAL_RANDOM;
  }
  return ITEMCAL_TWO_STAGE;
}

#define ITEMCAL_REQUIRE(ptr)                                                     \
  do {                                                                           \
    if ((ptr) == nullptr) return fail(ITEMCAL_E_INVALID_ARGUMENT, #ptr " is null"); \
  } while (0)

}  // namespace

extern "C" {

const char* itemcal_version(void) { return ITEMCAL_VERSION_STRING; }

const char* itemcal_status_string(itemcal_status status) {
  switch (status) {
    case ITEMCAL_OK: return "ok";
    case ITEMCAL_E_INVALID_ARGUMENT: return "invalid argument";
    case ITEMCAL_E_DOMAIN: return "domain error";
    case ITEMCAL_E_CONFIG: return "config error";
    case ITEMCAL_E_IO: return "I/O error";
    case ITEMCAL_E_NONCONVERGENCE: return "non-convergence";
    case ITEMCAL_E_DEGENERATE_DATA: return "degenerate data";
    case ITEMCAL_E_SINGULAR_INFORMATION: return "singular information";
    case ITEMCAL_E_FAILURE_RATE: return "failure rate exceeded";
    case ITEMCAL_E_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* itemcal_last_error(void) { return g_last_error.c_str(); }

itemcal_status itemcal_config_create(itemcal_config** out) {
  ITEMCAL_REQUIRE(out);
  return guarded([&] {
    *out = new itemcal_config{};
    return ITEMCAL_OK;
  });
}

itemcal_status itemcal_config_load(const char* path, itemcal_config** out) {
  ITEMCAL_REQUIRE(path);
  ITEMCAL_REQUIRE(out);
  return guarded([&] {
    auto cfg = itemcal::load_study_config(path);
    *out = new itemcal_config{std::move(cfg)};
    return ITEMCAL_OK;
  });
}

itemcal_status itemcal_config_set(itemcal_config* cfg, const char* key, const char* value) {
  ITEMCAL_REQUIRE(cfg);
  ITEMCAL_REQUIRE(key);
  ITEMCAL_REQUIRE(value);
  return guarded([&] {
    itemcal::apply_setting(cfg->cfg, key, value);
    return ITEMCAL_OK;
  });
}

itemcal_status itemcal_config_validate(const itemcal_config* cfg) {
  ITEMCAL_REQUIRE(cfg);
  return guarded([&] {
    cfg->cfg.validate();
    return ITEMCAL_OK;
  });
}

double itemcal_config_max_failure_rate(const itemcal_config* cfg) {
  return cfg ? cfg->cfg.max_failure_rate : 0.0;
}

itemcal_status itemcal_config_format(const itemcal_config* cfg, char* buf, size_t buf_size,
                                     size_t* needed) {
  ITEMCAL_REQUIRE(cfg);
  return guarded([&] {
    const std::string text = itemcal::format_study_config(cfg->cfg);
    if (needed) *needed = text.size() + 1;
    if (buf && buf_size > 0) {
      const size_t n = std::min(buf_size - 1, text.size());
      std::memcpy(buf, text.data(), n);
      buf[n] = '\0';
    }
    return ITEMCAL_OK;
  });
}

void itemcal_config_destroy(itemcal_config* cfg) { delete cfg; }

itemcal_status itemcal_run_calibration(const itemcal_config* cfg, itemcal_item truth, uint64_t seed,
                                       itemcal_calibration_result* out) {
  ITEMCAL_REQUIRE(cfg);
  ITEMCAL_REQUIRE(out);
  return guarded([&] {
    const auto r = itemcal::run_calibration(to_cpp(truth), cfg->cfg, seed);
    itemcal_calibration_result c{};
    c.truth = to_c(r.item_true);
    c.estimate = to_c(r.estimates);
    c.beta1 = r.gamma_hat.beta1;
    c.beta2 = r.gamma_hat.beta2;
    c.gamma_c = r.gamma_hat.c;
    c.n_used = r.n_used;
    c.stopped = r.stopped;
    c.converged = r.converged;
    c.joint_covered = r.joint_covered;
    c.covered_a = r.marginal.a;
    c.covered_b = r.marginal.b;
    c.covered_c = r.marginal.c;
    c.iterations = r.iterations;
    c.c_fallbacks = r.c_fallbacks;
    c.lambda_min = r.lambda_min;
    c.threshold = r.threshold;
    c.seed = r.seed;
    *out = c;
    return ITEMCAL_OK;
  });
}

itemcal_status itemcal_run_study(const itemcal_config* cfg, unsigned threads, itemcal_study** out) {
  ITEMCAL_REQUIRE(cfg);
  ITEMCAL_REQUIRE(out);
  return guarded([&] {
    auto output = itemcal::run_monte_carlo(cfg->cfg, threads);
    *out = new itemcal_study{cfg->cfg.strategy, std::move(output)};
    return ITEMCAL_OK;
  });
}

size_t itemcal_study_cell_count(const itemcal_study* study) {
  return study ? study->output.summaries.size() : 0;
}

itemcal_status itemcal_study_cell(const itemcal_study* study, size_t index, itemcal_cell_summary* out) {
  ITEMCAL_REQUIRE(study);
  ITEMCAL_REQUIRE(out);
  if (index >= study->output.summaries.size())
    return fail(ITEMCAL_E_INVALID_ARGUMENT, "cell index out of range");
  const auto& s = study->output.summaries[index];
  itemcal_cell_summary c{};
  c.strategy = to_c(s.strategy);
  c.truth = to_c(s.item_true);
  c.replications = s.replications;
  c.included = s.included;
  c.nonconverged = s.nonconverged;
  c.cap_reached = s.cap_reached;
  c.a_mean = s.a_hat.mean;
  c.a_sd = s.a_hat.sd;
  c.b_mean = s.b_hat.mean;
  c.b_sd = s.b_hat.sd;
  c.c_mean = s.c_hat.mean;
  c.c_sd = s.c_hat.sd;
  c.mse_a = s.mse_a;
  c.mse_b = s.mse_b;
  c.mse_c = s.mse_c;
  c.n_mean = s.n_used.mean;
  c.n_sd = s.n_used.sd;
  c.cov_a = s.cov_a;
  c.cov_b = s.cov_b;
  c.cov_c = s.cov_c;
  c.cov_joint = s.cov_joint;
  *out = c;
  g_last_error.clear();
  return ITEMCAL_OK;
}

double itemcal_study_failure_rate(const itemcal_study* study) {
  return study ? study->output.failure_rate() : 0.0;
}

itemcal_status itemcal_study_write(const itemcal_study* study, const char* dir) {
  ITEMCAL_REQUIRE(study);
  ITEMCAL_REQUIRE(dir);
  return guarded([&] {
    itemcal::write_study_outputs(study->output.summaries, study->strategy, dir);
    return ITEMCAL_OK;
  });
}

void itemcal_study_destroy(itemcal_study* study) { delete study; }

itemcal_status itemcal_write_manifest(const itemcal_config* cfg, const itemcal_strategy* strategies,
                                      size_t count, const char* dir) {
  ITEMCAL_REQUIRE(cfg);
  ITEMCAL_REQUIRE(dir);
  if (count > 0) ITEMCAL_REQUIRE(strategies);
  return guarded([&] {
    std::vector<itemcal::Strategy> list;
    for (size_t i = 0; i < count; ++i) list.push_back(to_cpp(strategies[i]));
    itemcal::write_manifest(cfg->cfg, list, dir);
    return ITEMCAL_OK;
  });
}

itemcal_status itemcal_report(const char* in_dir, const char* baseline_dir, const char* out_dir) {
  ITEMCAL_REQUIRE(in_dir);
  ITEMCAL_REQUIRE(out_dir);
  return guarded([&] {
    std::optional<std::string> baseline;
    if (baseline_dir) baseline = baseline_dir;
    itemcal::report(in_dir, baseline, out_dir);
    return ITEMCAL_OK;
  });
}

itemcal_status itemcal_emit_curves(const itemcal_item* items, size_t count, double theta_min,
                                   double theta_max, double step, const char* out_path) {
  ITEMCAL_REQUIRE(items);
  ITEMCAL_REQUIRE(out_path);
  return guarded([&] {
    std::vector<itemcal::ItemParams> list;
    for (size_t i = 0; i < count; ++i) list.push_back(to_cpp(items[i]));
    itemcal::write_curves_csv(itemcal::emit_curves(list, theta_min, theta_max, step), out_path);
    return ITEMCAL_OK;
  });
}

itemcal_status itemcal_icc(double theta, itemcal_item item, double* out) {
  ITEMCAL_REQUIRE(out);
  return guarded([&] {
    *out = itemcal::icc(theta, to_cpp(item));
    return ITEMCAL_OK;
  });
}

itemcal_status itemcal_chi_square_critical(double alpha, int df, double* out) {
  ITEMCAL_REQUIRE(out);
  return guarded([&] {
    *out = itemcal::chi_square_critical(alpha, df);
    return ITEMCAL_OK;
  });
}

itemcal_status itemcal_theta_lower_bound(itemcal_item estimate, double p0, double* out) {
  ITEMCAL_REQUIRE(out);
  return guarded([&] {
    *out = itemcal::theta_lower_bound(to_cpp(estimate), p0);
    return ITEMCAL_OK;
  });
}

itemcal_status itemcal_d_optimal_pair(itemcal_item estimate, double* low, double* high) {
  ITEMCAL_REQUIRE(low);
  ITEMCAL_REQUIRE(high);
  return guarded([&] {
    const auto [lo, hi] = itemcal::d_optimal_pair(to_cpp(estimate));
    *low = lo;
    *high = hi;
    return ITEMCAL_OK;
  });
}

itemcal_status itemcal_parse_strategy(const char* name, itemcal_strategy* out) {
  ITEMCAL_REQUIRE(name);
  ITEMCAL_REQUIRE(out);
  return guarded([&] {
    *out = to_c(itemcal::parse_strategy(name));
    return ITEMCAL_OK;
  });
}

}  // extern "C"
