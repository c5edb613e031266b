/*
 * itemcal: sequential calibration of three-parameter logistic test items.
 *
 * C interface to the calibration library. All functions return an
 * itemcal_status; on failure itemcal_last_error() describes the problem for
 * the calling thread. Handles are opaque and must be released with their
 * matching _destroy function.
 */
#ifndef ITEMCAL_ITEMCAL_H_
#define ITEMCAL_ITEMCAL_H_

#include <stddef.h>
#include <stdint.h>

#if defined(ITEMCAL_BUILDING_LIBRARY)
#define ITEMCAL_API __attribute__((visibility("default")))
#else
#define ITEMCAL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum itemcal_status {
  ITEMCAL_OK = 0,
  ITEMCAL_E_INVALID_ARGUMENT = 1, /* null handle/pointer or bad enum value */
  ITEMCAL_E_DOMAIN = 2,           /* parameters outside the model's domain */
  ITEMCAL_E_CONFIG = 3,           /* bad configuration key or value */
  ITEMCAL_E_IO = 4,
  ITEMCAL_E_NONCONVERGENCE = 5,
  ITEMCAL_E_DEGENERATE_DATA = 6,
  ITEMCAL_E_SINGULAR_INFORMATION = 7,
  ITEMCAL_E_FAILURE_RATE = 8, /* study finished but too many replications failed */
  ITEMCAL_E_INTERNAL = 99
} itemcal_status;

typedef enum itemcal_strategy {
  ITEMCAL_TWO_STAGE = 0,
  ITEMCAL_STRICT_DOPT = 1,
  ITEMCAL_RANDOM = 2
} itemcal_strategy;

typedef struct itemcal_item {
  double a; /* discrimination, > 0 */
  double b; /* difficulty */
  double c; /* guessing, in [0, 1) */
} itemcal_item;

typedef struct itemcal_calibration_result {
  itemcal_item truth;
  itemcal_item estimate;
  double beta1, beta2, gamma_c; /* estimate as (-a b, a, c) */
  int64_t n_used;
  int stopped;   /* stopping rule met before the examinee cap */
  int converged; /* final fit converged with invertible information */
  int joint_covered;
  int covered_a, covered_b, covered_c;
  int iterations;
  int c_fallbacks;
  double lambda_min; /* smallest eigenvalue of the final observed information */
  double threshold;  /* chi2(3) critical value / d^2 */
  uint64_t seed;
} itemcal_calibration_result;

typedef struct itemcal_cell_summary {
  itemcal_strategy strategy;
  itemcal_item truth;
  int replications, included, nonconverged, cap_reached;
  double a_mean, a_sd, b_mean, b_sd, c_mean, c_sd;
  double mse_a, mse_b, mse_c;
  double n_mean, n_sd;
  double cov_a, cov_b, cov_c, cov_joint;
} itemcal_cell_summary;

typedef struct itemcal_config itemcal_config;
typedef struct itemcal_study itemcal_study;

ITEMCAL_API const char* itemcal_version(void);
ITEMCAL_API const char* itemcal_status_string(itemcal_status status);
/* Message of the last failed call on this thread; "" if none. */
ITEMCAL_API const char* itemcal_last_error(void);

/* Study configuration (defaults reproduce the standard 20-item grid). */
ITEMCAL_API itemcal_status itemcal_config_create(itemcal_config** out);
ITEMCAL_API itemcal_status itemcal_config_load(const char* path, itemcal_config** out);
ITEMCAL_API itemcal_status itemcal_config_set(itemcal_config* cfg, const char* key, const char* value);
ITEMCAL_API itemcal_status itemcal_config_validate(const itemcal_config* cfg);
ITEMCAL_API double itemcal_config_max_failure_rate(const itemcal_config* cfg);
/* Canonical key = value text. Writes at most buf_size bytes including the
 * terminator; *needed receives the full size including the terminator. */
ITEMCAL_API itemcal_status itemcal_config_format(const itemcal_config* cfg, char* buf, size_t buf_size,
                                                 size_t* needed);
ITEMCAL_API void itemcal_config_destroy(itemcal_config* cfg);

/* One end-to-end calibration of `truth` with the configured strategy. */
ITEMCAL_API itemcal_status itemcal_run_calibration(const itemcal_config* cfg, itemcal_item truth,
                                                   uint64_t seed, itemcal_calibration_result* out);

/* Monte Carlo study over the configured grid; output is independent of
 * `threads`. */
ITEMCAL_API itemcal_status itemcal_run_study(const itemcal_config* cfg, unsigned threads,
                                             itemcal_study** out);
ITEMCAL_API size_t itemcal_study_cell_count(const itemcal_study* study);
ITEMCAL_API itemcal_status itemcal_study_cell(const itemcal_study* study, size_t index,
                                              itemcal_cell_summary* out);
ITEMCAL_API double itemcal_study_failure_rate(const itemcal_study* study);
/* Writes summary/estimates/sample-size CSVs and text tables into `dir`. */
ITEMCAL_API itemcal_status itemcal_study_write(const itemcal_study* study, const char* dir);
ITEMCAL_API void itemcal_study_destroy(itemcal_study* study);

/* manifest.txt recording configuration, seeds and code version. `strategies`
 * lists every strategy written to `dir`. */
ITEMCAL_API itemcal_status itemcal_write_manifest(const itemcal_config* cfg,
                                                  const itemcal_strategy* strategies, size_t count,
                                                  const char* dir);

/* Rebuilds tables from summary CSVs; baseline_dir may be NULL. */
ITEMCAL_API itemcal_status itemcal_report(const char* in_dir, const char* baseline_dir,
                                          const char* out_dir);

/* Curve data (icc, two-point (a,b) information determinant, c information). */
ITEMCAL_API itemcal_status itemcal_emit_curves(const itemcal_item* items, size_t count,
                                               double theta_min, double theta_max, double step,
                                               const char* out_path);

/* Model primitives. */
ITEMCAL_API itemcal_status itemcal_icc(double theta, itemcal_item item, double* out);
ITEMCAL_API itemcal_status itemcal_chi_square_critical(double alpha, int df, double* out);
ITEMCAL_API itemcal_status itemcal_theta_lower_bound(itemcal_item estimate, double p0, double* out);
ITEMCAL_API itemcal_status itemcal_d_optimal_pair(itemcal_item estimate, double* low, double* high);
ITEMCAL_API itemcal_status itemcal_parse_strategy(const char* name, itemcal_strategy* out);

#ifdef __cplusplus
}
#endif

#endif /* ITEMCAL_ITEMCAL_H_ */
