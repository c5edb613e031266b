#pragma once

// CSV and text output of Monte Carlo summaries laid out like the usual
// calibration study tables: estimates with MSEs, and sample sizes with
// coverage.

#include <optional>
#include <string>
#include <vector>

#include "itemcal/harness.hpp"

namespace itemcal {

/// Machine-readable summary: one row per grid cell with every McSummary field.
void write_summary_csv(const std::vector<McSummary>& summaries, const std::string& path);
std::vector<McSummary> read_summary_csv(const std::string& path);

/// a,b,a_hat,b_hat,c_hat,mse_a,mse_b,mse_c
void write_estimates_csv(const std::vector<McSummary>& summaries, const std::string& path);
/// a,b,n_mean,n_sd,cov_a,cov_b,cov_c,cov_joint,nonconverged
void write_sample_sizes_csv(const std::vector<McSummary>& summaries, const std::string& path);
/// a,b,n_mean,baseline_n_mean,n_ratio; cells are matched on (a, b, c).
void write_comparison_csv(const std::vector<McSummary>& summaries,
                          const std::vector<McSummary>& baseline, const std::string& path);
/// Fixed-width tables with standard deviations in parentheses.
void write_text_tables(const std::vector<McSummary>& summaries, const std::string& path);

/// Summary, both table CSVs and the text tables for one strategy into `dir`.
void write_study_outputs(const std::vector<McSummary>& summaries, Strategy strategy,
                         const std::string& dir);

void write_manifest(const StudyConfig& cfg, const std::vector<Strategy>& strategies,
                    const std::string& dir);

/// Rebuilds the tables from every summary_*.csv in `in_dir`; with a baseline
/// directory also writes sample-size ratio files.
void report(const std::string& in_dir, const std::optional<std::string>& baseline_dir,
            const std::string& out_dir);

}  // namespace itemcal
