#include "itemcal/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "itemcal/config_file.hpp"
#include "itemcal/error.hpp"

namespace fs = std::filesystem;

namespace itemcal {

namespace {

std::string g6(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  return out;
}

void check_written(const std::ofstream& out, const std::string& path) {
  if (!out) throw Error(ErrorCode::Io, "error while writing '" + path + "'");
}

const char* kSummaryHeader =
    "strategy,a,b,c,replications,included,nonconverged,cap_reached,a_hat,a_hat_sd,b_hat,b_hat_sd,"
    "c_hat,c_hat_sd,mse_a,mse_b,mse_c,n_mean,n_sd,cov_a,cov_b,cov_c,cov_joint";

double parse_field(const std::string& s, const std::string& path) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::Io, "malformed number '" + s + "' in '" + path + "'");
  }
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

bool same_cell(const ItemParams& x, const ItemParams& y) {
  return std::abs(x.a - y.a) < 1e-9 && std::abs(x.b - y.b) < 1e-9 && std::abs(x.c - y.c) < 1e-9;
}

std::string mean_sd_text(const MeanSd& m, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f(%.*f)", decimals, m.mean, decimals, m.sd);
  return buf;
}

}  // namespace

void write_summary_csv(const std::vector<McSummary>& summaries, const std::string& path) {
  auto out = open_out(path);
  out << kSummaryHeader << '\n';
  for (const auto& s : summaries) {
    out << to_string(s.strategy) << ',' << g6(s.item_true.a) << ',' << g6(s.item_true.b) << ','
        << g6(s.item_true.c) << ',' << s.replications << ',' << s.included << ','
        << s.nonconverged << ',' << s.cap_reached << ',' << g6(s.a_hat.mean) << ','
        << g6(s.a_hat.sd) << ',' << g6(s.b_hat.mean) << ',' << g6(s.b_hat.sd) << ','
        << g6(s.c_hat.mean) << ',' << g6(s.c_hat.sd) << ',' << g6(s.mse_a) << ',' << g6(s.mse_b)
        << ',' << g6(s.mse_c) << ',' << g6(s.n_used.mean) << ',' << g6(s.n_used.sd) << ','
        << g6(s.cov_a) << ',' << g6(s.cov_b) << ',' << g6(s.cov_c) << ',' << g6(s.cov_joint)
        << '\n';
  }
  check_written(out, path);
}

std::vector<McSummary> read_summary_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != kSummaryHeader)
    throw Error(ErrorCode::Io, "'" + path + "' is not a summary file (header mismatch)");

  std::vector<McSummary> out;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 23) throw Error(ErrorCode::Io, "malformed row in '" + path + "': " + line);

    McSummary s;
    try {
      s.strategy = parse_strategy(f[0]);
    } catch (const Error&) {
      throw Error(ErrorCode::Io, "unknown strategy '" + f[0] + "' in '" + path + "'");
    }
    auto num = [&](std::size_t i) { return parse_field(f[i], path); };
    s.item_true = {num(1), num(2), num(3)};
    s.replications = static_cast<int>(num(4));
    s.included = static_cast<int>(num(5));
    s.nonconverged = static_cast<int>(num(6));
    s.cap_reached = static_cast<int>(num(7));
    s.a_hat = {num(8), num(9)};
    s.b_hat = {num(10), num(11)};
    s.c_hat = {num(12), num(13)};
    s.mse_a = num(14);
    s.mse_b = num(15);
    s.mse_c = num(16);
    s.n_used = {num(17), num(18)};
    s.cov_a = num(19);
    s.cov_b = num(20);
    s.cov_c = num(21);
    s.cov_joint = num(22);
    out.push_back(s);
  }
  return out;
}

void write_estimates_csv(const std::vector<McSummary>& summaries, const std::string& path) {
  auto out = open_out(path);
  out << "a,b,a_hat,b_hat,c_hat,mse_a,mse_b,mse_c\n";
  for (const auto& s : summaries)
    out << g6(s.item_true.a) << ',' << g6(s.item_true.b) << ',' << g6(s.a_hat.mean) << ','
        << g6(s.b_hat.mean) << ',' << g6(s.c_hat.mean) << ',' << g6(s.mse_a) << ','
        << g6(s.mse_b) << ',' << g6(s.mse_c) << '\n';
  check_written(out, path);
}

void write_sample_sizes_csv(const std::vector<McSummary>& summaries, const std::string& path) {
  auto out = open_out(path);
  out << "a,b,n_mean,n_sd,cov_a,cov_b,cov_c,cov_joint,nonconverged\n";
  for (const auto& s : summaries)
    out << g6(s.item_true.a) << ',' << g6(s.item_true.b) << ',' << g6(s.n_used.mean) << ','
        << g6(s.n_used.sd) << ',' << g6(s.cov_a) << ',' << g6(s.cov_b) << ',' << g6(s.cov_c)
        << ',' << g6(s.cov_joint) << ',' << s.nonconverged << '\n';
  check_written(out, path);
}

void write_comparison_csv(const std::vector<McSummary>& summaries,
                          const std::vector<McSummary>& baseline, const std::string& path) {
  auto out = open_out(path);
  out << "a,b,n_mean,baseline_n_mean,n_ratio\n";
  for (const auto& s : summaries) {
    const auto it = std::find_if(baseline.begin(), baseline.end(), [&](const McSummary& b) {
      return same_cell(b.item_true, s.item_true);
    });
    const double base = it == baseline.end() ? std::numeric_limits<double>::quiet_NaN() : it->n_used.mean;
    out << g6(s.item_true.a) << ',' << g6(s.item_true.b) << ',' << g6(s.n_used.mean) << ','
        << g6(base) << ',' << g6(s.n_used.mean / base) << '\n';
  }
  check_written(out, path);
}

void write_text_tables(const std::vector<McSummary>& summaries, const std::string& path) {
  auto out = open_out(path);
  char buf[512];
  const std::string name = summaries.empty() ? "" : std::string(to_string(summaries.front().strategy));
  out << "Estimates (" << name << "): mean (sd) over converged replications\n";
  std::snprintf(buf, sizeof buf, "%-5s %-5s %-16s %-16s %-16s %-9s %-9s %-9s\n", "a", "b", "a_hat",
                "b_hat", "c_hat", "MSE a", "MSE b", "MSE c");
  out << buf;
  for (const auto& s : summaries) {
    std::snprintf(buf, sizeof buf, "%-5g %-5g %-16s %-16s %-16s %-9.3f %-9.3f %-9.3f\n",
                  s.item_true.a, s.item_true.b, mean_sd_text(s.a_hat, 3).c_str(),
                  mean_sd_text(s.b_hat, 3).c_str(), mean_sd_text(s.c_hat, 3).c_str(), s.mse_a,
                  s.mse_b, s.mse_c);
    out << buf;
  }
  out << "\nSample sizes and coverage (" << name << ")\n";
  std::snprintf(buf, sizeof buf, "%-5s %-5s %-20s %-7s %-7s %-7s %-7s %-6s\n", "a", "b", "n",
                "cov a", "cov b", "cov c", "joint", "failed");
  out << buf;
  for (const auto& s : summaries) {
    std::snprintf(buf, sizeof buf, "%-5g %-5g %-20s %-7.3f %-7.3f %-7.3f %-7.3f %-6d\n",
                  s.item_true.a, s.item_true.b, mean_sd_text(s.n_used, 2).c_str(), s.cov_a,
                  s.cov_b, s.cov_c, s.cov_joint, s.nonconverged);
    out << buf;
  }
  check_written(out, path);
}

void write_study_outputs(const std::vector<McSummary>& summaries, Strategy strategy,
                         const std::string& dir) {
  fs::create_directories(dir);
  const std::string tag(to_string(strategy));
  const fs::path base(dir);
  write_summary_csv(summaries, (base / ("summary_" + tag + ".csv")).string());
  write_estimates_csv(summaries, (base / ("estimates_" + tag + ".csv")).string());
  write_sample_sizes_csv(summaries, (base / ("sample_sizes_" + tag + ".csv")).string());
  write_text_tables(summaries, (base / ("tables_" + tag + ".txt")).string());
}

void write_manifest(const StudyConfig& cfg, const std::vector<Strategy>& strategies,
                    const std::string& dir) {
  fs::create_directories(dir);
  const std::string path = (fs::path(dir) / "manifest.txt").string();
  auto out = open_out(path);
  out << "# itemcal run manifest\n"
      << "# code_version = " << ITEMCAL_VERSION_STRING << '\n'
      << "# strategies =";
  for (auto s : strategies) out << ' ' << to_string(s);
  out << '\n' << format_study_config(cfg);
  check_written(out, path);
}

void report(const std::string& in_dir, const std::optional<std::string>& baseline_dir,
            const std::string& out_dir) {
  auto summaries_in = [](const std::string& dir) {
    std::map<std::string, std::vector<McSummary>> found;
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw Error(ErrorCode::Io, "'" + dir + "' is not a directory");
    for (const auto& entry : fs::directory_iterator(dir)) {
      const std::string name = entry.path().filename().string();
      if (name.rfind("summary_", 0) == 0 && entry.path().extension() == ".csv")
        found[name.substr(8, name.size() - 12)] = read_summary_csv(entry.path().string());
    }
    return found;
  };

  const auto inputs = summaries_in(in_dir);
  if (inputs.empty()) throw Error(ErrorCode::Io, "no summary_*.csv files in '" + in_dir + "'");
  std::map<std::string, std::vector<McSummary>> baselines;
  if (baseline_dir) {
    baselines = summaries_in(*baseline_dir);
    if (baselines.empty())
      throw Error(ErrorCode::Io, "no summary_*.csv files in '" + *baseline_dir + "'");
  }

  fs::create_directories(out_dir);
  for (const auto& [tag, summaries] : inputs) {
    const Strategy strategy = summaries.empty() ? parse_strategy(tag) : summaries.front().strategy;
    write_study_outputs(summaries, strategy, out_dir);
    if (!baseline_dir) continue;

    // Same strategy in the baseline if present, otherwise its only summary.
    auto it = baselines.find(tag);
    if (it == baselines.end()) {
      if (baselines.size() != 1)
        throw Error(ErrorCode::Io, "baseline '" + *baseline_dir +
                                       "' holds several strategies and none named " + tag);
      it = baselines.begin();
    }
    write_comparison_csv(summaries, it->second,
                         (fs::path(out_dir) / ("comparison_" + tag + "_vs_" + it->first + ".csv")).string());
  }
}

}  // namespace itemcal
