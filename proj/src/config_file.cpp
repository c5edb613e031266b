#include "itemcal/config_file.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "itemcal/error.hpp"

namespace itemcal {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw Error(ErrorCode::Config,
              "invalid value '" + std::string(value) + "' for key '" + std::string(key) + "'");
}

double to_double(std::string_view key, std::string_view value) {
  value = trim(value);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) bad_value(key, value);
  return out;
}

long to_long(std::string_view key, std::string_view value) {
  value = trim(value);
  long out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) bad_value(key, value);
  return out;
}

int to_int(std::string_view key, std::string_view value) {
  const long v = to_long(key, value);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) bad_value(key, value);
  return static_cast<int>(v);
}

std::uint64_t to_u64(std::string_view key, std::string_view value) {
  value = trim(value);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) bad_value(key, value);
  return out;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::vector<double> to_list(std::string_view key, std::string_view value) {
  std::vector<double> out;
  for (auto part : split(value, ',')) out.push_back(to_double(key, part));
  if (out.empty()) bad_value(key, value);
  return out;
}

// Distinct values of one coordinate in order of first appearance.
std::vector<double> distinct(const std::vector<ItemParams>& grid, double ItemParams::*field) {
  std::vector<double> out;
  for (const auto& it : grid)
    if (std::find(out.begin(), out.end(), it.*field) == out.end()) out.push_back(it.*field);
  return out;
}

std::vector<ItemParams> product(const std::vector<double>& as, const std::vector<double>& bs,
                                const std::vector<double>& cs) {
  std::vector<ItemParams> grid;
  for (double a : as)
    for (double b : bs)
      for (double c : cs) grid.push_back({a, b, c});
  return grid;
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

using Setter = std::function<void(StudyConfig&, std::string_view, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"strategy", [](StudyConfig& c, auto, auto v) { c.strategy = parse_strategy(trim(v)); }},
      {"replications", [](StudyConfig& c, auto k, auto v) { c.replications = to_int(k, v); }},
      {"master_seed", [](StudyConfig& c, auto k, auto v) { c.master_seed = to_u64(k, v); }},
      {"max_examinees", [](StudyConfig& c, auto k, auto v) { c.max_examinees = to_long(k, v); }},
      {"max_failure_rate", [](StudyConfig& c, auto k, auto v) { c.max_failure_rate = to_double(k, v); }},
      {"c_start", [](StudyConfig& c, auto k, auto v) { c.c_start = to_double(k, v); }},
      {"grid_a",
       [](StudyConfig& c, auto k, auto v) {
         c.grid = product(to_list(k, v), distinct(c.grid, &ItemParams::b), distinct(c.grid, &ItemParams::c));
       }},
      {"grid_b",
       [](StudyConfig& c, auto k, auto v) {
         c.grid = product(distinct(c.grid, &ItemParams::a), to_list(k, v), distinct(c.grid, &ItemParams::c));
       }},
      {"grid_c",
       [](StudyConfig& c, auto k, auto v) {
         c.grid = product(distinct(c.grid, &ItemParams::a), distinct(c.grid, &ItemParams::b), to_list(k, v));
       }},
      {"items",
       [](StudyConfig& c, auto k, auto v) {
         std::vector<ItemParams> grid;
         for (auto spec : split(v, ';')) {
           if (spec.empty()) continue;
           const auto f = split(spec, ':');
           if (f.size() != 3) bad_value(k, v);
           grid.push_back({to_double(k, f[0]), to_double(k, f[1]), to_double(k, f[2])});
         }
         if (grid.empty()) bad_value(k, v);
         c.grid = std::move(grid);
       }},
      {"d", [](StudyConfig& c, auto k, auto v) { c.stopping.d = to_double(k, v); }},
      {"alpha", [](StudyConfig& c, auto k, auto v) { c.stopping.alpha = to_double(k, v); }},
      {"n0", [](StudyConfig& c, auto k, auto v) { c.stopping.n0 = to_int(k, v); }},
      {"p0", [](StudyConfig& c, auto k, auto v) { c.design.p0 = to_double(k, v); }},
      {"theta_c", [](StudyConfig& c, auto k, auto v) { c.design.theta_c = to_double(k, v); }},
      {"pool_min",
       [](StudyConfig& c, auto k, auto v) {
         c.set_pool_range({to_double(k, v), c.design.pool_range.hi});
       }},
      {"pool_max",
       [](StudyConfig& c, auto k, auto v) {
         c.set_pool_range({c.design.pool_range.lo, to_double(k, v)});
       }},
      {"n_init_ab", [](StudyConfig& c, auto k, auto v) { c.design.n_init_ab = to_int(k, v); }},
      {"n_init_c", [](StudyConfig& c, auto k, auto v) { c.design.n_init_c = to_int(k, v); }},
      {"batch_ab", [](StudyConfig& c, auto k, auto v) { c.design.batch_ab = to_int(k, v); }},
      {"batch_c", [](StudyConfig& c, auto k, auto v) { c.design.batch_c = to_int(k, v); }},
      {"dopt_batch", [](StudyConfig& c, auto k, auto v) { c.design.dopt_batch = to_int(k, v); }},
      {"dopt_grid_points", [](StudyConfig& c, auto k, auto v) { c.design.dopt_grid_points = to_int(k, v); }},
      {"random_sd", [](StudyConfig& c, auto k, auto v) { c.design.random_sd = to_double(k, v); }},
      {"error_scale", [](StudyConfig& c, auto k, auto v) { c.pool.error_scale = to_double(k, v); }},
      {"error_log_exponent", [](StudyConfig& c, auto k, auto v) { c.pool.error_log_exponent = to_double(k, v); }},
      {"fit_max_iter", [](StudyConfig& c, auto k, auto v) { c.fit.max_iter = to_int(k, v); }},
      {"fit_grad_tol", [](StudyConfig& c, auto k, auto v) { c.fit.grad_tol = to_double(k, v); }},
      {"fit_step_tol", [](StudyConfig& c, auto k, auto v) { c.fit.step_tol = to_double(k, v); }},
      {"a_min", [](StudyConfig& c, auto k, auto v) { c.fit.bounds.a_min = to_double(k, v); }},
      {"a_max", [](StudyConfig& c, auto k, auto v) { c.fit.bounds.a_max = to_double(k, v); }},
      {"b_min", [](StudyConfig& c, auto k, auto v) { c.fit.bounds.b_min = to_double(k, v); }},
      {"b_max", [](StudyConfig& c, auto k, auto v) { c.fit.bounds.b_max = to_double(k, v); }},
      {"c_min", [](StudyConfig& c, auto k, auto v) { c.fit.bounds.c_min = to_double(k, v); }},
      {"c_max", [](StudyConfig& c, auto k, auto v) { c.fit.bounds.c_max = to_double(k, v); }},
  };
  return table;
}

}  // namespace

std::vector<std::string> known_config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, _] : setters()) keys.push_back(k);
  return keys;
}

void apply_setting(StudyConfig& cfg, std::string_view key, std::string_view value) {
  const auto& table = setters();
  const auto it = table.find(trim(key));
  if (it == table.end()) throw Error(ErrorCode::Config, "unknown config key '" + std::string(key) + "'");
  it->second(cfg, it->first, value);
}

StudyConfig parse_study_config(std::string_view text, const std::string& origin) {
  StudyConfig cfg;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    std::string_view line = text.substr(pos, end == std::string_view::npos ? text.npos : end - pos);
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorCode::Config,
                  origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
    try {
      apply_setting(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const Error& e) {
      throw Error(ErrorCode::Config, origin + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

StudyConfig load_study_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Config, "cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_study_config(ss.str(), path);
}

std::string format_study_config(const StudyConfig& cfg) {
  std::ostringstream os;
  os << "strategy = " << to_string(cfg.strategy) << '\n'
     << "replications = " << cfg.replications << '\n'
     << "master_seed = " << cfg.master_seed << '\n'
     << "max_examinees = " << cfg.max_examinees << '\n'
     << "max_failure_rate = " << num(cfg.max_failure_rate) << '\n'
     << "c_start = " << num(cfg.c_start) << '\n';
  os << "items = ";
  for (std::size_t i = 0; i < cfg.grid.size(); ++i) {
    if (i) os << "; ";
    os << num(cfg.grid[i].a) << ':' << num(cfg.grid[i].b) << ':' << num(cfg.grid[i].c);
  }
  os << '\n'
     << "d = " << num(cfg.stopping.d) << '\n'
     << "alpha = " << num(cfg.stopping.alpha) << '\n'
     << "n0 = " << cfg.stopping.n0 << '\n'
     << "p0 = " << num(cfg.design.p0) << '\n'
     << "theta_c = " << num(cfg.design.theta_c) << '\n'
     << "pool_min = " << num(cfg.design.pool_range.lo) << '\n'
     << "pool_max = " << num(cfg.design.pool_range.hi) << '\n'
     << "n_init_ab = " << cfg.design.n_init_ab << '\n'
     << "n_init_c = " << cfg.design.n_init_c << '\n'
     << "batch_ab = " << cfg.design.batch_ab << '\n'
     << "batch_c = " << cfg.design.batch_c << '\n'
     << "dopt_batch = " << cfg.design.dopt_batch << '\n'
     << "dopt_grid_points = " << cfg.design.dopt_grid_points << '\n'
     << "random_sd = " << num(cfg.design.random_sd) << '\n'
     << "error_scale = " << num(cfg.pool.error_scale) << '\n'
     << "error_log_exponent = " << num(cfg.pool.error_log_exponent) << '\n'
     << "fit_max_iter = " << cfg.fit.max_iter << '\n'
     << "fit_grad_tol = " << num(cfg.fit.grad_tol) << '\n'
     << "fit_step_tol = " << num(cfg.fit.step_tol) << '\n'
     << "a_min = " << num(cfg.fit.bounds.a_min) << '\n'
     << "a_max = " << num(cfg.fit.bounds.a_max) << '\n'
     << "b_min = " << num(cfg.fit.bounds.b_min) << '\n'
     << "b_max = " << num(cfg.fit.bounds.b_max) << '\n'
     << "c_min = " << num(cfg.fit.bounds.c_min) << '\n'
     << "c_max = " << num(cfg.fit.bounds.c_max) << '\n';
  return os.str();
}

}  // namespace itemcal
