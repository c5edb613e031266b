// Command-line front end over the itemcal C API.
//
//   itemcal-cli calibrate --a 1 --b 0 --c 0.1 --strategy two_stage --seed 7
//   itemcal-cli mc --config study.cfg --reps 200 --strategy two_stage,random --out results/
//   itemcal-cli curves --items "0.5:0:0.1;1:0:0.1" --theta-min -4 --theta-max 4 --step 0.05 --out curves.csv
//   itemcal-cli report --in results/random --baseline results/two_stage --out tables/

#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "itemcal/itemcal.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitFailureRate = 3;

int report_failure(itemcal_status status) {
  std::fprintf(stderr, "itemcal: %s: %s\n", itemcal_status_string(status), itemcal_last_error());
  return status == ITEMCAL_E_CONFIG || status == ITEMCAL_E_INVALID_ARGUMENT ? kExitConfig : kExitError;
}

struct ConfigHandle {
  itemcal_config* ptr = nullptr;
  ~ConfigHandle() { itemcal_config_destroy(ptr); }
};

struct StudyHandle {
  itemcal_study* ptr = nullptr;
  ~StudyHandle() { itemcal_study_destroy(ptr); }
};

itemcal_status open_config(const std::string& path, ConfigHandle& cfg) {
  return path.empty() ? itemcal_config_create(&cfg.ptr) : itemcal_config_load(path.c_str(), &cfg.ptr);
}

itemcal_status set(ConfigHandle& cfg, const char* key, const std::string& value) {
  return itemcal_config_set(cfg.ptr, key, value.c_str());
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, sep))
    if (!part.empty()) out.push_back(part);
  return out;
}

struct CalibrateArgs {
  double a = 1.0, b = 0.0, c = 0.1;
  std::string strategy = "two_stage";
  std::optional<double> d, alpha;
  std::optional<long> max_n;
  unsigned long long seed = 1;
  std::string config;
};

int run_calibrate(const CalibrateArgs& args) {
  ConfigHandle cfg;
  itemcal_status st = open_config(args.config, cfg);
  if (st == ITEMCAL_OK) st = set(cfg, "strategy", args.strategy);
  if (st == ITEMCAL_OK && args.d) st = set(cfg, "d", num(*args.d));
  if (st == ITEMCAL_OK && args.alpha) st = set(cfg, "alpha", num(*args.alpha));
  if (st == ITEMCAL_OK && args.max_n) st = set(cfg, "max_examinees", std::to_string(*args.max_n));
  if (st == ITEMCAL_OK) st = itemcal_config_validate(cfg.ptr);
  if (st != ITEMCAL_OK) return report_failure(st);

  itemcal_calibration_result r{};
  st = itemcal_run_calibration(cfg.ptr, {args.a, args.b, args.c}, args.seed, &r);
  if (st != ITEMCAL_OK) return report_failure(st);

  std::printf("strategy = %s\n", args.strategy.c_str());
  std::printf("seed = %llu\n", static_cast<unsigned long long>(r.seed));
  std::printf("true = %.6g %.6g %.6g\n", r.truth.a, r.truth.b, r.truth.c);
  std::printf("estimate = %.6g %.6g %.6g\n", r.estimate.a, r.estimate.b, r.estimate.c);
  std::printf("n_used = %lld\n", static_cast<long long>(r.n_used));
  std::printf("iterations = %d\n", r.iterations);
  std::printf("stopped = %d\n", r.stopped);
  std::printf("converged = %d\n", r.converged);
  std::printf("lambda_min = %.6g\n", r.lambda_min);
  std::printf("threshold = %.6g\n", r.threshold);
  std::printf("joint_covered = %d\n", r.joint_covered);
  std::printf("covered_abc = %d %d %d\n", r.covered_a, r.covered_b, r.covered_c);
  std::printf("c_fallbacks = %d\n", r.c_fallbacks);
  return kExitOk;
}

struct McArgs {
  std::string config;
  std::optional<int> reps;
  std::string strategies;
  std::string out = "itemcal_out";
  std::optional<unsigned long long> master_seed;
  unsigned threads = 1;
};

int run_mc(const McArgs& args) {
  ConfigHandle cfg;
  itemcal_status st = open_config(args.config, cfg);
  if (st == ITEMCAL_OK && args.reps) st = set(cfg, "replications", std::to_string(*args.reps));
  if (st == ITEMCAL_OK && args.master_seed) st = set(cfg, "master_seed", std::to_string(*args.master_seed));
  if (st != ITEMCAL_OK) return report_failure(st);

  std::vector<itemcal_strategy> strategies;
  if (args.strategies.empty()) {
    // Whatever the config file selected.
    std::size_t needed = 0;
    itemcal_config_format(cfg.ptr, nullptr, 0, &needed);
    std::string text(needed, '\0');
    itemcal_config_format(cfg.ptr, text.data(), text.size(), &needed);
    const auto line = text.substr(0, text.find('\n'));
    itemcal_strategy s{};
    st = itemcal_parse_strategy(line.substr(line.find('=') + 2).c_str(), &s);
    if (st != ITEMCAL_OK) return report_failure(st);
    strategies.push_back(s);
  } else {
    for (const auto& name : split(args.strategies, ',')) {
      itemcal_strategy s{};
      st = itemcal_parse_strategy(name.c_str(), &s);
      if (st != ITEMCAL_OK) return report_failure(st);
      strategies.push_back(s);
    }
  }
  if ((st = itemcal_config_validate(cfg.ptr)) != ITEMCAL_OK) return report_failure(st);

  const double max_rate = itemcal_config_max_failure_rate(cfg.ptr);
  bool too_many_failures = false;
  for (auto s : strategies) {
    static const char* names[] = {"two_stage", "strict_dopt", "random"};
    if ((st = set(cfg, "strategy", names[s])) != ITEMCAL_OK) return report_failure(st);
    StudyHandle study;
    st = itemcal_run_study(cfg.ptr, args.threads, &study.ptr);
    if (st != ITEMCAL_OK) return report_failure(st);
    st = itemcal_study_write(study.ptr, args.out.c_str());
    if (st != ITEMCAL_OK) return report_failure(st);

    const double rate = itemcal_study_failure_rate(study.ptr);
    std::fprintf(stderr, "%s: %zu cells, failure rate %.4f\n", names[s],
                 itemcal_study_cell_count(study.ptr), rate);
    if (rate > max_rate) too_many_failures = true;
  }
  st = itemcal_write_manifest(cfg.ptr, strategies.data(), strategies.size(), args.out.c_str());
  if (st != ITEMCAL_OK) return report_failure(st);

  if (too_many_failures) {
    std::fprintf(stderr, "itemcal: failure rate above max_failure_rate = %g\n", max_rate);
    return kExitFailureRate;
  }
  return kExitOk;
}

struct CurveArgs {
  std::string items;
  double theta_min = -4.0, theta_max = 4.0, step = 0.05;
  std::string out = "curves.csv";
};

int run_curves(const CurveArgs& args) {
  std::vector<itemcal_item> items;
  for (const auto& spec : split(args.items, ';')) {
    itemcal_item it{};
    char tail = 0;
    if (std::sscanf(spec.c_str(), " %lf : %lf : %lf %c", &it.a, &it.b, &it.c, &tail) != 3) {
      std::fprintf(stderr, "itemcal: bad item spec '%s' (expected a:b:c)\n", spec.c_str());
      return kExitConfig;
    }
    items.push_back(it);
  }
  if (items.empty()) {
    std::fprintf(stderr, "itemcal: --items is empty\n");
    return kExitConfig;
  }
  const itemcal_status st = itemcal_emit_curves(items.data(), items.size(), args.theta_min,
                                                args.theta_max, args.step, args.out.c_str());
  return st == ITEMCAL_OK ? kExitOk : report_failure(st);
}

struct ReportArgs {
  std::string in, baseline, out;
};

int run_report(const ReportArgs& args) {
  const itemcal_status st = itemcal_report(args.in.c_str(),
                                           args.baseline.empty() ? nullptr : args.baseline.c_str(),
                                           args.out.c_str());
  return st == ITEMCAL_OK ? kExitOk : report_failure(st);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequential item calibration for 3PL items"};
  app.set_version_flag("--version", std::string(itemcal_version()));
  app.require_subcommand(1);

  CalibrateArgs cal;
  auto* calibrate = app.add_subcommand("calibrate", "Run one calibration");
  calibrate->add_option("--a", cal.a, "True discrimination")->capture_default_str();
  calibrate->add_option("--b", cal.b, "True difficulty")->capture_default_str();
  calibrate->add_option("--c", cal.c, "True guessing parameter")->capture_default_str();
  calibrate->add_option("--strategy", cal.strategy, "two_stage | strict_dopt | random")->capture_default_str();
  calibrate->add_option("--d", cal.d, "Half-length bound of the ellipsoid axis");
  calibrate->add_option("--alpha", cal.alpha, "Miscoverage probability");
  calibrate->add_option("--seed", cal.seed, "Random seed")->capture_default_str();
  calibrate->add_option("--max-n", cal.max_n, "Examinee cap");
  calibrate->add_option("--config", cal.config, "Study config file");

  McArgs mc;
  auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo study over an item grid");
  mc_cmd->add_option("--config", mc.config, "Study config file");
  mc_cmd->add_option("--reps", mc.reps, "Replications per grid cell");
  mc_cmd->add_option("--strategy", mc.strategies, "Comma separated strategies");
  mc_cmd->add_option("--out", mc.out, "Output directory")->capture_default_str();
  mc_cmd->add_option("--master-seed", mc.master_seed, "Master seed");
  mc_cmd->add_option("--threads", mc.threads, "Worker threads")->capture_default_str();

  CurveArgs cv;
  auto* curves = app.add_subcommand("curves", "Item characteristic and information curves");
  curves->add_option("--items", cv.items, "Items as a:b:c;a:b:c")->required();
  curves->add_option("--theta-min", cv.theta_min)->capture_default_str();
  curves->add_option("--theta-max", cv.theta_max)->capture_default_str();
  curves->add_option("--step", cv.step)->capture_default_str();
  curves->add_option("--out", cv.out, "Output CSV")->capture_default_str();

  ReportArgs rep;
  auto* report = app.add_subcommand("report", "Rebuild tables from summary CSVs");
  report->add_option("--in", rep.in, "Directory with summary_*.csv")->required();
  report->add_option("--baseline", rep.baseline, "Baseline directory for sample-size ratios");
  report->add_option("--out", rep.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (calibrate->parsed()) return run_calibrate(cal);
  if (mc_cmd->parsed()) return run_mc(mc);
  if (curves->parsed()) return run_curves(cv);
  if (report->parsed()) return run_report(rep);
  return kExitError;
}
