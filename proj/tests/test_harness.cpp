#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "itemcal/config_file.hpp"
#include "itemcal/curves.hpp"
#include "itemcal/error.hpp"
#include "itemcal/harness.hpp"
#include "itemcal/report.hpp"

using namespace itemcal;
namespace fs = std::filesystem;

namespace {

// Loose stopping so that runs finish in a few hundred examinees.
StudyConfig quick_config(Strategy s) {
  StudyConfig cfg;
  cfg.strategy = s;
  cfg.stopping.d = 1.0;
  cfg.max_examinees = 3000;
  cfg.replications = 4;
  cfg.grid = {{1.0, 0.0, 0.1}, {1.5, -1.0, 0.1}};
  return cfg;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("itemcal_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CalibrationResult fake_run(double a, double b, double c, long n, bool converged, bool stopped = true) {
  CalibrationResult r;
  r.item_true = {1.0, 0.0, 0.1};
  r.estimates = {a, b, c};
  r.n_used = n;
  r.converged = converged;
  r.stopped = stopped;
  r.marginal = {true, a > 1.0, true};
  r.joint_covered = a > 1.0;
  return r;
}

}  // namespace

TEST(Strategy, ParseAndName) {
  for (Strategy s : {Strategy::TwoStage, Strategy::StrictDOpt, Strategy::Random})
    EXPECT_EQ(parse_strategy(to_string(s)), s);
  EXPECT_EQ(parse_strategy("two_stage"), Strategy::TwoStage);
  EXPECT_THROW(parse_strategy("optimal"), Error);
}

TEST(DefaultGrid, Layout) {
  const auto g = default_grid();
  ASSERT_EQ(g.size(), 20u);
  EXPECT_EQ(g[0].a, 0.5);
  EXPECT_EQ(g[0].b, -2.0);
  EXPECT_EQ(g[4].b, 2.0);
  EXPECT_EQ(g[5].a, 1.0);
  for (const auto& it : g) EXPECT_EQ(it.c, 0.1);
}

TEST(RunCalibration, Deterministic) {
  for (Strategy s : {Strategy::TwoStage, Strategy::StrictDOpt, Strategy::Random}) {
    const StudyConfig cfg = quick_config(s);
    const auto r1 = run_calibration({1.0, 0.0, 0.1}, cfg, 77);
    const auto r2 = run_calibration({1.0, 0.0, 0.1}, cfg, 77);
    EXPECT_EQ(r1.n_used, r2.n_used);
    EXPECT_EQ(r1.estimates.a, r2.estimates.a);
    EXPECT_EQ(r1.estimates.b, r2.estimates.b);
    EXPECT_EQ(r1.estimates.c, r2.estimates.c);
    EXPECT_EQ(r1.seed, 77u);
  }
}

TEST(RunCalibration, CapAtInitialSample) {
  for (Strategy s : {Strategy::TwoStage, Strategy::StrictDOpt, Strategy::Random}) {
    StudyConfig cfg = quick_config(s);
    cfg.max_examinees = 110;
    const auto r = run_calibration({1.0, 0.0, 0.1}, cfg, 5);
    EXPECT_FALSE(r.stopped);
    EXPECT_EQ(r.n_used, 110);
    EXPECT_EQ(r.iterations, 0);
  }
}

TEST(RunCalibration, SampleAccountingAndCap) {
  for (Strategy s : {Strategy::TwoStage, Strategy::StrictDOpt, Strategy::Random}) {
    StudyConfig cfg = quick_config(s);
    cfg.stopping.d = 0.5;
    cfg.max_examinees = 700;
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
      const auto r = run_calibration({1.0, 0.5, 0.1}, cfg, seed);
      EXPECT_GE(r.n_used, 110);
      EXPECT_LE(r.n_used, cfg.max_examinees);
      if (r.stopped) {
        EXPECT_EQ(r.n_used, 110 + 15L * r.iterations);
        EXPECT_GE(r.lambda_min, r.threshold);
      } else {
        EXPECT_EQ(r.n_used, cfg.max_examinees);
        EXPECT_GE(110 + 15L * r.iterations, r.n_used);
      }
    }
  }
}

TEST(RunCalibration, ObserverSeesGapFreeGrowth) {
  const StudyConfig cfg = quick_config(Strategy::TwoStage);
  long last = 0;
  int calls = 0;
  bool stopped_seen = false;
  const auto r = run_calibration({1.0, 0.0, 0.1}, cfg, 3, [&](const CalibrationState& st, const StoppingDecision& d) {
    ++calls;
    EXPECT_EQ(st.next_index, st.size() + 1);
    EXPECT_EQ(st.iterations, calls);
    EXPECT_GT(st.size(), last);
    EXPECT_EQ(st.observations.size(), st.records.size());
    last = st.size();
    stopped_seen = d.stop;
  });
  EXPECT_EQ(calls, r.iterations);
  EXPECT_EQ(last, r.n_used);
  EXPECT_EQ(stopped_seen, r.stopped);
}

TEST(RunCalibration, TwoStageStopsAndCovers) {
  const StudyConfig cfg = quick_config(Strategy::TwoStage);
  int covered = 0, stopped = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto r = run_calibration({1.0, 0.0, 0.1}, cfg, seed);
    stopped += r.stopped;
    covered += r.joint_covered;
  }
  EXPECT_EQ(stopped, 20);
  EXPECT_GE(covered, 14);
}

TEST(Summarize, MseDecomposes) {
  std::vector<CalibrationResult> runs;
  const double as[] = {0.9, 1.1, 1.3, 0.8, 1.05};
  for (int i = 0; i < 5; ++i) runs.push_back(fake_run(as[i], 0.1 * i, 0.1 + 0.01 * i, 200 + 10 * i, true));
  runs.push_back(fake_run(9.0, 9.0, 0.4, 5000, false, false));
  const McSummary s = summarize(Strategy::Random, {1.0, 0.0, 0.1}, runs);
  EXPECT_EQ(s.replications, 6);
  EXPECT_EQ(s.included, 5);
  EXPECT_EQ(s.nonconverged, 1);
  EXPECT_EQ(s.cap_reached, 1);

  double mean = 0.0;
  for (double a : as) mean += a / 5.0;
  double pop_var = 0.0;
  for (double a : as) pop_var += (a - mean) * (a - mean) / 5.0;
  EXPECT_NEAR(s.a_hat.mean, mean, 1e-12);
  EXPECT_NEAR(s.mse_a, (mean - 1.0) * (mean - 1.0) + pop_var, 1e-10);
  EXPECT_NEAR(s.a_hat.sd, std::sqrt(pop_var * 5.0 / 4.0), 1e-12);
  // Sample sizes include the failed run.
  EXPECT_NEAR(s.n_used.mean, (200 + 210 + 220 + 230 + 240 + 5000) / 6.0, 1e-9);
  EXPECT_NEAR(s.cov_b, 3.0 / 5.0, 1e-12);
  EXPECT_NEAR(s.cov_a, 1.0, 1e-12);
}

TEST(Summarize, SingleReplication) {
  const std::vector<CalibrationResult> runs{fake_run(1.2, 0.3, 0.15, 400, true)};
  const McSummary s = summarize(Strategy::TwoStage, {1.0, 0.0, 0.1}, runs);
  EXPECT_EQ(s.a_hat.mean, 1.2);
  EXPECT_TRUE(std::isnan(s.a_hat.sd));
  EXPECT_EQ(s.n_used.mean, 400.0);
  EXPECT_NEAR(s.mse_b, 0.09, 1e-12);
}

TEST(MonteCarlo, IndependentOfThreadCount) {
  StudyConfig cfg = quick_config(Strategy::TwoStage);
  cfg.replications = 3;
  const auto one = run_monte_carlo(cfg, 1);
  const auto three = run_monte_carlo(cfg, 3);
  ASSERT_EQ(one.runs.size(), 2u);
  ASSERT_EQ(three.runs.size(), 2u);
  for (std::size_t k = 0; k < one.runs.size(); ++k)
    for (std::size_t r = 0; r < one.runs[k].size(); ++r) {
      EXPECT_EQ(one.runs[k][r].seed, derive_seed(cfg.master_seed, k, r));
      EXPECT_EQ(one.runs[k][r].seed, three.runs[k][r].seed);
      EXPECT_EQ(one.runs[k][r].n_used, three.runs[k][r].n_used);
      EXPECT_EQ(one.runs[k][r].estimates.a, three.runs[k][r].estimates.a);
      EXPECT_EQ(one.runs[k][r].estimates.c, three.runs[k][r].estimates.c);
    }
  EXPECT_EQ(one.summaries[1].mse_b, three.summaries[1].mse_b);
  EXPECT_EQ(one.failure_rate(), three.failure_rate());
}

TEST(StudyConfig, Validation) {
  StudyConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.replications = 0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.max_examinees = 50;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.grid.clear();
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.grid = {{-1.0, 0.0, 0.1}};
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(ConfigFile, ParsesSettings) {
  const StudyConfig cfg = parse_study_config(
      "# comment\nstrategy = random\nreplications = 12  # trailing\n\nd = 0.25\nitems = 1:0:0.1; 2:-1:0.2\n");
  EXPECT_EQ(cfg.strategy, Strategy::Random);
  EXPECT_EQ(cfg.replications, 12);
  EXPECT_EQ(cfg.stopping.d, 0.25);
  ASSERT_EQ(cfg.grid.size(), 2u);
  EXPECT_EQ(cfg.grid[1].a, 2.0);
  EXPECT_EQ(cfg.grid[1].b, -1.0);
  EXPECT_EQ(cfg.grid[1].c, 0.2);
}

TEST(ConfigFile, ErrorsCarryLineNumbers) {
  try {
    parse_study_config("replications = 5\nbogus = 1\n", "study.cfg");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Config);
    EXPECT_NE(std::string(e.what()).find("study.cfg:2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_study_config("replications five\n"), Error);
  EXPECT_THROW(parse_study_config("replications = five\n"), Error);
  EXPECT_THROW(parse_study_config("replications = 0\n"), Error);
}

TEST(ConfigFile, FormatRoundTrip) {
  StudyConfig cfg;
  cfg.strategy = Strategy::StrictDOpt;
  cfg.replications = 17;
  cfg.master_seed = 123456789012345ULL;
  cfg.stopping.d = 0.3;
  cfg.design.p0 = 0.95;
  cfg.pool.error_scale = 0.25;
  cfg.grid = {{1.25, -0.75, 0.15}, {0.5, 2.0, 0.1}};
  const std::string text = format_study_config(cfg);
  const StudyConfig back = parse_study_config(text);
  EXPECT_EQ(format_study_config(back), text);
  EXPECT_EQ(back.master_seed, cfg.master_seed);
  EXPECT_EQ(back.grid[0].b, -0.75);
  for (const auto& key : known_config_keys()) {
    if (key.starts_with("grid_")) continue;  // written through "items"
    EXPECT_NE(text.find(key + " = "), std::string::npos) << key;
  }
}

TEST(Report, SummaryCsvRoundTrip) {
  const fs::path dir = scratch_dir("summary");
  std::vector<CalibrationResult> runs;
  for (int i = 0; i < 4; ++i) runs.push_back(fake_run(1.0 + 0.1 * i, -0.1 * i, 0.11, 300 + i, true));
  const McSummary s = summarize(Strategy::StrictDOpt, {1.0, 0.0, 0.1}, runs);
  write_summary_csv({s}, (dir / "s.csv").string());
  const auto back = read_summary_csv((dir / "s.csv").string());
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].strategy, Strategy::StrictDOpt);
  EXPECT_EQ(back[0].replications, 4);
  // Six significant digits.
  EXPECT_NEAR(back[0].a_hat.mean, s.a_hat.mean, 5e-6 * s.a_hat.mean);
  EXPECT_NEAR(back[0].mse_b, s.mse_b, 5e-6 * s.mse_b);
  EXPECT_NEAR(back[0].n_used.sd, s.n_used.sd, 5e-6 * s.n_used.sd);
}

TEST(Report, EmptySummaryIsHeaderOnly) {
  const fs::path dir = scratch_dir("empty");
  write_summary_csv({}, (dir / "s.csv").string());
  const std::string text = slurp(dir / "s.csv");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1);
  EXPECT_TRUE(read_summary_csv((dir / "s.csv").string()).empty());
  std::ofstream(dir / "bad.csv") << "x,y\n";
  EXPECT_THROW(read_summary_csv((dir / "bad.csv").string()), Error);
}

TEST(Report, ComparisonRatio) {
  const fs::path dir = scratch_dir("compare");
  McSummary a, b;
  a.item_true = b.item_true = {1.0, 0.0, 0.1};
  a.n_used.mean = 300.0;
  b.n_used.mean = 1200.0;
  write_comparison_csv({a}, {b}, (dir / "c.csv").string());
  const std::string text = slurp(dir / "c.csv");
  EXPECT_NE(text.find("1,0,300,1200,0.25"), std::string::npos) << text;
}

TEST(Report, RebuildsTablesWithBaseline) {
  const fs::path in = scratch_dir("report_in"), base = scratch_dir("report_base"),
                 out = scratch_dir("report_out");
  McSummary two, rnd;
  two.strategy = Strategy::TwoStage;
  rnd.strategy = Strategy::Random;
  two.item_true = rnd.item_true = {1.0, 0.0, 0.1};
  two.n_used.mean = 500.0;
  rnd.n_used.mean = 2000.0;
  write_study_outputs({two}, Strategy::TwoStage, in.string());
  write_study_outputs({rnd}, Strategy::Random, base.string());
  report(in.string(), base.string(), out.string());
  EXPECT_TRUE(fs::exists(out / "estimates_two_stage.csv"));
  EXPECT_TRUE(fs::exists(out / "sample_sizes_two_stage.csv"));
  const std::string cmp = slurp(out / "comparison_two_stage_vs_random.csv");
  EXPECT_NE(cmp.find(",0.25"), std::string::npos) << cmp;
  EXPECT_THROW(report(scratch_dir("report_none").string(), std::nullopt, out.string()), Error);
}

TEST(Curves, IccAndInformationShapes) {
  const std::vector<ItemParams> items{{0.5, 0.0, 0.1}, {2.0, 0.0, 0.1}};
  const auto rows = emit_curves(items, -4.0, 4.0, 0.05);
  ASSERT_EQ(rows.size(), 2u * 161u);
  double peak_low[2] = {0.0, 0.0};
  double argmax[2] = {0.0, 0.0};
  for (const auto& r : rows) {
    const int k = r.item_id;
    if (std::abs(r.theta) < 1e-9) {
      EXPECT_NEAR(r.icc, 0.55, 1e-12);
    }
    if (r.theta < 0.0 && r.det_info_ab > peak_low[k]) {
      peak_low[k] = r.det_info_ab;
      argmax[k] = r.theta;
    }
    EXPECT_GE(r.det_info_ab, 0.0);
    EXPECT_GT(r.info_c, 0.0);
  }
  // The (a, b) information peak sits closer to b for the steeper item.
  EXPECT_LT(std::abs(argmax[1]), std::abs(argmax[0]));
  // c information falls once the curve leaves its floor.
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].item_id == rows[i - 1].item_id && rows[i].theta > 0.0) {
      EXPECT_LT(rows[i].info_c, rows[i - 1].info_c);
    }
}

TEST(Curves, ItemList) {
  const auto items = parse_item_list("1:0:0.1;2.5:-1:0.2");
  ASSERT_EQ(items.size(), 2u);
  EXPECT_EQ(items[1].a, 2.5);
  EXPECT_THROW(parse_item_list("1:0"), Error);
}
