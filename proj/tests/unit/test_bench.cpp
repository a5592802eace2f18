#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "swarmtrack/bench.hpp"

using namespace swarmtrack;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("swarmtrack_bench_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

BenchPlan small_plan() {
  BenchPlan plan;
  plan.scenarios = default_bench_scenarios(12);
  plan.scenarios.resize(2);
  plan.trials = 2;
  plan.config.population = 20;
  plan.config.t_max = 5;
  plan.seed_base = 1000;
  plan.normalized_timing = true;
  return plan;
}

}  // namespace

TEST(TrialSeed, ScenarioInHighBits) {
  EXPECT_EQ(trial_seed(5, 0, 3), 8u);
  EXPECT_EQ(trial_seed(5, 2, 3), (std::uint64_t{2} << 32) + 8u);
}

TEST(BenchPlan, Validation) {
  BenchPlan plan = small_plan();
  EXPECT_NO_THROW(plan.validate());
  plan.scenarios[1].name = plan.scenarios[0].name;
  EXPECT_THROW(plan.validate(), std::invalid_argument);
  plan = small_plan();
  plan.cet_values = {20.0, 0.0};
  EXPECT_THROW(plan.validate(), std::invalid_argument);
  plan = small_plan();
  plan.trials = 0;
  EXPECT_THROW(plan.validate(), std::invalid_argument);
}

TEST(DefaultScenarios, CoverEveryKind) {
  const auto s = default_bench_scenarios(50);
  ASSERT_EQ(s.size(), 6u);
  for (const auto& b : s) EXPECT_EQ(b.name, to_string(b.scenario.kind));
}

TEST(RunBench, CellsInOrderWithSeeds) {
  const BenchPlan plan = small_plan();
  const auto r = run_bench(plan);
  ASSERT_EQ(r.cells.size(), 4u);
  EXPECT_EQ(r.failures(), 0);
  for (std::size_t i = 0; i < r.cells.size(); ++i) {
    const auto& c = r.cells[i];
    EXPECT_EQ(c.scenario, i / 2);
    EXPECT_EQ(c.trial, static_cast<int>(i % 2));
    EXPECT_EQ(c.seed, trial_seed(1000, c.scenario, c.trial));
    ASSERT_EQ(c.outcomes.size(), 3u);
    for (const auto& o : c.outcomes) {
      EXPECT_EQ(o.report.seed, c.seed);
      EXPECT_EQ(o.lost.size(), 2u);
      EXPECT_GT(o.fps, 0.0);
    }
  }
}

TEST(RunBench, FailingCellIsRecordedNotThrown) {
  BenchPlan plan = small_plan();
  plan.scenarios[1].scenario.start = {0.0, 0.0};  // box starts outside the frame
  const auto r = run_bench(plan);
  EXPECT_EQ(r.failures(), 2);
  EXPECT_FALSE(r.cells[0].failed());
  EXPECT_TRUE(r.cells[2].failed());
  const auto dir = scratch("failing");
  write_bench_bundle(dir, plan, r);
  const auto manifest = nlohmann::json::parse(slurp(dir / "bundle.json"));
  EXPECT_EQ(manifest["failures"].size(), 2u);
  fs::remove_all(dir);
}

TEST(Bundle, LayoutAndHeaders) {
  BenchPlan plan = small_plan();
  plan.cell_reports = true;
  const auto dir = scratch("layout");
  const auto files = write_bench_bundle(dir, plan, run_bench(plan));
  for (const auto& f : files) EXPECT_TRUE(fs::exists(dir / f)) << f;
  const std::string name = plan.scenarios[0].name;
  EXPECT_TRUE(fs::exists(dir / "plots" / (name + "_precision.svg")));
  EXPECT_TRUE(fs::exists(dir / "curves" / name / "AWQPSO-PF_recall.csv"));
  EXPECT_TRUE(fs::exists(dir / "cells" / name / "trial_1_PF.json"));

  const std::string summary = slurp(dir / "summary.csv");
  EXPECT_EQ(summary.substr(0, summary.find('\n')),
            "scenario,tracker,trials,failed,frames,fps_mean,fps_std,rmse_mean,lost_cet20_mean,lost_cet20_max,lost_cet30_mean,"
            "lost_cet30_max");
  EXPECT_EQ(std::count(summary.begin(), summary.end(), '\n'), 1 + 2 * 3);
  const std::string trials = slurp(dir / "trials.csv");
  EXPECT_EQ(std::count(trials.begin(), trials.end(), '\n'), 1 + 2 * 2 * 3);

  const auto manifest = nlohmann::json::parse(slurp(dir / "bundle.json"));
  EXPECT_EQ(manifest["schema"], kBenchSchema);
  EXPECT_EQ(manifest["plan"]["trials"], 2);
  EXPECT_EQ(manifest["config"]["population"], 20);

  const auto cell = nlohmann::json::parse(slurp(dir / "cells" / name / "trial_1_PF.json"));
  EXPECT_EQ(cell["schema"], kReportSchema);
  EXPECT_EQ(cell["frames"].size(), 12u);
  EXPECT_EQ(cell["wall_clock_seconds"], 0.0);
  fs::remove_all(dir);
}

TEST(Bundle, SvgCarriesCurvesAndProvenance) {
  const BenchPlan plan = small_plan();
  const auto dir = scratch("svg");
  write_bench_bundle(dir, plan, run_bench(plan));
  const std::string svg = slurp(dir / "plots" / (plan.scenarios[0].name + "_recall.svg"));
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  std::size_t polylines = 0;
  for (auto p = svg.find("<polyline"); p != std::string::npos; p = svg.find("<polyline", p + 1)) ++polylines;
  EXPECT_EQ(polylines, 3u);
  EXPECT_NE(svg.find("AWQPSO-PF"), std::string::npos);
  EXPECT_NE(svg.find("<metadata>"), std::string::npos);
  EXPECT_NE(svg.find("seed_base"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Bundle, CurveFilesAreMonotone) {
  const BenchPlan plan = small_plan();
  const auto result = run_bench(plan);
  for (std::size_t s = 0; s < plan.scenarios.size(); ++s) {
    for (std::size_t k = 0; k < plan.trackers.size(); ++k) {
      const auto c = pooled_curves(result, s, k);
      for (std::size_t i = 1; i < c.precision.size(); ++i) EXPECT_GE(c.precision[i].value, c.precision[i - 1].value);
      for (std::size_t i = 1; i < c.recall.size(); ++i) EXPECT_LE(c.recall[i].value, c.recall[i - 1].value);
    }
  }
}

TEST(Bundle, ByteIdenticalAcrossRunsAndWorkerCounts) {
  BenchPlan plan = small_plan();
  plan.cell_reports = true;
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  const auto files = write_bench_bundle(a, plan, run_bench(plan));
  plan.workers = 3;
  const auto files_b = write_bench_bundle(b, plan, run_bench(plan));
  ASSERT_EQ(files, files_b);
  for (const auto& f : files) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Stats, SampleStandardDeviation) {
  EXPECT_DOUBLE_EQ(detail::mean_of(std::vector<double>{1.0, 2.0, 3.0}), 2.0);
  EXPECT_DOUBLE_EQ(detail::stddev_of(std::vector<double>{1.0, 2.0, 3.0}), 1.0);
  EXPECT_EQ(detail::stddev_of(std::vector<double>{4.0}), 0.0);
}

TEST(Xml, Escapes) {
  EXPECT_EQ(detail::xml_escape("a<b & \"c\">"), "a&lt;b &amp; &quot;c&quot;&gt;");
}
