// swarmtrack: scene generation, tracking, benchmarking, optimizer sanity runs.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "swarmtrack/bench.hpp"
#include "swarmtrack/config.hpp"
#include "swarmtrack/filter.hpp"
#include "swarmtrack/functions.hpp"
#include "swarmtrack/scenesim.hpp"

namespace fs = std::filesystem;
using namespace swarmtrack;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

/// Bad input from the user: flags, tags, config contents.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string config_path;
  std::string out;
};

TrackerConfig resolve_config(const Globals& g) {
  TrackerConfig c = g.config_path.empty() ? TrackerConfig{} : load_config(g.config_path);
  if (g.seed) c.seed = *g.seed;
  c.validate();
  return c;
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SequenceIoError("cannot write " + path.string());
  out << text;
  if (!out) throw SequenceIoError("write failed: " + path.string());
}

std::vector<double> parse_list(const std::string& text) {
  try {
    return detail::split_numbers(text);
  } catch (const SequenceIoError&) {
    throw UsageError("expected a comma-separated list of numbers, got '" + text + "'");
  }
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string kind = "distractor_cross";
  std::string mode = "raster";
  int frames = 301;
  std::optional<double> noise;
  std::optional<double> measurement_sigma;
};

int cmd_simulate(const Globals& g, const SimulateArgs& a) {
  const auto kind = parse_scenario_kind(a.kind);
  if (!kind) throw UsageError("unknown scenario kind '" + a.kind + "'");
  const auto mode = parse_sequence_mode(a.mode);
  if (!mode) throw UsageError("unknown mode '" + a.mode + "' (raster, point)");
  if (a.frames <= 0) throw UsageError("--frames must be positive");
  if (g.out.empty()) throw UsageError("--out is required");
  Scenario s = preset_scenario(*kind, a.frames, g.seed.value_or(0), *mode);
  if (a.noise) s.pixel_noise_sigma = *a.noise;
  if (a.measurement_sigma) s.measurement_sigma = *a.measurement_sigma;
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  write_sequence(g.out, simulate(s));
  std::cout << g.out << "\n";
  return 0;
}

struct TrackArgs {
  std::string sequence;
  std::string tracker;
  std::string model;
  std::string cet = "20,30";
  bool normalized_timing = false;
};

int cmd_track(const Globals& g, const TrackArgs& a) {
  const auto tracker = parse_tracker(a.tracker);
  if (!tracker) throw UsageError("unknown tracker '" + a.tracker + "'; valid tags: " + std::string(kTrackerTags));
  TrackOptions options;
  if (a.model == "color") options.observation_model = ObservationModelKind::Color;
  else if (a.model == "point") options.observation_model = ObservationModelKind::Point;
  else if (!a.model.empty()) throw UsageError("unknown observation model '" + a.model + "' (color, point)");
  const TrackerConfig config = resolve_config(g);
  const auto cets = parse_list(a.cet);
  const Sequence seq = read_sequence(a.sequence);
  TrackReport report;
  try {
    report = track_sequence(seq, *tracker, config, options);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const std::string text = report_to_json(report, config, seq.scenario, cets, a.normalized_timing).dump(1) + "\n";
  if (g.out.empty()) {
    std::cout << text;
  } else {
    write_file(g.out, text);
    std::cout << g.out << "\n";
  }
  return 0;
}

struct BenchArgs {
  int trials = 30;
  int frames = 301;
  std::string mode = "raster";
  std::vector<std::string> scenarios;
  std::vector<std::string> trackers;
  std::string cet = "20,30";
  std::optional<int> population;
  int workers = 1;
  bool normalized_timing = false;
  bool cell_reports = false;
};

int cmd_bench(const Globals& g, const BenchArgs& a) {
  if (g.out.empty()) throw UsageError("--out is required");
  const auto mode = parse_sequence_mode(a.mode);
  if (!mode) throw UsageError("unknown mode '" + a.mode + "' (raster, point)");
  if (a.frames <= 0) throw UsageError("--frames must be positive");
  BenchPlan plan;
  plan.config = resolve_config(g);
  if (a.population) plan.config.population = *a.population;
  plan.seed_base = g.seed.value_or(0);
  plan.trials = a.trials;
  plan.workers = a.workers;
  plan.normalized_timing = a.normalized_timing;
  plan.cell_reports = a.cell_reports;
  plan.cet_values = parse_list(a.cet);
  if (!a.trackers.empty()) {
    plan.trackers.clear();
    for (const auto& t : a.trackers) {
      const auto k = parse_tracker(t);
      if (!k) throw UsageError("unknown tracker '" + t + "'; valid tags: " + std::string(kTrackerTags));
      plan.trackers.push_back(*k);
    }
  }
  for (auto& sc : default_bench_scenarios(a.frames, *mode)) {
    if (a.scenarios.empty() || std::find(a.scenarios.begin(), a.scenarios.end(), sc.name) != a.scenarios.end()) {
      plan.scenarios.push_back(std::move(sc));
    }
  }
  for (const auto& name : a.scenarios) {
    if (!parse_scenario_kind(name)) throw UsageError("unknown scenario '" + name + "'");
  }
  try {
    plan.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const BenchResult result = run_bench(plan);
  write_bench_bundle(g.out, plan, result);
  std::cout << g.out << "\n";
  if (const int failed = result.failures()) {
    std::cerr << "bench: " << failed << " cell(s) failed; see bundle.json\n";
    return kExitRuntime;
  }
  return 0;
}

struct OptimizeArgs {
  std::string variant = "AWQPSO";
  std::string function = "sphere";
  int runs = 100;
  int dim = 2;
  std::optional<int> population;
  std::optional<int> t_max;
  double threshold = 1e-3;
  double half_width = 5.12;
};

int cmd_optimize(const Globals& g, const OptimizeArgs& a) {
  const auto algorithm = parse_algorithm(a.variant);
  if (!algorithm) throw UsageError("unknown variant '" + a.variant + "' (PSO, QPSO, AWQPSO)");
  const auto function = parse_test_function(a.function);
  if (!function) throw UsageError("unknown function '" + a.function + "' (sphere, rastrigin, constant)");
  const TrackerConfig config = resolve_config(g);
  OptimizeSuite suite;
  suite.algorithm = *algorithm;
  suite.function = *function;
  suite.runs = a.runs;
  suite.dim = a.dim;
  suite.population = a.population.value_or(50);
  suite.t_max = a.t_max.value_or(config.t_max);
  suite.success_threshold = a.threshold;
  suite.half_width = a.half_width;
  suite.seed = config.seed;
  suite.variant = OptimizerVariant::from_config(*algorithm, config);
  OptimizeStats stats;
  try {
    stats = run_optimize_suite(suite);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& r : stats.runs) {
    runs.push_back({{"seed", r.seed}, {"initial_best", r.initial_best}, {"final_best", r.final_best}, {"iterations", r.iterations}});
  }
  const nlohmann::json out = {
      {"schema", "swarmtrack.optimize/1"},
      {"variant", std::string(to_string(suite.algorithm))},
      {"function", std::string(to_string(suite.function))},
      {"dim", suite.dim},
      {"population", suite.population},
      {"t_max", suite.t_max},
      {"seed", suite.seed},
      {"success_threshold", suite.success_threshold},
      {"success_rate", stats.success_rate()},
      {"best_cost_quantiles", {{"min", stats.q0}, {"q25", stats.q25}, {"median", stats.q50}, {"q75", stats.q75}, {"max", stats.q100}}},
      {"best_cost_mean", stats.mean},
      {"config", to_json(config)},
      {"runs", runs},
  };
  const std::string text = out.dump(1) + "\n";
  if (g.out.empty()) {
    std::cout << text;
  } else {
    write_file(g.out, text);
    std::cout << g.out << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Particle-filter trackers with swarm-optimized resampling"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Base seed");
  app.add_option("--config", g.config_path, "Tracker config file (JSON)");
  app.add_option("--out", g.out, "Output path");

  SimulateArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Render a synthetic sequence to disk");
  simulate_cmd->add_option("--kind", sim.kind, "constant_velocity, sinusoidal, abrupt_turn, distractor_cross, occlusion, scale_change")
      ->capture_default_str();
  simulate_cmd->add_option("--mode", sim.mode, "raster or point")->capture_default_str();
  simulate_cmd->add_option("--frames", sim.frames, "Frame count")->capture_default_str();
  simulate_cmd->add_option("--noise", sim.noise, "Pixel noise sigma");
  simulate_cmd->add_option("--measurement-sigma", sim.measurement_sigma, "Point-mode measurement sigma");

  TrackArgs trk;
  auto* track_cmd = app.add_subcommand("track", "Run one tracker over a sequence");
  track_cmd->add_option("--sequence", trk.sequence, "Sequence directory")->required();
  track_cmd->add_option("--tracker", trk.tracker, std::string(kTrackerTags))->required();
  track_cmd->add_option("--model", trk.model, "Observation model: color or point");
  track_cmd->add_option("--cet", trk.cet, "Center error thresholds, comma separated")->capture_default_str();
  track_cmd->add_flag("--normalized-timing", trk.normalized_timing, "Write timing fields as 0");

  BenchArgs bch;
  auto* bench_cmd = app.add_subcommand("bench", "Run the tracker x scenario x trial matrix");
  bench_cmd->add_option("--trials", bch.trials, "Trials per scenario")->capture_default_str();
  bench_cmd->add_option("--frames", bch.frames, "Frames per sequence")->capture_default_str();
  bench_cmd->add_option("--mode", bch.mode, "raster or point")->capture_default_str();
  bench_cmd->add_option("--scenarios", bch.scenarios, "Scenario kinds (default: all)")->delimiter(',');
  bench_cmd->add_option("--trackers", bch.trackers, "Tracker tags (default: all)")->delimiter(',');
  bench_cmd->add_option("--cet", bch.cet, "Center error thresholds, comma separated")->capture_default_str();
  bench_cmd->add_option("--population", bch.population, "Override the config population");
  bench_cmd->add_option("--workers", bch.workers, "Worker threads")->capture_default_str();
  bench_cmd->add_flag("--normalized-timing", bch.normalized_timing, "Write timing fields as 0");
  bench_cmd->add_flag("--cell-reports", bch.cell_reports, "Write a full report per cell");

  OptimizeArgs opt;
  auto* optimize_cmd = app.add_subcommand("optimize", "Optimizer sanity runs on test functions");
  optimize_cmd->add_option("--variant", opt.variant, "PSO, QPSO or AWQPSO")->capture_default_str();
  optimize_cmd->add_option("--function", opt.function, "sphere, rastrigin or constant")->capture_default_str();
  optimize_cmd->add_option("--runs", opt.runs, "Number of seeded runs")->capture_default_str();
  optimize_cmd->add_option("--dim", opt.dim, "Dimension")->capture_default_str();
  optimize_cmd->add_option("--population", opt.population, "Swarm size (default 50)");
  optimize_cmd->add_option("--t-max", opt.t_max, "Iterations (default: config t_max)");
  optimize_cmd->add_option("--threshold", opt.threshold, "Success threshold on the final cost")->capture_default_str();
  optimize_cmd->add_option("--half-width", opt.half_width, "Search box half width")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (simulate_cmd->parsed()) return cmd_simulate(g, sim);
    if (track_cmd->parsed()) return cmd_track(g, trk);
    if (bench_cmd->parsed()) return cmd_bench(g, bch);
    if (optimize_cmd->parsed()) return cmd_optimize(g, opt);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitValidation;
}
