#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "swarmtrack/config.hpp"
#include "swarmtrack/core.hpp"
#include "swarmtrack/filter.hpp"
#include "swarmtrack/metrics.hpp"
#include "swarmtrack/scenesim.hpp"

namespace swarmtrack {

inline constexpr std::string_view kReportSchema = "swarmtrack.report/1";
inline constexpr std::string_view kBenchSchema = "swarmtrack.bench/1";

/// Structured results file for one tracker run. With `normalized_timing` the
/// wall-clock and FPS fields are written as 0 so that reruns compare equal.
inline nlohmann::json report_to_json(const TrackReport& r, const TrackerConfig& config, const nlohmann::json& scenario,
                                     std::span<const double> cet_values, bool normalized_timing = false) {
  using nlohmann::json;
  json frames = json::array();
  for (std::size_t k = 0; k < r.per_frame_estimates.size(); ++k) {
    const auto& b = r.per_frame_boxes[k];
    frames.push_back({
        {"index", k},
        {"estimate", std::vector<double>(r.per_frame_estimates[k].begin(), r.per_frame_estimates[k].end())},
        {"swarm_error", r.per_frame_swarm_errors[k]},
        {"center_error", r.per_frame_center_errors[k]},
        {"box", {b.cx, b.cy, b.w, b.h}},
        {"overlap", r.per_frame_overlaps[k]},
        {"iterations", r.per_frame_iterations[k]},
        {"resampled", static_cast<bool>(r.per_frame_resampled[k])},
        {"degenerate", static_cast<bool>(r.per_frame_degenerate[k])},
    });
  }
  json lost = json::object();
  for (double cet : cet_values) lost[format_number(cet)] = lost_targets(r.per_frame_swarm_errors, cet);
  const double seconds = normalized_timing ? 0.0 : r.wall_clock_seconds;
  return {
      {"schema", kReportSchema},
      {"tracker", r.tracker_tag},
      {"seed", r.seed},
      {"frames_processed", r.frames_processed},
      {"wall_clock_seconds", seconds},
      {"fps", seconds > 0.0 ? fps(r.frames_processed, seconds) : 0.0},
      {"sequence_rmse", sequence_rmse(r)},
      {"lost_targets", lost},
      {"config", to_json(config)},
      {"scenario", scenario},
      {"frames", frames},
  };
}

struct BenchScenario {
  std::string name;
  Scenario scenario;
};

inline std::vector<BenchScenario> default_bench_scenarios(int frame_count, SequenceMode mode = SequenceMode::Raster) {
  std::vector<BenchScenario> out;
  for (auto kind : {ScenarioKind::ConstantVelocity, ScenarioKind::Sinusoidal, ScenarioKind::AbruptTurn,
                    ScenarioKind::DistractorCross, ScenarioKind::Occlusion, ScenarioKind::ScaleChange}) {
    out.push_back({std::string(to_string(kind)), preset_scenario(kind, frame_count, 0, mode)});
  }
  return out;
}

struct BenchPlan {
  std::vector<TrackerKind> trackers{TrackerKind::PF, TrackerKind::PSO_PF, TrackerKind::AWQPSO_PF};
  std::vector<BenchScenario> scenarios;
  int trials = 30;
  std::vector<double> cet_values{20.0, 30.0};
  std::uint64_t seed_base = 0;
  TrackerConfig config;
  int workers = 1;
  bool normalized_timing = false;
  /// Also write one full report per (scenario, trial, tracker).
  bool cell_reports = false;

  void validate() const {
    if (trackers.empty()) throw std::invalid_argument("bench: no trackers");
    if (scenarios.empty()) throw std::invalid_argument("bench: no scenarios");
    if (trials <= 0) throw std::invalid_argument("bench: trials must be positive");
    if (workers <= 0) throw std::invalid_argument("bench: workers must be positive");
    for (double c : cet_values) {
      if (!(c > 0.0)) throw std::invalid_argument("bench: CET values must be positive");
    }
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
      if (scenarios[i].name.empty()) throw std::invalid_argument("bench: scenario without a name");
      for (std::size_t j = 0; j < i; ++j) {
        if (scenarios[j].name == scenarios[i].name) throw std::invalid_argument("bench: duplicate scenario name " + scenarios[i].name);
      }
      scenarios[i].scenario.validate();
    }
    config.validate();
  }
};

/// Seed of trial `t` of scenario `s`: scenario index in the high 32 bits.
inline std::uint64_t trial_seed(std::uint64_t seed_base, std::size_t s, int t) {
  return seed_base + (static_cast<std::uint64_t>(s) << 32) + static_cast<std::uint64_t>(t);
}

struct TrackerOutcome {
  TrackerKind tracker = TrackerKind::PF;
  TrackReport report;
  std::vector<int> lost;  // per CET value
  double fps = 0.0;
};

struct BenchCell {
  std::size_t scenario = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  std::vector<TrackerOutcome> outcomes;
  std::string error;

  [[nodiscard]] bool failed() const noexcept { return !error.empty(); }
};

struct BenchResult {
  std::vector<BenchCell> cells;  // scenario-major, then trial

  [[nodiscard]] int failures() const {
    return static_cast<int>(std::count_if(cells.begin(), cells.end(), [](const BenchCell& c) { return c.failed(); }));
  }
};

/// Runs one cell: renders the trial's sequence once, then every tracker in
/// plan order on the calling thread.
inline BenchCell run_bench_cell(const BenchPlan& plan, std::size_t s, int t) {
  BenchCell cell;
  cell.scenario = s;
  cell.trial = t;
  cell.seed = trial_seed(plan.seed_base, s, t);
  try {
    Scenario scenario = plan.scenarios[s].scenario;
    scenario.seed = cell.seed;
    const Sequence seq = simulate(scenario);
    TrackerConfig config = plan.config;
    config.seed = cell.seed;
    for (auto tracker : plan.trackers) {
      TrackerOutcome out;
      out.tracker = tracker;
      out.report = track_sequence(seq, tracker, config);
      for (double cet : plan.cet_values) out.lost.push_back(lost_targets(out.report.per_frame_swarm_errors, cet));
      const double seconds = std::max(out.report.wall_clock_seconds, 1e-9);
      out.fps = fps(out.report.frames_processed, seconds);
      cell.outcomes.push_back(std::move(out));
    }
  } catch (const std::exception& e) {
    cell.outcomes.clear();
    cell.error = e.what();
  }
  return cell;
}

/// Runs every (scenario, trial) cell on `plan.workers` threads. Results are
/// stored by cell index, so they do not depend on the worker count.
inline BenchResult run_bench(const BenchPlan& plan) {
  plan.validate();
  const std::size_t total = plan.scenarios.size() * static_cast<std::size_t>(plan.trials);
  BenchResult result;
  result.cells.resize(total);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < total; i = next++) {
      result.cells[i] = run_bench_cell(plan, i / static_cast<std::size_t>(plan.trials),
                                       static_cast<int>(i % static_cast<std::size_t>(plan.trials)));
    }
  };
  const int n = std::min<int>(plan.workers, static_cast<int>(total));
  std::vector<std::thread> threads;
  for (int w = 1; w < n; ++w) threads.emplace_back(work);
  work();
  for (auto& th : threads) th.join();
  return result;
}

// ---------------------------------------------------------------------------
// Bundle output
// ---------------------------------------------------------------------------

struct Series {
  std::string label;
  std::vector<CurvePoint> points;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  double x_min = 0.0;
  double x_max = 1.0;
  double y_min = 0.0;
  double y_max = 1.0;
};

namespace detail {

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline void write_atomic(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw SequenceIoError("cannot write " + tmp.string());
    out << text;
    if (!out) throw SequenceIoError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline double mean_of(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return v.empty() ? 0.0 : acc / static_cast<double>(v.size());
}

/// Sample standard deviation; 0 for fewer than two values.
inline double stddev_of(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

}  // namespace detail

/// Line plot with one polyline per series, axes with ticks, and a legend.
/// `metadata` is embedded verbatim (escaped) in a <metadata> element.
inline std::string render_svg(const PlotSpec& spec, std::span<const Series> series, const std::string& metadata = {}) {
  constexpr double W = 640.0, H = 420.0, left = 70.0, right = 170.0, top = 40.0, bottom = 60.0;
  constexpr std::string_view palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  const double pw = W - left - right;
  const double ph = H - top - bottom;
  auto px = [&](double x) { return left + pw * (x - spec.x_min) / (spec.x_max - spec.x_min); };
  auto py = [&](double y) { return top + ph * (1.0 - (y - spec.y_min) / (spec.y_max - spec.y_min)); };
  auto f2 = [](double v) { return format_fixed(v, 2); };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" viewBox=\"0 0 640 420\" font-family=\"sans-serif\" font-size=\"12\">\n";
  if (!metadata.empty()) s += "<metadata>" + detail::xml_escape(metadata) + "</metadata>\n";
  s += "<rect width=\"640\" height=\"420\" fill=\"white\"/>\n";
  s += "<text x=\"" + f2(left + pw / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" + detail::xml_escape(spec.title) + "</text>\n";
  s += "<g stroke=\"black\" stroke-width=\"1\">\n";
  s += "<line x1=\"" + f2(left) + "\" y1=\"" + f2(top + ph) + "\" x2=\"" + f2(left + pw) + "\" y2=\"" + f2(top + ph) + "\"/>\n";
  s += "<line x1=\"" + f2(left) + "\" y1=\"" + f2(top) + "\" x2=\"" + f2(left) + "\" y2=\"" + f2(top + ph) + "\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = spec.x_min + (spec.x_max - spec.x_min) * i / 5.0;
    const double yv = spec.y_min + (spec.y_max - spec.y_min) * i / 5.0;
    s += "<line x1=\"" + f2(px(xv)) + "\" y1=\"" + f2(top + ph) + "\" x2=\"" + f2(px(xv)) + "\" y2=\"" + f2(top + ph + 5) + "\"/>\n";
    s += "<line x1=\"" + f2(left - 5) + "\" y1=\"" + f2(py(yv)) + "\" x2=\"" + f2(left) + "\" y2=\"" + f2(py(yv)) + "\"/>\n";
  }
  s += "</g>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = spec.x_min + (spec.x_max - spec.x_min) * i / 5.0;
    const double yv = spec.y_min + (spec.y_max - spec.y_min) * i / 5.0;
    s += "<text x=\"" + f2(px(xv)) + "\" y=\"" + f2(top + ph + 19) + "\" text-anchor=\"middle\">" + format_number(xv) + "</text>\n";
    s += "<text x=\"" + f2(left - 8) + "\" y=\"" + f2(py(yv) + 4) + "\" text-anchor=\"end\">" + format_number(yv) + "</text>\n";
  }
  s += "<text x=\"" + f2(left + pw / 2) + "\" y=\"" + f2(H - 16) + "\" text-anchor=\"middle\">" + detail::xml_escape(spec.x_label) + "</text>\n";
  s += "<text x=\"18\" y=\"" + f2(top + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " + f2(top + ph / 2) + ")\">" +
       detail::xml_escape(spec.y_label) + "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto color = palette[k % std::size(palette)];
    s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < series[k].points.size(); ++i) {
      if (i) s += ' ';
      s += f2(px(series[k].points[i].threshold)) + "," + f2(py(series[k].points[i].value));
    }
    s += "\"/>\n";
    const double ly = top + 12 + 20.0 * static_cast<double>(k);
    const double lx = left + pw + 16;
    s += "<line x1=\"" + f2(lx) + "\" y1=\"" + f2(ly) + "\" x2=\"" + f2(lx + 24) + "\" y2=\"" + f2(ly) + "\" stroke=\"" + std::string(color) +
         "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + f2(lx + 30) + "\" y=\"" + f2(ly + 4) + "\">" + detail::xml_escape(series[k].label) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

inline std::vector<double> precision_thresholds() { return threshold_grid(0.0, 50.0, 100); }
inline std::vector<double> recall_thresholds() { return threshold_grid(0.0, 1.0, 50); }

/// Curves of one (scenario, tracker), pooling frames over all successful trials.
struct PooledCurves {
  std::vector<CurvePoint> precision;
  std::vector<CurvePoint> recall;
};

inline PooledCurves pooled_curves(const BenchResult& result, std::size_t scenario, std::size_t tracker_slot) {
  std::vector<double> errors;
  std::vector<double> overlaps;
  for (const auto& cell : result.cells) {
    if (cell.scenario != scenario || cell.failed()) continue;
    const auto& r = cell.outcomes[tracker_slot].report;
    errors.insert(errors.end(), r.per_frame_swarm_errors.begin(), r.per_frame_swarm_errors.end());
    overlaps.insert(overlaps.end(), r.per_frame_overlaps.begin(), r.per_frame_overlaps.end());
  }
  if (errors.empty()) return {};
  return {precision_curve(errors, precision_thresholds()), recall_curve(overlaps, recall_thresholds())};
}

inline std::string curve_csv(std::span<const CurvePoint> points) {
  std::string s = "threshold,value\n";
  for (const auto& p : points) s += format_number(p.threshold) + "," + format_number(p.value) + "\n";
  return s;
}

/// Writes the bench bundle under `dir`:
///   bundle.json                 plan, resolved config, seeds, file list, failures
///   summary.csv                 per (scenario, tracker): FPS mean/std, lost targets per CET
///   trials.csv                  per (scenario, trial, tracker) with its seed
///   curves/<scenario>/<tracker>_{precision,recall}.csv
///   plots/<scenario>_{precision,recall}.svg
///   cells/<scenario>/trial_<t>_<tracker>.json   (when plan.cell_reports)
/// Returns the relative paths written, in order.
inline std::vector<std::string> write_bench_bundle(const std::filesystem::path& dir, const BenchPlan& plan,
                                                   const BenchResult& result) {
  namespace fs = std::filesystem;
  using nlohmann::json;
  const bool norm = plan.normalized_timing;
  std::vector<std::string> files;
  auto emit = [&](const std::string& rel, const std::string& text) {
    detail::write_atomic(dir / rel, text);
    files.push_back(rel);
  };

  std::string cet_cols;
  for (double c : plan.cet_values) cet_cols += ",lost_cet" + format_number(c) + "_mean,lost_cet" + format_number(c) + "_max";
  std::string summary = "scenario,tracker,trials,failed,frames,fps_mean,fps_std,rmse_mean" + cet_cols + "\n";
  std::string trials = "scenario,trial,seed,tracker,fps,sequence_rmse";
  for (double c : plan.cet_values) trials += ",lost_cet" + format_number(c);
  trials += ",error\n";

  json plan_json = {
      {"trials", plan.trials},
      {"seed_base", plan.seed_base},
      {"cet_values", plan.cet_values},
      {"normalized_timing", norm},
  };
  for (auto t : plan.trackers) plan_json["trackers"].push_back(std::string(to_string(t)));
  json scenarios = json::array();
  for (const auto& sc : plan.scenarios) scenarios.push_back({{"name", sc.name}, {"scenario", to_json(sc.scenario)}});
  const json provenance = {{"config", to_json(plan.config)}, {"seed_base", plan.seed_base}};

  for (std::size_t s = 0; s < plan.scenarios.size(); ++s) {
    const std::string& name = plan.scenarios[s].name;
    int failed = 0;
    for (const auto& cell : result.cells) {
      if (cell.scenario != s) continue;
      if (cell.failed()) {
        ++failed;
        std::string row = name + "," + std::to_string(cell.trial) + "," + std::to_string(cell.seed) + ",,,";
        for (std::size_t c = 0; c < plan.cet_values.size(); ++c) row += ",";
        std::string msg = cell.error;
        std::replace(msg.begin(), msg.end(), ',', ';');
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        trials += row + "," + msg + "\n";
        continue;
      }
      for (const auto& o : cell.outcomes) {
        trials += name + "," + std::to_string(cell.trial) + "," + std::to_string(cell.seed) + "," + o.report.tracker_tag + "," +
                  format_number(norm ? 0.0 : o.fps) + "," + format_number(sequence_rmse(o.report));
        for (int l : o.lost) trials += "," + std::to_string(l);
        trials += ",\n";
      }
    }

    std::vector<Series> precision_series;
    std::vector<Series> recall_series;
    for (std::size_t k = 0; k < plan.trackers.size(); ++k) {
      const std::string tag(to_string(plan.trackers[k]));
      std::vector<double> fps_values;
      std::vector<double> rmse_values;
      std::vector<std::vector<double>> lost(plan.cet_values.size());
      int frames = 0;
      for (const auto& cell : result.cells) {
        if (cell.scenario != s || cell.failed()) continue;
        const auto& o = cell.outcomes[k];
        fps_values.push_back(o.fps);
        rmse_values.push_back(sequence_rmse(o.report));
        for (std::size_t c = 0; c < o.lost.size(); ++c) lost[c].push_back(o.lost[c]);
        frames = o.report.frames_processed;
      }
      summary += name + "," + tag + "," + std::to_string(fps_values.size()) + "," + std::to_string(failed) + "," + std::to_string(frames) + "," +
                 format_number(norm ? 0.0 : detail::mean_of(fps_values)) + "," + format_number(norm ? 0.0 : detail::stddev_of(fps_values)) +
                 "," + format_number(detail::mean_of(rmse_values));
      for (const auto& l : lost) {
        summary += "," + format_number(detail::mean_of(l)) + "," + format_number(l.empty() ? 0.0 : *std::max_element(l.begin(), l.end()));
      }
      summary += "\n";

      const PooledCurves curves = pooled_curves(result, s, k);
      if (curves.precision.empty()) continue;
      emit("curves/" + name + "/" + tag + "_precision.csv", curve_csv(curves.precision));
      emit("curves/" + name + "/" + tag + "_recall.csv", curve_csv(curves.recall));
      precision_series.push_back({tag, curves.precision});
      recall_series.push_back({tag, curves.recall});
    }
    json meta = provenance;
    meta["scenario"] = to_json(plan.scenarios[s].scenario);
    const auto pt = precision_thresholds();
    const auto rt = recall_thresholds();
    emit("plots/" + name + "_precision.svg",
         render_svg({"Precision: " + name, "Center error threshold (px)", "Precision", pt.front(), pt.back(), 0.0, 1.0}, precision_series, meta.dump()));
    emit("plots/" + name + "_recall.svg",
         render_svg({"Recall: " + name, "Overlap threshold", "Recall", rt.front(), rt.back(), 0.0, 1.0}, recall_series, meta.dump()));

    if (plan.cell_reports) {
      for (const auto& cell : result.cells) {
        if (cell.scenario != s || cell.failed()) continue;
        TrackerConfig config = plan.config;
        config.seed = cell.seed;
        Scenario scenario = plan.scenarios[s].scenario;
        scenario.seed = cell.seed;
        for (const auto& o : cell.outcomes) {
          emit("cells/" + name + "/trial_" + std::to_string(cell.trial) + "_" + o.report.tracker_tag + ".json",
               report_to_json(o.report, config, to_json(scenario), plan.cet_values, norm).dump(1) + "\n");
        }
      }
    }
  }
  emit("summary.csv", summary);
  emit("trials.csv", trials);

  json failures = json::array();
  for (const auto& cell : result.cells) {
    if (cell.failed()) failures.push_back({{"scenario", plan.scenarios[cell.scenario].name}, {"trial", cell.trial}, {"seed", cell.seed}, {"error", cell.error}});
  }
  json manifest = {
      {"schema", kBenchSchema},
      {"plan", plan_json},
      {"config", to_json(plan.config)},
      {"scenarios", scenarios},
      {"seed_rule", "seed = seed_base + (scenario_index << 32) + trial"},
      {"failures", failures},
      {"files", files},
  };
  emit("bundle.json", manifest.dump(1) + "\n");
  return files;
}

}  // namespace swarmtrack
