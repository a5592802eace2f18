#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "swarmtrack/core.hpp"
#include "swarmtrack/image.hpp"
#include "swarmtrack/observe.hpp"

/// Synthetic scenes with exact ground truth: a colored target box moving over
/// a flat background, optionally with a look-alike distractor, an occluder or
/// a scale ramp, rendered either as noisy RGB rasters or as noisy point
/// measurements.
namespace swarmtrack {

enum class ScenarioKind { ConstantVelocity, Sinusoidal, AbruptTurn, DistractorCross, Occlusion, ScaleChange };
enum class SequenceMode { Raster, Point };

inline std::string_view to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::ConstantVelocity: return "constant_velocity";
    case ScenarioKind::Sinusoidal: return "sinusoidal";
    case ScenarioKind::AbruptTurn: return "abrupt_turn";
    case ScenarioKind::DistractorCross: return "distractor_cross";
    case ScenarioKind::Occlusion: return "occlusion";
    case ScenarioKind::ScaleChange: return "scale_change";
  }
  return "?";
}

inline std::optional<ScenarioKind> parse_scenario_kind(std::string_view s) {
  for (auto k : {ScenarioKind::ConstantVelocity, ScenarioKind::Sinusoidal, ScenarioKind::AbruptTurn,
                 ScenarioKind::DistractorCross, ScenarioKind::Occlusion, ScenarioKind::ScaleChange}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

inline std::string_view to_string(SequenceMode m) { return m == SequenceMode::Raster ? "raster" : "point"; }

inline std::optional<SequenceMode> parse_sequence_mode(std::string_view s) {
  if (s == "raster") return SequenceMode::Raster;
  if (s == "point") return SequenceMode::Point;
  return std::nullopt;
}

using Color8 = std::array<std::uint8_t, 3>;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

struct Scenario {
  ScenarioKind kind = ScenarioKind::ConstantVelocity;
  SequenceMode mode = SequenceMode::Raster;
  int frame_count = 301;
  int width = 320;
  int height = 240;
  Color8 target_color{200, 40, 40};
  Color8 background_color{70, 90, 110};
  Color8 distractor_color{180, 60, 50};
  Color8 occluder_color{40, 40, 40};
  double pixel_noise_sigma = 8.0;
  /// Point mode: standard deviation of the position measurement.
  double measurement_sigma = 2.0;
  /// Turn frame, crossing frame, or first occluded frame, depending on kind.
  std::vector<int> event_frames;
  std::uint64_t seed = 0;

  Vec2 start{40.0, 120.0};
  Vec2 velocity{1.0, 0.0};
  double box_w = 24.0;
  double box_h = 36.0;
  /// Sinusoidal: oscillation added on top of the linear path, x at the base
  /// frequency and y at twice it.
  Vec2 amplitude{0.0, 0.0};
  double period = 100.0;
  /// Sinusoidal: phase offset in radians.
  double phase = 0.0;
  /// DistractorCross: distractor velocity.
  Vec2 distractor_velocity{-2.0, 0.5};
  /// Occlusion: number of hidden frames starting at the event frame.
  int occlusion_length = 20;
  /// ScaleChange: box extent multiplier reached at the last frame.
  double scale_factor = 1.5;

  void validate() const {
    if (frame_count <= 0) throw std::invalid_argument("scenario: frame_count must be positive");
    if (width <= 0 || height <= 0) throw std::invalid_argument("scenario: frame size must be positive");
    if (!(pixel_noise_sigma >= 0.0) || !(measurement_sigma >= 0.0)) {
      throw std::invalid_argument("scenario: noise levels must be >= 0");
    }
    if (!(box_w > 0.0 && box_h > 0.0)) throw std::invalid_argument("scenario: box extent must be positive");
    for (int e : event_frames) {
      if (e < 0 || e >= frame_count) throw std::invalid_argument("scenario: event frame outside the sequence");
    }
    const bool needs_event = kind == ScenarioKind::AbruptTurn || kind == ScenarioKind::DistractorCross ||
                             kind == ScenarioKind::Occlusion;
    if (needs_event && event_frames.empty()) throw std::invalid_argument("scenario: this kind needs an event frame");
    if (kind == ScenarioKind::Sinusoidal && !(period > 0.0)) throw std::invalid_argument("scenario: period must be positive");
    if (kind == ScenarioKind::ScaleChange && !(scale_factor > 0.0)) {
      throw std::invalid_argument("scenario: scale_factor must be positive");
    }
    if (kind == ScenarioKind::Occlusion && occlusion_length <= 0) {
      throw std::invalid_argument("scenario: occlusion_length must be positive");
    }
  }
};

/// Stock scenario of each kind for a given length, sized for a 320x240 frame.
/// Motion is periodic where possible, so difficulty does not depend on the
/// sequence length.
inline Scenario preset_scenario(ScenarioKind kind, int frame_count = 301, std::uint64_t seed = 0,
                                SequenceMode mode = SequenceMode::Raster) {
  Scenario s;
  s.kind = kind;
  s.mode = mode;
  s.frame_count = frame_count;
  s.seed = seed;
  const int mid = std::max(0, frame_count / 2);
  const double span = std::max(1, frame_count - 1);
  switch (kind) {
    case ScenarioKind::ConstantVelocity:
      s.start = {40.0, 120.0};
      s.velocity = {240.0 / span, 0.0};
      break;
    case ScenarioKind::Sinusoidal:
      s.start = {160.0, 120.0};
      s.velocity = {0.0, 0.0};
      s.amplitude = {100.0, 40.0};
      s.period = 120.0;
      s.phase = -std::numbers::pi / 2.0;
      break;
    case ScenarioKind::AbruptTurn:
      s.start = {40.0, 100.0};
      s.velocity = {240.0 / std::max(1.0, static_cast<double>(mid)), 40.0 / std::max(1.0, static_cast<double>(mid))};
      s.event_frames = {mid};
      break;
    case ScenarioKind::DistractorCross:
      s.start = {160.0, 120.0};
      s.velocity = {0.0, 0.0};
      // Starts at rest at the left turning point; peak speed about 11 px/frame.
      s.amplitude = {110.0, 0.0};
      s.period = 60.0;
      s.phase = -std::numbers::pi / 2.0;
      s.event_frames = {mid};
      s.distractor_velocity = {-2.0, 0.4};
      break;
    case ScenarioKind::Occlusion:
      s.start = {40.0, 120.0};
      s.velocity = {240.0 / span, 0.0};
      s.event_frames = {mid};
      s.occlusion_length = std::max(1, frame_count / 15);
      break;
    case ScenarioKind::ScaleChange:
      s.start = {60.0, 120.0};
      s.velocity = {200.0 / span, 0.0};
      s.scale_factor = 1.8;
      break;
  }
  return s;
}

/// Scripted boxes of a scenario. `distractor` is empty unless the scenario
/// has one; `occluded[f]` marks frames where the occluder hides the target.
struct Trajectory {
  std::vector<BoundingBox> target;
  std::vector<BoundingBox> distractor;
  std::vector<bool> occluded;
};

namespace detail {

inline Vec2 scripted_center(const Scenario& s, int f) {
  const double t = f;
  switch (s.kind) {
    case ScenarioKind::AbruptTurn: {
      const int e = s.event_frames.front();
      const double forward = std::min(t, static_cast<double>(e));
      const double back = std::max(0.0, t - e);
      return {s.start.x + s.velocity.x * (forward - back), s.start.y + s.velocity.y * (forward - back)};
    }
    case ScenarioKind::Sinusoidal:
    case ScenarioKind::DistractorCross: {
      const double angle = 2.0 * std::numbers::pi * t / s.period + s.phase;
      return {s.start.x + s.velocity.x * t + s.amplitude.x * std::sin(angle),
              s.start.y + s.velocity.y * t + s.amplitude.y * std::sin(2.0 * angle)};
    }
    default:
      return {s.start.x + s.velocity.x * t, s.start.y + s.velocity.y * t};
  }
}

inline bool inside_frame(const BoundingBox& b, int width, int height) {
  constexpr double eps = 1e-9;
  return b.left() >= -eps && b.top() >= -eps && b.right() <= width + eps && b.bottom() <= height + eps;
}

}  // namespace detail

inline Trajectory generate_trajectory(const Scenario& s) {
  s.validate();
  Trajectory out;
  out.target.reserve(static_cast<std::size_t>(s.frame_count));
  out.occluded.assign(static_cast<std::size_t>(s.frame_count), false);
  for (int f = 0; f < s.frame_count; ++f) {
    const Vec2 c = detail::scripted_center(s, f);
    double scale = 1.0;
    if (s.kind == ScenarioKind::ScaleChange && s.frame_count > 1) {
      scale = 1.0 + (s.scale_factor - 1.0) * f / static_cast<double>(s.frame_count - 1);
    }
    BoundingBox box{c.x, c.y, s.box_w * scale, s.box_h * scale};
    if (!detail::inside_frame(box, s.width, s.height)) {
      throw std::invalid_argument("scenario: target leaves the frame at frame " + std::to_string(f));
    }
    out.target.push_back(box);
  }
  if (s.kind == ScenarioKind::DistractorCross) {
    const int e = s.event_frames.front();
    const BoundingBox meet = out.target[static_cast<std::size_t>(e)];
    for (int f = 0; f < s.frame_count; ++f) {
      const double dt = f - e;
      out.distractor.push_back({meet.cx + s.distractor_velocity.x * dt, meet.cy + s.distractor_velocity.y * dt, s.box_w, s.box_h});
    }
  }
  if (s.kind == ScenarioKind::Occlusion) {
    const int e = s.event_frames.front();
    for (int f = e; f < std::min(s.frame_count, e + s.occlusion_length); ++f) out.occluded[static_cast<std::size_t>(f)] = true;
  }
  return out;
}

struct Sequence {
  SequenceMode mode = SequenceMode::Raster;
  int width = 0;
  int height = 0;
  std::vector<RasterFrame> frames;
  std::vector<std::optional<PointObservation>> observations;
  std::vector<BoundingBox> ground_truth;
  /// Echo of the generating scenario, carried into manifests and reports.
  nlohmann::json scenario = nlohmann::json::object();

  [[nodiscard]] std::size_t frame_count() const noexcept { return ground_truth.size(); }
};

namespace detail {

/// Pixels whose centers fall inside the box.
inline void paint_box(RasterFrame& frame, const BoundingBox& b, Color8 color) {
  const int x0 = std::max(0, static_cast<int>(std::ceil(b.left() - 0.5)));
  const int x1 = std::min(frame.width - 1, static_cast<int>(std::floor(b.right() - 0.5)));
  const int y0 = std::max(0, static_cast<int>(std::ceil(b.top() - 0.5)));
  const int y1 = std::min(frame.height - 1, static_cast<int>(std::floor(b.bottom() - 0.5)));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) frame.set(x, y, color);
  }
}

/// Inverse normal CDF at the midpoints of 2^16 equal-probability bins.
/// Pixel noise is quantized to 8 bits, so 16-bit resolution is ample and
/// one 64-bit draw yields four samples.
inline const std::vector<double>& normal_quantile_table() {
  static const std::vector<double> table = [] {
    constexpr std::size_t kBins = 1u << 16;
    std::vector<double> t(kBins);
    for (std::size_t b = 0; b < kBins; ++b) {
      const double p = (static_cast<double>(b) + 0.5) / static_cast<double>(kBins);
      double lo = -10.0;
      double hi = 10.0;
      for (int it = 0; it < 64; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (0.5 * std::erfc(-mid / std::numbers::sqrt2) < p) lo = mid;
        else hi = mid;
      }
      t[b] = 0.5 * (lo + hi);
    }
    return t;
  }();
  return table;
}

inline std::uint8_t to_channel(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::nearbyint(v), 0.0, 255.0));
}

}  // namespace detail

inline nlohmann::json to_json(const Scenario& s);

inline Sequence render_sequence(const Scenario& s, const Trajectory& traj) {
  s.validate();
  if (traj.target.size() != static_cast<std::size_t>(s.frame_count)) {
    throw std::invalid_argument("render_sequence: trajectory length does not match the scenario");
  }
  Sequence seq;
  seq.mode = s.mode;
  seq.width = s.width;
  seq.height = s.height;
  seq.ground_truth = traj.target;
  seq.scenario = to_json(s);
  for (int f = 0; f < s.frame_count; ++f) {
    const auto fi = static_cast<std::size_t>(f);
    RandomStream rng(s.seed, stream_key(0x5CE7E, static_cast<std::uint64_t>(f)));
    if (s.mode == SequenceMode::Point) {
      const auto& b = traj.target[fi];
      PointObservation obs{b.cx, b.cy};
      if (s.measurement_sigma > 0.0) {
        obs.x += s.measurement_sigma * standard_normal(rng);
        obs.y += s.measurement_sigma * standard_normal(rng);
      }
      seq.observations.emplace_back(obs);
      continue;
    }
    RasterFrame frame(s.width, s.height);
    for (int y = 0; y < s.height; ++y) {
      for (int x = 0; x < s.width; ++x) frame.set(x, y, s.background_color);
    }
    detail::paint_box(frame, traj.target[fi], s.target_color);
    if (!traj.distractor.empty()) detail::paint_box(frame, traj.distractor[fi], s.distractor_color);
    if (!traj.occluded.empty() && traj.occluded[fi]) {
      auto occluder = traj.target[fi];
      occluder.w += 4.0;
      occluder.h += 4.0;
      detail::paint_box(frame, occluder, s.occluder_color);
    }
    if (s.pixel_noise_sigma > 0.0) {
      const auto& quantile = detail::normal_quantile_table();
      std::uint64_t bits = 0;
      for (std::size_t p = 0; p < frame.rgb.size(); ++p) {
        if (p % 4 == 0) bits = rng();
        const double z = quantile[(bits >> (16 * (p % 4))) & 0xFFFFu];
        frame.rgb[p] = detail::to_channel(frame.rgb[p] + s.pixel_noise_sigma * z);
      }
    }
    seq.frames.push_back(std::move(frame));
  }
  return seq;
}

inline Sequence simulate(const Scenario& s) { return render_sequence(s, generate_trajectory(s)); }

// ---------------------------------------------------------------------------
// Scenario <-> JSON
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const Scenario& s) {
  auto color = [](Color8 c) { return nlohmann::json::array({c[0], c[1], c[2]}); };
  auto vec = [](Vec2 v) { return nlohmann::json::array({v.x, v.y}); };
  return {
      {"kind", std::string(to_string(s.kind))},
      {"mode", std::string(to_string(s.mode))},
      {"frame_count", s.frame_count},
      {"width", s.width},
      {"height", s.height},
      {"target_color", color(s.target_color)},
      {"background_color", color(s.background_color)},
      {"distractor_color", color(s.distractor_color)},
      {"occluder_color", color(s.occluder_color)},
      {"pixel_noise_sigma", s.pixel_noise_sigma},
      {"measurement_sigma", s.measurement_sigma},
      {"event_frames", s.event_frames},
      {"seed", s.seed},
      {"start", vec(s.start)},
      {"velocity", vec(s.velocity)},
      {"box_w", s.box_w},
      {"box_h", s.box_h},
      {"amplitude", vec(s.amplitude)},
      {"period", s.period},
      {"phase", s.phase},
      {"distractor_velocity", vec(s.distractor_velocity)},
      {"occlusion_length", s.occlusion_length},
      {"scale_factor", s.scale_factor},
  };
}

inline Scenario scenario_from_json(const nlohmann::json& j) {
  Scenario s;
  auto color = [](const nlohmann::json& c) { return Color8{c.at(0).get<std::uint8_t>(), c.at(1).get<std::uint8_t>(), c.at(2).get<std::uint8_t>()}; };
  auto vec = [](const nlohmann::json& v) { return Vec2{v.at(0).get<double>(), v.at(1).get<double>()}; };
  const auto kind = parse_scenario_kind(j.at("kind").get<std::string>());
  const auto mode = parse_sequence_mode(j.at("mode").get<std::string>());
  if (!kind || !mode) throw std::invalid_argument("scenario: unknown kind or mode");
  s.kind = *kind;
  s.mode = *mode;
  s.frame_count = j.at("frame_count").get<int>();
  s.width = j.at("width").get<int>();
  s.height = j.at("height").get<int>();
  s.target_color = color(j.at("target_color"));
  s.background_color = color(j.at("background_color"));
  s.distractor_color = color(j.at("distractor_color"));
  s.occluder_color = color(j.at("occluder_color"));
  s.pixel_noise_sigma = j.at("pixel_noise_sigma").get<double>();
  s.measurement_sigma = j.at("measurement_sigma").get<double>();
  s.event_frames = j.at("event_frames").get<std::vector<int>>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.start = vec(j.at("start"));
  s.velocity = vec(j.at("velocity"));
  s.box_w = j.at("box_w").get<double>();
  s.box_h = j.at("box_h").get<double>();
  s.amplitude = vec(j.at("amplitude"));
  s.period = j.at("period").get<double>();
  s.phase = j.at("phase").get<double>();
  s.distractor_velocity = vec(j.at("distractor_velocity"));
  s.occlusion_length = j.at("occlusion_length").get<int>();
  s.scale_factor = j.at("scale_factor").get<double>();
  return s;
}

// ---------------------------------------------------------------------------
// Sequence files
//
//   manifest.json        schema, mode, size, frame count, scenario echo
//   frames/NNNNNN.rgb    raster mode: W*H*3 bytes, RGB8, row-major
//   observations.txt     point mode: frame_index,x,y
//   ground_truth.txt     frame_index,cx,cy,w,h
// ---------------------------------------------------------------------------

inline constexpr std::string_view kSequenceSchema = "swarmtrack.sequence/1";

class SequenceIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string frame_file_name(std::size_t index) {
  std::string digits = std::to_string(index);
  if (digits.size() < 6) digits.insert(0, 6 - digits.size(), '0');
  return digits + ".rgb";
}

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SequenceIoError("cannot write " + path.string());
  out << text;
  if (!out) throw SequenceIoError("failed writing " + path.string());
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SequenceIoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::vector<double> split_numbers(const std::string& line) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    const auto comma = line.find(',', pos);
    const auto end = comma == std::string::npos ? line.size() : comma;
    double v = 0.0;
    const auto* first = line.data() + pos;
    const auto* last = line.data() + end;
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last) throw SequenceIoError("malformed record: " + line);
    out.push_back(v);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

inline std::vector<std::vector<double>> read_records(const std::filesystem::path& path, std::size_t fields) {
  std::istringstream in(read_text(path));
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto row = split_numbers(line);
    if (row.size() != fields) throw SequenceIoError("wrong field count in " + path.string() + ": " + line);
    if (static_cast<std::size_t>(row[0]) != rows.size()) throw SequenceIoError("out-of-order record in " + path.string());
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

inline void write_sequence(const std::filesystem::path& dir, const Sequence& seq) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw SequenceIoError("cannot create " + dir.string() + ": " + ec.message());

  nlohmann::json manifest = {
      {"schema", std::string(kSequenceSchema)},
      {"mode", std::string(to_string(seq.mode))},
      {"width", seq.width},
      {"height", seq.height},
      {"frame_count", seq.frame_count()},
      {"scenario", seq.scenario},
  };
  detail::write_text(dir / "manifest.json", manifest.dump(2) + "\n");

  std::string gt;
  for (std::size_t f = 0; f < seq.ground_truth.size(); ++f) {
    const auto& b = seq.ground_truth[f];
    gt += std::to_string(f) + "," + format_number(b.cx) + "," + format_number(b.cy) + "," + format_number(b.w) + "," +
          format_number(b.h) + "\n";
  }
  detail::write_text(dir / "ground_truth.txt", gt);

  if (seq.mode == SequenceMode::Raster) {
    fs::create_directories(dir / "frames", ec);
    if (ec) throw SequenceIoError("cannot create frames directory: " + ec.message());
    for (std::size_t f = 0; f < seq.frames.size(); ++f) {
      const auto& fr = seq.frames[f];
      detail::write_text(dir / "frames" / frame_file_name(f),
                         std::string(reinterpret_cast<const char*>(fr.rgb.data()), fr.rgb.size()));
    }
  } else {
    std::string obs;
    for (std::size_t f = 0; f < seq.observations.size(); ++f) {
      if (!seq.observations[f]) continue;
      obs += std::to_string(f) + "," + format_number(seq.observations[f]->x) + "," + format_number(seq.observations[f]->y) + "\n";
    }
    detail::write_text(dir / "observations.txt", obs);
  }
}

inline Sequence read_sequence(const std::filesystem::path& dir) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(detail::read_text(dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw SequenceIoError(std::string("bad manifest: ") + e.what());
  }
  Sequence seq;
  std::size_t count = 0;
  try {
    if (manifest.at("schema").get<std::string>() != kSequenceSchema) throw SequenceIoError("unsupported sequence schema");
    const auto mode = parse_sequence_mode(manifest.at("mode").get<std::string>());
    if (!mode) throw SequenceIoError("unknown sequence mode");
    seq.mode = *mode;
    seq.width = manifest.at("width").get<int>();
    seq.height = manifest.at("height").get<int>();
    seq.scenario = manifest.value("scenario", nlohmann::json::object());
    count = manifest.at("frame_count").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw SequenceIoError(std::string("bad manifest: ") + e.what());
  }

  for (const auto& row : detail::read_records(dir / "ground_truth.txt", 5)) {
    seq.ground_truth.push_back({row[1], row[2], row[3], row[4]});
  }
  if (seq.ground_truth.size() != count) throw SequenceIoError("ground truth length does not match the manifest");

  if (seq.mode == SequenceMode::Raster) {
    const std::size_t bytes = static_cast<std::size_t>(seq.width) * static_cast<std::size_t>(seq.height) * 3;
    for (std::size_t f = 0; f < count; ++f) {
      const auto raw = detail::read_text(dir / "frames" / frame_file_name(f));
      if (raw.size() != bytes) throw SequenceIoError("frame " + std::to_string(f) + " has the wrong size");
      RasterFrame fr(seq.width, seq.height);
      std::copy(raw.begin(), raw.end(), reinterpret_cast<char*>(fr.rgb.data()));
      seq.frames.push_back(std::move(fr));
    }
  } else {
    seq.observations.assign(count, std::nullopt);
    std::istringstream in(detail::read_text(dir / "observations.txt"));
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto row = detail::split_numbers(line);
      if (row.size() != 3) throw SequenceIoError("malformed observation: " + line);
      const auto f = static_cast<std::size_t>(row[0]);
      if (f >= count) throw SequenceIoError("observation beyond the last frame");
      seq.observations[f] = PointObservation{row[1], row[2]};
    }
  }
  return seq;
}

}  // namespace swarmtrack
