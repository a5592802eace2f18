#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "swarmtrack/core.hpp"

namespace swarmtrack {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tracker and optimizer parameters.
struct TrackerConfig {
  int population = 300;
  double c1 = 2.05;
  double c2 = 2.05;
  double omega = 0.5;
  int t_max = 50;
  double t0 = 100.0;
  double beta_hi = 0.9;
  double beta_lo = 0.5;
  double fitness_stop_fraction = 0.95;
  double ess_threshold_fraction = 0.5;
  // Rank weights of the weighted mean best.
  double alpha_max = 1.5;
  double alpha_min = 0.5;
  /// Per-dimension variances of the Gaussian motion diffusion. Empty means
  /// the default for the active state dimension (see resolved_diffusion).
  std::vector<double> motion_diffusion;
  /// Per-dimension [lo, hi]. Empty means derived from the frame extent.
  Bounds search_bounds;
  std::uint64_t seed = 0;
  /// Diagonal variances of the color feature (one per RGB channel).
  std::vector<double> color_variance{400.0, 400.0, 400.0};
  /// Diagonal variances of the point measurement model (x, y).
  std::vector<double> point_variance{16.0, 16.0};
  /// Track (x, y, w, h) instead of (x, y) with a fixed box extent.
  bool box_mode = false;
  /// Pair the largest memory weight with the most recent velocity.
  bool pair_descending = false;
  /// Per-frame swarm error with the particle-count division outside the root.
  bool rmse_literal = false;

  [[nodiscard]] std::size_t state_dim() const noexcept { return box_mode ? 4 : 2; }

  [[nodiscard]] std::vector<double> resolved_diffusion() const {
    if (!motion_diffusion.empty()) return motion_diffusion;
    if (box_mode) return {25.0, 25.0, 1.0, 1.0};
    return {25.0, 25.0};
  }

  /// Search bounds for a W x H frame: centers inside the frame, extents in
  /// [1, W] x [1, H].
  [[nodiscard]] Bounds resolved_bounds(double width, double height) const {
    if (!search_bounds.empty()) return search_bounds;
    Bounds b{{0.0, width}, {0.0, height}};
    if (box_mode) {
      b.push_back({1.0, width});
      b.push_back({1.0, height});
    }
    return b;
  }

  void validate() const {
    auto fail = [](const std::string& what) { throw ConfigError("config: " + what); };
    if (population <= 0) fail("population must be positive");
    if (t_max <= 0) fail("t_max must be positive");
    if (!(t0 > 0.0)) fail("t0 must be positive");
    if (!(beta_hi > beta_lo)) fail("beta_hi must exceed beta_lo");
    if (!(beta_lo > 0.0)) fail("beta_lo must be positive");
    if (!(fitness_stop_fraction > 0.0 && fitness_stop_fraction <= 1.0)) fail("fitness_stop_fraction must lie in (0, 1]");
    if (!(ess_threshold_fraction > 0.0 && ess_threshold_fraction <= 1.0)) fail("ess_threshold_fraction must lie in (0, 1]");
    if (!(alpha_max >= alpha_min && alpha_min > 0.0)) fail("require alpha_max >= alpha_min > 0");
    if (!motion_diffusion.empty() && motion_diffusion.size() != state_dim()) fail("motion_diffusion size must match the state dimension");
    for (double v : motion_diffusion) {
      if (!(v >= 0.0) || !std::isfinite(v)) fail("motion_diffusion entries must be finite and >= 0");
    }
    if (!search_bounds.empty()) {
      if (search_bounds.size() != state_dim()) fail("search_bounds size must match the state dimension");
      try {
        validate_bounds(search_bounds);
      } catch (const std::invalid_argument& e) {
        fail(e.what());
      }
    }
    if (color_variance.size() != 3) fail("color_variance needs 3 entries");
    for (double v : color_variance) {
      if (!(v > 0.0)) fail("color_variance entries must be positive");
    }
    if (point_variance.size() != 2) fail("point_variance needs 2 entries");
    for (double v : point_variance) {
      if (!(v > 0.0)) fail("point_variance entries must be positive");
    }
  }
};

inline nlohmann::json to_json(const TrackerConfig& c) {
  nlohmann::json bounds = nlohmann::json::array();
  for (const auto& b : c.search_bounds) bounds.push_back({b.lo, b.hi});
  return {
      {"population", c.population},
      {"c1", c.c1},
      {"c2", c.c2},
      {"omega", c.omega},
      {"t_max", c.t_max},
      {"t0", c.t0},
      {"beta_hi", c.beta_hi},
      {"beta_lo", c.beta_lo},
      {"fitness_stop_fraction", c.fitness_stop_fraction},
      {"ess_threshold_fraction", c.ess_threshold_fraction},
      {"alpha_max", c.alpha_max},
      {"alpha_min", c.alpha_min},
      {"motion_diffusion", c.resolved_diffusion()},
      {"search_bounds", bounds},
      {"seed", c.seed},
      {"color_variance", c.color_variance},
      {"point_variance", c.point_variance},
      {"box_mode", c.box_mode},
      {"pair_descending", c.pair_descending},
      {"rmse_literal", c.rmse_literal},
  };
}

/// Applies the keys of `j` on top of the defaults. Every key is optional;
/// unknown keys are an error.
inline TrackerConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  TrackerConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "population") c.population = value.get<int>();
      else if (key == "c1") c.c1 = value.get<double>();
      else if (key == "c2") c.c2 = value.get<double>();
      else if (key == "omega") c.omega = value.get<double>();
      else if (key == "t_max") c.t_max = value.get<int>();
      else if (key == "t0") c.t0 = value.get<double>();
      else if (key == "beta_hi") c.beta_hi = value.get<double>();
      else if (key == "beta_lo") c.beta_lo = value.get<double>();
      else if (key == "fitness_stop_fraction") c.fitness_stop_fraction = value.get<double>();
      else if (key == "ess_threshold_fraction") c.ess_threshold_fraction = value.get<double>();
      else if (key == "alpha_max") c.alpha_max = value.get<double>();
      else if (key == "alpha_min") c.alpha_min = value.get<double>();
      else if (key == "motion_diffusion") c.motion_diffusion = value.get<std::vector<double>>();
      else if (key == "search_bounds") {
        c.search_bounds.clear();
        for (const auto& pair : value) {
          const auto lohi = pair.get<std::vector<double>>();
          if (lohi.size() != 2) throw ConfigError("config: search_bounds entries must be [lo, hi]");
          c.search_bounds.push_back({lohi[0], lohi[1]});
        }
      }
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "color_variance") c.color_variance = value.get<std::vector<double>>();
      else if (key == "point_variance") c.point_variance = value.get<std::vector<double>>();
      else if (key == "box_mode") c.box_mode = value.get<bool>();
      else if (key == "pair_descending") c.pair_descending = value.get<bool>();
      else if (key == "rmse_literal") c.rmse_literal = value.get<bool>();
      else throw ConfigError("config: unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

inline TrackerConfig parse_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return config_from_json(j);
}

inline TrackerConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace swarmtrack
