#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "swarmtrack/core.hpp"
#include "swarmtrack/optim.hpp"

namespace swarmtrack {

enum class TestFunction { Sphere, Rastrigin, Constant };

inline std::string_view to_string(TestFunction f) {
  switch (f) {
    case TestFunction::Sphere: return "sphere";
    case TestFunction::Rastrigin: return "rastrigin";
    case TestFunction::Constant: return "constant";
  }
  return "?";
}

inline std::optional<TestFunction> parse_test_function(std::string_view s) {
  if (s == "sphere") return TestFunction::Sphere;
  if (s == "rastrigin") return TestFunction::Rastrigin;
  if (s == "constant") return TestFunction::Constant;
  return std::nullopt;
}

inline double sphere(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc;
}

inline double rastrigin(std::span<const double> x) {
  double acc = 10.0 * static_cast<double>(x.size());
  for (double v : x) acc += v * v - 10.0 * std::cos(2.0 * std::numbers::pi * v);
  return acc;
}

inline double evaluate(TestFunction f, const TargetState& s) {
  switch (f) {
    case TestFunction::Sphere: return sphere(s.values());
    case TestFunction::Rastrigin: return rastrigin(s.values());
    case TestFunction::Constant: return 1.0;
  }
  return 0.0;
}

struct OptimizeSuite {
  Algorithm algorithm = Algorithm::AWQPSO;
  TestFunction function = TestFunction::Sphere;
  int runs = 100;
  int dim = 2;
  int population = 50;
  int t_max = 50;
  /// Search box [-half_width, half_width] per dimension.
  double half_width = 5.12;
  double success_threshold = 1e-3;
  std::uint64_t seed = 0;
  OptimizerVariant variant;

  void validate() const {
    if (runs <= 0) throw std::invalid_argument("optimize: runs must be positive");
    if (dim <= 0 || dim > static_cast<int>(TargetState::kMaxDim)) throw std::invalid_argument("optimize: dim out of range");
    if (population <= 0) throw std::invalid_argument("optimize: population must be positive");
    if (t_max <= 0) throw std::invalid_argument("optimize: t_max must be positive");
    if (!(half_width > 0.0)) throw std::invalid_argument("optimize: half_width must be positive");
  }
};

struct RunOutcome {
  std::uint64_t seed = 0;
  double initial_best = 0.0;
  double final_best = 0.0;
  int iterations = 0;
};

struct OptimizeStats {
  std::vector<RunOutcome> runs;
  double q0 = 0.0;
  double q25 = 0.0;
  double q50 = 0.0;
  double q75 = 0.0;
  double q100 = 0.0;
  double mean = 0.0;
  int successes = 0;

  [[nodiscard]] double success_rate() const {
    return runs.empty() ? 0.0 : static_cast<double>(successes) / static_cast<double>(runs.size());
  }
};

/// Linear-interpolation quantile of sorted data.
inline double quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile: empty input");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(sorted.size() - 1, lo + 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

/// Run r uses seed `suite.seed + r`; initial positions are uniform in the box.
inline OptimizeStats run_optimize_suite(const OptimizeSuite& suite) {
  suite.validate();
  OptimizerVariant variant = suite.variant;
  variant.tag = suite.algorithm;
  const Bounds bounds(static_cast<std::size_t>(suite.dim), Interval{-suite.half_width, suite.half_width});
  OptimizeStats stats;
  std::vector<double> finals;
  for (int r = 0; r < suite.runs; ++r) {
    const std::uint64_t seed = suite.seed + static_cast<std::uint64_t>(r);
    RandomStream init(seed, stream_key(0x1417));
    std::vector<TargetState> start;
    for (int i = 0; i < suite.population; ++i) {
      TargetState s(static_cast<std::size_t>(suite.dim));
      for (auto& v : s) v = uniform_in(init, -suite.half_width, suite.half_width);
      start.push_back(s);
    }
    Swarm swarm = make_swarm(start, bounds);
    const auto cost = [&](const TargetState& s) { return evaluate(suite.function, s); };
    double initial = std::numeric_limits<double>::infinity();
    for (const auto& s : start) initial = std::min(initial, cost(s));
    const Swarm out = run_optimizer(variant, cost, OptimizerLimits{suite.t_max}, std::move(swarm), seed, 1);
    stats.runs.push_back({seed, initial, out.global_best_cost, out.iteration});
    finals.push_back(out.global_best_cost);
    if (out.global_best_cost < suite.success_threshold) ++stats.successes;
  }
  std::sort(finals.begin(), finals.end());
  stats.q0 = finals.front();
  stats.q25 = quantile(finals, 0.25);
  stats.q50 = quantile(finals, 0.5);
  stats.q75 = quantile(finals, 0.75);
  stats.q100 = finals.back();
  double acc = 0.0;
  for (double v : finals) acc += v;
  stats.mean = acc / static_cast<double>(finals.size());
  return stats;
}

}  // namespace swarmtrack
