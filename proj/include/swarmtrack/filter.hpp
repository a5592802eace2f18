#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "swarmtrack/config.hpp"
#include "swarmtrack/core.hpp"
#include "swarmtrack/image.hpp"
#include "swarmtrack/metrics.hpp"
#include "swarmtrack/observe.hpp"
#include "swarmtrack/optim.hpp"
#include "swarmtrack/scenesim.hpp"

/// Particle-filter tracking pipeline:
///
///   propagate (memory-guided drift + Gaussian diffusion)
///     -> optional swarm redistribution (PSO or annealed weighted QPSO)
///     -> importance weighting -> posterior mean
///     -> velocity memory update -> ESS-gated systematic resampling
namespace swarmtrack {

// ---------------------------------------------------------------------------
// Weights and resampling
// ---------------------------------------------------------------------------

struct ImportanceWeights {
  std::vector<double> weights;
  /// All likelihoods were zero; `weights` fell back to uniform.
  bool degenerate = false;
};

/// Normalizes nonnegative likelihoods into weights summing to one.
inline ImportanceWeights importance_weights(std::span<const double> likelihoods) {
  if (likelihoods.empty()) throw std::invalid_argument("importance_weights: empty input");
  double total = 0.0;
  for (double l : likelihoods) {
    if (!std::isfinite(l) || l < 0.0) throw std::invalid_argument("importance_weights: likelihoods must be finite and >= 0");
    total += l;
  }
  ImportanceWeights out;
  const auto n = likelihoods.size();
  if (!(total > 0.0)) {
    out.weights.assign(n, 1.0 / static_cast<double>(n));
    out.degenerate = true;
    return out;
  }
  out.weights.reserve(n);
  for (double l : likelihoods) out.weights.push_back(l / total);
  return out;
}

inline double effective_sample_size(std::span<const double> weights) {
  if (weights.empty()) throw std::invalid_argument("effective_sample_size: empty input");
  double sum = 0.0;
  double sq = 0.0;
  for (double w : weights) {
    sum += w;
    sq += w * w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("effective_sample_size: weights are not normalized");
  const double n = static_cast<double>(weights.size());
  return std::clamp(1.0 / sq, 1.0, n);
}

/// Systematic selection: N points u0 + j/N, u0 in [0, 1/N), each picking
/// the first particle whose cumulative weight exceeds it.
inline std::vector<std::size_t> systematic_ancestors(std::span<const double> weights, double u0) {
  const std::size_t n = weights.size();
  std::vector<std::size_t> ancestors;
  ancestors.reserve(n);
  const double step = 1.0 / static_cast<double>(n);
  std::size_t i = 0;
  double cumulative = weights.empty() ? 0.0 : weights[0];
  for (std::size_t j = 0; j < n; ++j) {
    const double point = u0 + static_cast<double>(j) * step;
    while (cumulative <= point && i + 1 < n) cumulative += weights[++i];
    ancestors.push_back(i);
  }
  return ancestors;
}

template <UniformSource R>
Swarm sir_resample(Swarm swarm, R& rng) {
  const std::size_t n = swarm.size();
  if (n == 0) return swarm;
  std::vector<double> weights;
  weights.reserve(n);
  for (const auto& p : swarm.particles) weights.push_back(p.weight);
  const double u0 = static_cast<double>(rng.uniform()) / static_cast<double>(n);
  const auto ancestors = systematic_ancestors(weights, u0);
  std::vector<Particle> next;
  next.reserve(n);
  for (auto a : ancestors) {
    next.push_back(swarm.particles[a]);
    next.back().weight = 1.0 / static_cast<double>(n);
  }
  swarm.particles = std::move(next);
  return swarm;
}

/// Posterior mean of the weighted particle set.
inline TargetState estimate_state(const Swarm& swarm) {
  if (swarm.particles.empty()) throw std::invalid_argument("estimate_state: empty swarm");
  TargetState mean(swarm.dim());
  for (const auto& p : swarm.particles) {
    for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += p.weight * p.state[d];
  }
  return mean;
}

// ---------------------------------------------------------------------------
// Motion model
// ---------------------------------------------------------------------------

/// Up to three most recent per-frame velocities, oldest first.
struct VelocityMemory {
  static constexpr std::size_t kDepth = 3;
  std::size_t dim = 2;
  std::vector<TargetState> recent;

  void push(const TargetState& v) {
    recent.push_back(v);
    if (recent.size() > kDepth) recent.erase(recent.begin());
  }
};

inline double speed(const TargetState& v) {
  double acc = 0.0;
  for (double c : v) acc += c * c;
  return std::sqrt(acc);
}

/// Adaptive step size from the velocity memory. Weights are the speeds
/// normalized over the three frames, sorted; the k-th sorted weight
/// multiplies the k-th most recent velocity. Ascending order (default) puts
/// the smallest weight on the most recent velocity; `pair_descending`
/// reverses it. Zero until three velocities are stored.
inline TargetState memory_step_size(const VelocityMemory& memory, bool pair_descending = false) {
  TargetState vf(memory.dim);
  if (memory.recent.size() < VelocityMemory::kDepth) return vf;
  double total = 0.0;
  for (const auto& v : memory.recent) total += speed(v);
  if (!(total > 0.0)) return vf;
  std::array<double, VelocityMemory::kDepth> lambda{};
  for (std::size_t g = 0; g < VelocityMemory::kDepth; ++g) lambda[g] = speed(memory.recent[g]) / total;
  if (pair_descending) {
    std::sort(lambda.begin(), lambda.end(), std::greater<>());
  } else {
    std::sort(lambda.begin(), lambda.end());
  }
  for (std::size_t a = 0; a < VelocityMemory::kDepth; ++a) {
    const auto& v = memory.recent[VelocityMemory::kDepth - 1 - a];  // v_{k-a}
    for (std::size_t d = 0; d < vf.size(); ++d) vf[d] += lambda[a] * v[d];
  }
  for (auto& c : vf) c *= 2.0;
  return vf;
}

/// X' = X + Omega * v_f + g with Omega ~ U(-1, 1) and g ~ N(0, diffusion),
/// drawn per particle and dimension from `streams[i]` (Omega, then g).
template <UniformSource R>
Swarm propagate(Swarm swarm, const TargetState& step, std::span<const double> diffusion, std::span<R> streams) {
  if (streams.size() != swarm.size()) throw std::invalid_argument("propagate: one stream per particle required");
  if (diffusion.size() != swarm.dim() || step.size() != swarm.dim()) throw std::invalid_argument("propagate: dimension mismatch");
  for (double v : diffusion) {
    if (!(v >= 0.0)) throw std::invalid_argument("propagate: diffusion variances must be >= 0");
  }
  for (std::size_t i = 0; i < swarm.size(); ++i) {
    auto& p = swarm.particles[i];
    auto& rng = streams[i];
    for (std::size_t d = 0; d < p.state.size(); ++d) {
      const double omega = uniform_in(rng, -1.0, 1.0);
      const double noise = diffusion[d] > 0.0 ? std::sqrt(diffusion[d]) * standard_normal(rng) : 0.0;
      p.state[d] += omega * step[d] + noise;
    }
    p.state = detail::clamp_if_bounded(p.state, swarm.bounds);
  }
  return swarm;
}

// ---------------------------------------------------------------------------
// Tracker
// ---------------------------------------------------------------------------

enum class TrackerKind { PF, PSO_PF, AWQPSO_PF };

inline std::string_view to_string(TrackerKind k) {
  switch (k) {
    case TrackerKind::PF: return "PF";
    case TrackerKind::PSO_PF: return "PSO-PF";
    case TrackerKind::AWQPSO_PF: return "AWQPSO-PF";
  }
  return "?";
}

inline std::optional<TrackerKind> parse_tracker(std::string_view s) {
  if (s == "PF" || s == "pf") return TrackerKind::PF;
  if (s == "PSO-PF" || s == "pso-pf") return TrackerKind::PSO_PF;
  if (s == "AWQPSO-PF" || s == "awqpso-pf") return TrackerKind::AWQPSO_PF;
  return std::nullopt;
}

inline constexpr std::string_view kTrackerTags = "PF, PSO-PF, AWQPSO-PF";

/// Which likelihood to use; must agree with the sequence mode.
enum class ObservationModelKind { Color, Point };

struct FilterState {
  Swarm swarm;
  VelocityMemory memory;
  TargetState previous_estimate;
  std::size_t frame_index = 0;
};

namespace stream_purpose {
inline constexpr std::uint64_t kInit = 1;
inline constexpr std::uint64_t kPropagate = 2;
inline constexpr std::uint64_t kResample = 3;
inline constexpr std::uint64_t kOptimize = 4;
}  // namespace stream_purpose

/// Likelihood of a state against one frame's observation.
class FrameLikelihood {
 public:
  FrameLikelihood(const RasterFrame* frame, const ColorReference* color) : frame_(frame), color_(color) {}
  FrameLikelihood(std::optional<PointObservation> obs, const GaussianObservationModel* point)
      : observation_(obs), point_(point) {}

  double operator()(const TargetState& s) const {
    if (frame_ != nullptr) return color_patch_likelihood(s, *frame_, *color_);
    if (!observation_) return 0.0;  // no measurement this frame
    return point_likelihood(s, observation_, *point_);
  }

 private:
  const RasterFrame* frame_ = nullptr;
  const ColorReference* color_ = nullptr;
  std::optional<PointObservation> observation_;
  const GaussianObservationModel* point_ = nullptr;
};

inline TargetState annotation_state(const BoundingBox& b, bool box_mode) {
  return box_mode ? TargetState{b.cx, b.cy, b.w, b.h} : TargetState{b.cx, b.cy};
}

struct TrackOptions {
  /// When set, rejected unless it matches the sequence mode.
  std::optional<ObservationModelKind> observation_model;
};

/// Runs one tracker over a sequence. Particles start around the first-frame
/// annotation, spread by the motion diffusion.
inline TrackReport track_sequence(const Sequence& sequence, TrackerKind tracker, const TrackerConfig& config,
                                  const TrackOptions& options = {}) {
  using Clock = std::chrono::steady_clock;
  const auto started = Clock::now();
  config.validate();
  const std::size_t frames = sequence.frame_count();
  if (frames < 2) throw std::invalid_argument("track_sequence: need at least two frames");
  const bool raster = sequence.mode == SequenceMode::Raster;
  if (options.observation_model) {
    const bool wants_color = *options.observation_model == ObservationModelKind::Color;
    if (wants_color != raster) {
      throw std::invalid_argument(raster ? "track_sequence: point model cannot score a raster sequence"
                                         : "track_sequence: color model cannot score a point sequence");
    }
  }
  if (raster && sequence.frames.size() != frames) throw std::invalid_argument("track_sequence: frame count mismatch");
  if (!raster && sequence.observations.size() != frames) throw std::invalid_argument("track_sequence: observation count mismatch");

  const std::size_t n = static_cast<std::size_t>(config.population);
  const std::size_t dim = config.state_dim();
  const auto diffusion = config.resolved_diffusion();
  const Bounds bounds = config.resolved_bounds(sequence.width, sequence.height);
  const BoundingBox first = sequence.ground_truth.front();
  const std::uint64_t seed = config.seed;

  // Appearance reference from the annotated first frame.
  std::optional<ColorReference> color;
  std::optional<GaussianObservationModel> point;
  double peak = 0.0;
  if (raster) {
    ColorReference ref;
    const auto mean = window_mean_color(sequence.frames.front(), first);
    if (!mean) throw std::invalid_argument("track_sequence: first annotation lies outside the frame");
    ref.reference_color = *mean;
    ref.window = first;
    ref.variances = config.color_variance;
    color = ref;
    peak = ref.peak();
  } else {
    point.emplace(config.point_variance);
    peak = point->peak();
  }

  std::optional<OptimizerVariant> variant;
  if (tracker == TrackerKind::PSO_PF) variant = OptimizerVariant::from_config(Algorithm::PSO, config);
  if (tracker == TrackerKind::AWQPSO_PF) variant = OptimizerVariant::from_config(Algorithm::AWQPSO, config);
  const OptimizerLimits limits{config.t_max, -config.fitness_stop_fraction * peak};

  TrackReport report;
  report.tracker_tag = std::string(to_string(tracker));
  report.seed = seed;

  FilterState state;
  state.memory.dim = dim;
  std::vector<RandomStream> streams(n);
  std::vector<TargetState> states(n);
  std::vector<double> likelihoods(n);
  std::vector<double> prior(n, 1.0 / static_cast<double>(n));

  for (std::size_t k = 0; k < frames; ++k) {
    state.frame_index = k;
    const std::uint64_t purpose = k == 0 ? stream_purpose::kInit : stream_purpose::kPropagate;
    for (std::size_t i = 0; i < n; ++i) streams[i] = RandomStream(seed, stream_key(k, i, purpose));

    if (k == 0) {
      const auto start = annotation_state(first, config.box_mode);
      state.swarm = make_swarm(std::vector<TargetState>(n, start), bounds);
      state.swarm = propagate(std::move(state.swarm), TargetState(dim), diffusion, std::span(streams));
    } else {
      const TargetState step = memory_step_size(state.memory, config.pair_descending);
      state.swarm = propagate(std::move(state.swarm), step, diffusion, std::span(streams));
    }

    const FrameLikelihood likelihood = raster ? FrameLikelihood(&sequence.frames[k], &*color)
                                              : FrameLikelihood(sequence.observations[k], &*point);

    int iterations = 0;
    if (variant) {
      Swarm evolved = run_optimizer(*variant, [&](const TargetState& s) { return -likelihood(s); }, limits,
                                    state.swarm, seed, stream_key(k, stream_purpose::kOptimize));
      iterations = evolved.iteration;
      for (std::size_t i = 0; i < n; ++i) {
        state.swarm.particles[i].state = evolved.particles[i].personal_best;
        likelihoods[i] = std::max(0.0, -evolved.particles[i].personal_best_cost);
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) likelihoods[i] = likelihood(state.swarm.particles[i].state);
    }

    for (std::size_t i = 0; i < n; ++i) likelihoods[i] *= prior[i];
    const auto weighted = importance_weights(likelihoods);
    for (std::size_t i = 0; i < n; ++i) state.swarm.particles[i].weight = weighted.weights[i];

    const TargetState estimate = estimate_state(state.swarm);
    const BoundingBox& gt = sequence.ground_truth[k];
    const BoundingBox box = window_of(estimate, first);

    if (k > 0) {
      TargetState velocity(dim);
      for (std::size_t d = 0; d < dim; ++d) velocity[d] = estimate[d] - state.previous_estimate[d];
      state.memory.push(velocity);
    }
    state.previous_estimate = estimate;

    bool resampled = false;
    if (!weighted.degenerate) {
      const double ess = effective_sample_size(weighted.weights);
      if (ess < config.ess_threshold_fraction * static_cast<double>(n)) {
        RandomStream rng(seed, stream_key(k, stream_purpose::kResample));
        state.swarm = sir_resample(std::move(state.swarm), rng);
        resampled = true;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      prior[i] = state.swarm.particles[i].weight;
      states[i] = state.swarm.particles[i].state;
    }
    const double swarm_error = frame_rmse(states, prior, gt.cx, gt.cy, config.rmse_literal);

    report.per_frame_estimates.push_back(estimate);
    report.per_frame_swarm_errors.push_back(swarm_error);
    report.per_frame_center_errors.push_back(std::hypot(estimate.x() - gt.cx, estimate.y() - gt.cy));
    report.per_frame_boxes.push_back(box);
    report.per_frame_overlaps.push_back(overlap_score(box, gt));
    report.per_frame_iterations.push_back(iterations);
    report.per_frame_resampled.push_back(resampled);
    report.per_frame_degenerate.push_back(weighted.degenerate);
  }
  report.frames_processed = static_cast<int>(frames);
  report.wall_clock_seconds = std::chrono::duration<double>(Clock::now() - started).count();
  return report;
}

}  // namespace swarmtrack
