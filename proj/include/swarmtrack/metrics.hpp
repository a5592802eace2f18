#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "swarmtrack/core.hpp"

namespace swarmtrack {

/// Output of one tracker run over a sequence.
struct TrackReport {
  std::string tracker_tag;
  std::uint64_t seed = 0;
  int frames_processed = 0;
  double wall_clock_seconds = 0.0;
  std::vector<TargetState> per_frame_estimates;
  /// Swarm error per frame: weighted RMS center distance of the frame's
  /// final particle set (after any resampling) to the ground-truth center.
  std::vector<double> per_frame_swarm_errors;
  /// Distance of the state estimate to the ground-truth center.
  std::vector<double> per_frame_center_errors;
  std::vector<BoundingBox> per_frame_boxes;
  std::vector<double> per_frame_overlaps;
  /// Optimizer iterations spent per frame (0 for the plain filter).
  std::vector<int> per_frame_iterations;
  std::vector<bool> per_frame_resampled;
  std::vector<bool> per_frame_degenerate;
};

/// Swarm center error against `gt`. Standard reading is the root of the
/// mean squared distance; `literal` divides the root of the summed squares
/// by the particle count instead.
inline double frame_rmse(std::span<const TargetState> particles, double gt_x, double gt_y, bool literal = false) {
  if (particles.empty()) throw std::invalid_argument("frame_rmse: no particles");
  double acc = 0.0;
  for (const auto& p : particles) {
    const double dx = p.x() - gt_x;
    const double dy = p.y() - gt_y;
    acc += dx * dx + dy * dy;
  }
  const auto n = static_cast<double>(particles.size());
  return literal ? std::sqrt(acc) / n : std::sqrt(acc / n);
}

/// Weighted form: each squared distance counts N * w_i times, so uniform
/// weights give the unweighted value. Weights must sum to one.
inline double frame_rmse(std::span<const TargetState> particles, std::span<const double> weights, double gt_x,
                         double gt_y, bool literal = false) {
  if (particles.empty()) throw std::invalid_argument("frame_rmse: no particles");
  if (weights.size() != particles.size()) throw std::invalid_argument("frame_rmse: weight count mismatch");
  double acc = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < particles.size(); ++i) {
    if (!(weights[i] >= 0.0)) throw std::invalid_argument("frame_rmse: negative weight");
    const double dx = particles[i].x() - gt_x;
    const double dy = particles[i].y() - gt_y;
    acc += weights[i] * (dx * dx + dy * dy);
    total += weights[i];
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("frame_rmse: weights must sum to 1");
  const auto n = static_cast<double>(particles.size());
  return literal ? std::sqrt(n * acc) / n : std::sqrt(acc);
}

inline double sequence_rmse(std::span<const double> frame_errors) {
  if (frame_errors.empty()) throw std::invalid_argument("sequence_rmse: empty report");
  double acc = 0.0;
  for (double e : frame_errors) acc += e;
  return acc / static_cast<double>(frame_errors.size());
}

inline double sequence_rmse(const TrackReport& report) { return sequence_rmse(report.per_frame_swarm_errors); }

/// Intersection over union; 0 when the union is empty.
inline double overlap_score(const BoundingBox& a, const BoundingBox& b) {
  const double iw = std::max(0.0, std::min(a.right(), b.right()) - std::max(a.left(), b.left()));
  const double ih = std::max(0.0, std::min(a.bottom(), b.bottom()) - std::max(a.top(), b.top()));
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  if (!(uni > 0.0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

struct CurvePoint {
  double threshold = 0.0;
  double value = 0.0;
};

/// Fraction of frames whose error is strictly below each threshold.
inline std::vector<CurvePoint> precision_curve(std::span<const double> frame_errors, std::span<const double> thresholds) {
  if (frame_errors.empty()) throw std::invalid_argument("precision_curve: no frames");
  if (!std::is_sorted(thresholds.begin(), thresholds.end())) throw std::invalid_argument("precision_curve: thresholds must be ascending");
  std::vector<double> sorted(frame_errors.begin(), frame_errors.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<CurvePoint> out;
  out.reserve(thresholds.size());
  for (double t : thresholds) {
    const auto pass = std::lower_bound(sorted.begin(), sorted.end(), t) - sorted.begin();
    out.push_back({t, static_cast<double>(pass) / static_cast<double>(sorted.size())});
  }
  return out;
}

/// Fraction of frames whose overlap is strictly above each threshold.
inline std::vector<CurvePoint> recall_curve(std::span<const double> overlaps, std::span<const double> thresholds) {
  if (overlaps.empty()) throw std::invalid_argument("recall_curve: no frames");
  for (double o : overlaps) {
    if (!(o >= 0.0 && o <= 1.0)) throw std::invalid_argument("recall_curve: overlap outside [0, 1]");
  }
  if (!std::is_sorted(thresholds.begin(), thresholds.end())) throw std::invalid_argument("recall_curve: thresholds must be ascending");
  std::vector<double> sorted(overlaps.begin(), overlaps.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<CurvePoint> out;
  out.reserve(thresholds.size());
  for (double t : thresholds) {
    const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), t);
    out.push_back({t, static_cast<double>(above) / static_cast<double>(sorted.size())});
  }
  return out;
}

/// Frames whose error reaches the center error threshold.
inline int lost_targets(std::span<const double> frame_errors, double cet) {
  if (!(cet > 0.0)) throw std::invalid_argument("lost_targets: cet must be positive");
  return static_cast<int>(std::count_if(frame_errors.begin(), frame_errors.end(), [cet](double e) { return e >= cet; }));
}

inline double fps(int frames, double seconds) {
  if (frames < 1) throw std::invalid_argument("fps: need at least one frame");
  if (!(seconds > 0.0)) throw std::invalid_argument("fps: seconds must be positive");
  return static_cast<double>(frames) / seconds;
}

/// Evenly spaced thresholds lo, lo+step, ..., hi.
inline std::vector<double> threshold_grid(double lo, double hi, int steps) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  for (int i = 0; i <= steps; ++i) out.push_back(lo + (hi - lo) * i / steps);
  return out;
}

}  // namespace swarmtrack
