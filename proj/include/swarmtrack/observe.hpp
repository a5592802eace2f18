#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "swarmtrack/core.hpp"
#include "swarmtrack/image.hpp"

namespace swarmtrack {

/// Diagonal-covariance Mahalanobis distance.
inline double mahalanobis(std::span<const double> c, std::span<const double> reference,
                          std::span<const double> variances) {
  if (c.size() != reference.size() || c.size() != variances.size()) {
    throw std::invalid_argument("mahalanobis: dimension mismatch");
  }
  double acc = 0.0;
  for (std::size_t d = 0; d < c.size(); ++d) {
    const double diff = c[d] - reference[d];
    acc += diff * diff / variances[d];
  }
  return std::sqrt(acc);
}

/// Multivariate normal density at Mahalanobis distance `delta`:
/// (2 pi)^(-n/2) |Sigma|^(-1/2) exp(-delta^2 / 2), Sigma diagonal.
inline double gaussian_fitness(double delta, std::span<const double> variances) {
  if (!(delta >= 0.0)) throw std::invalid_argument("gaussian_fitness: delta must be >= 0");
  double log_det = 0.0;
  for (double v : variances) log_det += std::log(v);
  const double n = static_cast<double>(variances.size());
  const double log_norm = -0.5 * (n * std::log(2.0 * std::numbers::pi) + log_det);
  return std::exp(log_norm - 0.5 * delta * delta);
}

/// Position measurement model for point-mode sequences.
struct GaussianObservationModel {
  std::vector<double> variances;

  explicit GaussianObservationModel(std::vector<double> v) : variances(std::move(v)) {
    if (variances.empty()) throw std::invalid_argument("GaussianObservationModel: empty covariance");
    for (double s : variances) {
      if (!(s > 0.0)) throw std::invalid_argument("GaussianObservationModel: variances must be positive");
    }
  }

  [[nodiscard]] std::size_t dim() const noexcept { return variances.size(); }
  [[nodiscard]] double peak() const { return gaussian_fitness(0.0, variances); }
};

struct PointObservation {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const PointObservation&, const PointObservation&) = default;
};

inline double point_likelihood(const TargetState& state, const std::optional<PointObservation>& observation,
                               const GaussianObservationModel& model) {
  if (!observation) throw std::invalid_argument("point_likelihood: no observation for this frame");
  if (model.dim() != 2 || state.size() < 2) throw std::invalid_argument("point_likelihood: model must be 2-D");
  const double pos[2] = {state.x(), state.y()};
  const double obs[2] = {observation->x, observation->y};
  return gaussian_fitness(mahalanobis(pos, obs, model.variances), model.variances);
}

/// Appearance reference: mean color of the target window.
struct ColorReference {
  Rgb reference_color{0.0, 0.0, 0.0};
  /// Window extent; only w and h are used when the state carries no extent.
  BoundingBox window;
  std::vector<double> variances{400.0, 400.0, 400.0};

  void validate() const {
    for (double c : reference_color) {
      if (!(c >= 0.0 && c <= 255.0)) throw std::invalid_argument("ColorReference: channel out of range");
    }
    if (variances.size() != 3) throw std::invalid_argument("ColorReference: need 3 variances");
    for (double v : variances) {
      if (!(v > 0.0)) throw std::invalid_argument("ColorReference: variances must be positive");
    }
  }

  [[nodiscard]] double peak() const { return gaussian_fitness(0.0, variances); }
};

/// Window of a state: centered at (x, y) with the state's own extent in box
/// mode, otherwise the reference extent.
inline BoundingBox window_of(const TargetState& state, const BoundingBox& extent) {
  if (state.size() >= 4) return {state.x(), state.y(), state.w(), state.h()};
  return {state.x(), state.y(), extent.w, extent.h};
}

/// Mean color of a window clipped to the frame, or nullopt when nothing of
/// the window is visible.
inline std::optional<Rgb> window_mean_color(const IntegralImage& integral, const BoundingBox& box) {
  const auto s = integral.box_sum(box.left(), box.top(), box.right(), box.bottom());
  if (!(s.area > 0.0)) return std::nullopt;
  return Rgb{s.sum[0] / s.area, s.sum[1] / s.area, s.sum[2] / s.area};
}

/// Mean color by direct summation over the pixels the window touches, each
/// weighted by its covered area. Agrees with the integral-image route up to
/// rounding.
inline std::optional<Rgb> window_mean_color(const RasterFrame& frame, const BoundingBox& box) {
  const double x0 = std::clamp(box.left(), 0.0, static_cast<double>(frame.width));
  const double x1 = std::clamp(box.right(), 0.0, static_cast<double>(frame.width));
  const double y0 = std::clamp(box.top(), 0.0, static_cast<double>(frame.height));
  const double y1 = std::clamp(box.bottom(), 0.0, static_cast<double>(frame.height));
  if (!(x1 > x0) || !(y1 > y0)) return std::nullopt;
  const int j0 = static_cast<int>(x0);
  const int j1 = std::min(frame.width - 1, static_cast<int>(std::ceil(x1)) - 1);
  const int i0 = static_cast<int>(y0);
  const int i1 = std::min(frame.height - 1, static_cast<int>(std::ceil(y1)) - 1);
  auto cover = [](int cell, double lo, double hi) {
    return std::min(hi, cell + 1.0) - std::max(lo, static_cast<double>(cell));
  };
  Rgb sum{0.0, 0.0, 0.0};
  for (int i = i0; i <= i1; ++i) {
    const double wy = cover(i, y0, y1);
    Rgb row{0.0, 0.0, 0.0};
    const std::uint8_t* px = frame.rgb.data() + frame.offset(j0, i);
    for (int j = j0; j <= j1; ++j, px += 3) {
      const double wx = (j == j0 || j == j1) ? cover(j, x0, x1) : 1.0;
      row[0] += wx * px[0];
      row[1] += wx * px[1];
      row[2] += wx * px[2];
    }
    for (int c = 0; c < 3; ++c) sum[c] += wy * row[c];
  }
  const double area = (x1 - x0) * (y1 - y0);
  return Rgb{sum[0] / area, sum[1] / area, sum[2] / area};
}

inline double color_patch_likelihood(const TargetState& state, const IntegralImage& integral,
                                     const ColorReference& ref) {
  const auto mean = window_mean_color(integral, window_of(state, ref.window));
  if (!mean) return 0.0;
  return gaussian_fitness(mahalanobis(*mean, ref.reference_color, ref.variances), ref.variances);
}

inline double color_patch_likelihood(const TargetState& state, const RasterFrame& frame, const ColorReference& ref) {
  const auto mean = window_mean_color(frame, window_of(state, ref.window));
  if (!mean) return 0.0;
  return gaussian_fitness(mahalanobis(*mean, ref.reference_color, ref.variances), ref.variances);
}

}  // namespace swarmtrack
