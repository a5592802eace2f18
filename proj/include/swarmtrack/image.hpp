#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace swarmtrack {

using Rgb = std::array<double, 3>;

/// W x H RGB8 raster, row-major, three bytes per pixel.
struct RasterFrame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  RasterFrame() = default;
  RasterFrame(int w, int h) : width(w), height(h), rgb(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3, 0) {
    if (w <= 0 || h <= 0) throw std::invalid_argument("RasterFrame: dimensions must be positive");
  }

  [[nodiscard]] std::size_t offset(int x, int y) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) * 3;
  }
  [[nodiscard]] std::array<std::uint8_t, 3> at(int x, int y) const noexcept {
    const auto o = offset(x, y);
    return {rgb[o], rgb[o + 1], rgb[o + 2]};
  }
  void set(int x, int y, std::array<std::uint8_t, 3> c) noexcept {
    const auto o = offset(x, y);
    rgb[o] = c[0];
    rgb[o + 1] = c[1];
    rgb[o + 2] = c[2];
  }

  friend bool operator==(const RasterFrame&, const RasterFrame&) = default;
};

/// Summed-area table over a raster, treating every pixel as a unit square
/// of constant color. `box_sum` integrates over arbitrary real-valued
/// rectangles: the continuous integral is bilinear inside each cell, so
/// bilinear interpolation of the corner sums is exact.
class IntegralImage {
 public:
  IntegralImage() = default;

  explicit IntegralImage(const RasterFrame& frame)
      : width_(frame.width), height_(frame.height), sums_(static_cast<std::size_t>(width_ + 1) * (height_ + 1) * 3, 0.0) {
    for (int y = 0; y < height_; ++y) {
      std::array<double, 3> row{0.0, 0.0, 0.0};
      for (int x = 0; x < width_; ++x) {
        const auto o = frame.offset(x, y);
        for (int c = 0; c < 3; ++c) {
          row[c] += frame.rgb[o + c];
          at(x + 1, y + 1, c) = at(x + 1, y, c) + row[c];
        }
      }
    }
  }

  [[nodiscard]] int width() const noexcept { return width_; }
  [[nodiscard]] int height() const noexcept { return height_; }

  /// Per-channel integral over [x0, x1] x [y0, y1] clipped to the frame, and
  /// the clipped area.
  struct BoxSum {
    Rgb sum{0.0, 0.0, 0.0};
    double area = 0.0;
  };

  [[nodiscard]] BoxSum box_sum(double x0, double y0, double x1, double y1) const noexcept {
    x0 = std::clamp(x0, 0.0, static_cast<double>(width_));
    x1 = std::clamp(x1, 0.0, static_cast<double>(width_));
    y0 = std::clamp(y0, 0.0, static_cast<double>(height_));
    y1 = std::clamp(y1, 0.0, static_cast<double>(height_));
    BoxSum out;
    if (!(x1 > x0) || !(y1 > y0)) return out;
    out.area = (x1 - x0) * (y1 - y0);
    const auto a = sample(x1, y1);
    const auto b = sample(x0, y1);
    const auto c = sample(x1, y0);
    const auto d = sample(x0, y0);
    for (int ch = 0; ch < 3; ++ch) out.sum[ch] = a[ch] - b[ch] - c[ch] + d[ch];
    return out;
  }

 private:
  double& at(int x, int y, int c) noexcept {
    return sums_[(static_cast<std::size_t>(y) * static_cast<std::size_t>(width_ + 1) + static_cast<std::size_t>(x)) * 3 + c];
  }
  [[nodiscard]] double at(int x, int y, int c) const noexcept {
    return sums_[(static_cast<std::size_t>(y) * static_cast<std::size_t>(width_ + 1) + static_cast<std::size_t>(x)) * 3 + c];
  }

  [[nodiscard]] Rgb sample(double x, double y) const noexcept {
    const int j = std::min(static_cast<int>(x), width_ - 1);
    const int i = std::min(static_cast<int>(y), height_ - 1);
    const double fx = x - j;
    const double fy = y - i;
    Rgb out{};
    for (int c = 0; c < 3; ++c) {
      const double top = (1.0 - fx) * at(j, i, c) + fx * at(j + 1, i, c);
      const double bottom = (1.0 - fx) * at(j, i + 1, c) + fx * at(j + 1, i + 1, c);
      out[c] = (1.0 - fy) * top + fy * bottom;
    }
    return out;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> sums_;
};

}  // namespace swarmtrack
