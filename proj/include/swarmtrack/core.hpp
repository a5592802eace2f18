#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace swarmtrack {

// ---------------------------------------------------------------------------
// State vectors
// ---------------------------------------------------------------------------

/// Position of a tracked target, optionally with box extent.
///
/// A fixed-capacity vector: index 0/1 are the box center (x, y) and, in box
/// mode, index 2/3 are width and height. The optimizers treat it as a point in
/// an arbitrary low-dimensional search space, so the capacity is larger than
/// the four coordinates tracking needs.
class TargetState {
 public:
  static constexpr std::size_t kMaxDim = 16;

  TargetState() = default;

  explicit TargetState(std::size_t dim, double fill = 0.0) : dim_(dim) {
    if (dim > kMaxDim) {
      throw std::invalid_argument("TargetState: dimension exceeds capacity");
    }
    std::fill_n(values_.begin(), dim, fill);
  }

  TargetState(std::initializer_list<double> values) : TargetState(values.size()) {
    std::copy(values.begin(), values.end(), values_.begin());
  }

  [[nodiscard]] std::size_t size() const noexcept { return dim_; }
  [[nodiscard]] bool empty() const noexcept { return dim_ == 0; }

  double& operator[](std::size_t i) noexcept { return values_[i]; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  [[nodiscard]] double x() const noexcept { return values_[0]; }
  [[nodiscard]] double y() const noexcept { return values_[1]; }
  [[nodiscard]] double w() const noexcept { return values_[2]; }
  [[nodiscard]] double h() const noexcept { return values_[3]; }

  [[nodiscard]] std::span<double> values() noexcept { return {values_.data(), dim_}; }
  [[nodiscard]] std::span<const double> values() const noexcept { return {values_.data(), dim_}; }

  auto begin() noexcept { return values_.begin(); }
  auto end() noexcept { return values_.begin() + static_cast<std::ptrdiff_t>(dim_); }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.begin() + static_cast<std::ptrdiff_t>(dim_); }

  [[nodiscard]] bool all_finite() const noexcept {
    return std::all_of(begin(), end(), [](double v) { return std::isfinite(v); });
  }

  friend bool operator==(const TargetState& a, const TargetState& b) noexcept {
    return a.dim_ == b.dim_ && std::equal(a.begin(), a.end(), b.begin());
  }

 private:
  std::array<double, kMaxDim> values_{};
  std::size_t dim_ = 0;
};

/// Axis-aligned box given by center and extent.
struct BoundingBox {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;

  [[nodiscard]] double left() const noexcept { return cx - 0.5 * w; }
  [[nodiscard]] double right() const noexcept { return cx + 0.5 * w; }
  [[nodiscard]] double top() const noexcept { return cy - 0.5 * h; }
  [[nodiscard]] double bottom() const noexcept { return cy + 0.5 * h; }
  [[nodiscard]] double area() const noexcept { return w * h; }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Per-dimension search box.
using Bounds = std::vector<Interval>;

inline void validate_bounds(std::span<const Interval> bounds) {
  for (const auto& b : bounds) {
    if (!(b.lo < b.hi)) {
      throw std::invalid_argument("bounds: lo must be strictly less than hi");
    }
  }
}

/// Projects each coordinate of `s` into its interval.
inline TargetState clamp_state(TargetState s, std::span<const Interval> bounds) {
  validate_bounds(bounds);
  if (bounds.size() != s.size()) {
    throw std::invalid_argument("clamp_state: bounds dimension mismatch");
  }
  for (std::size_t d = 0; d < s.size(); ++d) {
    s[d] = std::clamp(s[d], bounds[d].lo, bounds[d].hi);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Random streams
// ---------------------------------------------------------------------------

namespace detail {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Combines components into a single stream identifier. Used to derive one
/// stream per (frame, particle, purpose) so draws do not depend on the order
/// in which particles are processed.
template <class... Ids>
constexpr std::uint64_t stream_key(std::uint64_t first, Ids... rest) noexcept {
  std::uint64_t h = detail::mix64(first + detail::kGolden);
  // rehash the running value before folding in the next component, so the
  // result depends on component order
  ((h = detail::mix64(detail::mix64(h + detail::kGolden) ^ static_cast<std::uint64_t>(rest))), ...);
  return h;
}

/// Counter-based uniform random stream (SplitMix64 over a keyed counter).
///
/// Satisfies UniformRandomBitGenerator, so it also plugs into <random>
/// distributions, but the library itself only uses `uniform()` and the
/// helpers below, whose output is specified bit-for-bit.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  RandomStream() = default;
  RandomStream(std::uint64_t seed, std::uint64_t stream_id)
      : key_(detail::mix64(seed ^ detail::mix64(stream_id ^ 0x5851F42D4C957F2DULL))) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    ++counter_;
    return detail::mix64(key_ + counter_ * detail::kGolden);
  }

  /// Uniform draw in [0, 1) with 53 bits of resolution.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  [[nodiscard]] std::uint64_t draws() const noexcept { return counter_; }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

inline RandomStream rng_stream(std::uint64_t seed, std::uint64_t stream_id) {
  return RandomStream(seed, stream_id);
}

/// Anything that yields U[0,1) draws. Tests use scripted sources.
template <class R>
concept UniformSource = requires(R& r) {
  { r.uniform() } -> std::convertible_to<double>;
};

/// U(0,1]: remaps [0,1) so that ln(1/u) stays finite.
template <UniformSource R>
double uniform_open_closed(R& r) {
  return 1.0 - static_cast<double>(r.uniform());
}

template <UniformSource R>
double uniform_in(R& r, double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(r.uniform());
}

/// Standard normal via Box-Muller; consumes exactly two uniforms.
template <UniformSource R>
double standard_normal(R& r) {
  const double u1 = uniform_open_closed(r);
  const double u2 = static_cast<double>(r.uniform());
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// ---------------------------------------------------------------------------
// Formatting
// ---------------------------------------------------------------------------

/// Shortest round-trip decimal text for `v`, independent of the C locale.
inline std::string format_number(double v) {
  if (v == 0.0) return "0";  // folds -0
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return {buf.data(), res.ptr};
}

inline std::string format_fixed(double v, int precision) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed, precision);
  return {buf.data(), res.ptr};
}

}  // namespace swarmtrack
