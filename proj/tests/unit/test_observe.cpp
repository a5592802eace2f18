#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "swarmtrack/observe.hpp"

using namespace swarmtrack;

namespace {

const std::vector<double> kIdentity2{1.0, 1.0};
const std::vector<double> kColorVar{400.0, 400.0, 400.0};

RasterFrame flat(int w, int h, std::array<std::uint8_t, 3> c) {
  RasterFrame f(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) f.set(x, y, c);
  }
  return f;
}

RasterFrame noise_frame(int w, int h, std::uint64_t seed) {
  RasterFrame f(w, h);
  RandomStream rng(seed, 0);
  for (auto& b : f.rgb) b = static_cast<std::uint8_t>(rng() & 0xFF);
  return f;
}

ColorReference reference(Rgb color, double w = 10.0, double h = 10.0) {
  ColorReference r;
  r.reference_color = color;
  r.window = {0.0, 0.0, w, h};
  r.variances = kColorVar;
  return r;
}

}  // namespace

TEST(Mahalanobis, UnitCovarianceIsEuclidean) {
  EXPECT_DOUBLE_EQ(mahalanobis(std::vector<double>{3.0, 4.0}, std::vector<double>{0.0, 0.0}, kIdentity2), 5.0);
}

TEST(Mahalanobis, ScalesByVariance) {
  EXPECT_DOUBLE_EQ(mahalanobis(std::vector<double>{20.0}, std::vector<double>{0.0}, std::vector<double>{400.0}), 1.0);
}

TEST(Mahalanobis, RejectsMismatch) {
  EXPECT_THROW(mahalanobis(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}, kIdentity2), std::invalid_argument);
}

TEST(GaussianFitness, PeakOfStandardBivariate) {
  EXPECT_NEAR(gaussian_fitness(0.0, kIdentity2), 1.0 / (2.0 * std::numbers::pi), 1e-15);
}

TEST(GaussianFitness, OneSigmaDown) {
  EXPECT_NEAR(gaussian_fitness(1.0, kIdentity2), std::exp(-0.5) / (2.0 * std::numbers::pi), 1e-15);
}

TEST(GaussianFitness, ColorPeak) {
  const double expected = 1.0 / (std::pow(2.0 * std::numbers::pi, 1.5) * std::sqrt(400.0 * 400.0 * 400.0));
  EXPECT_NEAR(gaussian_fitness(0.0, kColorVar) / expected, 1.0, 1e-12);
}

TEST(GaussianFitness, StrictlyDecreasingAndPositive) {
  double prev = gaussian_fitness(0.0, kColorVar);
  for (double d = 0.25; d < 30.0; d += 0.25) {
    const double f = gaussian_fitness(d, kColorVar);
    EXPECT_LT(f, prev);
    EXPECT_GE(f, 0.0);
    prev = f;
  }
  EXPECT_THROW(gaussian_fitness(-1.0, kColorVar), std::invalid_argument);
}

TEST(PointLikelihood, PeaksAtObservation) {
  const GaussianObservationModel m(kIdentity2);
  EXPECT_DOUBLE_EQ(point_likelihood({2.0, 3.0}, PointObservation{2.0, 3.0}, m), m.peak());
  EXPECT_NEAR(point_likelihood({3.0, 3.0}, PointObservation{2.0, 3.0}, m), std::exp(-0.5) * m.peak(), 1e-15);
}

TEST(PointLikelihood, MissingObservationRejected) {
  const GaussianObservationModel m(kIdentity2);
  EXPECT_THROW(point_likelihood({0.0, 0.0}, std::nullopt, m), std::invalid_argument);
  EXPECT_THROW(GaussianObservationModel(std::vector<double>{1.0, 0.0}), std::invalid_argument);
}

TEST(ColorLikelihood, MatchingPatchGivesPeak) {
  const RasterFrame f = flat(40, 40, {100, 150, 200});
  const auto ref = reference({100.0, 150.0, 200.0});
  EXPECT_NEAR(color_patch_likelihood({20.0, 20.0}, f, ref), ref.peak(), ref.peak() * 1e-12);
}

TEST(ColorLikelihood, OneSigmaPerChannel) {
  // Each channel 20 off with variance 400: delta^2 = 3.
  const RasterFrame f = flat(40, 40, {120, 170, 220});
  const auto ref = reference({100.0, 150.0, 200.0});
  EXPECT_NEAR(color_patch_likelihood({20.0, 20.0}, f, ref) / ref.peak(), std::exp(-1.5), 1e-12);
}

TEST(ColorLikelihood, WindowOutsideFrameScoresZero) {
  const RasterFrame f = flat(40, 40, {100, 150, 200});
  const auto ref = reference({100.0, 150.0, 200.0});
  EXPECT_EQ(color_patch_likelihood({-50.0, 20.0}, f, ref), 0.0);
  EXPECT_EQ(color_patch_likelihood({20.0, 500.0}, f, ref), 0.0);
}

TEST(ColorLikelihood, PartialWindowUsesVisiblePart) {
  const RasterFrame f = flat(40, 40, {100, 150, 200});
  const auto ref = reference({100.0, 150.0, 200.0});
  EXPECT_NEAR(color_patch_likelihood({1.0, 1.0}, f, ref), ref.peak(), ref.peak() * 1e-12);
}

TEST(ColorLikelihood, BoxStateUsesItsOwnExtent) {
  RasterFrame f = flat(40, 40, {0, 0, 0});
  for (int y = 15; y < 25; ++y) {
    for (int x = 15; x < 25; ++x) f.set(x, y, {200, 200, 200});
  }
  const auto ref = reference({200.0, 200.0, 200.0}, 30.0, 30.0);
  EXPECT_NEAR(color_patch_likelihood({20.0, 20.0, 10.0, 10.0}, f, ref), ref.peak(), ref.peak() * 1e-12);
  EXPECT_LT(color_patch_likelihood({20.0, 20.0}, f, ref), 1e-6 * ref.peak());
}

TEST(WindowMeanColor, FractionalCoverage) {
  // Left half 0, right half 240; a window over x in [9.5, 10.5] straddles the edge.
  RasterFrame f = flat(20, 4, {0, 0, 0});
  for (int y = 0; y < 4; ++y) {
    for (int x = 10; x < 20; ++x) f.set(x, y, {240, 240, 240});
  }
  const auto m = window_mean_color(f, BoundingBox{10.0, 2.0, 1.0, 2.0});
  ASSERT_TRUE(m);
  EXPECT_NEAR((*m)[0], 120.0, 1e-12);
  const auto q = window_mean_color(f, BoundingBox{10.0, 2.0, 2.0, 2.0});  // [9, 11]
  EXPECT_NEAR((*q)[1], 120.0, 1e-12);
  const auto r = window_mean_color(f, BoundingBox{10.25, 2.0, 1.0, 2.0});  // [9.75, 10.75]
  EXPECT_NEAR((*r)[2], 180.0, 1e-12);
}

TEST(WindowMeanColor, DirectSumAgreesWithIntegralImage) {
  const RasterFrame f = noise_frame(64, 48, 17);
  const IntegralImage integral(f);
  RandomStream rng(5, 5);
  for (int t = 0; t < 2000; ++t) {
    const BoundingBox b{uniform_in(rng, -10.0, 74.0), uniform_in(rng, -10.0, 58.0), uniform_in(rng, 0.5, 30.0),
                        uniform_in(rng, 0.5, 30.0)};
    const auto a = window_mean_color(f, b);
    const auto c = window_mean_color(integral, b);
    ASSERT_EQ(a.has_value(), c.has_value());
    if (!a) continue;
    for (int ch = 0; ch < 3; ++ch) EXPECT_NEAR((*a)[ch], (*c)[ch], 1e-6);
  }
}

TEST(IntegralImage, WholeFrameSum) {
  const RasterFrame f = noise_frame(13, 7, 3);
  double r = 0.0;
  for (int y = 0; y < 7; ++y) {
    for (int x = 0; x < 13; ++x) r += f.at(x, y)[0];
  }
  const auto s = IntegralImage(f).box_sum(0.0, 0.0, 13.0, 7.0);
  EXPECT_DOUBLE_EQ(s.area, 91.0);
  EXPECT_NEAR(s.sum[0], r, 1e-9);
}

TEST(ColorLikelihood, TranslationInvariant) {
  RasterFrame a = flat(80, 60, {30, 30, 30});
  RasterFrame b = flat(80, 60, {30, 30, 30});
  for (int y = 10; y < 30; ++y) {
    for (int x = 10; x < 25; ++x) {
      a.set(x, y, {200, 40, 40});
      b.set(x + 17, y + 9, {200, 40, 40});
    }
  }
  const auto ref = reference({180.0, 50.0, 45.0}, 15.0, 20.0);
  for (double dx = -6.0; dx <= 6.0; dx += 1.5) {
    EXPECT_NEAR(color_patch_likelihood({17.5 + dx, 20.0}, a, ref), color_patch_likelihood({34.5 + dx, 29.0}, b, ref), 1e-18);
  }
}

TEST(ColorLikelihood, PermutingPixelsInsideWindowChangesNothing) {
  // The appearance is a window mean, so rearranging pixels within it leaves
  // the score unchanged (stands in for rotation of the content).
  RasterFrame a = noise_frame(30, 30, 8);
  RasterFrame b = a;
  for (int y = 10; y < 20; ++y) {
    for (int x = 10; x < 20; ++x) b.set(x, y, a.at(29 - x, 29 - y));  // 180 degree turn about the center
  }
  const auto ref = reference({128.0, 128.0, 128.0});
  EXPECT_NEAR(color_patch_likelihood({15.0, 15.0}, a, ref) / color_patch_likelihood({15.0, 15.0}, b, ref), 1.0, 1e-12);
}
