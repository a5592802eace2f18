#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "swarmtrack/scenesim.hpp"

using namespace swarmtrack;
namespace fs = std::filesystem;

namespace {

constexpr ScenarioKind kAllKinds[] = {ScenarioKind::ConstantVelocity, ScenarioKind::Sinusoidal, ScenarioKind::AbruptTurn,
                                      ScenarioKind::DistractorCross, ScenarioKind::Occlusion, ScenarioKind::ScaleChange};

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("swarmtrack_scenesim_" + name);
  fs::remove_all(p);
  return p;
}

Scenario linear(double vx, double vy, int frames) {
  Scenario s;
  s.kind = ScenarioKind::ConstantVelocity;
  s.frame_count = frames;
  s.start = {50.0, 60.0};
  s.velocity = {vx, vy};
  s.pixel_noise_sigma = 0.0;
  return s;
}

}  // namespace

TEST(Trajectory, ConstantVelocityIsLinear) {
  const auto t = generate_trajectory(linear(2.0, -1.0, 10));
  ASSERT_EQ(t.target.size(), 10u);
  for (int f = 0; f < 10; ++f) {
    EXPECT_DOUBLE_EQ(t.target[f].cx, 50.0 + 2.0 * f);
    EXPECT_DOUBLE_EQ(t.target[f].cy, 60.0 - 1.0 * f);
  }
  EXPECT_TRUE(t.distractor.empty());
}

TEST(Trajectory, AbruptTurnReversesAtEvent) {
  Scenario s = linear(3.0, 0.0, 21);
  s.kind = ScenarioKind::AbruptTurn;
  s.event_frames = {10};
  const auto t = generate_trajectory(s);
  EXPECT_DOUBLE_EQ(t.target[10].cx, 80.0);
  EXPECT_DOUBLE_EQ(t.target[12].cx, 74.0);
  EXPECT_DOUBLE_EQ(t.target[20].cx, 50.0);
}

TEST(Trajectory, SinusoidalHandValues) {
  Scenario s = preset_scenario(ScenarioKind::Sinusoidal, 121);
  const auto t = generate_trajectory(s);
  // phase -pi/2: left turning point at 0, center at a quarter period, right turning point at half.
  EXPECT_NEAR(t.target[0].cx, 60.0, 1e-9);
  EXPECT_NEAR(t.target[30].cx, 160.0, 1e-9);
  EXPECT_NEAR(t.target[60].cx, 260.0, 1e-9);
  EXPECT_NEAR(t.target[0].cy, 120.0, 1e-9);
  EXPECT_NEAR(t.target[15].cy, 120.0 - 40.0, 1e-9);
}

TEST(Trajectory, DistractorMeetsTargetAtEvent) {
  const Scenario s = preset_scenario(ScenarioKind::DistractorCross, 101);
  const auto t = generate_trajectory(s);
  const int e = s.event_frames.front();
  ASSERT_EQ(t.distractor.size(), 101u);
  EXPECT_DOUBLE_EQ(t.distractor[e].cx, t.target[e].cx);
  EXPECT_DOUBLE_EQ(t.distractor[e].cy, t.target[e].cy);
  EXPECT_GT(std::hypot(t.distractor[0].cx - t.target[0].cx, t.distractor[0].cy - t.target[0].cy), 50.0);
}

TEST(Trajectory, OcclusionWindow) {
  const Scenario s = preset_scenario(ScenarioKind::Occlusion, 150);
  const auto t = generate_trajectory(s);
  const int e = s.event_frames.front();
  int hidden = 0;
  for (bool b : t.occluded) hidden += b;
  EXPECT_EQ(hidden, s.occlusion_length);
  EXPECT_TRUE(t.occluded[e]);
  EXPECT_FALSE(t.occluded[e - 1]);
  EXPECT_FALSE(t.occluded[e + s.occlusion_length]);
}

TEST(Trajectory, ScaleChangeGrowsBox) {
  const Scenario s = preset_scenario(ScenarioKind::ScaleChange, 51);
  const auto t = generate_trajectory(s);
  EXPECT_DOUBLE_EQ(t.target.front().w, s.box_w);
  EXPECT_NEAR(t.target.back().w, s.box_w * s.scale_factor, 1e-9);
  EXPECT_NEAR(t.target.back().h, s.box_h * s.scale_factor, 1e-9);
}

TEST(Trajectory, PresetsStayInFrameForAnyLength) {
  for (auto kind : kAllKinds) {
    for (int frames : {2, 31, 101, 301, 601}) EXPECT_NO_THROW(generate_trajectory(preset_scenario(kind, frames))) << to_string(kind);
  }
}

TEST(Trajectory, LeavingTheFrameIsRejected) {
  EXPECT_THROW(generate_trajectory(linear(10.0, 0.0, 100)), std::invalid_argument);
}

TEST(Scenario, ValidationCatchesMissingEvent) {
  Scenario s = preset_scenario(ScenarioKind::AbruptTurn, 50);
  s.event_frames.clear();
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s.event_frames = {50};
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(Render, NoiseFreeFrameHasExactColors) {
  Scenario s = linear(0.0, 0.0, 2);
  s.box_w = 10.0;
  s.box_h = 10.0;
  const Sequence seq = simulate(s);
  ASSERT_EQ(seq.frames.size(), 2u);
  const auto& f = seq.frames[0];
  EXPECT_EQ(f.at(50, 60), s.target_color);
  EXPECT_EQ(f.at(45, 55), s.target_color);
  EXPECT_EQ(f.at(54, 64), s.target_color);
  EXPECT_EQ(f.at(44, 60), s.background_color);
  EXPECT_EQ(f.at(55, 60), s.background_color);
  EXPECT_EQ(f.at(0, 0), s.background_color);
}

TEST(Render, OccluderCoversTarget) {
  Scenario s = preset_scenario(ScenarioKind::Occlusion, 60);
  s.pixel_noise_sigma = 0.0;
  const Sequence seq = simulate(s);
  const auto& gt = seq.ground_truth[s.event_frames.front()];
  EXPECT_EQ(seq.frames[s.event_frames.front()].at(static_cast<int>(gt.cx), static_cast<int>(gt.cy)), s.occluder_color);
  const auto& before = seq.ground_truth[0];
  EXPECT_EQ(seq.frames[0].at(static_cast<int>(before.cx), static_cast<int>(before.cy)), s.target_color);
}

TEST(Render, NoiseHasRequestedSpread) {
  Scenario s = linear(0.0, 0.0, 1);
  s.pixel_noise_sigma = 8.0;
  const Sequence seq = simulate(s);
  double sum = 0.0, sq = 0.0;
  int n = 0;
  for (int y = 0; y < 30; ++y) {  // background rows only
    for (int x = 0; x < s.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        const double d = seq.frames[0].at(x, y)[c] - static_cast<double>(s.background_color[c]);
        sum += d;
        sq += d * d;
        ++n;
      }
    }
  }
  const double standard_error = 8.0 / std::sqrt(n);
  EXPECT_NEAR(sum / n, 0.0, 4.0 * standard_error);
  EXPECT_NEAR(std::sqrt(sq / n), 8.0, 0.2);
}

TEST(Render, SameSeedSameFrames) {
  const Scenario s = preset_scenario(ScenarioKind::DistractorCross, 20, 77);
  const Sequence a = simulate(s);
  const Sequence b = simulate(s);
  EXPECT_EQ(a.frames, b.frames);
  Scenario other = s;
  other.seed = 78;
  EXPECT_NE(simulate(other).frames[3], a.frames[3]);
}

TEST(Render, PointModeWithoutNoiseIsExact) {
  Scenario s = preset_scenario(ScenarioKind::Sinusoidal, 40, 1, SequenceMode::Point);
  s.measurement_sigma = 0.0;
  const Sequence seq = simulate(s);
  EXPECT_TRUE(seq.frames.empty());
  ASSERT_EQ(seq.observations.size(), 40u);
  for (std::size_t f = 0; f < 40; ++f) {
    ASSERT_TRUE(seq.observations[f]);
    EXPECT_EQ(seq.observations[f]->x, seq.ground_truth[f].cx);
    EXPECT_EQ(seq.observations[f]->y, seq.ground_truth[f].cy);
  }
}

TEST(SequenceIo, RasterRoundTrip) {
  const auto dir = scratch("raster");
  const Sequence seq = simulate(preset_scenario(ScenarioKind::AbruptTurn, 12, 3));
  write_sequence(dir, seq);
  EXPECT_TRUE(fs::exists(dir / "frames" / "000011.rgb"));
  const Sequence back = read_sequence(dir);
  EXPECT_EQ(back.mode, SequenceMode::Raster);
  EXPECT_EQ(back.width, seq.width);
  EXPECT_EQ(back.frames, seq.frames);
  EXPECT_EQ(back.ground_truth, seq.ground_truth);
  EXPECT_EQ(back.scenario, seq.scenario);
  fs::remove_all(dir);
}

TEST(SequenceIo, PointRoundTripKeepsGaps) {
  const auto dir = scratch("point");
  Sequence seq = simulate(preset_scenario(ScenarioKind::ConstantVelocity, 10, 3, SequenceMode::Point));
  seq.observations[4].reset();
  write_sequence(dir, seq);
  const Sequence back = read_sequence(dir);
  EXPECT_EQ(back.observations, seq.observations);
  EXPECT_EQ(back.ground_truth, seq.ground_truth);
  fs::remove_all(dir);
}

TEST(SequenceIo, ScenarioJsonRoundTrip) {
  for (auto kind : kAllKinds) {
    const Scenario s = preset_scenario(kind, 77, 5);
    EXPECT_EQ(to_json(scenario_from_json(to_json(s))), to_json(s));
  }
}

TEST(SequenceIo, MalformedInputsReported) {
  const auto dir = scratch("bad");
  write_sequence(dir, simulate(preset_scenario(ScenarioKind::ConstantVelocity, 3, 0, SequenceMode::Point)));
  {
    std::ofstream(dir / "ground_truth.txt") << "0,1,2,3\n";
  }
  EXPECT_THROW(read_sequence(dir), SequenceIoError);
  {
    std::ofstream(dir / "manifest.json") << "{\"schema\": 3}";
  }
  EXPECT_THROW(read_sequence(dir), SequenceIoError);
  EXPECT_THROW(read_sequence(dir / "missing"), SequenceIoError);
  fs::remove_all(dir);
}

TEST(SequenceIo, FrameFileNamesArePadded) {
  EXPECT_EQ(frame_file_name(0), "000000.rgb");
  EXPECT_EQ(frame_file_name(1234), "001234.rgb");
}
