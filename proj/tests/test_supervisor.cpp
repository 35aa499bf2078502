#include <gtest/gtest.h>

#include <cmath>

#include "ivs/supervisor.hpp"

using namespace ivs;

TEST(SampleStart, UniformDiscMoments) {
  const DemoProfile prof;
  const Pose2 goal{10.0, -4.0};
  double sum = 0.0, worst = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const double d = distance(sample_start(goal, prof, i), goal);
    sum += d;
    worst = std::max(worst, d);
  }
  EXPECT_LE(worst, 5.0);
  // Radial density 2r/R^2 on [0, R] has mean 2R/3.
  EXPECT_NEAR(sum / n, 2.0 / 3.0 * 5.0, 0.05 * 2.0 / 3.0 * 5.0);
}

TEST(SampleStart, DeterministicAndDegenerate) {
  DemoProfile prof;
  EXPECT_EQ(sample_start({1, 2}, prof, 3), sample_start({1, 2}, prof, 3));
  prof.start_radius = 0.0;
  EXPECT_EQ(sample_start({1, 2}, prof, 3), (Pose2{1, 2}));
}

TEST(DemoScene, NeighborsPopulated) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const TaskState pick = demo_scene(Subtask::pick, 4, seed);
    ASSERT_TRUE(block_on_peg(pick, 4).has_value());
    int on = 0;
    for (const auto& b : pick.blocks) on += b.state == BlockState::on_peg;
    EXPECT_EQ(on, 6);
    const TaskState place = demo_scene(Subtask::place, 4, seed);
    EXPECT_FALSE(block_on_peg(place, 4).has_value());
    ASSERT_TRUE(grasped_block(place).has_value());
    EXPECT_TRUE(on_block_material(place.blocks[*grasped_block(place)], place.tip_true));
  }
}

TEST(GenerateDemo, StartAtGoalGivesDwellOnly) {
  DemoProfile prof;
  prof.start_radius = 0.0;
  const TaskState s = demo_scene(Subtask::pick, 2, 1);
  const RawTrajectory tr = generate_demo(s, Subtask::pick, 2, make_instrument("A"), prof, 1);
  ASSERT_GE(tr.frames.size(), 2u);
  for (const auto& f : tr.frames) EXPECT_LE(distance(f.p, tr.frames.back().p), 2.0);
}

TEST(GenerateDemo, DeterministicWithFixedTimestampsAndWindow) {
  const DemoProfile prof;
  const InstrumentModel inst = make_instrument("A");
  const Camera cam;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Subtask st = seed % 2 ? Subtask::place : Subtask::pick;
    const int peg = static_cast<int>(seed % 12);
    const TaskState s = demo_scene(st, peg, seed);
    const RawTrajectory a = generate_demo(s, st, peg, inst, prof, seed);
    EXPECT_EQ(a, generate_demo(s, st, peg, inst, prof, seed));
    ASSERT_GE(a.frames.size(), 2u);
    ASSERT_LE(a.frames.size(), static_cast<std::size_t>(prof.max_frames));
    const PixelRect win = centered_window(cam, a.crop_center, kCropSize);
    for (std::size_t i = 0; i < a.frames.size(); ++i) {
      EXPECT_DOUBLE_EQ(a.frames[i].t, i / prof.capture_rate);
      EXPECT_EQ(a.frames[i].image.origin_col, win.col);
      EXPECT_EQ(a.frames[i].image.origin_row, win.row);
      EXPECT_EQ(a.frames[i].image.width, kCropSize);
    }
    EXPECT_LE(distance(a.crop_center, s.pegs[peg].center), 2.0);
  }
}

TEST(GenerateDemo, TypicalLengthIsAFewSeconds) {
  const DemoProfile prof;
  const InstrumentModel inst = make_instrument("A");
  double total = 0.0;
  const int n = 120;
  for (int i = 0; i < n; ++i) {
    const TaskState s = demo_scene(Subtask::pick, i % 12, i);
    total += generate_demo(s, Subtask::pick, i % 12, inst, prof, i).frames.size();
  }
  const double seconds = total / n / prof.capture_rate;
  EXPECT_GE(seconds, 1.5);
  EXPECT_LE(seconds, 4.0);
}

TEST(GenerateDemo, TerminationLabelsMonotone) {
  const DemoProfile prof;
  const InstrumentModel inst = make_instrument("A");
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const Subtask st = seed % 2 ? Subtask::place : Subtask::pick;
    const TaskState s = demo_scene(st, 6, seed);
    const auto labels = termination_labels(positions_of(generate_demo(s, st, 6, inst, prof, seed)), 2.0);
    bool seen = false;
    for (int f : labels) {
      if (seen) EXPECT_EQ(f, 1);
      seen = seen || f == 1;
    }
  }
}
