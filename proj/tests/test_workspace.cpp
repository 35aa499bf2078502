#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "ivs/errors.hpp"
#include "ivs/rng.hpp"
#include "ivs/workspace.hpp"
#include "oracles.hpp"

using namespace ivs;

namespace {

Block canonical_block(double orientation = 0.0) {
  Block b;
  b.opening_center = {0.0, 0.0};
  b.orientation = orientation;
  b.state = BlockState::on_peg;
  return b;
}

TaskState state_with_tip_at(const Pose2& tip, double orientation = 0.0) {
  TaskState s = init_board(7, Side::left);
  s.blocks[0].opening_center = s.pegs[0].center;
  s.blocks[0].orientation = orientation;
  move_tip(s, s.pegs[0].center + tip);
  return s;
}

}  // namespace

TEST(Pegs, LayoutTwoGridsWithPitch) {
  const auto pegs = make_pegs();
  for (int i = 0; i < kPegCount; ++i) {
    EXPECT_EQ(pegs[i].id, i);
    EXPECT_EQ(pegs[i].radius, 1.125);
    EXPECT_EQ(pegs[i].center.x < 0, i < 6);
    for (int j = i + 1; j < kPegCount; ++j) EXPECT_GE(distance(pegs[i].center, pegs[j].center), 25.0 - 1e-12);
  }
  EXPECT_EQ(peg_position(7), (Pose2{75.0, 25.0}));
  EXPECT_EQ(mirror_peg(3), 9);
  EXPECT_EQ(mirror_peg(9), 3);
  EXPECT_THROW(peg_position(12), ContractViolation);
}

TEST(InitBoard, SixBlocksOnRequestedSide) {
  const TaskState s = init_board(7, Side::left);
  for (int i = 0; i < kBlockCount; ++i) {
    EXPECT_EQ(s.blocks[i].state, BlockState::on_peg);
    EXPECT_EQ(s.blocks[i].peg_id, i);
  }
  EXPECT_EQ(s.jaw, Jaw::open);
  EXPECT_EQ(s.clock, 0.0);
  EXPECT_EQ(s.tip_true, home_pose());
  const TaskState r = init_board(7, Side::right);
  for (int i = 0; i < kBlockCount; ++i) EXPECT_EQ(r.blocks[i].peg_id, i + 6);
}

TEST(InitBoard, Deterministic) {
  const TaskState a = init_board(7, Side::left);
  const TaskState b = init_board(7, Side::left);
  for (int i = 0; i < kBlockCount; ++i) {
    EXPECT_EQ(a.blocks[i].opening_center, b.blocks[i].opening_center);
    EXPECT_EQ(a.blocks[i].orientation, b.blocks[i].orientation);
  }
}

TEST(InitBoard, DifferentSeedMovesSomeBlock) {
  const TaskState a = init_board(7, Side::left);
  const TaskState b = init_board(8, Side::left);
  double worst = 0.0;
  for (int i = 0; i < kBlockCount; ++i)
    worst = std::max(worst, distance(a.blocks[i].opening_center, b.blocks[i].opening_center));
  EXPECT_GT(worst, 0.1);
}

TEST(InitBoard, ClearanceInvariantAndUniformity) {
  double sum_r2 = 0.0;
  int n = 0;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const TaskState s = init_board(seed, seed % 2 ? Side::left : Side::right);
    int on_peg = 0;
    for (const auto& b : s.blocks) {
      on_peg += b.state == BlockState::on_peg;
      const double r = distance(b.opening_center, s.pegs[b.peg_id].center);
      EXPECT_LE(r, 3.375 + 1e-12);
      EXPECT_GE(b.orientation, 0.0);
      EXPECT_LT(b.orientation, 2 * std::numbers::pi);
      sum_r2 += r * r;
      ++n;
    }
    EXPECT_EQ(on_peg, 6);
  }
  // Uniform on a disc of radius c: E[r^2] = c^2 / 2.
  EXPECT_NEAR(sum_r2 / n, 3.375 * 3.375 / 2.0, 0.05 * 3.375 * 3.375 / 2.0);
}

TEST(Footprint, MatchesBarycentricOracle) {
  Rng rng = make_rng(11);
  for (int i = 0; i < 20000; ++i) {
    Block b = canonical_block(uniform(rng, 0, 2 * std::numbers::pi));
    b.opening_center = {uniform(rng, -5, 5), uniform(rng, -5, 5)};
    const Pose2 p{uniform(rng, -15, 15), uniform(rng, -15, 15)};
    ASSERT_EQ(on_block_material(b, p), oracle::on_material(b.opening_center, b.orientation, 18.0, 4.5, p));
  }
}

TEST(CheckPick, ClosedOneMillimeterInsideEdgeSucceeds) {
  // The edge opposite the vertex at angle 0 is the line x = -inradius; 4 mm
  // along it from the midpoint clears the opening.
  const double inradius = 18.0 / (2.0 * std::sqrt(3.0));
  const Pose2 p{-(inradius - 1.0), 4.0};
  ASSERT_TRUE(oracle::on_material({0, 0}, 0.0, 18.0, 4.5, p));
  TaskState s = state_with_tip_at(p);
  ASSERT_TRUE(close_jaw(s).has_value());
  set_z(s, ZLevel::travel);
  EXPECT_TRUE(check_pick_success(s));
}

TEST(CheckPick, ClosedInsideHoleFails) {
  TaskState s = state_with_tip_at({0.0, 0.0});
  EXPECT_FALSE(close_jaw(s).has_value());
  EXPECT_FALSE(check_pick_success(s));
}

TEST(CheckPick, ClosedTwoMillimetersOutsideFails) {
  const double inradius = 18.0 / (2.0 * std::sqrt(3.0));
  const Pose2 p{-(inradius + 2.0), 0.0};
  ASSERT_FALSE(oracle::on_material({0, 0}, 0.0, 18.0, 4.5, p));
  TaskState s = state_with_tip_at(p);
  EXPECT_FALSE(close_jaw(s).has_value());
  EXPECT_FALSE(check_pick_success(s));
}

TEST(CheckPick, NotAtTravelFails) {
  TaskState s = state_with_tip_at(grasp_target(canonical_block()));
  ASSERT_TRUE(close_jaw(s).has_value());
  set_z(s, ZLevel::board);
  EXPECT_FALSE(check_pick_success(s));
}

TEST(CheckPlace, Boundaries) {
  for (auto [offset, expected] : {std::pair{0.0, true}, {3.375, true}, {3.5, false}}) {
    TaskState s = init_board(1, Side::left);
    Block& b = s.blocks[0];
    b.state = BlockState::grasped;
    b.opening_center = s.pegs[7].center + Pose2{offset, 0.0};
    EXPECT_EQ(check_place_success(s, 7), expected) << offset;
    EXPECT_EQ(release_block(s, 7), expected);
    EXPECT_EQ(s.blocks[0].state, expected ? BlockState::on_peg : BlockState::dropped);
  }
}

TEST(CheckPlace, MonotoneInOffset) {
  Rng rng = make_rng(5);
  for (int i = 0; i < 500; ++i) {
    TaskState s = init_board(1, Side::left);
    Block& b = s.blocks[0];
    b.state = BlockState::grasped;
    const double ang = uniform(rng, 0, 2 * std::numbers::pi);
    const Pose2 dir{std::cos(ang), std::sin(ang)};
    const double d = uniform(rng, 0, 5);
    b.opening_center = s.pegs[8].center + d * dir;
    if (!check_place_success(s, 8)) continue;
    const double d2 = uniform(rng, 0, d);
    b.opening_center = s.pegs[8].center + d2 * dir;
    EXPECT_TRUE(check_place_success(s, 8));
  }
}

TEST(CheckPlace, InvalidPegIsContractViolation) {
  TaskState s = init_board(1, Side::left);
  EXPECT_THROW(check_place_success(s, 12), ContractViolation);
  EXPECT_THROW(check_place_success(s, -1), ContractViolation);
}

TEST(GraspTarget, OnMaterialWithinRange) {
  const Block b = canonical_block(0.0);
  const Pose2 g = grasp_target(b);
  const double r = distance(g, b.opening_center);
  EXPECT_GT(r, 4.5);
  EXPECT_LE(r, 9.0);
  EXPECT_TRUE(oracle::on_material(b.opening_center, 0.0, 18.0, 4.5, g));
  EXPECT_EQ(grasp_target(b), g);
}

TEST(GraspTarget, MarginIsClearanceToBothBoundaries) {
  // Brute force: distance from the target to the nearest non-material point.
  for (double ori : {0.0, 0.4, 2.0, 5.5}) {
    Block b = canonical_block(ori);
    b.opening_center = {3.0, -2.0};
    const Pose2 g = grasp_target(b);
    double nearest = 1e9;
    for (int i = 0; i < 720; ++i)
      for (double r = 0.0; r < 4.0; r += 0.002) {
        const double a = i * std::numbers::pi / 360.0;
        const Pose2 q = g + Pose2{r * std::cos(a), r * std::sin(a)};
        if (!oracle::on_material(b.opening_center, ori, 18.0, 4.5, q)) {
          nearest = std::min(nearest, r);
          break;
        }
      }
    EXPECT_NEAR(nearest, grasp_margin(b), 0.01);
  }
}

TEST(GraspTarget, RotatesWithBlock) {
  Rng rng = make_rng(3);
  for (int i = 0; i < 100; ++i) {
    Block b = canonical_block(uniform(rng, 0, 2 * std::numbers::pi));
    b.opening_center = {uniform(rng, -50, 50), uniform(rng, -20, 20)};
    Block r = b;
    r.orientation += 2.0 * std::numbers::pi / 3.0;
    const Pose2 expect = b.opening_center + rotate(grasp_target(b) - b.opening_center, 2.0 * std::numbers::pi / 3.0);
    const Pose2 got = grasp_target(r);
    EXPECT_NEAR(got.x, expect.x, 1e-9);
    EXPECT_NEAR(got.y, expect.y, 1e-9);
  }
}

TEST(BlockStates, OnlyAllowedTransitions) {
  // on_peg -> grasped -> {on_peg, dropped}; nothing else ever happens.
  Rng rng = make_rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    TaskState s = init_board(trial, Side::left);
    std::array<BlockState, kBlockCount> prev{};
    for (int i = 0; i < kBlockCount; ++i) prev[i] = s.blocks[i].state;
    for (int step = 0; step < 20; ++step) {
      const int peg = static_cast<int>(uniform(rng, 0, 12));
      move_tip(s, s.pegs[peg].center + Pose2{uniform(rng, -8, 8), uniform(rng, -8, 8)});
      if (s.jaw == Jaw::open) {
        close_jaw(s);
        if (!grasped_block(s)) s.jaw = Jaw::open;
      } else if (grasped_block(s)) {
        release_block(s, peg);
      }
      int grasped = 0;
      for (int i = 0; i < kBlockCount; ++i) {
        const BlockState now = s.blocks[i].state;
        grasped += now == BlockState::grasped;
        if (now != prev[i]) {
          const bool ok = (prev[i] == BlockState::on_peg && now == BlockState::grasped) ||
                          (prev[i] == BlockState::grasped &&
                           (now == BlockState::on_peg || now == BlockState::dropped));
          EXPECT_TRUE(ok);
        }
        prev[i] = now;
      }
      EXPECT_LE(grasped, 1);
    }
  }
}

TEST(GraspedBlock, FollowsTip) {
  TaskState s = state_with_tip_at(grasp_target(canonical_block()));
  ASSERT_TRUE(close_jaw(s).has_value());
  const Pose2 off = s.blocks[0].opening_center - s.tip_true;
  move_tip(s, {10.0, -20.0});
  EXPECT_EQ(s.blocks[0].opening_center, (Pose2{10.0, -20.0} + off));
}

TEST(CloseJaw, TwiceIsContractViolation) {
  TaskState s = state_with_tip_at({0, 0});
  close_jaw(s);
  EXPECT_THROW(close_jaw(s), ContractViolation);
}
