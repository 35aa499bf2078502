#include <gtest/gtest.h>

#include <cmath>

#include "ivs/control.hpp"
#include "ivs/errors.hpp"
#include "stub_policy.hpp"

using namespace ivs;

namespace {

InstrumentModel ideal() { return make_custom_instrument("ideal", {0, 0}, {1, 1}, {0, 0}, 0.0); }

Simulation at_plane(const Pose2& tip, InstrumentModel inst = ideal()) {
  Simulation sim = Simulation::start(init_board(3, Side::left), std::move(inst));
  execute_approach(sim, plan_approach(sim.believed_tip(), tip));
  return sim;
}

}  // namespace

TEST(Timing, RateTableAndInterpolation) {
  const TimingModel t;
  EXPECT_DOUBLE_EQ(t.rate_for(1), 15.6);
  EXPECT_DOUBLE_EQ(t.rate_for(4), 10.0);
  EXPECT_DOUBLE_EQ(t.rate_for(8), 7.1);
  EXPECT_NEAR(t.rate_for(3), 11.4, 1e-12);
  EXPECT_NEAR(t.rate_for(6), 8.55, 1e-12);
  EXPECT_DOUBLE_EQ(t.rate_for(16), 7.1);
  EXPECT_NEAR(t.transfer_cost(), 0.625 + 2.5 + 1.8 + 2.5 + 1.275, 1e-12);
}

TEST(PlanApproach, SpacingAndEndpoint) {
  const auto w = plan_approach({0, 0}, {-75, 25});
  const double len = std::hypot(75.0, 25.0);
  ASSERT_EQ(w.size(), static_cast<std::size_t>(std::ceil(len / 2.0)));
  EXPECT_EQ(w.back(), (Pose2{-75, 25}));
  Pose2 prev{0, 0};
  for (const auto& p : w) {
    EXPECT_LE(distance(prev, p), 2.0 + 1e-12);
    prev = p;
  }
  EXPECT_EQ(plan_approach({3, 3}, {3, 3}).size(), 1u);
  EXPECT_EQ(plan_approach({0, 0}, {1, 0}), (std::vector<Pose2>{{1, 0}}));
  EXPECT_THROW(plan_approach({0, 0}, {400, 0}), Error);
}

TEST(Approach, IdealInstrumentLandsExactly) {
  Simulation sim = at_plane({50, -25});
  EXPECT_EQ(sim.state.tip_true, (Pose2{50, -25}));
  EXPECT_EQ(sim.state.tip_z, ZLevel::plane);
}

TEST(Approach, CalibratedTrackingBeatsEncoders) {
  const InstrumentModel b = make_instrument("B");
  const Observer obs = fit_observer(excitation_rollouts(b, 40, 1));
  const Pose2 target{-50, 0};
  Simulation uncal = at_plane(target, b);
  Simulation cal = Simulation::start(init_board(3, Side::left), b, {}, {}, &obs);
  execute_approach(cal, plan_approach(cal.believed_tip(), target));
  EXPECT_LT(distance(cal.state.tip_true, target), distance(uncal.state.tip_true, target));
  EXPECT_LT(distance(cal.believed_tip(), cal.state.tip_true), 0.3);
}

TEST(Servo, TimesOutAfterMaxSteps) {
  const EnsemblePolicy p = stub::constant_policy(2, {0.3, 0.0}, -10.0);
  Simulation sim = at_plane({-60, 10});
  ServoConfig cfg;
  cfg.rate = 12.8;
  cfg.max_steps = 7;
  const double t0 = sim.state.clock;
  const CorrectionResult r = servo_correct(sim, {&p, Subtask::pick, {-50, 0}}, cfg);
  EXPECT_FALSE(r.terminated);
  EXPECT_EQ(r.steps, 7);
  EXPECT_DOUBLE_EQ(r.elapsed, 7 / 12.8);
  EXPECT_NEAR(sim.state.clock - t0, r.elapsed, 1e-12);
  // Steps are lambda long along the unit action, whatever its magnitude.
  EXPECT_NEAR(sim.state.tip_true.x, -53.0, 1e-9);
  EXPECT_NEAR(r.distance, 7.0, 1e-9);
}

TEST(Servo, ImmediateTermination) {
  const EnsemblePolicy p = stub::constant_policy(4, {1.0, 0.0}, 10.0);
  Simulation sim = at_plane({-60, 10});
  const CorrectionResult r = servo_correct(sim, {&p, Subtask::place, {-50, 0}}, ServoConfig{});
  EXPECT_TRUE(r.terminated);
  EXPECT_EQ(r.steps, 0);
  EXPECT_EQ(r.elapsed, 0.0);
  EXPECT_EQ(sim.state.tip_true, (Pose2{-60, 10}));
}

TEST(Servo, ZeroActionHoldsStillAndDistanceIsCapped) {
  const EnsemblePolicy still = stub::constant_policy(1, {0.0, 0.0}, -10.0);
  Simulation sim = at_plane({-60, 10});
  ServoConfig cfg;
  cfg.max_steps = 4;
  const CorrectionResult r = servo_correct(sim, {&still, Subtask::pick, {-50, 0}}, cfg);
  EXPECT_EQ(r.steps, 4);
  EXPECT_EQ(r.distance, 0.0);
  // A backlash reversal moves the tip less than lambda; the distance counts
  // what the tip actually did, never more than lambda per step.
  // The approach from home ends moving left; reversing eats the first step.
  const EnsemblePolicy right = stub::constant_policy(1, {1.0, 0.0}, -10.0);
  Simulation b = at_plane({-60, 10}, make_custom_instrument("bl", {1.0, 1.0}, {1, 1}, {0, 0}, 0.0));
  const CorrectionResult rb = servo_correct(b, {&right, Subtask::pick, {-50, 0}}, cfg);
  EXPECT_NEAR(rb.distance, 3.0, 1e-9);
}

TEST(Servo, RequiresPlaneAndPolicy) {
  const EnsemblePolicy p = stub::constant_policy(1, {1.0, 0.0}, 10.0);
  Simulation sim = Simulation::start(init_board(1, Side::left), ideal());
  EXPECT_THROW(servo_correct(sim, {&p, Subtask::pick, {-50, 0}}, ServoConfig{}), ContractViolation);
  Simulation plane = at_plane({-50, 0});
  EXPECT_THROW(servo_correct(plane, {nullptr, Subtask::pick, {-50, 0}}, ServoConfig{}), ContractViolation);
}

TEST(Complete, PickAtGraspTargetSucceeds) {
  Simulation sim = Simulation::start(init_board(8, Side::left), ideal());
  const Block b = sim.state.blocks[2];
  execute_approach(sim, plan_approach(sim.believed_tip(), grasp_target(b)));
  const double t0 = sim.state.clock;
  EXPECT_TRUE(complete_pick(sim));
  EXPECT_EQ(grasped_block(sim.state), std::optional<int>(2));
  EXPECT_DOUBLE_EQ(sim.state.clock - t0, 1.8);
  EXPECT_EQ(sim.state.tip_z, ZLevel::travel);
  EXPECT_THROW(complete_pick(sim), ContractViolation);
}

TEST(Complete, PickOverEmptyBoardFailsAndReopens) {
  Simulation sim = at_plane({0, 40});
  EXPECT_FALSE(complete_pick(sim));
  EXPECT_EQ(sim.state.jaw, Jaw::open);
  EXPECT_FALSE(grasped_block(sim.state).has_value());
}

TEST(Complete, PlaceFitsOrDrops) {
  for (double miss : {0.0, 2.0, 3.5}) {
    Simulation sim = Simulation::start(init_board(8, Side::left), ideal());
    const Block b = sim.state.blocks[0];
    execute_approach(sim, plan_approach(sim.believed_tip(), grasp_target(b)));
    ASSERT_TRUE(complete_pick(sim));
    const Pose2 offset = sim.state.blocks[0].grip_offset;
    const Pose2 peg = sim.state.pegs[9].center;
    execute_approach(sim, plan_approach(sim.believed_tip(), peg - offset + Pose2{miss, 0.0}));
    const double t0 = sim.state.clock;
    const bool ok = complete_place(sim, 9);
    EXPECT_EQ(ok, miss <= clearance(b, sim.state.pegs[9]));
    EXPECT_DOUBLE_EQ(sim.state.clock - t0, 1.275);
    EXPECT_EQ(sim.state.blocks[0].state, ok ? BlockState::on_peg : BlockState::dropped);
  }
}

TEST(RunSubtask, ResourceChecks) {
  Simulation sim = Simulation::start(init_board(1, Side::left), ideal());
  SubtaskRequest req{Subtask::pick, Method::cal, {-50, 0}, 1, {-50, 25}};
  EXPECT_THROW(run_subtask(sim, req, nullptr, {}), Error);
  req.method = Method::ivs;
  EXPECT_THROW(run_subtask(sim, req, nullptr, {}), Error);
  const InstrumentModel a = make_instrument("A");
  const Observer obs = fit_observer(excitation_rollouts(a, 10, 1));
  Simulation tracked = Simulation::start(init_board(1, Side::left), a, {}, {}, &obs);
  req.method = Method::uncal;
  EXPECT_THROW(run_subtask(tracked, req, nullptr, {}), Error);
}

TEST(RunSubtask, UncalPickWithIdealInstrument) {
  Simulation sim = Simulation::start(init_board(4, Side::left), ideal());
  const Block& b = sim.state.blocks[3];
  const SubtaskRequest req{Subtask::pick, Method::uncal, grasp_target(b), b.peg_id,
                           sim.state.pegs[b.peg_id].center};
  const SubtaskResult r = run_subtask(sim, req, nullptr, {});
  EXPECT_TRUE(r.success);
  EXPECT_EQ(r.correction.steps, 0);
  EXPECT_DOUBLE_EQ(r.elapsed, 2.5 + 1.8);
}

TEST(RunSubtask, IvsElapsedIncludesServoTime) {
  const EnsemblePolicy p = stub::constant_policy(2, {1.0, 0.0}, -10.0);
  Simulation sim = Simulation::start(init_board(4, Side::left), ideal());
  const Block& b = sim.state.blocks[3];
  const SubtaskRequest req{Subtask::pick, Method::ivs, grasp_target(b), b.peg_id,
                           sim.state.pegs[b.peg_id].center};
  ServoConfig cfg;
  cfg.max_steps = 3;
  cfg.rate = 12.8;
  const SubtaskResult r = run_subtask(sim, req, &p, cfg);
  EXPECT_EQ(r.correction.steps, 3);
  EXPECT_NEAR(r.elapsed, 2.5 + 3 / 12.8 + 1.8, 1e-12);
}
