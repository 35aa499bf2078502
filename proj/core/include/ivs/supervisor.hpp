#pragma once

#include <cstdint>
#include <vector>

#include "ivs/actuator.hpp"
#include "ivs/datapipe.hpp"
#include "ivs/render.hpp"
#include "ivs/workspace.hpp"

namespace ivs {

// Kinematic profile of the scripted demonstrator. It watches the true tip,
// reacts after a short delay, accelerates over `ramp_frames` to `speed` and
// stops once the tip is within `arrive_tolerance` of the goal.
struct DemoProfile {
  double start_radius = 5.0;
  double speed = 4.0;              // mm/s
  double lateral_noise_sd = 0.3;   // mm per frame at full speed
  int dwell_frames = 1;            // frames at rest at the goal, arrival frame included
  double capture_rate = 5.0;       // Hz
  int react_frames = 3;
  int ramp_frames = 3;
  double arrive_tolerance = 0.4;   // mm
  int max_frames = 60;
  double grip_jitter = 1.0;        // place demos: grasp point scatter radius, mm
  void validate() const;
};

Pose2 sample_start(const Pose2& goal, const DemoProfile& profile, std::uint64_t seed);

// Scene for one demonstration at `peg_id`: the other five blocks sit on
// random pegs. Pick scenes hold a block on peg_id; place scenes carry one in
// the jaws with a slightly imperfect grip.
TaskState demo_scene(Subtask subtask, int peg_id, std::uint64_t seed, const DemoProfile& profile = {});

// True-tip goal of a demo scene: above the grasp target, or with the carried
// block's opening over the peg.
Pose2 demo_goal(const TaskState& state, Subtask subtask, int peg_id);

RawTrajectory generate_demo(TaskState state, Subtask subtask, int peg_id, InstrumentModel inst,
                            const DemoProfile& profile, std::uint64_t seed, const Camera& cam = {});

struct DemoDatasets {
  std::vector<RawTrajectory> pick;
  std::vector<RawTrajectory> place;
};

inline constexpr int kDemosPerPeg = 15;

// 12 pegs x `per_peg` demos per subtask, scenes re-randomized for every demo.
DemoDatasets collect_dataset(const DemoProfile& profile, const InstrumentModel& inst, std::uint64_t seed,
                             const Camera& cam = {}, int per_peg = kDemosPerPeg, int threads = 1);

}  // namespace ivs
