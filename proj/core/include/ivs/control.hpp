#pragma once

#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include "ivs/actuator.hpp"
#include "ivs/datapipe.hpp"
#include "ivs/policy.hpp"
#include "ivs/render.hpp"
#include "ivs/workspace.hpp"

namespace ivs {

enum class Method { uncal, cal, ivs };
std::string_view to_string(Method m);
Method parse_method(std::string_view s);

// Simulated durations. Motion primitives cost fixed times; the servo loop is
// paced by the ensemble's update rate.
struct TimingModel {
  double pick_approach = 2.5;
  double grasp = 1.8;
  double place_approach = 2.5;
  double release = 1.275;
  std::map<int, double> servo_rate_hz{{1, 15.6}, {2, 12.8}, {4, 10.0}, {8, 7.1}};

  // Exact table entry, else linear interpolation in k (clamped at the ends).
  double rate_for(int k) const;
  // Perception plus all primitives of one transfer without correction.
  double transfer_cost(const PerceptionNoise& perception = {}) const;
  void validate() const;
};

struct ServoConfig {
  double rate = 10.0;
  int max_steps = 50;
  Hyperparameters hyper;
  int threads = 1;
  void validate() const;
};

ServoConfig servo_config_for(const TimingModel& timing, const Hyperparameters& hyper, int max_steps = 50);

struct CorrectionResult {
  int steps = 0;
  double distance = 0.0;  // true-tip travel, each step capped at lambda
  double elapsed = 0.0;
  bool terminated = false;
  friend bool operator==(const CorrectionResult&, const CorrectionResult&) = default;
};

// Everything a subtask executor touches.
struct Simulation {
  TaskState state;
  InstrumentModel inst;
  Pose2 command;  // motor-side (encoder) pose
  Camera cam;
  TimingModel timing;
  std::optional<ObserverTracker> tracker;  // CAL only

  // Resets the instrument and tip to rest at home.
  static Simulation start(TaskState state, InstrumentModel inst, const Camera& cam = {},
                          const TimingModel& timing = {}, const Observer* observer = nullptr);
  // Where the controller believes the tip is: the encoder pose, or the
  // observer prediction when tracking with one.
  Pose2 believed_tip() const;
};

inline constexpr double kWaypointSpacing = 2.0;

// Straight line from `from` to `target` with spacing <= kWaypointSpacing; the
// last waypoint is `target`.
std::vector<Pose2> plan_approach(const Pose2& from, const Pose2& target, double spacing = kWaypointSpacing);

// Approach target from a perception snapshot: above the perceived grasp
// target (pick) or the perceived peg center shifted by the expected grip
// offset (place).
Pose2 pick_target(const Perception& perceived, int block_id);
Pose2 place_target(const Perception& perceived, int peg_id, const Pose2& expected_grip_offset);

// Tracks the waypoints open loop (against the encoders, or through the
// observer inverse when sim.tracker is set) and ends at the correction plane.
void execute_approach(Simulation& sim, const std::vector<Pose2>& waypoints);

struct ServoContext {
  const EnsemblePolicy* policy = nullptr;
  Subtask subtask = Subtask::pick;
  Pose2 crop_center;  // perceived target peg
};

CorrectionResult servo_correct(Simulation& sim, const ServoContext& ctx, const ServoConfig& cfg);

bool complete_pick(Simulation& sim);
bool complete_place(Simulation& sim, int peg_id);

struct SubtaskResult {
  bool success = false;
  CorrectionResult correction;
  double elapsed = 0.0;  // approach + correction + completion
};

struct SubtaskRequest {
  Subtask subtask = Subtask::pick;
  Method method = Method::uncal;
  Pose2 target;        // approach target (see pick_target / place_target)
  int peg_id = 0;      // target peg for place, source peg for pick
  Pose2 crop_center;   // perceived position of that peg
};

SubtaskResult run_subtask(Simulation& sim, const SubtaskRequest& req, const EnsemblePolicy* policy,
                          const ServoConfig& cfg);

}  // namespace ivs
