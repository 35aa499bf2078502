#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ivs/geometry.hpp"
#include "ivs/rng.hpp"

namespace ivs {

// Cable transmission of one instrument. Each axis is a play (backlash)
// operator of width `deadband` followed by an affine map:
//   y <- x - sign(x - y) * b/2   when |x - y| > b/2, unchanged otherwise
//   true = scale * y + offset + N(0, noise_sd)
// `play_state` is the hidden y; `last_command` is the motor-side x.
struct InstrumentModel {
  std::string name;
  std::array<double, 2> deadband{0.0, 0.0};
  std::array<double, 2> scale{1.0, 1.0};
  std::array<double, 2> offset{0.0, 0.0};
  double noise_sd = 0.0;
  std::array<double, 2> play_state{0.0, 0.0};
  Pose2 last_command;
  Rng rng{0};

  void reseed(std::uint64_t seed) { rng = make_rng(seed, {stream::actuator}); }
  // Clears the hidden state to "resting at `command`".
  void reset(const Pose2& command = {});
};

inline constexpr double kDefaultTipNoiseSd = 0.05;

// Presets A, B, C. Throws Error for anything else.
InstrumentModel make_instrument(std::string_view preset);
InstrumentModel make_custom_instrument(std::string name, std::array<double, 2> deadband,
                                       std::array<double, 2> scale,
                                       std::array<double, 2> offset, double noise_sd);

double play_update(double y, double x, double deadband);

// Moves the motor side to `command`; returns the resulting true tip pose.
Pose2 command_move(InstrumentModel& inst, const Pose2& command);

// What the motor encoders report: the command itself.
Pose2 encoder_estimate(const InstrumentModel& inst, const Pose2& command);

// Noise-free true pose implied by the current hidden state.
Pose2 true_pose_mean(const InstrumentModel& inst);

// Sum over axes of |s*b/2| + |d|: the steady-state error bound at the origin.
double steady_state_error_bound(const InstrumentModel& inst);
// Worst Euclidean steady-state error |s*y + d - x| over a rectangle, taking
// both approach directions per axis.
double worst_case_error(const InstrumentModel& inst, const Pose2& lo, const Pose2& hi);

struct AxisFit {
  double deadband = 0.0;
  double scale = 1.0;
  double offset = 0.0;
};

struct Observer {
  std::array<AxisFit, 2> axes{};
  double residual_rms = 0.0;
  std::string trained_on;
};

struct Rollout {
  std::vector<Pose2> commands;
  std::vector<Pose2> true_poses;
};

// Least-squares play-operator fit per axis. The last 20% of rollouts are held
// out for residual_rms. Each rollout is assumed to start at rest, i.e. the
// hidden state equals the first command.
Observer fit_observer(std::span<const Rollout> rollouts);

// Replays the fitted operator over the whole history.
Pose2 observer_predict(const Observer& obs, std::span<const Pose2> command_history);

// RMS of |prediction - truth| over every sample of `rollouts`.
double observer_rms(const Observer& obs, std::span<const Rollout> rollouts);

// Incremental form of observer_predict used while tracking trajectories.
class ObserverTracker {
 public:
  ObserverTracker(const Observer& obs, const Pose2& start);
  void push(const Pose2& command);
  Pose2 predicted() const;
  // Command that makes the predicted pose land on `target` from the current
  // hidden state (inverse play operator).
  Pose2 command_for(const Pose2& target) const;

 private:
  Observer obs_;
  std::array<double, 2> y_{};
  Pose2 last_;
};

// Sweeps through the peg field with direction reversals on both axes, executed
// on `inst` (which is reset first). Enough excitation for fit_observer.
std::vector<Rollout> excitation_rollouts(InstrumentModel inst, int count, std::uint64_t seed);

}  // namespace ivs
