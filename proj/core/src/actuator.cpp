#include "ivs/actuator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ivs/errors.hpp"
#include "ivs/workspace.hpp"

namespace ivs {

void InstrumentModel::reset(const Pose2& command) {
  last_command = command;
  play_state = {command.x, command.y};
}

InstrumentModel make_custom_instrument(std::string name, std::array<double, 2> deadband,
                                       std::array<double, 2> scale,
                                       std::array<double, 2> offset, double noise_sd) {
  for (int a = 0; a < 2; ++a) {
    if (!(deadband[a] >= 0.0)) throw Error("instrument " + name + ": deadband must be >= 0");
    if (!(scale[a] > 0.0)) throw Error("instrument " + name + ": scale must be > 0");
  }
  if (!(noise_sd >= 0.0)) throw Error("instrument " + name + ": noise_sd must be >= 0");
  InstrumentModel m;
  m.name = std::move(name);
  m.deadband = deadband;
  m.scale = scale;
  m.offset = offset;
  m.noise_sd = noise_sd;
  return m;
}

InstrumentModel make_instrument(std::string_view preset) {
  if (preset == "A")
    return make_custom_instrument("A", {2.0, 1.6}, {1.00, 1.00}, {0.5, -0.3}, kDefaultTipNoiseSd);
  if (preset == "B")
    return make_custom_instrument("B", {4.4, 3.6}, {1.02, 0.98}, {-1.0, 0.8}, kDefaultTipNoiseSd);
  if (preset == "C")
    return make_custom_instrument("C", {3.0, 3.2}, {0.99, 1.03}, {1.2, 1.0}, kDefaultTipNoiseSd);
  throw Error("unknown instrument preset '" + std::string(preset) + "'");
}

double play_update(double y, double x, double deadband) {
  const double half = 0.5 * deadband;
  if (x - y > half) return x - half;
  if (y - x > half) return x + half;
  return y;
}

Pose2 command_move(InstrumentModel& inst, const Pose2& command) {
  expects(in_workspace(command), "command_move: command outside workspace");
  inst.last_command = command;
  Pose2 out;
  for (int a = 0; a < 2; ++a) {
    inst.play_state[a] = play_update(inst.play_state[a], command[a], inst.deadband[a]);
    out[a] = inst.scale[a] * inst.play_state[a] + inst.offset[a];
  }
  // Two draws in fixed axis order.
  const double nx = gaussian(inst.rng, inst.noise_sd);
  const double ny = gaussian(inst.rng, inst.noise_sd);
  return out + Pose2{nx, ny};
}

Pose2 encoder_estimate(const InstrumentModel&, const Pose2& command) { return command; }

Pose2 true_pose_mean(const InstrumentModel& inst) {
  return {inst.scale[0] * inst.play_state[0] + inst.offset[0],
          inst.scale[1] * inst.play_state[1] + inst.offset[1]};
}

double steady_state_error_bound(const InstrumentModel& inst) {
  double total = 0.0;
  for (int a = 0; a < 2; ++a)
    total += std::abs(inst.scale[a] * inst.deadband[a] / 2.0) + std::abs(inst.offset[a]);
  return total;
}

double worst_case_error(const InstrumentModel& inst, const Pose2& lo, const Pose2& hi) {
  // Per axis the error (s-1)x -+ s*b/2 + d is affine in x, so the extremes sit
  // at the rectangle's bounds; axes are independent.
  std::array<double, 2> worst{};
  for (int a = 0; a < 2; ++a) {
    for (double x : {lo[a], hi[a]})
      for (double dir : {-1.0, 1.0}) {
        const double y = x - dir * inst.deadband[a] / 2.0;
        worst[a] = std::max(worst[a], std::abs(inst.scale[a] * y + inst.offset[a] - x));
      }
  }
  return std::hypot(worst[0], worst[1]);
}

namespace {

struct AxisSamples {
  std::vector<std::vector<double>> commands;  // per rollout
  std::vector<std::vector<double>> truth;
};

AxisSamples axis_samples(std::span<const Rollout> rollouts, int axis) {
  AxisSamples s;
  for (const auto& r : rollouts) {
    std::vector<double> c, t;
    c.reserve(r.commands.size());
    t.reserve(r.commands.size());
    for (std::size_t i = 0; i < r.commands.size(); ++i) {
      c.push_back(r.commands[i][axis]);
      t.push_back(r.true_poses[i][axis]);
    }
    s.commands.push_back(std::move(c));
    s.truth.push_back(std::move(t));
  }
  return s;
}

// Closed-form (scale, offset) for a fixed deadband and the resulting SSE.
AxisFit fit_affine(const AxisSamples& s, double deadband, double* sse) {
  double n = 0, sy = 0, st = 0, syy = 0, syt = 0;
  for (std::size_t r = 0; r < s.commands.size(); ++r) {
    const auto& c = s.commands[r];
    if (c.empty()) continue;
    double y = c.front();
    for (std::size_t i = 0; i < c.size(); ++i) {
      y = play_update(y, c[i], deadband);
      const double t = s.truth[r][i];
      n += 1;
      sy += y;
      st += t;
      syy += y * y;
      syt += y * t;
    }
  }
  AxisFit fit;
  fit.deadband = deadband;
  const double det = n * syy - sy * sy;
  if (std::abs(det) < 1e-12) {
    fit.scale = 1.0;
    fit.offset = n > 0 ? (st - sy) / n : 0.0;
  } else {
    fit.scale = (n * syt - sy * st) / det;
    fit.offset = (st - fit.scale * sy) / n;
  }
  if (sse) {
    double e = 0;
    for (std::size_t r = 0; r < s.commands.size(); ++r) {
      const auto& c = s.commands[r];
      if (c.empty()) continue;
      double y = c.front();
      for (std::size_t i = 0; i < c.size(); ++i) {
        y = play_update(y, c[i], deadband);
        const double d = fit.scale * y + fit.offset - s.truth[r][i];
        e += d * d;
      }
    }
    *sse = e;
  }
  return fit;
}

bool has_reversal(const AxisSamples& s) {
  for (const auto& c : s.commands) {
    int last_sign = 0;
    for (std::size_t i = 1; i < c.size(); ++i) {
      const double d = c[i] - c[i - 1];
      const int sign = d > 1e-12 ? 1 : (d < -1e-12 ? -1 : 0);
      if (sign == 0) continue;
      if (last_sign != 0 && sign != last_sign) return true;
      last_sign = sign;
    }
  }
  return false;
}

AxisFit fit_axis(const AxisSamples& s) {
  constexpr double kMaxDeadband = 12.0;
  constexpr double kGrid = 0.02;
  double best_b = 0.0;
  double best_sse = std::numeric_limits<double>::infinity();
  for (double b = 0.0; b <= kMaxDeadband + 1e-9; b += kGrid) {
    double sse;
    fit_affine(s, b, &sse);
    if (sse < best_sse) {
      best_sse = sse;
      best_b = b;
    }
  }
  // Golden-section refinement inside the bracketing grid cells.
  double lo = std::max(0.0, best_b - kGrid);
  double hi = std::min(kMaxDeadband, best_b + kGrid);
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto sse_at = [&](double b) {
    double e;
    fit_affine(s, b, &e);
    return e;
  };
  double m1 = hi - phi * (hi - lo), m2 = lo + phi * (hi - lo);
  double f1 = sse_at(m1), f2 = sse_at(m2);
  for (int it = 0; it < 40; ++it) {
    if (f1 < f2) {
      hi = m2;
      m2 = m1;
      f2 = f1;
      m1 = hi - phi * (hi - lo);
      f1 = sse_at(m1);
    } else {
      lo = m1;
      m1 = m2;
      f1 = f2;
      m2 = lo + phi * (hi - lo);
      f2 = sse_at(m2);
    }
  }
  const double refined = 0.5 * (lo + hi);
  const double b = sse_at(refined) <= best_sse ? refined : best_b;
  return fit_affine(s, b, nullptr);
}

}  // namespace

Observer fit_observer(std::span<const Rollout> rollouts) {
  if (rollouts.size() < 2) throw Error("fit_observer: need at least 2 rollouts (one is held out)");
  for (const auto& r : rollouts)
    if (r.commands.size() != r.true_poses.size())
      throw Error("fit_observer: rollout command/true-pose length mismatch");

  const std::size_t held = std::max<std::size_t>(1, (rollouts.size() + 4) / 5);
  const auto train = rollouts.first(rollouts.size() - held);
  const auto test = rollouts.last(held);

  std::size_t samples = 0;
  for (const auto& r : train) samples += r.commands.size();
  if (samples < 200) throw Error("fit_observer: insufficient excitation, fewer than 200 samples per axis");

  Observer obs;
  for (int axis = 0; axis < 2; ++axis) {
    const AxisSamples s = axis_samples(train, axis);
    if (!has_reversal(s))
      throw Error(std::string("fit_observer: insufficient excitation, no direction reversal on axis ") +
                  (axis == 0 ? "x" : "y"));
    obs.axes[axis] = fit_axis(s);
  }
  obs.residual_rms = observer_rms(obs, test);
  return obs;
}

Pose2 observer_predict(const Observer& obs, std::span<const Pose2> history) {
  expects(!history.empty(), "observer_predict: empty command history");
  ObserverTracker tracker(obs, history.front());
  for (const auto& c : history.subspan(1)) tracker.push(c);
  return tracker.predicted();
}

double observer_rms(const Observer& obs, std::span<const Rollout> rollouts) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : rollouts) {
    if (r.commands.empty()) continue;
    ObserverTracker tracker(obs, r.commands.front());
    for (std::size_t i = 0; i < r.commands.size(); ++i) {
      if (i > 0) tracker.push(r.commands[i]);
      const Pose2 e = tracker.predicted() - r.true_poses[i];
      sum += e.x * e.x + e.y * e.y;
      ++n;
    }
  }
  return n ? std::sqrt(sum / static_cast<double>(n)) : 0.0;
}

ObserverTracker::ObserverTracker(const Observer& obs, const Pose2& start)
    : obs_(obs), y_{start.x, start.y}, last_(start) {}

void ObserverTracker::push(const Pose2& command) {
  for (int a = 0; a < 2; ++a) y_[a] = play_update(y_[a], command[a], obs_.axes[a].deadband);
  last_ = command;
}

Pose2 ObserverTracker::predicted() const {
  return {obs_.axes[0].scale * y_[0] + obs_.axes[0].offset,
          obs_.axes[1].scale * y_[1] + obs_.axes[1].offset};
}

Pose2 ObserverTracker::command_for(const Pose2& target) const {
  Pose2 cmd = last_;
  for (int a = 0; a < 2; ++a) {
    const AxisFit& f = obs_.axes[a];
    const double y_goal = (target[a] - f.offset) / f.scale;
    const double half = 0.5 * f.deadband;
    if (y_goal > y_[a] + 1e-12)
      cmd[a] = y_goal + half;
    else if (y_goal < y_[a] - 1e-12)
      cmd[a] = y_goal - half;
    else
      cmd[a] = std::clamp(last_[a], y_goal - half, y_goal + half);
  }
  return cmd;
}

std::vector<Rollout> excitation_rollouts(InstrumentModel inst, int count, std::uint64_t seed) {
  Rng rng = make_rng(seed, {stream::observer});
  inst.reseed(seed);
  std::vector<Rollout> out;
  constexpr double kStep = 0.5;
  constexpr int kWaypoints = 8;
  for (int r = 0; r < count; ++r) {
    Rollout roll;
    Pose2 cur{uniform(rng, -80.0, 80.0), uniform(rng, -35.0, 35.0)};
    inst.reset(cur);
    roll.commands.push_back(cur);
    roll.true_poses.push_back(command_move(inst, cur));
    for (int w = 0; w < kWaypoints; ++w) {
      const Pose2 next{std::clamp(cur.x + uniform(rng, -30.0, 30.0), -90.0, 90.0),
                       std::clamp(cur.y + uniform(rng, -20.0, 20.0), -45.0, 45.0)};
      const double len = distance(cur, next);
      const int steps = std::max(1, static_cast<int>(std::ceil(len / kStep)));
      for (int i = 1; i <= steps; ++i) {
        const Pose2 c = cur + (static_cast<double>(i) / steps) * (next - cur);
        roll.commands.push_back(c);
        roll.true_poses.push_back(command_move(inst, c));
      }
      cur = next;
    }
    out.push_back(std::move(roll));
  }
  return out;
}

}  // namespace ivs
