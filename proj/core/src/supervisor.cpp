#include "ivs/supervisor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ivs/errors.hpp"
#include "ivs/rng.hpp"
#include "parallel.hpp"

namespace ivs {

void DemoProfile::validate() const {
  if (!(start_radius >= 0.0)) throw Error("demo profile: start_radius must be >= 0");
  if (!(speed > 0.0)) throw Error("demo profile: speed must be > 0");
  if (!(lateral_noise_sd >= 0.0)) throw Error("demo profile: lateral_noise_sd must be >= 0");
  if (dwell_frames < 1) throw Error("demo profile: dwell_frames must be >= 1");
  if (!(capture_rate > 0.0)) throw Error("demo profile: capture_rate must be > 0");
  if (react_frames < 0 || ramp_frames < 0) throw Error("demo profile: frame counts must be >= 0");
  if (!(arrive_tolerance > 0.0)) throw Error("demo profile: arrive_tolerance must be > 0");
  if (max_frames < 2) throw Error("demo profile: max_frames must be >= 2");
  if (!(grip_jitter >= 0.0)) throw Error("demo profile: grip_jitter must be >= 0");
}

Pose2 sample_start(const Pose2& goal, const DemoProfile& profile, std::uint64_t seed) {
  Rng rng = make_rng(seed, {stream::demo_start});
  const double r = profile.start_radius * std::sqrt(uniform(rng, 0.0, 1.0));
  const double a = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  return goal + Pose2{r * std::cos(a), r * std::sin(a)};
}

namespace {

Pose2 disc_sample(Rng& rng, double radius) {
  const double r = radius * std::sqrt(uniform(rng, 0.0, 1.0));
  const double a = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  return {r * std::cos(a), r * std::sin(a)};
}

void seat_block(Block& b, const Peg& peg, Rng& rng) {
  b.state = BlockState::on_peg;
  b.peg_id = peg.id;
  b.orientation = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  b.opening_center = peg.center + disc_sample(rng, clearance(b, peg));
}

}  // namespace

TaskState demo_scene(Subtask subtask, int peg_id, std::uint64_t seed, const DemoProfile& profile) {
  expects(peg_id >= 0 && peg_id < kPegCount, "demo_scene: invalid peg id");
  TaskState s;
  s.pegs = make_pegs();
  Rng rng = make_rng(seed, {stream::neighbors});
  std::vector<int> others;
  for (int p = 0; p < kPegCount; ++p)
    if (p != peg_id) others.push_back(p);
  std::shuffle(others.begin(), others.end(), rng);
  for (int i = 0; i < kBlockCount; ++i) s.blocks[i].id = i;
  for (int i = 0; i < kBlockCount - 1; ++i) seat_block(s.blocks[i], s.pegs[others[i]], rng);
  Block& target = s.blocks[kBlockCount - 1];
  seat_block(target, s.pegs[peg_id], rng);
  s.tip_true = home_pose();
  if (subtask == Subtask::place) {
    // Grasped near the grasp target; the opening then hangs off the tip.
    const Pose2 tip = grasp_target(target) + disc_sample(rng, profile.grip_jitter);
    target.state = BlockState::grasped;
    target.peg_id = -1;
    target.grip_offset = target.opening_center - tip;
    s.jaw = Jaw::closed;
    move_tip(s, tip);
  }
  return s;
}

Pose2 demo_goal(const TaskState& state, Subtask subtask, int peg_id) {
  if (subtask == Subtask::pick) {
    const auto b = block_on_peg(state, peg_id);
    expects(b.has_value(), "demo_goal: no block on the pick peg");
    return grasp_target(state.blocks[*b]);
  }
  const auto g = grasped_block(state);
  expects(g.has_value(), "demo_goal: no block grasped for place");
  return state.pegs[peg_id].center - state.blocks[*g].grip_offset;
}

RawTrajectory generate_demo(TaskState state, Subtask subtask, int peg_id, InstrumentModel inst,
                            const DemoProfile& profile, std::uint64_t seed, const Camera& cam) {
  profile.validate();
  Rng rng = make_rng(seed, {stream::demo});
  inst.reseed(seed);
  const Pose2 goal = demo_goal(state, subtask, peg_id);
  const Pose2 start = sample_start(goal, profile, seed);

  // Put the tip at `start` at rest, with the last motion having been away
  // from the goal so the first corrective motion has to take up the slack.
  Pose2 y, x;
  for (int a = 0; a < 2; ++a) {
    y[a] = (start[a] - inst.offset[a]) / inst.scale[a];
    const double dir = start[a] >= goal[a] ? 1.0 : -1.0;
    x[a] = y[a] + dir * inst.deadband[a] / 2.0;
  }
  inst.play_state = {y.x, y.y};
  inst.last_command = x;
  move_tip(state, start);

  RawTrajectory tr;
  tr.subtask = subtask;
  tr.peg_id = peg_id;
  tr.instrument = inst.name;
  tr.capture_rate = profile.capture_rate;
  tr.crop_center = state.pegs[peg_id].center + Pose2{gaussian(rng, PerceptionNoise{}.peg_sd),
                                                     gaussian(rng, PerceptionNoise{}.peg_sd)};
  const PixelRect win = centered_window(cam, tr.crop_center, kCropSize);
  auto record = [&] {
    RawFrame f;
    f.t = static_cast<double>(tr.frames.size()) / profile.capture_rate;
    f.image = render_rgb(state, cam, win);
    f.p = encoder_estimate(inst, x);
    tr.frames.push_back(std::move(f));
  };

  record();
  const bool arrived_at_start = distance(state.tip_true, goal) <= profile.arrive_tolerance;
  if (!arrived_at_start) {
    for (int i = 0; i < profile.react_frames; ++i) record();
    const double full_step = profile.speed / profile.capture_rate;
    for (int f = 0; static_cast<int>(tr.frames.size()) < profile.max_frames; ++f) {
      const Pose2 rem = goal - state.tip_true;
      const double d = rem.norm();
      if (d <= profile.arrive_tolerance) break;
      double step = full_step;
      if (profile.ramp_frames > 0) step *= std::min(1.0, (f + 1.0) / profile.ramp_frames);
      step = std::min(step, d);
      const Pose2 u = (1.0 / d) * rem;
      const Pose2 n{-u.y, u.x};
      const double lateral = gaussian(rng, profile.lateral_noise_sd) * std::min(1.0, step / 0.6);
      x = x + step * u + lateral * n;
      move_tip(state, command_move(inst, x));
      record();
    }
  }
  const int dwell = std::max(profile.dwell_frames, tr.frames.size() == 1 ? 2 : 1);
  for (int i = 1; i < dwell; ++i) record();
  if (tr.frames.size() < 2) record();
  return tr;
}

DemoDatasets collect_dataset(const DemoProfile& profile, const InstrumentModel& inst, std::uint64_t seed,
                             const Camera& cam, int per_peg, int threads) {
  profile.validate();
  expects(per_peg >= 1, "collect_dataset: per_peg must be >= 1");
  DemoDatasets out;
  const int n = kPegCount * per_peg;
  out.pick.resize(n);
  out.place.resize(n);
  detail::parallel_for(2 * n, threads, [&](int job) {
    const Subtask st = job < n ? Subtask::pick : Subtask::place;
    const int i = job % n;
    const int peg = i / per_peg;
    const std::uint64_t s = make_rng(seed, {stream::demo, st == Subtask::pick ? 0u : 1u,
                                            static_cast<std::uint64_t>(i)})();
    RawTrajectory tr = generate_demo(demo_scene(st, peg, s, profile), st, peg, inst, profile, s, cam);
    tr.id = job;
    (st == Subtask::pick ? out.pick : out.place)[i] = std::move(tr);
  });
  return out;
}

}  // namespace ivs
