#include "ivs/control.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ivs/errors.hpp"

namespace ivs {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::uncal: return "uncal";
    case Method::cal: return "cal";
    case Method::ivs: return "ivs";
  }
  return "?";
}

Method parse_method(std::string_view s) {
  if (s == "uncal" || s == "UNCAL") return Method::uncal;
  if (s == "cal" || s == "CAL") return Method::cal;
  if (s == "ivs" || s == "IVS") return Method::ivs;
  throw Error("unknown method '" + std::string(s) + "'");
}

double TimingModel::rate_for(int k) const {
  expects(!servo_rate_hz.empty(), "timing model has no servo rates");
  if (auto it = servo_rate_hz.find(k); it != servo_rate_hz.end()) return it->second;
  auto hi = servo_rate_hz.lower_bound(k);
  if (hi == servo_rate_hz.begin()) return hi->second;
  if (hi == servo_rate_hz.end()) return std::prev(hi)->second;
  auto lo = std::prev(hi);
  const double f = static_cast<double>(k - lo->first) / (hi->first - lo->first);
  return lo->second + f * (hi->second - lo->second);
}

double TimingModel::transfer_cost(const PerceptionNoise& perception) const {
  return 1.0 / perception.rate_hz + pick_approach + grasp + place_approach + release;
}

void TimingModel::validate() const {
  for (double v : {pick_approach, grasp, place_approach, release})
    if (!(v >= 0.0)) throw Error("timing: primitive durations must be >= 0");
  if (servo_rate_hz.empty()) throw Error("timing: servo_rate_hz is empty");
  for (const auto& [k, r] : servo_rate_hz)
    if (k < 1 || !(r > 0.0)) throw Error("timing: servo rates need k >= 1 and rate > 0");
}

void ServoConfig::validate() const {
  if (!(rate > 0.0)) throw Error("servo: rate must be > 0");
  if (max_steps < 1) throw Error("servo: max_steps must be >= 1");
  hyper.validate();
}

ServoConfig servo_config_for(const TimingModel& timing, const Hyperparameters& hyper, int max_steps) {
  ServoConfig c;
  c.rate = timing.rate_for(hyper.k);
  c.max_steps = max_steps;
  c.hyper = hyper;
  return c;
}

Simulation Simulation::start(TaskState state, InstrumentModel inst, const Camera& cam,
                             const TimingModel& timing, const Observer* observer) {
  Simulation sim;
  sim.cam = cam;
  sim.timing = timing;
  sim.command = home_pose();
  sim.inst = std::move(inst);
  sim.inst.reset(sim.command);
  sim.state = std::move(state);
  move_tip(sim.state, true_pose_mean(sim.inst));
  sim.state.tip_z = ZLevel::travel;
  sim.state.tip_moving = false;
  if (observer) sim.tracker.emplace(*observer, sim.command);
  return sim;
}

Pose2 Simulation::believed_tip() const { return tracker ? tracker->predicted() : command; }

std::vector<Pose2> plan_approach(const Pose2& from, const Pose2& target, double spacing) {
  if (!in_workspace(target)) throw Error("approach target outside the workspace");
  expects(spacing > 0.0, "plan_approach: spacing must be > 0");
  const double len = distance(from, target);
  const int n = std::max(1, static_cast<int>(std::ceil(len / spacing)));
  std::vector<Pose2> w;
  w.reserve(n);
  for (int i = 1; i < n; ++i) w.push_back(from + (static_cast<double>(i) / n) * (target - from));
  w.push_back(target);
  return w;
}

Pose2 pick_target(const Perception& perceived, int block_id) {
  expects(block_id >= 0 && block_id < kBlockCount, "pick_target: invalid block id");
  Block b;
  b.opening_center = perceived.blocks[block_id];
  b.orientation = perceived.orientations[block_id];
  return grasp_target(b);
}

Pose2 place_target(const Perception& perceived, int peg_id, const Pose2& expected_grip_offset) {
  expects(peg_id >= 0 && peg_id < kPegCount, "place_target: invalid peg id");
  return perceived.pegs[peg_id] - expected_grip_offset;
}

namespace {

void move_command(Simulation& sim, const Pose2& cmd) {
  sim.command = cmd;
  move_tip(sim.state, command_move(sim.inst, cmd));
  if (sim.tracker) sim.tracker->push(cmd);
}

}  // namespace

void execute_approach(Simulation& sim, const std::vector<Pose2>& waypoints) {
  sim.state.tip_z = ZLevel::travel;
  sim.state.tip_moving = true;
  for (const auto& w : waypoints) move_command(sim, sim.tracker ? sim.tracker->command_for(w) : w);
  sim.state.tip_z = ZLevel::plane;
  sim.state.tip_moving = false;
}

CorrectionResult servo_correct(Simulation& sim, const ServoContext& ctx, const ServoConfig& cfg) {
  expects(ctx.policy != nullptr && ctx.policy->k() >= 1, "servo_correct: no trained ensemble");
  expects(sim.state.tip_z == ZLevel::plane, "servo_correct: tip is not at the correction plane");
  cfg.validate();
  CorrectionResult r;
  const double lambda = cfg.hyper.lambda;
  const PixelRect win = centered_window(sim.cam, ctx.crop_center, kCropSize);
  while (true) {
    const Image img = preprocess(render_rgb(sim.state, sim.cam, win), ctx.crop_center, sim.cam);
    const QueryResult q = query(*ctx.policy, img, ctx.subtask, cfg.hyper.omega, cfg.hyper.kappa, cfg.threads);
    if (q.termination) {
      r.terminated = true;
      break;
    }
    if (r.steps >= cfg.max_steps) break;
    const double n = q.action.norm();
    const Pose2 step = n > 0.0 ? (lambda / n) * q.action : Pose2{};
    const Pose2 before = sim.state.tip_true;
    move_command(sim, sim.command + step);
    r.distance += std::min(lambda, distance(before, sim.state.tip_true));
    ++r.steps;
    sim.state.clock += 1.0 / cfg.rate;
  }
  r.elapsed = r.steps / cfg.rate;
  return r;
}

bool complete_pick(Simulation& sim) {
  expects(sim.state.jaw == Jaw::open, "complete_pick: jaws already closed");
  expects(!grasped_block(sim.state).has_value(), "complete_pick: already holding a block");
  set_z(sim.state, ZLevel::board);
  close_jaw(sim.state);
  set_z(sim.state, ZLevel::travel);
  const bool ok = check_pick_success(sim.state);
  if (!ok) sim.state.jaw = Jaw::open;  // nothing between the jaws
  sim.state.clock += sim.timing.grasp;
  return ok;
}

bool complete_place(Simulation& sim, int peg_id) {
  expects(grasped_block(sim.state).has_value(), "complete_place: no block grasped");
  const bool ok = release_block(sim.state, peg_id);
  set_z(sim.state, ZLevel::travel);
  sim.state.clock += sim.timing.release;
  return ok;
}

SubtaskResult run_subtask(Simulation& sim, const SubtaskRequest& req, const EnsemblePolicy* policy,
                          const ServoConfig& cfg) {
  if (req.method == Method::cal && !sim.tracker) throw Error("CAL requires a fitted observer");
  if (req.method != Method::cal && sim.tracker) throw Error("observer tracking is only used by CAL");
  if (req.method == Method::ivs && (policy == nullptr || policy->k() < 1))
    throw Error("IVS requires a trained ensemble");
  const double t0 = sim.state.clock;
  SubtaskResult res;
  execute_approach(sim, plan_approach(sim.believed_tip(), req.target));
  sim.state.clock += req.subtask == Subtask::pick ? sim.timing.pick_approach : sim.timing.place_approach;
  if (req.method == Method::ivs)
    res.correction = servo_correct(sim, {policy, req.subtask, req.crop_center}, cfg);
  res.success = req.subtask == Subtask::pick ? complete_pick(sim) : complete_place(sim, req.peg_id);
  res.elapsed = sim.state.clock - t0;
  return res;
}

}  // namespace ivs
