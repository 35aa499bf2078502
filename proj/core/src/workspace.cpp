#include "ivs/workspace.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "ivs/errors.hpp"
#include "ivs/rng.hpp"

namespace ivs {

std::string_view to_string(Subtask s) { return s == Subtask::pick ? "pick" : "place"; }

Subtask parse_subtask(std::string_view s) {
  if (s == "pick") return Subtask::pick;
  if (s == "place") return Subtask::place;
  throw Error("unknown subtask '" + std::string(s) + "'");
}

Pose2 peg_position(int peg_id) {
  expects(peg_id >= 0 && peg_id < kPegCount, "peg id out of range: " + std::to_string(peg_id));
  const int local = peg_id % 6;
  const int row = local / 2;
  const int col = local % 2;
  const double x0 = peg_id < 6 ? -75.0 : 50.0;
  return {x0 + col * kPegPitch, kPegPitch - row * kPegPitch};
}

std::array<Peg, kPegCount> make_pegs() {
  std::array<Peg, kPegCount> pegs{};
  for (int i = 0; i < kPegCount; ++i) pegs[i] = Peg{i, peg_position(i), kPegRadius};
  return pegs;
}

int mirror_peg(int peg_id) {
  expects(peg_id >= 0 && peg_id < kPegCount, "peg id out of range");
  return peg_id < 6 ? peg_id + 6 : peg_id - 6;
}

Pose2 home_pose() { return {0.0, 0.0}; }

bool in_workspace(const Pose2& p) {
  return is_finite(p) && std::abs(p.x) <= kWorkspaceLimit && std::abs(p.y) <= kWorkspaceLimit;
}

TaskState init_board(std::uint64_t seed, Side side) {
  TaskState s;
  s.pegs = make_pegs();
  Rng rng = make_rng(seed, {stream::board, side == Side::left ? 0u : 1u});
  const int first = side == Side::left ? 0 : 6;
  for (int i = 0; i < kBlockCount; ++i) {
    Block& b = s.blocks[i];
    b.id = i;
    b.peg_id = first + i;
    b.state = BlockState::on_peg;
    b.orientation = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    // Uniform over the clearance disc.
    const double r = clearance(b, s.pegs[b.peg_id]) * std::sqrt(uniform(rng, 0.0, 1.0));
    const double a = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    b.opening_center = s.pegs[b.peg_id].center + Pose2{r * std::cos(a), r * std::sin(a)};
  }
  s.tip_true = home_pose();
  s.tip_z = ZLevel::travel;
  s.jaw = Jaw::open;
  s.clock = 0.0;
  return s;
}

double clearance(const Block& block, const Peg& peg) { return block.opening_radius - peg.radius; }

double circumradius(const Block& block) { return block.footprint_side / std::sqrt(3.0); }

std::array<Pose2, 3> footprint_vertices(const Block& block) {
  const double R = circumradius(block);
  std::array<Pose2, 3> v{};
  for (int k = 0; k < 3; ++k) {
    const double a = block.orientation + k * 2.0 * std::numbers::pi / 3.0;
    v[k] = block.opening_center + Pose2{R * std::cos(a), R * std::sin(a)};
  }
  return v;
}

bool inside_footprint(const Block& block, const Pose2& p) {
  const auto v = footprint_vertices(block);
  // Counter-clockwise vertices: inside iff left of (or on) every edge.
  for (int k = 0; k < 3; ++k) {
    const Pose2 e = v[(k + 1) % 3] - v[k];
    const Pose2 q = p - v[k];
    if (e.x * q.y - e.y * q.x < 0.0) return false;
  }
  return true;
}

bool on_block_material(const Block& block, const Pose2& p) {
  return inside_footprint(block, p) && distance(p, block.opening_center) > block.opening_radius;
}

Pose2 grasp_target(const Block& block) {
  const double inradius = circumradius(block) / 2.0;
  const double r = 2.0 * (inradius + block.opening_radius) / 3.0;
  return block.opening_center + Pose2{r * std::cos(block.orientation), r * std::sin(block.orientation)};
}

double grasp_margin(const Block& block) {
  const double inradius = circumradius(block) / 2.0;
  return (2.0 * inradius - block.opening_radius) / 3.0;
}

std::optional<int> grasped_block(const TaskState& state) {
  for (const auto& b : state.blocks)
    if (b.state == BlockState::grasped) return b.id;
  return std::nullopt;
}

std::optional<int> block_on_peg(const TaskState& state, int peg_id) {
  for (const auto& b : state.blocks)
    if (b.state == BlockState::on_peg && b.peg_id == peg_id) return b.id;
  return std::nullopt;
}

void move_tip(TaskState& state, const Pose2& tip) {
  state.tip_true = tip;
  if (auto g = grasped_block(state)) {
    Block& b = state.blocks[*g];
    b.opening_center = tip + b.grip_offset;
  }
}

std::optional<int> close_jaw(TaskState& state) {
  expects(state.jaw == Jaw::open, "close_jaw: jaws already closed");
  state.jaw = Jaw::closed;
  std::optional<int> hit;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& b : state.blocks) {
    if (b.state != BlockState::on_peg || !on_block_material(b, state.tip_true)) continue;
    const double d = distance(b.opening_center, state.tip_true);
    if (d < best) {
      best = d;
      hit = b.id;
    }
  }
  if (hit) {
    Block& b = state.blocks[*hit];
    b.state = BlockState::grasped;
    b.grip_offset = b.opening_center - state.tip_true;
    b.peg_id = -1;
  }
  return hit;
}

void set_z(TaskState& state, ZLevel z) { state.tip_z = z; }

bool check_pick_success(const TaskState& state) {
  return state.jaw == Jaw::closed && state.tip_z == ZLevel::travel && grasped_block(state).has_value();
}

bool check_place_success(const TaskState& state, int peg_id) {
  expects(peg_id >= 0 && peg_id < kPegCount, "check_place_success: invalid peg id " + std::to_string(peg_id));
  const auto g = grasped_block(state);
  if (!g) return false;
  const Block& b = state.blocks[*g];
  const Peg& peg = state.pegs[peg_id];
  return distance(b.opening_center, peg.center) <= clearance(b, peg);
}

bool release_block(TaskState& state, int peg_id) {
  expects(peg_id >= 0 && peg_id < kPegCount, "release_block: invalid peg id " + std::to_string(peg_id));
  const auto g = grasped_block(state);
  expects(g.has_value(), "release_block: no block grasped");
  const bool ok = check_place_success(state, peg_id) && !block_on_peg(state, peg_id).has_value();
  Block& b = state.blocks[*g];
  state.jaw = Jaw::open;
  b.grip_offset = {};
  if (ok) {
    b.state = BlockState::on_peg;
    b.peg_id = peg_id;
  } else {
    b.state = BlockState::dropped;
    b.peg_id = -1;
  }
  return ok;
}

}  // namespace ivs
