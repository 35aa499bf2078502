#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

#include "ivs/geometry.hpp"

namespace ivs {

enum class Side { left, right };
enum class Subtask { pick, place };
enum class ZLevel { travel, plane, board };
enum class Jaw { open, closed };
enum class BlockState { on_peg, grasped, dropped };

std::string_view to_string(Subtask s);
Subtask parse_subtask(std::string_view s);

inline constexpr int kPegCount = 12;
inline constexpr int kBlockCount = 6;
inline constexpr double kPegRadius = 1.125;       // 2.25 mm wide peg
inline constexpr double kOpeningRadius = 4.5;
inline constexpr double kFootprintSide = 18.0;
inline constexpr double kPegPitch = 25.0;
inline constexpr double kBoardHalfWidth = 100.0;  // board spans [-100, 100] x [-50, 50]
inline constexpr double kBoardHalfHeight = 50.0;
inline constexpr double kWorkspaceLimit = kBoardHalfWidth + 50.0;

struct Peg {
  int id = 0;
  Pose2 center;
  double radius = kPegRadius;
};

struct Block {
  int id = 0;
  Pose2 opening_center;
  double orientation = 0.0;  // direction of the grasp corner, radians
  double opening_radius = kOpeningRadius;
  double footprint_side = kFootprintSide;
  BlockState state = BlockState::on_peg;
  int peg_id = -1;           // meaningful while on_peg
  Pose2 grip_offset;         // opening_center - tip while grasped
};

struct TaskState {
  std::array<Peg, kPegCount> pegs{};
  std::array<Block, kBlockCount> blocks{};
  Pose2 tip_true;
  ZLevel tip_z = ZLevel::travel;
  Jaw jaw = Jaw::open;
  double clock = 0.0;
  bool tip_moving = false;
};

// Two 2x3 grids: left ids 0-5 at x in {-75, -50}, right ids 6-11 at
// x in {50, 75}; rows y = 25, 0, -25 top to bottom.
Pose2 peg_position(int peg_id);
std::array<Peg, kPegCount> make_pegs();
int mirror_peg(int peg_id);
Pose2 home_pose();

bool in_workspace(const Pose2& p);

TaskState init_board(std::uint64_t seed, Side side);

double clearance(const Block& block, const Peg& peg);
double circumradius(const Block& block);
std::array<Pose2, 3> footprint_vertices(const Block& block);
bool inside_footprint(const Block& block, const Pose2& p);
bool on_block_material(const Block& block, const Pose2& p);

// Center of the largest disc that fits in the corner region at the block's
// orientation, i.e. the point with the most slack against both the footprint
// edges and the opening.
Pose2 grasp_target(const Block& block);
double grasp_margin(const Block& block);

std::optional<int> grasped_block(const TaskState& state);
std::optional<int> block_on_peg(const TaskState& state, int peg_id);

// Sets the true tip pose; a grasped block follows rigidly.
void move_tip(TaskState& state, const Pose2& tip);

// Completion primitives. close_jaw grasps whatever on-peg block has material
// under the jaw center and returns its id.
std::optional<int> close_jaw(TaskState& state);
void set_z(TaskState& state, ZLevel z);
bool check_pick_success(const TaskState& state);

bool check_place_success(const TaskState& state, int peg_id);
// Opens the jaws over peg_id. The block lands on the peg when it fits and is
// dropped otherwise. Returns the place outcome.
bool release_block(TaskState& state, int peg_id);

}  // namespace ivs
