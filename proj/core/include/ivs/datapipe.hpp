#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ivs/geometry.hpp"
#include "ivs/image.hpp"
#include "ivs/render.hpp"
#include "ivs/workspace.hpp"

namespace ivs {

struct Hyperparameters {
  double lambda = 1.0;  // corrective step length, mm
  double nu = 2.0;      // termination radius, mm
  double omega = 0.70;  // per-member termination probability threshold
  int kappa = 3;        // votes needed
  double mu = 1.0;      // weight of the cross-entropy term
  int k = 4;            // ensemble size

  void validate() const;
};

inline constexpr int kCropSize = 150;
inline constexpr double kBlockKeepRadiusMm = 12.0;

// 150x150 window centered on the peg pixel, with every red pixel farther than
// the keep radius from the peg replaced by the background color. `raw` may be
// a full frame or any region of it (located by its origin fields).
Image preprocess(const Image& raw, const Pose2& peg_center, const Camera& cam);

// Symmetries of a square crop. Element g in [0, 8): g % 4 quarter turns
// counter-clockwise (in the world frame) followed, for g >= 4, by a mirror
// x -> -x. The image version acts about the crop center; the Pose2 version
// maps an action label consistently.
inline constexpr int kDihedralOrder = 8;
Image dihedral(const Image& img, int g);
Pose2 dihedral(const Pose2& v, int g);

struct RawFrame {
  double t = 0.0;
  Image image;
  Pose2 p;  // encoder-side tip position
  friend bool operator==(const RawFrame&, const RawFrame&) = default;
};

struct RawTrajectory {
  int id = 0;
  Subtask subtask = Subtask::pick;
  int peg_id = 0;
  std::string instrument;
  Pose2 crop_center;  // peg center used for cropping (perceived)
  double capture_rate = 5.0;
  std::vector<RawFrame> frames;
  friend bool operator==(const RawTrajectory&, const RawTrajectory&) = default;
};

struct LabeledSample {
  Image image;
  Pose2 action;
  int termination = 0;
};

// Label rules over encoder positions p_0..p_T.
//   action_t: lambda * unit(p_t' - p_t), t' the first later index at least
//             lambda away from p_t (T when none); zero when p_t' == p_t.
//   term_t:   1 iff |p_T - p_t| <= nu.
std::vector<Pose2> action_labels(std::span<const Pose2> positions, double lambda);
std::vector<int> termination_labels(std::span<const Pose2> positions, double nu);

std::vector<std::pair<Image, Pose2>> extract_actions(const RawTrajectory& traj, double lambda,
                                                     const Camera& cam);
std::vector<std::pair<Image, int>> extract_termination(const RawTrajectory& traj, double nu,
                                                       const Camera& cam);
std::vector<LabeledSample> label_trajectory(const RawTrajectory& traj, const Hyperparameters& hyper,
                                            const Camera& cam);

std::vector<Pose2> positions_of(const RawTrajectory& traj);

// Directory layout: manifest.jsonl (one trajectory per line) + images/*.ppm.
void write_dataset(std::span<const RawTrajectory> trajs, const std::filesystem::path& dir);
std::vector<RawTrajectory> read_dataset(const std::filesystem::path& dir);

}  // namespace ivs
