#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "ivs/geometry.hpp"
#include "ivs/image.hpp"
#include "ivs/workspace.hpp"

namespace ivs {

// Orthographic top-down camera. Pixel (col, row) has its center at
//   x = origin.x + (col + 0.5) * mm_per_px,  y = origin.y - (row + 0.5) * mm_per_px
struct Camera {
  double mm_per_px = 0.25;
  int frame_w = 1900;
  int frame_h = 1200;
  Pose2 origin{-237.5, 150.0};

  Pose2 pixel_center(int col, int row) const {
    return {origin.x + (col + 0.5) * mm_per_px, origin.y - (row + 0.5) * mm_per_px};
  }
  // Continuous pixel coordinates (col, row) of a world point.
  Pose2 to_pixel(const Pose2& p) const {
    return {(p.x - origin.x) / mm_per_px - 0.5, (origin.y - p.y) / mm_per_px - 0.5};
  }
  bool valid() const;
};

struct PixelRect {
  int col = 0;
  int row = 0;
  int width = 0;
  int height = 0;
  friend constexpr bool operator==(const PixelRect&, const PixelRect&) = default;
};

namespace palette {
inline constexpr Rgb background{60, 60, 60};
inline constexpr Rgb board{200, 30, 30};
inline constexpr Rgb block{235, 45, 45};
inline constexpr Rgb peg{180, 25, 25};
inline constexpr Rgb peg_rim{150, 20, 20};
inline constexpr Rgb instrument{120, 120, 120};
inline constexpr std::array<Rgb, 6> all{background, board, block, peg, peg_rim, instrument};
}  // namespace palette

inline constexpr int kTipRadiusPx = 8;

// Red classifier shared with preprocessing.
constexpr bool is_red(Rgb c) {
  const int mx = c.g > c.b ? c.g : c.b;
  return c.r >= 150 && c.r - mx >= 60;
}

// square window of side `size` whose center pixel is the one containing `center`
PixelRect centered_window(const Camera& cam, const Pose2& center, int size);

// Renders the whole frame, or only `region`. Every pixel is a pure function of
// its center, so a region render equals the same crop of a full render.
Image render_rgb(const TaskState& state, const Camera& cam,
                 std::optional<PixelRect> region = std::nullopt);

struct PerceptionNoise {
  double block_sd = 1.0;
  double peg_sd = 0.3;
  double rate_hz = 1.6;  // RGBD capture and processing rate
};

struct Perception {
  std::array<Pose2, kBlockCount> blocks{};
  std::array<double, kBlockCount> orientations{};
  std::array<Pose2, kPegCount> pegs{};
};

// Noisy block/peg estimate from a depth snapshot. Advances the clock by one
// RGBD period. The tip must be stationary.
Perception perceive_poses(TaskState& state, std::uint64_t seed, const PerceptionNoise& noise = {});

}  // namespace ivs
