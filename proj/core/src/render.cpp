#include "ivs/render.hpp"

#include <algorithm>
#include <cmath>

#include "ivs/errors.hpp"
#include "ivs/rng.hpp"

namespace ivs {

bool Camera::valid() const {
  if (!(mm_per_px > 0.0) || frame_w <= 0 || frame_h <= 0) return false;
  const Pose2 tl = to_pixel({-kBoardHalfWidth, kBoardHalfHeight});
  const Pose2 br = to_pixel({kBoardHalfWidth, -kBoardHalfHeight});
  return tl.x >= -0.5 && tl.y >= -0.5 && br.x <= frame_w - 0.5 && br.y <= frame_h - 0.5;
}

PixelRect centered_window(const Camera& cam, const Pose2& center, int size) {
  const Pose2 px = cam.to_pixel(center);
  const int c = static_cast<int>(std::lround(px.x));
  const int r = static_cast<int>(std::lround(px.y));
  return {c - size / 2, r - size / 2, size, size};
}

namespace {

struct Canvas {
  Image& img;
  const Camera& cam;
  PixelRect region;

  // Calls paint(world_point) -> optional color for pixels whose centers fall
  // in the world-space box [lo, hi].
  template <class F>
  void fill(const Pose2& lo, const Pose2& hi, F&& shade) {
    const Pose2 a = cam.to_pixel({lo.x, hi.y});
    const Pose2 b = cam.to_pixel({hi.x, lo.y});
    const int c0 = std::max(region.col, static_cast<int>(std::floor(a.x)) - 1);
    const int r0 = std::max(region.row, static_cast<int>(std::floor(a.y)) - 1);
    const int c1 = std::min(region.col + region.width - 1, static_cast<int>(std::ceil(b.x)) + 1);
    const int r1 = std::min(region.row + region.height - 1, static_cast<int>(std::ceil(b.y)) + 1);
    for (int r = r0; r <= r1; ++r)
      for (int c = c0; c <= c1; ++c)
        if (auto color = shade(cam.pixel_center(c, r))) img.set(c - region.col, r - region.row, *color);
  }
};

void draw_block(Canvas& cv, const Block& b) {
  const double R = circumradius(b);
  cv.fill(b.opening_center - Pose2{R, R}, b.opening_center + Pose2{R, R},
          [&](const Pose2& p) -> std::optional<Rgb> {
            if (on_block_material(b, p)) return palette::block;
            return std::nullopt;
          });
}

}  // namespace

Image render_rgb(const TaskState& state, const Camera& cam, std::optional<PixelRect> region) {
  const PixelRect rect = region.value_or(PixelRect{0, 0, cam.frame_w, cam.frame_h});
  expects(rect.col >= 0 && rect.row >= 0 && rect.width >= 0 && rect.height >= 0 &&
              rect.col + rect.width <= cam.frame_w && rect.row + rect.height <= cam.frame_h,
          "render_rgb: region outside the camera frame");
  Image img(rect.width, rect.height, palette::background);
  img.origin_col = rect.col;
  img.origin_row = rect.row;
  Canvas cv{img, cam, rect};

  cv.fill({-kBoardHalfWidth, -kBoardHalfHeight}, {kBoardHalfWidth, kBoardHalfHeight},
          [](const Pose2& p) -> std::optional<Rgb> {
            if (std::abs(p.x) <= kBoardHalfWidth && std::abs(p.y) <= kBoardHalfHeight) return palette::board;
            return std::nullopt;
          });

  for (const auto& b : state.blocks)
    if (b.state != BlockState::grasped) draw_block(cv, b);

  const double rim = cam.mm_per_px;
  for (const auto& peg : state.pegs) {
    const Pose2 ext{peg.radius, peg.radius};
    cv.fill(peg.center - ext, peg.center + ext, [&](const Pose2& p) -> std::optional<Rgb> {
      const double d = distance(p, peg.center);
      if (d > peg.radius) return std::nullopt;
      return d > peg.radius - rim ? palette::peg_rim : palette::peg;
    });
  }

  for (const auto& b : state.blocks)
    if (b.state == BlockState::grasped) draw_block(cv, b);

  // Instrument tip with a jaw tick pointing +y; the tick is shorter when closed.
  const double tip_r = kTipRadiusPx * cam.mm_per_px;
  const double tick_len = (state.jaw == Jaw::open ? 1.0 : 0.5) * tip_r;
  const double tick_half_w = 0.5 * cam.mm_per_px;
  const Pose2 t = state.tip_true;
  cv.fill(t - Pose2{tip_r, tip_r}, t + Pose2{tip_r, tip_r}, [&](const Pose2& p) -> std::optional<Rgb> {
    const Pose2 d = p - t;
    if (d.norm() > tip_r) return std::nullopt;
    if (std::abs(d.x) <= tick_half_w && d.y >= 0.0 && d.y <= tick_len) return palette::background;
    return palette::instrument;
  });
  return img;
}

Perception perceive_poses(TaskState& state, std::uint64_t seed, const PerceptionNoise& noise) {
  expects(!state.tip_moving, "perceive_poses: depth sensing needs a stationary instrument");
  Rng rng = make_rng(seed, {stream::perception});
  Perception out;
  for (int i = 0; i < kBlockCount; ++i) {
    const double nx = gaussian(rng, noise.block_sd);
    const double ny = gaussian(rng, noise.block_sd);
    out.blocks[i] = state.blocks[i].opening_center + Pose2{nx, ny};
    out.orientations[i] = state.blocks[i].orientation;
  }
  for (int i = 0; i < kPegCount; ++i) {
    const double nx = gaussian(rng, noise.peg_sd);
    const double ny = gaussian(rng, noise.peg_sd);
    out.pegs[i] = state.pegs[i].center + Pose2{nx, ny};
  }
  state.clock += 1.0 / noise.rate_hz;
  return out;
}

}  // namespace ivs
