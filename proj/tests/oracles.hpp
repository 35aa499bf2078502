#pragma once

// Independent reference implementations used as test oracles. They follow
// the definitions literally and favor clarity over speed.

#include <cmath>
#include <vector>

#include "ivs/geometry.hpp"
#include "ivs/workspace.hpp"

namespace oracle {

using ivs::Pose2;

// Point in triangle by barycentric coordinates (no winding assumptions).
inline bool in_triangle(const Pose2& p, const Pose2& a, const Pose2& b, const Pose2& c) {
  const double det = (b.y - c.y) * (a.x - c.x) + (c.x - b.x) * (a.y - c.y);
  const double l1 = ((b.y - c.y) * (p.x - c.x) + (c.x - b.x) * (p.y - c.y)) / det;
  const double l2 = ((c.y - a.y) * (p.x - c.x) + (a.x - c.x) * (p.y - c.y)) / det;
  const double l3 = 1.0 - l1 - l2;
  return l1 >= -1e-12 && l2 >= -1e-12 && l3 >= -1e-12;
}

// Block material: inside an equilateral triangle of the given side whose
// first vertex points along `orientation`, and outside the opening disc.
inline bool on_material(const Pose2& center, double orientation, double side, double hole, const Pose2& p) {
  const double R = side / std::sqrt(3.0);
  Pose2 v[3];
  for (int k = 0; k < 3; ++k) {
    const double a = orientation + k * 2.0 * M_PI / 3.0;
    v[k] = {center.x + R * std::cos(a), center.y + R * std::sin(a)};
  }
  return in_triangle(p, v[0], v[1], v[2]) && std::hypot(p.x - center.x, p.y - center.y) > hole;
}

// a_t by enumerating the candidate set {t'' > t : |p_t'' - p_t| >= lambda} in full.
inline std::vector<Pose2> actions(const std::vector<Pose2>& p, double lambda) {
  const std::size_t T = p.size() - 1;
  std::vector<Pose2> out;
  for (std::size_t t = 0; t <= T; ++t) {
    std::vector<std::size_t> candidates;
    for (std::size_t u = 0; u <= T; ++u)
      if (u > t && std::hypot(p[u].x - p[t].x, p[u].y - p[t].y) >= lambda) candidates.push_back(u);
    std::size_t tp = T;
    for (std::size_t c : candidates) tp = std::min(tp, c);
    const double dx = p[tp].x - p[t].x, dy = p[tp].y - p[t].y;
    const double n = std::hypot(dx, dy);
    const double f = lambda / n;
    out.push_back(n == 0.0 ? Pose2{0.0, 0.0} : Pose2{f * dx, f * dy});
  }
  return out;
}

inline std::vector<int> terminations(const std::vector<Pose2>& p, double nu) {
  std::vector<int> out;
  for (const auto& q : p) out.push_back(std::hypot(p.back().x - q.x, p.back().y - q.y) <= nu ? 1 : 0);
  return out;
}

// Play operator, written from its definition (|x - y| <= b/2 means no motion).
inline double play(double y, double x, double b) {
  if (std::abs(x - y) <= b / 2.0) return y;
  return x > y ? x - b / 2.0 : x + b / 2.0;
}

}  // namespace oracle
