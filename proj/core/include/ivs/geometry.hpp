#pragma once

#include <cmath>

namespace ivs {

// Planar position in the robot base frame, millimeters. The correction
// plane is fixed-z, so every lateral quantity lives here.
struct Pose2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Pose2& operator+=(const Pose2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Pose2& operator-=(const Pose2& o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  friend constexpr Pose2 operator+(Pose2 a, const Pose2& b) { return a += b; }
  friend constexpr Pose2 operator-(Pose2 a, const Pose2& b) { return a -= b; }
  friend constexpr Pose2 operator*(double s, const Pose2& p) {
    return {s * p.x, s * p.y};
  }
  friend constexpr Pose2 operator*(const Pose2& p, double s) { return s * p; }
  friend constexpr bool operator==(const Pose2&, const Pose2&) = default;

  double norm() const { return std::hypot(x, y); }
  double operator[](int axis) const { return axis == 0 ? x : y; }
  double& operator[](int axis) { return axis == 0 ? x : y; }
};

inline double distance(const Pose2& a, const Pose2& b) { return (a - b).norm(); }

inline Pose2 rotate(const Pose2& p, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * p.x - s * p.y, s * p.x + c * p.y};
}

inline bool is_finite(const Pose2& p) {
  return std::isfinite(p.x) && std::isfinite(p.y);
}

}  // namespace ivs
