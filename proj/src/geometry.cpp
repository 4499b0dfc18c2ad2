#include "hvrs/geometry.hpp"

#include <numbers>

namespace hvrs {

namespace {
constexpr double kPi = std::numbers::pi;
}

double wrap_angle(double a) {
  const double two_pi = 2.0 * kPi;
  double w = std::fmod(a, two_pi);
  if (w <= -kPi) w += two_pi;
  if (w > kPi) w -= two_pi;
  return w;
}

double angle_dist(double a, double b) { return std::fabs(wrap_angle(a - b)); }

Vec2 rotate(const Vec2& v, double yaw) {
  const double c = std::cos(yaw), s = std::sin(yaw);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

Vec2 rotate_inv(const Vec2& v, double yaw) { return rotate(v, -yaw); }

Vec3 rotate(const Vec3& v, double yaw) {
  const Vec2 r = rotate(Vec2{v.x, v.y}, yaw);
  return {r.x, r.y, v.z};
}

Vec3 rotate_inv(const Vec3& v, double yaw) { return rotate(v, -yaw); }

Vec2 normalized_or(const Vec2& v, const Vec2& fallback, double eps) {
  const double n = v.norm();
  if (n < eps) return fallback;
  return {v.x / n, v.y / n};
}

Vec2 clamp_norm(const Vec2& v, double max_norm) {
  const double n = v.norm();
  if (n <= max_norm || n == 0.0) return v;
  return v * (max_norm / n);
}

Vec3 clamp_norm(const Vec3& v, double max_norm) {
  const double n = v.norm();
  if (n <= max_norm || n == 0.0) return v;
  return v * (max_norm / n);
}

double clampd(double v, double lo, double hi) { return v < lo ? lo : (v > hi ? hi : v); }

}  // namespace hvrs
