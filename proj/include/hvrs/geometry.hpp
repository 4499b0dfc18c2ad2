#pragma once

#include <cmath>

namespace hvrs {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm() const { return std::sqrt(x * x + y * y); }
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  Vec2 xy() const { return {x, y}; }
};

// Planar pose with height: (x, y, z) position plus yaw, yaw wrapped to (-pi, pi].
struct Pose2Z {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double yaw = 0.0;

  Vec2 xy() const { return {x, y}; }
  Vec3 xyz() const { return {x, y, z}; }
};

// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

// Smallest absolute angular difference, in [0, pi].
double angle_dist(double a, double b);

// Rotates v by yaw (world <- agent frame).
Vec2 rotate(const Vec2& v, double yaw);

// Rotates v by -yaw (agent <- world frame).
Vec2 rotate_inv(const Vec2& v, double yaw);

Vec3 rotate(const Vec3& v, double yaw);
Vec3 rotate_inv(const Vec3& v, double yaw);

Vec2 normalized_or(const Vec2& v, const Vec2& fallback, double eps = 1e-9);

// Clamps v to the given Euclidean norm.
Vec2 clamp_norm(const Vec2& v, double max_norm);
Vec3 clamp_norm(const Vec3& v, double max_norm);

double clampd(double v, double lo, double hi);

}  // namespace hvrs
