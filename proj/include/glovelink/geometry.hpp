#pragma once

#include <array>
#include <cmath>

namespace glovelink {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3() = default;
  constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
  constexpr double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator-() const { return {-x, -y, -z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }

  constexpr bool operator==(const Vec3&) const = default;

  constexpr double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  constexpr Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const { return std::sqrt(dot(*this)); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

/// Unit quaternion stored (w, x, y, z), canonicalized to w >= 0.
///
/// Construction normalizes only when the squared norm drifts from one by
/// more than a few ulps, so re-wrapping an already-unit quaternion is
/// bitwise idempotent.
class UnitQuat {
 public:
  UnitQuat() = default;
  UnitQuat(double w, double x, double y, double z);

  static UnitQuat identity() { return {}; }
  /// Rotation of `angle` radians about `axis` (need not be normalized).
  static UnitQuat from_axis_angle(const Vec3& axis, double angle);
  static UnitQuat rot_x(double angle) { return from_axis_angle({1, 0, 0}, angle); }
  static UnitQuat rot_y(double angle) { return from_axis_angle({0, 1, 0}, angle); }
  static UnitQuat rot_z(double angle) { return from_axis_angle({0, 0, 1}, angle); }

  double w() const { return w_; }
  double x() const { return x_; }
  double y() const { return y_; }
  double z() const { return z_; }
  Vec3 vec() const { return {x_, y_, z_}; }
  std::array<double, 4> wxyz() const { return {w_, x_, y_, z_}; }

  UnitQuat conjugate() const;
  UnitQuat operator*(const UnitQuat& o) const;
  Vec3 rotate(const Vec3& v) const;

  /// Rotation angle in [0, pi].
  double angle() const;
  /// Axis-angle vector (axis * angle); zero vector for identity.
  Vec3 log() const;

  bool operator==(const UnitQuat&) const = default;

 private:
  double w_ = 1.0;
  double x_ = 0.0;
  double y_ = 0.0;
  double z_ = 0.0;
};

struct Pose {
  Vec3 position;
  UnitQuat orientation;

  static Pose identity() { return {}; }
  bool operator==(const Pose&) const = default;
};

enum class FrameTag { S, H, R, T };

Pose compose(const Pose& a, const Pose& b);
Pose inverse(const Pose& p);

/// Bi-invariant (geodesic) distance between two rotations, in [0, pi].
double rotation_distance(const UnitQuat& a, const UnitQuat& b);

/// Spherical interpolation, u in [0, 1]; takes the short arc.
UnitQuat slerp(const UnitQuat& a, const UnitQuat& b, double u);

/// Rotate `from` towards `to` along the geodesic by at most `max_angle`.
/// Returns `to` exactly when the remaining angle fits within the step.
UnitQuat rotate_towards(const UnitQuat& from, const UnitQuat& to, double max_angle);

}  // namespace glovelink
