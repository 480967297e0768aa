#include "glovelink/geometry.hpp"

#include <algorithm>
#include <limits>

namespace glovelink {

namespace {

// Tolerance on |q|^2 - 1 below which a quaternion is already considered unit.
constexpr double kUnitSlack = 8.0 * std::numeric_limits<double>::epsilon();

}  // namespace

UnitQuat::UnitQuat(double w, double x, double y, double z) {
  const double n2 = w * w + x * x + y * y + z * z;
  if (!(n2 > 0.0) || !std::isfinite(n2)) {
    return;  // degenerate input collapses to identity
  }
  if (std::abs(n2 - 1.0) > kUnitSlack) {
    const double n = std::sqrt(n2);
    w /= n;
    x /= n;
    y /= n;
    z /= n;
  }
  if (w < 0.0) {
    w = -w;
    x = -x;
    y = -y;
    z = -z;
  }
  // + 0.0 turns negative zeros positive.
  w_ = w + 0.0;
  x_ = x + 0.0;
  y_ = y + 0.0;
  z_ = z + 0.0;
}

UnitQuat UnitQuat::from_axis_angle(const Vec3& axis, double angle) {
  const double n = axis.norm();
  if (n == 0.0) return {};
  const double s = std::sin(0.5 * angle) / n;
  return {std::cos(0.5 * angle), axis.x * s, axis.y * s, axis.z * s};
}

UnitQuat UnitQuat::conjugate() const { return {w_, -x_, -y_, -z_}; }

UnitQuat UnitQuat::operator*(const UnitQuat& o) const {
  return {w_ * o.w_ - x_ * o.x_ - y_ * o.y_ - z_ * o.z_,
          w_ * o.x_ + x_ * o.w_ + y_ * o.z_ - z_ * o.y_,
          w_ * o.y_ - x_ * o.z_ + y_ * o.w_ + z_ * o.x_,
          w_ * o.z_ + x_ * o.y_ - y_ * o.x_ + z_ * o.w_};
}

Vec3 UnitQuat::rotate(const Vec3& v) const {
  // v' = v + 2w(u x v) + 2u x (u x v)
  const Vec3 u = vec();
  const Vec3 t = u.cross(v) * 2.0;
  return v + t * w_ + u.cross(t);
}

double UnitQuat::angle() const {
  return 2.0 * std::atan2(vec().norm(), std::abs(w_));
}

Vec3 UnitQuat::log() const {
  const double s = vec().norm();
  if (s == 0.0) return {};
  return vec() * (angle() / s);
}

Pose compose(const Pose& a, const Pose& b) {
  return {a.position + a.orientation.rotate(b.position), a.orientation * b.orientation};
}

Pose inverse(const Pose& p) {
  const UnitQuat qi = p.orientation.conjugate();
  return {-qi.rotate(p.position), qi};
}

double rotation_distance(const UnitQuat& a, const UnitQuat& b) {
  return (a.conjugate() * b).angle();
}

UnitQuat slerp(const UnitQuat& a, const UnitQuat& b, double u) {
  const UnitQuat rel = a.conjugate() * b;  // w >= 0: short arc
  const Vec3 v = rel.log();
  if (v.norm() == 0.0) return a;
  return a * UnitQuat::from_axis_angle(v, v.norm() * u);
}

UnitQuat rotate_towards(const UnitQuat& from, const UnitQuat& to, double max_angle) {
  const UnitQuat rel = from.conjugate() * to;
  const double remaining = rel.angle();
  if (remaining <= max_angle) return to;
  return from * UnitQuat::from_axis_angle(rel.vec(), max_angle);
}

}  // namespace glovelink
