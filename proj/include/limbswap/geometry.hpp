#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <optional>

#include <Eigen/Dense>
#include <Eigen/Geometry>

namespace limbswap {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Quaterniond;
using Mat3 = Eigen::Matrix3d;

/// Uniform-scale rigid transform. Points map as  x -> translation + rotation * (scale * x).
template <typename Scalar>
struct RigidTransform {
  using Vector = Eigen::Matrix<Scalar, 3, 1>;
  using Rotation = Eigen::Quaternion<Scalar>;

  Vector translation = Vector::Zero();
  Rotation rotation = Rotation::Identity();
  Scalar scale = Scalar(1);

  static RigidTransform Identity() { return {}; }

  Vector apply(const Vector& p) const { return translation + rotation * (scale * p); }
  Vector applyDirection(const Vector& d) const { return rotation * d; }

  /// (*this) * other : apply `other` first, then this.
  RigidTransform operator*(const RigidTransform& other) const {
    RigidTransform out;
    out.translation = apply(other.translation);
    out.rotation = (rotation * other.rotation).normalized();
    out.scale = scale * other.scale;
    return out;
  }

  RigidTransform inverse() const {
    RigidTransform out;
    out.rotation = rotation.conjugate();
    out.scale = Scalar(1) / scale;
    out.translation = -(out.rotation * translation) * out.scale;
    return out;
  }
};

using RigidTransformd = RigidTransform<double>;

template <typename Scalar>
struct Plane {
  Eigen::Matrix<Scalar, 3, 1> point = Eigen::Matrix<Scalar, 3, 1>::Zero();
  Eigen::Matrix<Scalar, 3, 1> normal = Eigen::Matrix<Scalar, 3, 1>::UnitZ();

  Scalar signedDistance(const Eigen::Matrix<Scalar, 3, 1>& p) const {
    return normal.dot(p - point);
  }
  Eigen::Matrix<Scalar, 3, 1> project(const Eigen::Matrix<Scalar, 3, 1>& p) const {
    return p - signedDistance(p) * normal;
  }

  /// Deterministic in-plane basis (u, v) with u x v = normal.
  std::pair<Eigen::Matrix<Scalar, 3, 1>, Eigen::Matrix<Scalar, 3, 1>> basis() const {
    using V = Eigen::Matrix<Scalar, 3, 1>;
    const V seed = std::abs(normal.x()) < Scalar(0.9) ? V::UnitX() : V::UnitY();
    V u = (seed - seed.dot(normal) * normal).normalized();
    V v = normal.cross(u);
    return {u, v};
  }

  Eigen::Matrix<Scalar, 2, 1> toPlane(const Eigen::Matrix<Scalar, 3, 1>& p) const {
    const auto [u, v] = basis();
    const auto d = p - point;
    return {u.dot(d), v.dot(d)};
  }
  Eigen::Matrix<Scalar, 3, 1> fromPlane(const Eigen::Matrix<Scalar, 2, 1>& q) const {
    const auto [u, v] = basis();
    return point + q.x() * u + q.y() * v;
  }
};

using Planed = Plane<double>;

struct Sphere {
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
};

/// Ray/plane intersection. None when the ray is parallel within 1e-9 or the hit lies behind the origin.
template <typename Scalar>
std::optional<Eigen::Matrix<Scalar, 3, 1>> rayPlane(const Eigen::Matrix<Scalar, 3, 1>& origin,
                                                    const Eigen::Matrix<Scalar, 3, 1>& direction,
                                                    const Plane<Scalar>& plane) {
  const Scalar denom = plane.normal.dot(direction);
  if (std::abs(denom) <= Scalar(1e-9)) return std::nullopt;
  const Scalar t = plane.normal.dot(plane.point - origin) / denom;
  if (t < Scalar(0)) return std::nullopt;
  return origin + t * direction;
}

/// Spherical interpolation along the shorter arc.
template <typename Scalar>
Eigen::Quaternion<Scalar> slerpShorter(const Eigen::Quaternion<Scalar>& a,
                                       const Eigen::Quaternion<Scalar>& b, Scalar t) {
  Eigen::Quaternion<Scalar> target = b;
  Scalar d = a.dot(b);
  if (d < Scalar(0)) {
    target.coeffs() = -target.coeffs();
    d = -d;
  }
  if (d > Scalar(1) - Scalar(1e-12)) {
    Eigen::Quaternion<Scalar> q;
    q.coeffs() = (Scalar(1) - t) * a.coeffs() + t * target.coeffs();
    return q.normalized();
  }
  const Scalar theta = std::acos(std::min(d, Scalar(1)));
  const Scalar s = std::sin(theta);
  const Scalar wa = std::sin((Scalar(1) - t) * theta) / s;
  const Scalar wb = std::sin(t * theta) / s;
  Eigen::Quaternion<Scalar> q;
  q.coeffs() = wa * a.coeffs() + wb * target.coeffs();
  return q.normalized();
}

template <typename Derived>
bool allFinite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

/// Distance from p to segment [a, b].
template <typename Scalar, int N>
Scalar pointSegmentDistance(const Eigen::Matrix<Scalar, N, 1>& p, const Eigen::Matrix<Scalar, N, 1>& a,
                            const Eigen::Matrix<Scalar, N, 1>& b) {
  const auto ab = b - a;
  const Scalar len2 = ab.squaredNorm();
  Scalar t = len2 > Scalar(0) ? (p - a).dot(ab) / len2 : Scalar(0);
  t = std::clamp(t, Scalar(0), Scalar(1));
  return (a + t * ab - p).norm();
}

}  // namespace limbswap
