#include "limbswap/retarget.hpp"

#include <algorithm>
#include <cmath>

namespace limbswap {

namespace {

int jointIndex(const ProsthesisSpec& spec, const std::optional<std::string>& name) {
  if (!name) return -1;
  for (std::size_t i = 0; i < spec.articulation.size(); ++i) {
    if (spec.articulation[i].name == *name) return static_cast<int>(i);
  }
  return -1;
}

/// Object-local transform for something carried by `joint_name` (identity when unjointed).
RigidTransformd carrierTransform(const ProsthesisSpec& spec, const ObjectPose& pose,
                                 const std::optional<std::string>& joint_name) {
  const int j = jointIndex(spec, joint_name);
  if (j < 0) return RigidTransformd::Identity();
  const double angle = static_cast<std::size_t>(j) < pose.joint_angles.size()
                           ? pose.joint_angles[static_cast<std::size_t>(j)]
                           : spec.articulation[static_cast<std::size_t>(j)].angle_lo;
  return joint_local_transform(spec.articulation[static_cast<std::size_t>(j)], angle);
}

}  // namespace

bool ObjectPose::operator==(const ObjectPose& o) const {
  return transform.translation == o.transform.translation &&
         transform.rotation.coeffs() == o.transform.rotation.coeffs() &&
         transform.scale == o.transform.scale && joint_angles == o.joint_angles &&
         anchors_world == o.anchors_world;
}

RigidTransformd wrist_frame(const HandPoseFrame& pose) {
  RigidTransformd t;
  t.translation = pose.wrist_position;
  t.rotation = pose.palm_orientation;
  t.scale = 1.0;
  return t;
}

ObjectPose attach(const HandPoseFrame& pose, const ProsthesisSpec& spec) {
  ObjectPose out;
  out.transform = wrist_frame(pose) * spec.attachment;
  return out;
}

std::vector<double> drive_articulation(const HandPoseFrame& pose, const ProsthesisSpec& spec) {
  std::vector<double> angles;
  angles.reserve(spec.articulation.size());
  for (const Joint& joint : spec.articulation) {
    double value = 0.0;
    switch (joint.channel.source) {
      case ArticulationChannel::Source::FingerFlexion:
        value = pose.fingers[static_cast<std::size_t>(std::clamp(joint.channel.finger, 0, 4))].flexion;
        break;
      case ArticulationChannel::Source::GrabStrength: value = pose.grab_strength; break;
      case ArticulationChannel::Source::PinchStrength: value = pose.pinch_strength; break;
    }
    value = std::isfinite(value) ? std::clamp(value, 0.0, 1.0) : 0.0;
    angles.push_back(joint.angle_lo + value * (joint.angle_hi - joint.angle_lo));
  }
  return angles;
}

void place_anchors(const ProsthesisSpec& spec, ObjectPose& pose) {
  pose.anchors_world.clear();
  pose.anchors_world.reserve(spec.anchors.size());
  for (const Anchor& a : spec.anchors) {
    const RigidTransformd local = carrierTransform(spec, pose, a.joint);
    const RigidTransformd full = pose.transform * local;
    pose.anchors_world.push_back(
        {a.name, full.apply(a.local_position), full.applyDirection(a.local_direction).normalized()});
  }
}

ObjectPose retarget(const HandPoseFrame& pose, const ProsthesisSpec& spec) {
  ObjectPose out = attach(pose, spec);
  out.joint_angles = drive_articulation(pose, spec);
  place_anchors(spec, out);
  return out;
}

ObjectPose smooth(const ObjectPose& previous, const ObjectPose& target, double alpha, double dt,
                  double tick_dt) {
  alpha = std::clamp(alpha, 0.0, 1.0);
  if (alpha == 0.0) return target;
  const double w = 1.0 - std::pow(alpha, dt / tick_dt);
  if (w == 0.0) return previous;

  ObjectPose out;
  const auto& a = previous.transform;
  const auto& b = target.transform;
  out.transform.translation = (1.0 - w) * a.translation + w * b.translation;
  out.transform.rotation = slerpShorter(a.rotation, b.rotation, w);
  out.transform.scale = (1.0 - w) * a.scale + w * b.scale;

  out.joint_angles = target.joint_angles;
  for (std::size_t i = 0; i < out.joint_angles.size() && i < previous.joint_angles.size(); ++i) {
    out.joint_angles[i] = (1.0 - w) * previous.joint_angles[i] + w * target.joint_angles[i];
  }
  out.anchors_world = target.anchors_world;
  if (previous.anchors_world.size() == target.anchors_world.size()) {
    for (std::size_t i = 0; i < out.anchors_world.size(); ++i) {
      const auto& p = previous.anchors_world[i];
      const auto& t = target.anchors_world[i];
      out.anchors_world[i].position = (1.0 - w) * p.position + w * t.position;
      const Vec3 d = (1.0 - w) * p.direction + w * t.direction;
      out.anchors_world[i].direction = d.norm() > 1e-12 ? d.normalized() : t.direction;
    }
  }
  return out;
}

RigidTransformd joint_local_transform(const Joint& joint, double angle) {
  // p' = pivot + R (p - pivot)
  RigidTransformd t;
  t.rotation = Quat(Eigen::AngleAxisd(angle, joint.axis.normalized()));
  t.translation = joint.pivot - t.rotation * joint.pivot;
  return t;
}

std::vector<Sphere> primitive_proxy(const GeometryPrimitive& primitive) {
  return std::visit(
      [](const auto& s) -> std::vector<Sphere> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SpherePrimitive>) {
          return {Sphere{s.center, s.radius}};
        } else if constexpr (std::is_same_v<T, CapsulePrimitive>) {
          const double length = (s.p1 - s.p0).norm();
          const auto gaps = static_cast<std::size_t>(std::max(1.0, std::ceil(length / s.radius)));
          const double spacing = length / static_cast<double>(gaps);
          // Enlarged so the tube surface between neighbouring centres stays covered.
          const double r = std::sqrt(s.radius * s.radius + 0.25 * spacing * spacing);
          std::vector<Sphere> out;
          out.reserve(gaps + 1);
          for (std::size_t i = 0; i <= gaps; ++i) {
            const double u = static_cast<double>(i) / static_cast<double>(gaps);
            out.push_back({(1.0 - u) * s.p0 + u * s.p1, r});
          }
          return out;
        } else {
          std::vector<Sphere> out;
          out.reserve(8);
          const Vec3 q = 0.5 * s.half_extents;
          const double r = q.norm();
          for (int i = 0; i < 8; ++i) {
            const Vec3 sign((i & 1) ? 1.0 : -1.0, (i & 2) ? 1.0 : -1.0, (i & 4) ? 1.0 : -1.0);
            out.push_back({s.center + s.orientation * sign.cwiseProduct(q), r});
          }
          return out;
        }
      },
      primitive.shape);
}

std::vector<Sphere> collision_proxy_world(const ProsthesisSpec& spec, const ObjectPose& pose) {
  std::vector<Sphere> out;
  for (const auto& prim : spec.geometry) {
    const RigidTransformd full = pose.transform * carrierTransform(spec, pose, prim.joint);
    for (const Sphere& s : primitive_proxy(prim)) {
      out.push_back({full.apply(s.center), s.radius * full.scale});
    }
  }
  return out;
}

}  // namespace limbswap
