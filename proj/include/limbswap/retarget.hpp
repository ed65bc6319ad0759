#pragma once

#include <string>
#include <vector>

#include "limbswap/geometry.hpp"
#include "limbswap/pose.hpp"
#include "limbswap/prosthesis.hpp"

namespace limbswap {

struct AnchorWorld {
  std::string name;
  Vec3 position = Vec3::Zero();
  Vec3 direction = Vec3::UnitZ();
  bool operator==(const AnchorWorld&) const = default;
};

/// World pose of the prosthesis: object-local -> world transform, joint angles aligned with
/// spec.articulation, and anchors in world space.
struct ObjectPose {
  RigidTransformd transform;
  std::vector<double> joint_angles;
  std::vector<AnchorWorld> anchors_world;

  bool operator==(const ObjectPose& other) const;
};

RigidTransformd wrist_frame(const HandPoseFrame& pose);

/// Object transform only (joint angles and anchors left empty).
ObjectPose attach(const HandPoseFrame& pose, const ProsthesisSpec& spec);

/// angle = lo + clamp(channel, 0, 1) * (hi - lo) per joint.
std::vector<double> drive_articulation(const HandPoseFrame& pose, const ProsthesisSpec& spec);

/// Full retarget: attach, drive joints, and place anchors.
ObjectPose retarget(const HandPoseFrame& pose, const ProsthesisSpec& spec);

/// Recomputes anchors_world from the pose's transform and joint angles.
void place_anchors(const ProsthesisSpec& spec, ObjectPose& pose);

/// Exponential smoothing with per-step blend w = 1 - alpha^(dt / tick_dt).
/// alpha = 0 returns `target` unchanged; alpha = 1 freezes at `previous`.
/// Anchors are blended too; callers that own the spec may re-place them.
ObjectPose smooth(const ObjectPose& previous, const ObjectPose& target, double alpha, double dt,
                  double tick_dt);

/// Object-local transform a joint applies to everything it carries.
RigidTransformd joint_local_transform(const Joint& joint, double angle);

/// World-space bounding spheres. Spheres map to themselves, capsules to spheres spaced at most one
/// radius apart along the axis, boxes to eight octant spheres.
std::vector<Sphere> collision_proxy_world(const ProsthesisSpec& spec, const ObjectPose& pose);

/// Local-frame proxy spheres for one primitive (before joint and object transforms).
std::vector<Sphere> primitive_proxy(const GeometryPrimitive& primitive);

}  // namespace limbswap
