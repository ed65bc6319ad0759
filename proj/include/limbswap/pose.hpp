#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "limbswap/geometry.hpp"

namespace limbswap {

inline constexpr std::size_t kFingerCount = 5;  // thumb, index, middle, ring, pinky

struct FingerState {
  double flexion = 0.0;  // [0, 1]
  Vec3 tip = Vec3::Zero();

  bool operator==(const FingerState&) const = default;
};

/// One tracked-hand sample. Right-handed, meters, +Y up, +Z from the screen toward the user.
struct HandPoseFrame {
  double timestamp_s = 0.0;
  Vec3 palm_position = Vec3::Zero();
  Quat palm_orientation = Quat::Identity();  // (w, x, y, z), unit
  Vec3 wrist_position = Vec3::Zero();
  std::array<FingerState, kFingerCount> fingers{};
  double pinch_strength = 0.0;
  double grab_strength = 0.0;
  double confidence = 1.0;

  bool operator==(const HandPoseFrame& other) const;
};

struct PoseTrace {
  std::vector<HandPoseFrame> frames;
  std::string source_label;
};

inline constexpr double kMaxPalmWristDistance = 0.30;
inline constexpr double kQuatRenormTolerance = 1e-3;

/// Checks every field; renormalizes the orientation when its norm is within 1e-3 of one.
/// Throws Error{Range} for out-of-range fields and Error{Degenerate} for non-finite values or a
/// quaternion too far from unit length.
HandPoseFrame validate_frame(const HandPoseFrame& raw);

/// Throws Error{Order} unless a.timestamp_s < b.timestamp_s.
HandPoseFrame interpolate(const HandPoseFrame& a, const HandPoseFrame& b, double t);

/// Validates a whole trace: non-empty, frames valid, timestamps strictly increasing.
void validate_trace(const PoseTrace& trace);

PoseTrace resample_trace(const PoseTrace& trace, double rate_hz);

/// Central difference on interior frames, one-sided at the ends. Throws Error{TooShort} for < 2 frames.
Vec3 palm_velocity(const PoseTrace& trace, std::size_t index);

/// Neutral open hand at the origin: wrist at 0, palm 8 cm along +Z, identity orientation.
HandPoseFrame neutral_pose(double timestamp_s = 0.0);

}  // namespace limbswap
