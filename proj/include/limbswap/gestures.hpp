#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "limbswap/json_fwd.hpp"
#include "limbswap/pose.hpp"

namespace limbswap {

struct GestureConfig {
  double pinch_start = 0.8;
  double pinch_end = 0.6;
  double grab_start = 0.8;
  double grab_end = 0.6;
  double swipe_speed_min = 1.0;      // m/s
  double swipe_min_duration = 0.05;  // s
  double still_eps = 0.02;           // m/s
  double still_min_duration = 0.3;   // s

  bool operator==(const GestureConfig&) const = default;
};

/// Throws Error{BadConfig} when hysteresis or durations are inconsistent.
void validate_gesture_config(const GestureConfig& config);
/// Merges the document's members over `base`; unknown keys are rejected.
GestureConfig gesture_config_from_json(const Json& doc, GestureConfig base = {});
Json gesture_config_to_json(const GestureConfig& config);

enum class GestureEventKind {
  PinchStart,
  PinchEnd,
  GrabStart,
  GrabEnd,
  Swipe,
  StillnessStart,
  StillnessEnd
};

std::string_view to_string(GestureEventKind kind);

struct GestureEvent {
  GestureEventKind kind = GestureEventKind::PinchStart;
  std::int64_t tick = 0;
  Vec3 direction = Vec3::Zero();  // Swipe only
  double speed = 0.0;             // Swipe only

  bool operator==(const GestureEvent&) const = default;
};

/// Caller-owned detector memory; one per session.
struct DetectorState {
  bool pinch_active = false;
  bool grab_active = false;
  bool still_active = false;
  bool has_previous = false;
  double previous_time = 0.0;
  Vec3 previous_palm = Vec3::Zero();
  Vec3 palm_velocity = Vec3::Zero();  // latest backward difference
  double swipe_duration = 0.0;
  Vec3 swipe_displacement = Vec3::Zero();  // integral of velocity over the episode
  bool swipe_emitted = false;
  bool swipe_this_step = false;
  double still_duration = 0.0;

  bool operator==(const DetectorState&) const = default;
};

/// Feeds each frame of `window` (time-ordered; frames not newer than the last one seen are skipped)
/// through the hysteresis, swipe and stillness detectors. Events carry `tick`.
std::pair<std::vector<GestureEvent>, DetectorState> detect_gestures(std::span<const HandPoseFrame> window,
                                                                    DetectorState state,
                                                                    const GestureConfig& config,
                                                                    std::int64_t tick = 0);

}  // namespace limbswap
