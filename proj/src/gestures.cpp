#include "limbswap/gestures.hpp"

#include <cmath>

#include "limbswap/error.hpp"

namespace limbswap {

namespace {

// Durations accumulate as sums of tick intervals; allow for their rounding.
constexpr double kDurationSlack = 1e-9;

void hysteresis(double value, double start, double end, bool& active, GestureEventKind on,
                GestureEventKind off, std::int64_t tick, std::vector<GestureEvent>& events) {
  if (!active && value >= start) {
    active = true;
    events.push_back({on, tick});
  } else if (active && value <= end) {
    active = false;
    events.push_back({off, tick});
  }
}

}  // namespace

std::string_view to_string(GestureEventKind kind) {
  switch (kind) {
    case GestureEventKind::PinchStart: return "PinchStart";
    case GestureEventKind::PinchEnd: return "PinchEnd";
    case GestureEventKind::GrabStart: return "GrabStart";
    case GestureEventKind::GrabEnd: return "GrabEnd";
    case GestureEventKind::Swipe: return "Swipe";
    case GestureEventKind::StillnessStart: return "StillnessStart";
    case GestureEventKind::StillnessEnd: return "StillnessEnd";
  }
  return "";
}

void validate_gesture_config(const GestureConfig& c) {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::BadConfig, what); };
  auto unit = [&](double v, const char* name) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) bad(std::string(name) + " must lie in [0, 1]");
  };
  unit(c.pinch_start, "pinch_start");
  unit(c.pinch_end, "pinch_end");
  unit(c.grab_start, "grab_start");
  unit(c.grab_end, "grab_end");
  if (!(c.pinch_start > c.pinch_end)) bad("pinch_start must exceed pinch_end");
  if (!(c.grab_start > c.grab_end)) bad("grab_start must exceed grab_end");
  if (!(c.swipe_speed_min > 0.0) || !std::isfinite(c.swipe_speed_min)) bad("swipe_speed_min must be positive");
  if (!(c.swipe_min_duration > 0.0) || !std::isfinite(c.swipe_min_duration)) {
    bad("swipe_min_duration must be positive");
  }
  if (!(c.still_eps >= 0.0) || !std::isfinite(c.still_eps)) bad("still_eps must be non-negative");
  if (!(c.still_min_duration > 0.0) || !std::isfinite(c.still_min_duration)) {
    bad("still_min_duration must be positive");
  }
  if (!(c.still_eps < c.swipe_speed_min)) bad("still_eps must be below swipe_speed_min");
}

GestureConfig gesture_config_from_json(const Json& doc, GestureConfig c) {
  if (!doc.is_object()) throw Error(ErrorCode::BadConfig, "gesture config must be an object");
  const std::pair<const char*, double*> fields[] = {
      {"pinch_start", &c.pinch_start},
      {"pinch_end", &c.pinch_end},
      {"grab_start", &c.grab_start},
      {"grab_end", &c.grab_end},
      {"swipe_speed_min", &c.swipe_speed_min},
      {"swipe_min_duration", &c.swipe_min_duration},
      {"still_eps", &c.still_eps},
      {"still_min_duration", &c.still_min_duration},
  };
  for (const auto& [key, value] : doc.items()) {
    bool known = false;
    for (const auto& [name, slot] : fields) {
      if (key == name) {
        if (!value.is_number()) throw Error(ErrorCode::BadConfig, key + " must be a number");
        *slot = value.get<double>();
        known = true;
      }
    }
    if (!known) throw Error(ErrorCode::BadConfig, "unknown gesture config key '" + key + "'");
  }
  validate_gesture_config(c);
  return c;
}

Json gesture_config_to_json(const GestureConfig& c) {
  return Json{{"pinch_start", c.pinch_start},
              {"pinch_end", c.pinch_end},
              {"grab_start", c.grab_start},
              {"grab_end", c.grab_end},
              {"swipe_speed_min", c.swipe_speed_min},
              {"swipe_min_duration", c.swipe_min_duration},
              {"still_eps", c.still_eps},
              {"still_min_duration", c.still_min_duration}};
}

std::pair<std::vector<GestureEvent>, DetectorState> detect_gestures(std::span<const HandPoseFrame> window,
                                                                    DetectorState s,
                                                                    const GestureConfig& config,
                                                                    std::int64_t tick) {
  std::vector<GestureEvent> events;
  s.swipe_this_step = false;
  for (const HandPoseFrame& frame : window) {
    if (s.has_previous && !(frame.timestamp_s > s.previous_time)) continue;

    hysteresis(frame.pinch_strength, config.pinch_start, config.pinch_end, s.pinch_active,
               GestureEventKind::PinchStart, GestureEventKind::PinchEnd, tick, events);
    hysteresis(frame.grab_strength, config.grab_start, config.grab_end, s.grab_active,
               GestureEventKind::GrabStart, GestureEventKind::GrabEnd, tick, events);

    if (s.has_previous) {
      const double dt = frame.timestamp_s - s.previous_time;
      const Vec3 velocity = (frame.palm_position - s.previous_palm) / dt;
      const double speed = velocity.norm();
      s.palm_velocity = velocity;

      if (speed >= config.swipe_speed_min) {
        s.swipe_duration += dt;
        s.swipe_displacement += velocity * dt;
        if (!s.swipe_emitted && s.swipe_duration >= config.swipe_min_duration - kDurationSlack) {
          GestureEvent e{GestureEventKind::Swipe, tick};
          e.speed = s.swipe_displacement.norm() / s.swipe_duration;
          e.direction = s.swipe_displacement.normalized();
          events.push_back(e);
          s.swipe_emitted = true;
          s.swipe_this_step = true;
        }
      } else {
        s.swipe_duration = 0.0;
        s.swipe_displacement.setZero();
        s.swipe_emitted = false;
      }

      if (speed <= config.still_eps) {
        s.still_duration += dt;
        if (!s.still_active && s.still_duration >= config.still_min_duration - kDurationSlack) {
          s.still_active = true;
          events.push_back({GestureEventKind::StillnessStart, tick});
        }
      } else {
        s.still_duration = 0.0;
        if (s.still_active) {
          s.still_active = false;
          events.push_back({GestureEventKind::StillnessEnd, tick});
        }
      }
    }
    s.has_previous = true;
    s.previous_time = frame.timestamp_s;
    s.previous_palm = frame.palm_position;
  }
  return {std::move(events), s};
}

}  // namespace limbswap
