#include "limbswap/synth.hpp"

#include <cmath>
#include <functional>
#include <numbers>

#include "limbswap/error.hpp"

namespace limbswap {

namespace {

struct WristSample {
  Vec3 wrist;
  Quat orientation;
  double pinch = 0.0;
  double grab = 0.0;
  std::optional<Vec3> index_tip;  // overrides the neutral index tip when present
};

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::BadParameter, what);
}

void requireUnit(double v, const char* name) {
  require(std::isfinite(v) && v >= 0.0 && v <= 1.0, std::string(name) + " must lie in [0, 1]");
}

void requireDuration(double v, const char* name) {
  require(std::isfinite(v) && v >= 0.0, std::string(name) + " must be a non-negative duration");
}

PoseTrace sampleTrace(double duration, double rate_hz, const std::string& label,
                      const std::function<WristSample(double)>& at) {
  require(std::isfinite(rate_hz) && rate_hz > 0.0, "rate_hz must be positive");
  const double step = 1.0 / rate_hz;
  const auto count = static_cast<std::size_t>(std::floor(duration * rate_hz + 1e-9));
  PoseTrace trace;
  trace.source_label = label;
  trace.frames.reserve(count + 1);
  for (std::size_t k = 0; k <= count; ++k) {
    const double t = static_cast<double>(k) * step;
    const WristSample s = at(t);
    HandPoseFrame f = pose_at(t, s.wrist, s.orientation, s.pinch, s.grab);
    if (s.index_tip) f.fingers[1].tip = *s.index_tip;
    trace.frames.push_back(validate_frame(f));
  }
  return trace;
}

/// Point at arc length `s` along a polyline (clamped to its ends).
template <typename V>
V alongPolyline(const std::vector<V>& points, double s) {
  if (s <= 0.0) return points.front();
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const double len = (points[i + 1] - points[i]).norm();
    if (s <= len) {
      const double u = len > 0.0 ? s / len : 0.0;
      return (1.0 - u) * points[i] + u * points[i + 1];
    }
    s -= len;
  }
  return points.back();
}

template <typename V>
double polylineLength(const std::vector<V>& points) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) total += (points[i + 1] - points[i]).norm();
  return total;
}

PoseTrace generate(const ReachAndSwipe& g, double rate_hz) {
  require(std::isfinite(g.speed) && g.speed > 0.0, "speed must be positive");
  require(g.direction.allFinite() && g.direction.norm() > 1e-9, "direction must be non-zero");
  require(g.start.allFinite(), "start must be finite");
  require(std::isfinite(g.distance) && g.distance >= 0.0, "distance must be non-negative");
  requireDuration(g.ramp_s, "ramp_s");
  requireDuration(g.hold_before_s, "hold_before_s");
  requireDuration(g.hold_after_s, "hold_after_s");
  requireUnit(g.grab, "grab");
  requireUnit(g.pinch, "pinch");

  const Vec3 dir = g.direction.normalized();
  const Quat q = g.orientation.normalized();
  const double ramp_dist = 0.5 * g.speed * g.ramp_s;
  const double cruise = g.distance / g.speed;
  const double t1 = g.hold_before_s;
  const double t2 = t1 + g.ramp_s;
  const double t3 = t2 + cruise;
  const double t4 = t3 + g.ramp_s;
  const double accel = g.ramp_s > 0.0 ? g.speed / g.ramp_s : 0.0;

  auto travelled = [&](double t) {
    if (t <= t1) return 0.0;
    if (t <= t2) return 0.5 * accel * (t - t1) * (t - t1);
    if (t <= t3) return ramp_dist + g.speed * (t - t2);
    if (t <= t4) {
      const double tau = t - t3;
      return ramp_dist + g.distance + g.speed * tau - 0.5 * accel * tau * tau;
    }
    return 2.0 * ramp_dist + g.distance;
  };
  return sampleTrace(t4 + g.hold_after_s, rate_hz, "reach_and_swipe", [&](double t) {
    return WristSample{g.start + travelled(t) * dir, q, g.pinch, g.grab, std::nullopt};
  });
}

PoseTrace generate(const PenStroke& g, double rate_hz) {
  require(g.polyline.size() >= 2, "polyline needs at least 2 points");
  for (const auto& p : g.polyline) require(p.allFinite(), "polyline points must be finite");
  require(std::isfinite(g.depth) && std::abs(g.depth) < 0.1, "depth must be finite and below 0.1 m");
  require(std::isfinite(g.speed) && g.speed > 0.0, "speed must be positive");
  require(g.tool_offset.allFinite(), "tool_offset must be finite");
  require(std::isfinite(g.hover) && g.hover > 0.0, "hover must be positive");
  require(std::isfinite(g.transition_s) && g.transition_s > 0.0, "transition_s must be positive");
  requireDuration(g.hold_before_s, "hold_before_s");
  requireDuration(g.hold_after_s, "hold_after_s");
  requireUnit(g.pinch, "pinch");

  const Quat q = pointing_down();
  const Vec3 offset_world = q * g.tool_offset;
  const double length = polylineLength(g.polyline);
  const double t1 = g.hold_before_s;
  const double t2 = t1 + g.transition_s;
  const double t3 = t2 + length / g.speed;
  const double t4 = t3 + g.transition_s;
  const double low = -g.depth;

  auto tipAt = [&](double t) -> Vec3 {
    if (t <= t1) {
      const Vec2& p = g.polyline.front();
      return {p.x(), p.y(), g.hover};
    }
    if (t <= t2) {
      const double u = (t - t1) / g.transition_s;
      const Vec2& p = g.polyline.front();
      return {p.x(), p.y(), (1.0 - u) * g.hover + u * low};
    }
    if (t <= t3) {
      const Vec2 p = alongPolyline(g.polyline, (t - t2) * g.speed);
      return {p.x(), p.y(), low};
    }
    const Vec2& p = g.polyline.back();
    if (t <= t4) {
      const double u = (t - t3) / g.transition_s;
      return {p.x(), p.y(), (1.0 - u) * low + u * g.hover};
    }
    return {p.x(), p.y(), g.hover};
  };
  return sampleTrace(t4 + g.hold_after_s, rate_hz, "pen_stroke", [&](double t) {
    const Vec3 tip = tipAt(t);
    return WristSample{tip - offset_world, q, g.pinch, 0.0, tip};
  });
}

PoseTrace generate(const AirbrushSweep& g, double rate_hz) {
  require(g.path.size() >= 2, "path needs at least 2 points");
  for (const auto& p : g.path) require(p.allFinite(), "path points must be finite");
  require(std::isfinite(g.speed) && g.speed > 0.0, "speed must be positive");
  requireDuration(g.hold_before_s, "hold_before_s");
  requireDuration(g.hold_after_s, "hold_after_s");
  for (const auto& [lo, hi] : g.trigger_windows) {
    require(std::isfinite(lo) && std::isfinite(hi) && lo >= 0.0 && lo < hi,
            "trigger windows must satisfy 0 <= start < end");
  }
  const Quat q = g.orientation.normalized();
  const double sweep = polylineLength(g.path) / g.speed;
  const double t1 = g.hold_before_s;
  const double duration = t1 + sweep + g.hold_after_s;
  return sampleTrace(duration, rate_hz, "airbrush_sweep", [&](double t) {
    double pinch = 0.0;
    for (const auto& [lo, hi] : g.trigger_windows) {
      if (t >= lo && t < hi) pinch = 1.0;
    }
    const double s = t <= t1 ? 0.0 : (t - t1) * g.speed;
    return WristSample{alongPolyline(g.path, s), q, pinch, 0.0, std::nullopt};
  });
}

PoseTrace generate(const HoldStill& g, double rate_hz) {
  require(std::isfinite(g.duration_s) && g.duration_s > 0.0, "duration_s must be positive");
  require(g.wrist.allFinite(), "wrist must be finite");
  requireUnit(g.pinch, "pinch");
  requireUnit(g.grab, "grab");
  const Quat q = g.orientation.normalized();
  return sampleTrace(g.duration_s, rate_hz, "hold_still", [&](double) {
    return WristSample{g.wrist, q, g.pinch, g.grab, std::nullopt};
  });
}

PoseTrace generate(const Sinusoid& g, double rate_hz) {
  require(std::isfinite(g.amplitude) && g.amplitude >= 0.0 && g.amplitude <= 1.0,
          "amplitude must lie in [0, 1] m");
  require(std::isfinite(g.frequency_hz) && g.frequency_hz > 0.0, "frequency_hz must be positive");
  require(std::isfinite(g.duration_s) && g.duration_s > 0.0, "duration_s must be positive");
  require(g.axis.allFinite() && g.axis.norm() > 1e-9, "axis must be non-zero");
  require(g.center.allFinite(), "center must be finite");
  const Vec3 axis = g.axis.normalized();
  return sampleTrace(g.duration_s, rate_hz, "sinusoid", [&](double t) {
    const double s = g.amplitude * std::sin(2.0 * std::numbers::pi * g.frequency_hz * t);
    return WristSample{g.center + s * axis, Quat::Identity(), 0.0, 0.0, std::nullopt};
  });
}

// --- document parsing -------------------------------------------------------

class Params {
 public:
  explicit Params(const Json& doc) : doc_(doc) {}

  double num(const char* key, double fallback) {
    used_.push_back(key);
    const auto it = doc_.find(key);
    if (it == doc_.end()) return fallback;
    require(it->is_number(), std::string(key) + " must be a number");
    return it->get<double>();
  }
  Vec3 vec3(const char* key, const Vec3& fallback) {
    used_.push_back(key);
    const auto it = doc_.find(key);
    if (it == doc_.end()) return fallback;
    return asVec<3>(*it, key);
  }
  Quat quat(const char* key, const Quat& fallback) {
    used_.push_back(key);
    const auto it = doc_.find(key);
    if (it == doc_.end()) return fallback;
    const auto c = asVec<4>(*it, key);
    const Quat q(c[0], c[1], c[2], c[3]);
    require(q.norm() > 1e-9, std::string(key) + " must be a non-zero quaternion");
    return q.normalized();
  }
  template <int N>
  std::vector<Eigen::Matrix<double, N, 1>> points(const char* key) {
    used_.push_back(key);
    const auto it = doc_.find(key);
    require(it != doc_.end() && it->is_array(), std::string(key) + " must be an array of points");
    std::vector<Eigen::Matrix<double, N, 1>> out;
    for (const auto& p : *it) out.push_back(asVec<N>(p, key));
    return out;
  }
  std::vector<std::pair<double, double>> windows(const char* key) {
    std::vector<std::pair<double, double>> out;
    for (const auto& w : points<2>(key)) out.emplace_back(w.x(), w.y());
    return out;
  }
  void finish() const {
    for (const auto& [key, _] : doc_.items()) {
      if (key == "generator" || key == "rate_hz") continue;
      if (std::find(used_.begin(), used_.end(), key) == used_.end()) {
        throw Error(ErrorCode::BadParameter, "unknown parameter '" + key + "'");
      }
    }
  }

 private:
  template <int N>
  static Eigen::Matrix<double, N, 1> asVec(const Json& v, const char* key) {
    require(v.is_array() && v.size() == static_cast<std::size_t>(N),
            std::string(key) + " must be an array of " + std::to_string(N) + " numbers");
    Eigen::Matrix<double, N, 1> out;
    for (int i = 0; i < N; ++i) {
      require(v[i].is_number(), std::string(key) + " must contain numbers");
      out[i] = v[i].get<double>();
    }
    return out;
  }

  const Json& doc_;
  std::vector<std::string> used_;
};

}  // namespace

Quat pointing_down() { return Quat(0.0, 1.0, 0.0, 0.0); }

HandPoseFrame pose_at(double timestamp_s, const Vec3& wrist, const Quat& orientation, double pinch,
                      double grab) {
  const HandPoseFrame neutral = neutral_pose();
  HandPoseFrame f;
  f.timestamp_s = timestamp_s;
  f.wrist_position = wrist;
  f.palm_orientation = orientation;
  f.palm_position = wrist + orientation * neutral.palm_position;
  for (std::size_t i = 0; i < kFingerCount; ++i) {
    f.fingers[i].tip = wrist + orientation * neutral.fingers[i].tip;
    f.fingers[i].flexion = i < 2 ? std::max(grab, 0.5 * pinch) : grab;
  }
  f.pinch_strength = pinch;
  f.grab_strength = grab;
  f.confidence = 1.0;
  return f;
}

PoseTrace synth_trace(const GeneratorScript& script, double rate_hz) {
  return std::visit([rate_hz](const auto& g) { return generate(g, rate_hz); }, script);
}

std::pair<GeneratorScript, double> parse_generator(const Json& doc) {
  if (!doc.is_object() || !doc.contains("generator") || !doc["generator"].is_string()) {
    throw Error(ErrorCode::BadParameter, "generator document needs a \"generator\" name");
  }
  const std::string name = doc["generator"].get<std::string>();
  Params p(doc);
  double rate = 120.0;
  if (doc.contains("rate_hz")) {
    require(doc["rate_hz"].is_number(), "rate_hz must be a number");
    rate = doc["rate_hz"].get<double>();
  }
  GeneratorScript script;
  if (name == "reach_and_swipe") {
    ReachAndSwipe g;
    g.speed = p.num("speed", g.speed);
    g.direction = p.vec3("direction", g.direction);
    g.start = p.vec3("start", g.start);
    g.distance = p.num("distance", g.distance);
    g.ramp_s = p.num("ramp_s", g.ramp_s);
    g.hold_before_s = p.num("hold_before_s", g.hold_before_s);
    g.hold_after_s = p.num("hold_after_s", g.hold_after_s);
    g.grab = p.num("grab", g.grab);
    g.pinch = p.num("pinch", g.pinch);
    g.orientation = p.quat("orientation", g.orientation);
    script = g;
  } else if (name == "pen_stroke") {
    PenStroke g;
    g.polyline = p.points<2>("polyline");
    g.depth = p.num("depth", g.depth);
    g.speed = p.num("speed", g.speed);
    g.tool_offset = p.vec3("tool_offset", g.tool_offset);
    g.hover = p.num("hover", g.hover);
    g.transition_s = p.num("transition_s", g.transition_s);
    g.hold_before_s = p.num("hold_before_s", g.hold_before_s);
    g.hold_after_s = p.num("hold_after_s", g.hold_after_s);
    g.pinch = p.num("pinch", g.pinch);
    script = g;
  } else if (name == "airbrush_sweep") {
    AirbrushSweep g;
    g.path = p.points<3>("path");
    g.trigger_windows = p.windows("trigger_windows");
    g.speed = p.num("speed", g.speed);
    g.hold_before_s = p.num("hold_before_s", g.hold_before_s);
    g.hold_after_s = p.num("hold_after_s", g.hold_after_s);
    g.orientation = p.quat("orientation", g.orientation);
    script = g;
  } else if (name == "hold_still") {
    HoldStill g;
    g.duration_s = p.num("duration_s", g.duration_s);
    g.wrist = p.vec3("wrist", g.wrist);
    g.orientation = p.quat("orientation", g.orientation);
    g.pinch = p.num("pinch", g.pinch);
    g.grab = p.num("grab", g.grab);
    script = g;
  } else if (name == "sinusoid") {
    Sinusoid g;
    g.amplitude = p.num("amplitude", g.amplitude);
    g.frequency_hz = p.num("frequency_hz", g.frequency_hz);
    g.duration_s = p.num("duration_s", g.duration_s);
    g.axis = p.vec3("axis", g.axis);
    g.center = p.vec3("center", g.center);
    script = g;
  } else {
    throw Error(ErrorCode::UnknownGenerator, "unknown generator '" + name + "'");
  }
  p.finish();
  return {script, rate};
}

}  // namespace limbswap
