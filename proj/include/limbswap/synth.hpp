#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "limbswap/json_fwd.hpp"
#include "limbswap/pose.hpp"

namespace limbswap {

/// Orientation that points the wrist's +Z axis (forearm -> palm) at the canvas, i.e. world -Z.
Quat pointing_down();

/// Rest, ramp up, constant-speed swipe along `direction`, ramp down, rest.
struct ReachAndSwipe {
  double speed = 1.0;  // m/s during the constant phase
  Vec3 direction = Vec3::UnitX();
  Vec3 start = Vec3::Zero();  // wrist position at t = 0
  double distance = 0.3;      // m travelled at constant speed
  double ramp_s = 0.05;
  double hold_before_s = 0.25;
  double hold_after_s = 1.5;
  double grab = 0.0;
  double pinch = 0.0;
  Quat orientation = Quat::Identity();
};

/// Tool tip traced along a 2-D polyline on the z = 0 canvas, `depth` below it (negative = above).
struct PenStroke {
  std::vector<Vec2> polyline;
  double depth = 0.003;
  double speed = 0.1;
  Vec3 tool_offset = Vec3(0.0, 0.0, 0.16);  // tool tip in the wrist frame
  double hover = 0.03;
  double transition_s = 0.2;
  double hold_before_s = 0.2;
  double hold_after_s = 0.2;
  double pinch = 0.0;
};

/// Wrist swept along a 3-D path; pinch held inside each [start, end) window of trace time.
struct AirbrushSweep {
  std::vector<Vec3> path;
  std::vector<std::pair<double, double>> trigger_windows;
  double speed = 0.2;
  double hold_before_s = 0.2;
  double hold_after_s = 0.2;
  Quat orientation = pointing_down();
};

struct HoldStill {
  double duration_s = 1.0;
  Vec3 wrist = Vec3::Zero();
  Quat orientation = Quat::Identity();
  double pinch = 0.0;
  double grab = 0.0;
};

/// Wrist oscillates about `center` along `axis`.
struct Sinusoid {
  double amplitude = 0.05;
  double frequency_hz = 1.0;
  double duration_s = 2.0;
  Vec3 axis = Vec3::UnitX();
  Vec3 center = Vec3::Zero();
};

using GeneratorScript = std::variant<ReachAndSwipe, PenStroke, AirbrushSweep, HoldStill, Sinusoid>;

/// Deterministic: identical script and rate produce bit-identical traces.
/// Throws Error{BadParameter} for invalid parameters.
PoseTrace synth_trace(const GeneratorScript& script, double rate_hz = 120.0);

/// Generator documents: {"generator": name, "rate_hz": r, ...params}. Unknown names raise
/// Error{UnknownGenerator}; bad or unknown parameters raise Error{BadParameter}.
std::pair<GeneratorScript, double> parse_generator(const Json& doc);

/// Builds a frame for the given wrist pose with the neutral finger layout carried along.
HandPoseFrame pose_at(double timestamp_s, const Vec3& wrist, const Quat& orientation, double pinch,
                      double grab);

}  // namespace limbswap
