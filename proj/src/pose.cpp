#include "limbswap/pose.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "limbswap/error.hpp"

namespace limbswap {

namespace {

void requireFinite(const Vec3& v, const char* field) {
  if (!v.allFinite()) throw Error(ErrorCode::Degenerate, std::string("non-finite ") + field);
}

void requireUnitInterval(double value, const std::string& field) {
  if (!std::isfinite(value)) throw Error(ErrorCode::Degenerate, "non-finite " + field);
  if (value < 0.0 || value > 1.0) {
    std::ostringstream os;
    os << field << " = " << value << " outside [0, 1]";
    throw Error(ErrorCode::Range, os.str());
  }
}

template <typename T>
T lerp(const T& a, const T& b, double t) {
  return (1.0 - t) * a + t * b;
}

}  // namespace

bool HandPoseFrame::operator==(const HandPoseFrame& other) const {
  return timestamp_s == other.timestamp_s && palm_position == other.palm_position &&
         palm_orientation.coeffs() == other.palm_orientation.coeffs() &&
         wrist_position == other.wrist_position && fingers == other.fingers &&
         pinch_strength == other.pinch_strength && grab_strength == other.grab_strength &&
         confidence == other.confidence;
}

HandPoseFrame validate_frame(const HandPoseFrame& raw) {
  HandPoseFrame frame = raw;
  if (!std::isfinite(frame.timestamp_s)) throw Error(ErrorCode::Degenerate, "non-finite timestamp_s");
  if (frame.timestamp_s < 0.0) throw Error(ErrorCode::Range, "timestamp_s is negative");
  requireFinite(frame.palm_position, "palm_position");
  requireFinite(frame.wrist_position, "wrist_position");
  if (!frame.palm_orientation.coeffs().allFinite()) {
    throw Error(ErrorCode::Degenerate, "non-finite palm_orientation");
  }
  const double norm = frame.palm_orientation.norm();
  if (norm == 0.0) throw Error(ErrorCode::Degenerate, "zero palm_orientation quaternion");
  if (std::abs(norm - 1.0) > kQuatRenormTolerance) {
    std::ostringstream os;
    os << "palm_orientation norm " << norm << " deviates from 1 by more than " << kQuatRenormTolerance;
    throw Error(ErrorCode::Degenerate, os.str());
  }
  if (norm != 1.0) frame.palm_orientation.normalize();

  for (std::size_t i = 0; i < kFingerCount; ++i) {
    requireUnitInterval(frame.fingers[i].flexion, "fingers[" + std::to_string(i) + "].flexion");
    requireFinite(frame.fingers[i].tip, "finger tip");
  }
  requireUnitInterval(frame.pinch_strength, "pinch_strength");
  requireUnitInterval(frame.grab_strength, "grab_strength");
  requireUnitInterval(frame.confidence, "confidence");

  const double span = (frame.palm_position - frame.wrist_position).norm();
  if (span > kMaxPalmWristDistance) {
    std::ostringstream os;
    os << "palm-wrist distance " << span << " m exceeds " << kMaxPalmWristDistance << " m";
    throw Error(ErrorCode::Range, os.str());
  }
  return frame;
}

HandPoseFrame interpolate(const HandPoseFrame& a, const HandPoseFrame& b, double t) {
  if (!(a.timestamp_s < b.timestamp_s)) {
    throw Error(ErrorCode::Order, "interpolate requires a.timestamp_s < b.timestamp_s");
  }
  if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorCode::Range, "interpolation fraction outside [0, 1]");
  if (t == 0.0) return a;
  if (t == 1.0) return b;

  HandPoseFrame out;
  out.timestamp_s = lerp(a.timestamp_s, b.timestamp_s, t);
  out.palm_position = lerp(a.palm_position, b.palm_position, t);
  out.palm_orientation = slerpShorter(a.palm_orientation, b.palm_orientation, t);
  out.wrist_position = lerp(a.wrist_position, b.wrist_position, t);
  for (std::size_t i = 0; i < kFingerCount; ++i) {
    out.fingers[i].flexion = lerp(a.fingers[i].flexion, b.fingers[i].flexion, t);
    out.fingers[i].tip = lerp(a.fingers[i].tip, b.fingers[i].tip, t);
  }
  out.pinch_strength = lerp(a.pinch_strength, b.pinch_strength, t);
  out.grab_strength = lerp(a.grab_strength, b.grab_strength, t);
  out.confidence = lerp(a.confidence, b.confidence, t);
  return out;
}

void validate_trace(const PoseTrace& trace) {
  if (trace.frames.empty()) throw Error(ErrorCode::Range, "pose trace is empty");
  for (std::size_t i = 0; i < trace.frames.size(); ++i) {
    validate_frame(trace.frames[i]);
    if (i > 0 && !(trace.frames[i - 1].timestamp_s < trace.frames[i].timestamp_s)) {
      throw Error(ErrorCode::Order,
                  "timestamps not strictly increasing at frame " + std::to_string(i));
    }
  }
}

PoseTrace resample_trace(const PoseTrace& trace, double rate_hz) {
  validate_trace(trace);
  if (!(rate_hz > 0.0) || !std::isfinite(rate_hz)) {
    throw Error(ErrorCode::BadParameter, "rate_hz must be positive");
  }
  const auto& in = trace.frames;
  if (in.size() == 1) return trace;

  const double first = in.front().timestamp_s;
  const double last = in.back().timestamp_s;
  const double step = 1.0 / rate_hz;
  const auto count = static_cast<std::size_t>(std::floor((last - first) * rate_hz + 1e-9));

  PoseTrace out;
  out.source_label = trace.source_label;
  out.frames.reserve(count + 2);
  std::size_t seg = 0;
  for (std::size_t k = 0; k <= count; ++k) {
    const double t = first + static_cast<double>(k) * step;
    if (std::abs(t - last) <= 1e-9) break;
    while (seg + 1 < in.size() && in[seg + 1].timestamp_s <= t) ++seg;
    if (in[seg].timestamp_s == t || seg + 1 == in.size()) {
      HandPoseFrame f = in[seg];
      f.timestamp_s = t;
      out.frames.push_back(f);
      continue;
    }
    const auto& a = in[seg];
    const auto& b = in[seg + 1];
    const double frac = (t - a.timestamp_s) / (b.timestamp_s - a.timestamp_s);
    HandPoseFrame f = interpolate(a, b, frac);
    f.timestamp_s = t;
    out.frames.push_back(f);
  }
  out.frames.push_back(in.back());
  return out;
}

Vec3 palm_velocity(const PoseTrace& trace, std::size_t index) {
  const auto& f = trace.frames;
  if (f.size() < 2) throw Error(ErrorCode::TooShort, "palm_velocity needs at least 2 frames");
  if (index >= f.size()) throw Error(ErrorCode::Range, "frame index out of range");
  const std::size_t lo = index == 0 ? 0 : index - 1;
  const std::size_t hi = index + 1 == f.size() ? index : index + 1;
  const double dt = f[hi].timestamp_s - f[lo].timestamp_s;
  return (f[hi].palm_position - f[lo].palm_position) / dt;
}

HandPoseFrame neutral_pose(double timestamp_s) {
  HandPoseFrame f;
  f.timestamp_s = timestamp_s;
  f.wrist_position = Vec3::Zero();
  f.palm_position = Vec3(0.0, 0.0, 0.08);
  const std::array<Vec3, kFingerCount> tips = {
      Vec3(-0.04, 0.0, 0.11), Vec3(-0.02, 0.0, 0.17), Vec3(0.0, 0.0, 0.18),
      Vec3(0.02, 0.0, 0.17), Vec3(0.04, 0.0, 0.15)};
  for (std::size_t i = 0; i < kFingerCount; ++i) f.fingers[i] = {0.0, tips[i]};
  return f;
}

}  // namespace limbswap
