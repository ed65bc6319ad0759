#include "limbswap/pose_io.hpp"

#include <sstream>

#include "limbswap/error.hpp"

namespace limbswap {

using namespace json_util;

Json pose_to_json(const HandPoseFrame& frame) {
  Json fingers = Json::array();
  for (const auto& finger : frame.fingers) {
    fingers.push_back(Json{{"flex", finger.flexion}, {"tip", vec(finger.tip)}});
  }
  return Json{{"timestamp_s", frame.timestamp_s},
              {"palm_pos", vec(frame.palm_position)},
              {"palm_quat", quat(frame.palm_orientation)},
              {"wrist_pos", vec(frame.wrist_position)},
              {"fingers", std::move(fingers)},
              {"pinch_strength", frame.pinch_strength},
              {"grab_strength", frame.grab_strength},
              {"confidence", frame.confidence}};
}

HandPoseFrame pose_raw_from_json(const Json& record, const std::string& path) {
  HandPoseFrame frame;
  frame.timestamp_s = number(member(record, "timestamp_s", path), path + ".timestamp_s");
  frame.palm_position = vec3(member(record, "palm_pos", path), path + ".palm_pos");
  frame.palm_orientation = json_util::quat(member(record, "palm_quat", path), path + ".palm_quat");
  frame.wrist_position = vec3(member(record, "wrist_pos", path), path + ".wrist_pos");
  const Json& fingers = member(record, "fingers", path);
  if (!fingers.is_array() || fingers.size() != kFingerCount) {
    throw Error(ErrorCode::Schema, path + ".fingers: expected exactly 5 entries");
  }
  for (std::size_t i = 0; i < kFingerCount; ++i) {
    const std::string fp = path + ".fingers[" + std::to_string(i) + "]";
    requireOnlyKeys(fingers[i], {"flex", "tip"}, fp);
    frame.fingers[i].flexion = number(member(fingers[i], "flex", fp), fp + ".flex");
    frame.fingers[i].tip = vec3(member(fingers[i], "tip", fp), fp + ".tip");
  }
  frame.pinch_strength = number(member(record, "pinch_strength", path), path + ".pinch_strength");
  frame.grab_strength = number(member(record, "grab_strength", path), path + ".grab_strength");
  frame.confidence = number(member(record, "confidence", path), path + ".confidence");
  return frame;
}

HandPoseFrame pose_fields_from_json(const Json& record, const std::string& path) {
  return validate_frame(pose_raw_from_json(record, path));
}

HandPoseFrame pose_from_json(const Json& record, const std::string& path) {
  requireOnlyKeys(record,
                  {"timestamp_s", "palm_pos", "palm_quat", "wrist_pos", "fingers", "pinch_strength",
                   "grab_strength", "confidence"},
                  path);
  return pose_fields_from_json(record, path);
}

std::string write_pose_trace(const PoseTrace& trace) {
  std::string out = Json{{"format", "pose-trace"}, {"version", 1}, {"source_label", trace.source_label}}.dump();
  out += '\n';
  for (const auto& frame : trace.frames) {
    out += pose_to_json(frame).dump();
    out += '\n';
  }
  return out;
}

PoseTrace parse_pose_trace(std::string_view content) {
  std::istringstream in{std::string(content)};
  std::string line;
  std::size_t line_no = 0;
  PoseTrace trace;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    const Json record = parse(line, where);
    if (!header_seen) {
      if (!record.is_object() || record.value("format", "") != "pose-trace") {
        throw Error(ErrorCode::Parse, where + ": missing pose-trace header");
      }
      if (record.value("version", 0) != 1) {
        throw Error(ErrorCode::Schema, where + ": unsupported pose-trace version");
      }
      trace.source_label = record.value("source_label", "");
      header_seen = true;
      continue;
    }
    trace.frames.push_back(pose_from_json(record, where));
  }
  if (!header_seen) throw Error(ErrorCode::Parse, "empty pose trace file");
  validate_trace(trace);
  return trace;
}

PoseTrace read_pose_trace_file(const std::string& path) {
  try {
    return parse_pose_trace(readFile(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Io) throw;
    throw Error(e.code(), path + ": " + e.detail());
  }
}

}  // namespace limbswap
