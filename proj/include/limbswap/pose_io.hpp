#pragma once

#include <string>
#include <string_view>

#include "limbswap/json_fwd.hpp"
#include "limbswap/pose.hpp"

namespace limbswap {

Json pose_to_json(const HandPoseFrame& frame);
/// Parses the record and runs validate_frame on it.
HandPoseFrame pose_from_json(const Json& record, const std::string& path = "pose");
/// Reads the pose fields from a record that may carry other members (protocol envelopes).
HandPoseFrame pose_fields_from_json(const Json& record, const std::string& path);
/// Shape checks only; value ranges are left to validate_frame.
HandPoseFrame pose_raw_from_json(const Json& record, const std::string& path);

/// `.poses.jsonl`: header {"format":"pose-trace","version":1} then one frame per line.
std::string write_pose_trace(const PoseTrace& trace);
PoseTrace parse_pose_trace(std::string_view content);
PoseTrace read_pose_trace_file(const std::string& path);

}  // namespace limbswap
