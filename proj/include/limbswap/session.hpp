#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "limbswap/gestures.hpp"
#include "limbswap/json_fwd.hpp"
#include "limbswap/pose.hpp"
#include "limbswap/prosthesis.hpp"
#include "limbswap/retarget.hpp"
#include "limbswap/tasks.hpp"

namespace limbswap {

enum class Limb { Left, Right };

struct SessionConfig {
  std::string prosthesis_id;
  TaskConfig task = BallConfig{};
  double tick_rate_hz = 120.0;
  double output_frame_rate_hz = 60.0;
  GestureConfig gestures;
  Limb replaced_limb = Limb::Right;
};

/// Throws Error{BadConfig} unless tick rate >= output rate and the ratio is a whole number.
void validate_session_config(const SessionConfig& config);
/// Ticks per emitted RenderFrame.
std::int64_t frame_stride(const SessionConfig& config);

/// Gesture, task and input events in one stream. `kind` is the event name (PinchStart,
/// GoalReached, DroppedInput, ...).
struct EngineEvent {
  std::string kind;
  std::int64_t tick = 0;
  std::optional<Vec3> direction;
  std::optional<double> speed;
  std::string detail;

  bool operator==(const EngineEvent&) const = default;
};

struct TaskView {
  std::optional<Vec3> ball_position;
  std::optional<Vec3> ball_velocity;
  std::optional<std::string> attached_to;
  std::vector<StrokeDelta> stroke_deltas;  // ink added since the previous frame

  bool operator==(const TaskView&) const = default;
};

/// Immutable per-output-tick snapshot; what a client draws.
struct RenderFrame {
  std::int64_t tick = 0;
  double time_s = 0.0;
  ObjectPose object;
  bool hand_visible = false;  // the replaced hand is never drawn
  TaskView task_view;
  std::vector<EngineEvent> events;  // since the previous frame
  std::optional<TaskMetrics> metrics_snapshot;
  std::uint64_t state_hash = 0;

  bool operator==(const RenderFrame&) const = default;
};

/// Everything a session carries between ticks. The engine draws no random numbers.
struct SessionState {
  SessionConfig config;
  ProsthesisSpec spec;
  std::int64_t tick = 0;  // next tick to process

  bool has_input = false;
  HandPoseFrame latest_input;     // newest accepted input frame
  HandPoseFrame segment_start;    // pose the engine is moving from toward latest_input
  HandPoseFrame current_pose;     // pose at the last processed tick
  DetectorState detector;
  ObjectPose smoothed;
  TaskState task;

  std::vector<EngineEvent> pending_events;
  std::vector<StrokeDelta> pending_deltas;
};

/// Throws Error{UnknownProsthesis}, Error{UnknownTask} (via config) or Error{BadConfig}.
/// A non-zero start_tick continues an existing clock (live sessions that switch prosthesis).
SessionState create_session(const SessionConfig& config, const Catalog& catalog, std::int64_t start_tick = 0);

struct StepResult {
  SessionState state;
  std::optional<RenderFrame> frame;
};

/// Advances exactly one tick. Stale or invalid input is dropped with a DroppedInput event.
StepResult step(SessionState state, const std::optional<HandPoseFrame>& input);

/// FNV-1a over the canonical serialization, hashing stored numeric bit patterns.
std::uint64_t state_hash(const SessionState& state);
std::string hash_hex(std::uint64_t hash);

Json session_state_to_json(const SessionState& state);
SessionState session_state_from_json(const Json& doc);

TaskMetrics session_metrics(const SessionState& state);

struct ReplayResult {
  SessionState final_state;
  std::vector<RenderFrame> frames;
  TaskMetrics metrics;
};

/// Rebases the trace to start at t = 0, resamples it onto the tick grid and steps through it.
ReplayResult run_replay(const PoseTrace& trace, const SessionConfig& config, const Catalog& catalog);

Json event_to_json(const EngineEvent& event);
EngineEvent event_from_json(const Json& doc);
Json frame_to_json(const RenderFrame& frame);
RenderFrame frame_from_json(const Json& doc, const std::string& path = "frame");

/// `.frames.jsonl`: header {"format":"render-frames","version":1} then one frame per line.
std::string record_frames(const std::vector<RenderFrame>& frames);
std::vector<RenderFrame> load_frames(std::string_view content);

}  // namespace limbswap
