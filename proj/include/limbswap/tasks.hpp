#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "limbswap/geometry.hpp"
#include "limbswap/json_fwd.hpp"
#include "limbswap/prosthesis.hpp"
#include "limbswap/retarget.hpp"

namespace limbswap {

/// Which gestures are currently held (pinch/grab/stillness) or fired this step (swipe).
struct ActiveGestures {
  bool pinch = false;
  bool grab = false;
  bool stillness = false;
  bool swipe = false;

  bool active(GestureKind kind) const;
};

struct Box3 {
  Vec3 min = Vec3::Constant(-1.0);
  Vec3 max = Vec3::Constant(1.0);
  bool operator==(const Box3&) const = default;
};

// ---------------------------------------------------------------------------- ball

struct BallConfig {
  double radius = 0.05;
  double damping = 2.0;       // 1/s
  double restitution = 0.5;
  double grab_radius = 0.08;
  double goal_speed_eps = 0.05;
  double default_push_gain = 1.0;  // used by DelicateTouch prostheses without a Push affordance
  Vec3 ball_start = Vec3(-0.05, 0.0, 0.08);
  Vec3 goal_center = Vec3(0.45, 0.0, 0.08);
  double goal_radius = 0.08;
  Box3 bounds{Vec3(-0.6, -0.3, -0.3), Vec3(0.7, 0.3, 0.5)};

  bool operator==(const BallConfig&) const = default;
};

struct BallTaskState {
  Vec3 ball_position = Vec3::Zero();
  Vec3 ball_velocity = Vec3::Zero();
  double ball_radius = 0.05;
  std::optional<std::string> attached_to;
  Vec3 goal_center = Vec3::Zero();
  double goal_radius = 0.05;
  Box3 bounds;
  Vec3 start_position = Vec3::Zero();
  std::optional<Vec3> done_position;
  double path_length_accum = 0.0;
  std::optional<std::int64_t> start_tick;
  std::optional<std::int64_t> done_tick;
  std::int64_t ticks = 0;  // steps taken

  bool operator==(const BallTaskState&) const = default;
};

// ---------------------------------------------------------------------------- draw

struct DrawConfig {
  Planed canvas{Vec3::Zero(), Vec3::UnitZ()};
  double contact_threshold = 0.005;
  double base_width = 0.002;
  double spot_base = 0.004;
  double spot_spread = 0.05;  // m of width per m of nozzle distance
  double cover_radius = 0.005;
  std::vector<Vec2> target_polyline;
  std::optional<std::int64_t> ink_budget;

  bool operator==(const DrawConfig& o) const;
};

struct StrokePoint {
  Vec2 position = Vec2::Zero();  // canvas coordinates
  double width = 0.0;
  bool operator==(const StrokePoint&) const = default;
};

using Stroke = std::vector<StrokePoint>;

struct DrawTaskState {
  Planed canvas{Vec3::Zero(), Vec3::UnitZ()};
  std::vector<Stroke> strokes;
  std::vector<Vec2> target_polyline;
  std::optional<std::int64_t> ink_budget;  // remaining points when limited
  bool stroke_open = false;
  double emission_credit = 1.0;
  std::int64_t ticks = 0;

  bool operator==(const DrawTaskState& o) const;
};

struct StrokeDelta {
  std::size_t stroke_index = 0;
  std::vector<StrokePoint> points;
  bool operator==(const StrokeDelta&) const = default;
};

// ---------------------------------------------------------------------------- events, metrics

enum class TaskEventKind { BallContact, BallAttached, BallReleased, GoalReached, StrokeStarted, StrokeEnded };

std::string_view to_string(TaskEventKind kind);

struct TaskEvent {
  TaskEventKind kind = TaskEventKind::BallContact;
  std::string detail;
  bool operator==(const TaskEvent&) const = default;
};

struct TaskMetrics {
  std::optional<double> time_to_goal_s;
  std::optional<double> path_efficiency;
  std::optional<double> stroke_rms_deviation_m;
  std::optional<double> ink_coverage;

  bool operator==(const TaskMetrics&) const = default;
};

// ---------------------------------------------------------------------------- steps

/// What the prosthesis contributes to one task step.
struct ProsthesisInput {
  const ProsthesisSpec* spec = nullptr;
  std::vector<Sphere> proxies;              // world space
  Vec3 proxy_velocity = Vec3::Zero();       // object linear velocity, m/s
  Vec3 palm_velocity = Vec3::Zero();
  std::vector<AnchorWorld> anchors_world;
  ActiveGestures gestures;
};

BallTaskState make_ball_state(const BallConfig& config);
DrawTaskState make_draw_state(const DrawConfig& config);

/// Damping, contact impulse, grab/attach, integration with wall reflection, goal check; in that
/// order. dt must lie in (0, 0.1].
std::pair<BallTaskState, std::vector<TaskEvent>> ball_step(BallTaskState state, const ProsthesisInput& input,
                                                           const BallConfig& config, double dt);

struct DrawStepResult {
  DrawTaskState state;
  std::vector<StrokeDelta> deltas;
  std::vector<TaskEvent> events;
};

/// Contact mode for Tip-only prostheses, ray mode (Trigger held) for prostheses with a Nozzle.
DrawStepResult draw_step(DrawTaskState state, const ProsthesisInput& input, const DrawConfig& config, double dt);

std::optional<Vec3> ray_plane(const Vec3& origin, const Vec3& direction, const Planed& plane);

TaskMetrics task_metrics(const BallTaskState& state, double tick_dt);
TaskMetrics task_metrics(const DrawTaskState& state, const DrawConfig& config);

Json metrics_to_json(const TaskMetrics& metrics);
TaskMetrics metrics_from_json(const Json& doc);

// ---------------------------------------------------------------------------- config documents

using TaskConfig = std::variant<BallConfig, DrawConfig>;
using TaskState = std::variant<BallTaskState, DrawTaskState>;

std::string_view task_id(const TaskConfig& config);
/// "ball" | "draw" with built-in defaults; Error{UnknownTask} otherwise.
TaskConfig default_task_config(std::string_view id);
/// Merges a task config document over the defaults for `id`; unknown keys raise Error{BadConfig}.
TaskConfig task_config_from_json(std::string_view id, const Json& doc);
Json task_config_to_json(const TaskConfig& config);
void validate_task_config(const TaskConfig& config);

}  // namespace limbswap
