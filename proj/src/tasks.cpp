#include "limbswap/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "limbswap/error.hpp"

namespace limbswap {

using namespace json_util;

namespace {

const AnchorWorld* worldAnchor(const std::vector<AnchorWorld>& anchors, const std::string& name) {
  for (const auto& a : anchors) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

bool insideBounds(const Vec3& p, const Box3& box, double margin) {
  return (p.array() >= box.min.array() + margin).all() && (p.array() <= box.max.array() - margin).all();
}

double polylineDistance(const Vec2& p, const std::vector<Vec2>& line) {
  if (line.size() == 1) return (p - line.front()).norm();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    best = std::min(best, pointSegmentDistance<double, 2>(p, line[i], line[i + 1]));
  }
  return best;
}

void bad(const std::string& what) { throw Error(ErrorCode::BadConfig, what); }

}  // namespace

bool ActiveGestures::active(GestureKind kind) const {
  switch (kind) {
    case GestureKind::Pinch: return pinch;
    case GestureKind::Grab: return grab;
    case GestureKind::Swipe: return swipe;
    case GestureKind::Stillness: return stillness;
  }
  return false;
}

bool DrawConfig::operator==(const DrawConfig& o) const {
  return canvas.point == o.canvas.point && canvas.normal == o.canvas.normal &&
         contact_threshold == o.contact_threshold && base_width == o.base_width &&
         spot_base == o.spot_base && spot_spread == o.spot_spread && cover_radius == o.cover_radius &&
         target_polyline == o.target_polyline && ink_budget == o.ink_budget;
}

bool DrawTaskState::operator==(const DrawTaskState& o) const {
  return canvas.point == o.canvas.point && canvas.normal == o.canvas.normal && strokes == o.strokes &&
         target_polyline == o.target_polyline && ink_budget == o.ink_budget &&
         stroke_open == o.stroke_open && emission_credit == o.emission_credit && ticks == o.ticks;
}

std::string_view to_string(TaskEventKind kind) {
  switch (kind) {
    case TaskEventKind::BallContact: return "BallContact";
    case TaskEventKind::BallAttached: return "BallAttached";
    case TaskEventKind::BallReleased: return "BallReleased";
    case TaskEventKind::GoalReached: return "GoalReached";
    case TaskEventKind::StrokeStarted: return "StrokeStarted";
    case TaskEventKind::StrokeEnded: return "StrokeEnded";
  }
  return "";
}

BallTaskState make_ball_state(const BallConfig& config) {
  BallTaskState s;
  s.ball_position = config.ball_start;
  s.start_position = config.ball_start;
  s.ball_radius = config.radius;
  s.goal_center = config.goal_center;
  s.goal_radius = config.goal_radius;
  s.bounds = config.bounds;
  return s;
}

DrawTaskState make_draw_state(const DrawConfig& config) {
  DrawTaskState s;
  s.canvas = config.canvas;
  s.target_polyline = config.target_polyline;
  s.ink_budget = config.ink_budget;
  return s;
}

std::pair<BallTaskState, std::vector<TaskEvent>> ball_step(BallTaskState s, const ProsthesisInput& input,
                                                           const BallConfig& config, double dt) {
  if (!(dt > 0.0 && dt <= 0.1)) throw Error(ErrorCode::BadParameter, "ball_step dt must lie in (0, 0.1]");
  std::vector<TaskEvent> events;
  if (!s.start_tick) s.start_tick = s.ticks;
  const ProsthesisSpec* spec = input.spec;
  const double r = s.ball_radius;
  const Vec3 before = s.ball_position;

  // (1) damping
  if (!s.attached_to) s.ball_velocity *= std::exp(-config.damping * dt);

  // (2) contact impulse from the deepest overlapping proxy sphere
  if (!s.attached_to && spec != nullptr) {
    const Affordance* push = find_affordance(*spec, ActionKind::Push);
    const Affordance* delicate = find_affordance(*spec, ActionKind::DelicateTouch);
    double gain = 0.0;
    if (push) {
      gain = std::get<PushAction>(push->action).impulse_gain;
    } else if (delicate) {
      gain = config.default_push_gain;
    }
    if (delicate && input.palm_velocity.norm() > std::get<DelicateTouchAction>(delicate->action).max_speed) {
      gain = 0.0;
    }
    if (gain > 0.0) {
      const Sphere* deepest = nullptr;
      double depth = 0.0;
      for (const Sphere& sphere : input.proxies) {
        const double pen = r + sphere.radius - (s.ball_position - sphere.center).norm();
        if (pen > depth) {
          depth = pen;
          deepest = &sphere;
        }
      }
      if (deepest != nullptr) {
        const Vec3 offset = s.ball_position - deepest->center;
        Vec3 normal = Vec3::UnitX();
        if (offset.norm() > 1e-12) {
          normal = offset.normalized();
        } else if (input.proxy_velocity.norm() > 1e-12) {
          normal = input.proxy_velocity.normalized();
        }
        const double approach = (input.proxy_velocity - s.ball_velocity).dot(normal);
        if (approach > 0.0) {
          s.ball_velocity += gain * approach * normal;
          s.ball_position += depth * normal;
          events.push_back({TaskEventKind::BallContact, ""});
        }
      }
    }
  }

  // (3) grab / attach
  const Affordance* grab = spec ? find_affordance(*spec, ActionKind::GrabAttach) : nullptr;
  if (s.attached_to) {
    const AnchorWorld* anchor = worldAnchor(input.anchors_world, *s.attached_to);
    const bool held = grab != nullptr && input.gestures.active(grab->gesture);
    if (!held || anchor == nullptr || !insideBounds(anchor->position, s.bounds, r)) {
      events.push_back({TaskEventKind::BallReleased, *s.attached_to});
      s.attached_to.reset();
    } else {
      s.ball_velocity = (anchor->position - s.ball_position) / dt;
      s.ball_position = anchor->position;
    }
  } else if (grab != nullptr && input.gestures.active(grab->gesture)) {
    const AnchorWorld* best = nullptr;
    double best_dist = config.grab_radius;
    for (const Anchor& a : spec->anchors) {
      if (a.role != AnchorRole::Grip) continue;
      const AnchorWorld* w = worldAnchor(input.anchors_world, a.name);
      if (w == nullptr || !insideBounds(w->position, s.bounds, r)) continue;
      const double d = (w->position - s.ball_position).norm();
      if (d <= best_dist) {
        best_dist = d;
        best = w;
      }
    }
    if (best != nullptr) {
      s.attached_to = best->name;
      s.ball_velocity.setZero();
      s.ball_position = best->position;
      events.push_back({TaskEventKind::BallAttached, best->name});
    }
  }

  // (4) integrate and reflect off the walls
  if (!s.attached_to) {
    s.ball_position += s.ball_velocity * dt;
    for (int axis = 0; axis < 3; ++axis) {
      const double lo = s.bounds.min[axis] + r;
      const double hi = s.bounds.max[axis] - r;
      if (s.ball_position[axis] < lo) {
        s.ball_position[axis] = lo;
        if (s.ball_velocity[axis] < 0.0) s.ball_velocity[axis] = -s.ball_velocity[axis] * config.restitution;
      } else if (s.ball_position[axis] > hi) {
        s.ball_position[axis] = hi;
        if (s.ball_velocity[axis] > 0.0) s.ball_velocity[axis] = -s.ball_velocity[axis] * config.restitution;
      }
    }
  }
  // Path length is measured up to the goal so the efficiency metric settles once reached.
  if (!s.done_tick) s.path_length_accum += (s.ball_position - before).norm();

  // (5) goal
  if (!s.done_tick && (s.ball_position - s.goal_center).norm() <= s.goal_radius &&
      s.ball_velocity.norm() <= config.goal_speed_eps) {
    s.done_tick = s.ticks + 1;
    s.done_position = s.ball_position;
    events.push_back({TaskEventKind::GoalReached, ""});
  }
  ++s.ticks;
  return {std::move(s), std::move(events)};
}

std::optional<Vec3> ray_plane(const Vec3& origin, const Vec3& direction, const Planed& plane) {
  return rayPlane<double>(origin, direction, plane);
}

DrawStepResult draw_step(DrawTaskState s, const ProsthesisInput& input, const DrawConfig& config, double dt) {
  if (!(dt > 0.0 && dt <= 0.1)) throw Error(ErrorCode::BadParameter, "draw_step dt must lie in (0, 0.1]");
  DrawStepResult result;
  const ProsthesisSpec* spec = input.spec;
  const Anchor* nozzle = spec ? find_anchor(*spec, AnchorRole::Nozzle) : nullptr;
  const Anchor* tip = spec ? find_anchor(*spec, AnchorRole::Tip) : nullptr;

  bool drawing = false;
  bool emit = false;
  StrokePoint point;
  if (nozzle != nullptr) {
    const Affordance* trigger = find_affordance(*spec, ActionKind::Trigger);
    const AnchorWorld* w = worldAnchor(input.anchors_world, nozzle->name);
    const double rate = trigger ? std::get<TriggerAction>(trigger->action).emission_rate : 0.0;
    if (trigger != nullptr && w != nullptr && input.gestures.active(trigger->gesture)) {
      if (const auto hit = ray_plane(w->position, w->direction, s.canvas)) {
        drawing = true;
        point.position = s.canvas.toPlane(*hit);
        point.width = config.spot_base + config.spot_spread * (*hit - w->position).norm();
        if (s.emission_credit >= 1.0 - 1e-9) {
          emit = true;
          s.emission_credit -= 1.0;
        }
      }
    }
    s.emission_credit = std::min(1.0, s.emission_credit + rate * dt);
  } else if (tip != nullptr) {
    if (const AnchorWorld* w = worldAnchor(input.anchors_world, tip->name)) {
      const double height = s.canvas.signedDistance(w->position);
      if (height <= config.contact_threshold) {
        drawing = emit = true;
        const double penetration = std::max(0.0, -height);
        point.position = s.canvas.toPlane(w->position);
        point.width = config.base_width * (1.0 + penetration / config.contact_threshold);
      }
    }
  }

  if (emit && s.ink_budget) {
    if (*s.ink_budget <= 0) {
      emit = false;
      drawing = false;
    } else {
      --*s.ink_budget;
    }
  }

  if (emit) {
    if (!s.stroke_open) {
      s.strokes.emplace_back();
      s.stroke_open = true;
      result.events.push_back({TaskEventKind::StrokeStarted, std::to_string(s.strokes.size() - 1)});
    }
    s.strokes.back().push_back(point);
    result.deltas.push_back({s.strokes.size() - 1, {point}});
  } else if (!drawing && s.stroke_open) {
    s.stroke_open = false;
    result.events.push_back({TaskEventKind::StrokeEnded, std::to_string(s.strokes.size() - 1)});
  }
  ++s.ticks;
  result.state = std::move(s);
  return result;
}

TaskMetrics task_metrics(const BallTaskState& s, double tick_dt) {
  TaskMetrics m;
  if (s.done_tick && s.start_tick) {
    m.time_to_goal_s = static_cast<double>(*s.done_tick - *s.start_tick) * tick_dt;
    const Vec3 end = s.done_position.value_or(s.ball_position);
    const double straight = (end - s.start_position).norm();
    m.path_efficiency = s.path_length_accum > 0.0 ? std::min(1.0, straight / s.path_length_accum) : 1.0;
  }
  return m;
}

TaskMetrics task_metrics(const DrawTaskState& s, const DrawConfig& config) {
  TaskMetrics m;
  if (s.target_polyline.empty()) return m;
  std::size_t count = 0;
  double sum_sq = 0.0;
  for (const auto& stroke : s.strokes) {
    for (const auto& p : stroke) {
      const double d = polylineDistance(p.position, s.target_polyline);
      sum_sq += d * d;
      ++count;
    }
  }
  if (count > 0) m.stroke_rms_deviation_m = std::sqrt(sum_sq / static_cast<double>(count));
  std::size_t covered = 0;
  for (const auto& v : s.target_polyline) {
    bool hit = false;
    for (const auto& stroke : s.strokes) {
      for (const auto& p : stroke) {
        if ((p.position - v).norm() <= config.cover_radius) {
          hit = true;
          break;
        }
      }
      if (hit) break;
    }
    if (hit) ++covered;
  }
  m.ink_coverage = static_cast<double>(covered) / static_cast<double>(s.target_polyline.size());
  return m;
}

Json metrics_to_json(const TaskMetrics& m) {
  auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
  return Json{{"time_to_goal_s", opt(m.time_to_goal_s)},
              {"path_efficiency", opt(m.path_efficiency)},
              {"stroke_rms_deviation_m", opt(m.stroke_rms_deviation_m)},
              {"ink_coverage", opt(m.ink_coverage)}};
}

TaskMetrics metrics_from_json(const Json& doc) {
  requireOnlyKeys(doc, {"time_to_goal_s", "path_efficiency", "stroke_rms_deviation_m", "ink_coverage"}, "metrics");
  auto opt = [&doc](const char* key) -> std::optional<double> {
    const auto it = doc.find(key);
    if (it == doc.end() || it->is_null()) return std::nullopt;
    return number(*it, std::string("metrics.") + key);
  };
  return TaskMetrics{opt("time_to_goal_s"), opt("path_efficiency"), opt("stroke_rms_deviation_m"),
                     opt("ink_coverage")};
}

// ---------------------------------------------------------------------------- config documents

std::string_view task_id(const TaskConfig& config) {
  return std::holds_alternative<BallConfig>(config) ? "ball" : "draw";
}

TaskConfig default_task_config(std::string_view id) {
  if (id == "ball") return BallConfig{};
  if (id == "draw") return DrawConfig{};
  throw Error(ErrorCode::UnknownTask, "unknown task '" + std::string(id) + "'");
}

void validate_task_config(const TaskConfig& config) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) bad(std::string(name) + " must be positive");
  };
  if (const auto* b = std::get_if<BallConfig>(&config)) {
    positive(b->radius, "radius");
    if (!(b->damping >= 0.0) || !std::isfinite(b->damping)) bad("damping must be non-negative");
    if (!(b->restitution >= 0.0 && b->restitution <= 1.0)) bad("restitution must lie in [0, 1]");
    positive(b->grab_radius, "grab_radius");
    positive(b->goal_speed_eps, "goal_speed_eps");
    positive(b->default_push_gain, "default_push_gain");
    positive(b->goal_radius, "goal_radius");
    if (!b->ball_start.allFinite() || !b->goal_center.allFinite()) bad("positions must be finite");
    if (!(b->bounds.max - b->bounds.min).allFinite() ||
        !((b->bounds.max - b->bounds.min).array() > 2.0 * b->radius).all()) {
      bad("bounds must be larger than the ball");
    }
    if (!insideBounds(b->ball_start, b->bounds, b->radius - 1e-12)) bad("ball_start must lie inside bounds");
  } else {
    const auto& d = std::get<DrawConfig>(config);
    if (!d.canvas.point.allFinite() || std::abs(d.canvas.normal.norm() - 1.0) > 1e-6) {
      bad("canvas normal must be a unit vector");
    }
    positive(d.contact_threshold, "contact_threshold");
    positive(d.base_width, "base_width");
    positive(d.spot_base, "spot_base");
    if (!(d.spot_spread >= 0.0) || !std::isfinite(d.spot_spread)) bad("spot_spread must be non-negative");
    positive(d.cover_radius, "cover_radius");
    for (const auto& v : d.target_polyline) {
      if (!v.allFinite()) bad("target_polyline must be finite");
    }
    if (d.ink_budget && *d.ink_budget < 0) bad("ink_budget must be non-negative");
  }
}

TaskConfig task_config_from_json(std::string_view id, const Json& doc) {
  TaskConfig config = default_task_config(id);
  if (!doc.is_object()) bad("task config must be an object");
  try {
    if (auto* b = std::get_if<BallConfig>(&config)) {
      requireOnlyKeys(doc,
                      {"radius", "damping", "restitution", "grab_radius", "goal_speed_eps", "default_push_gain",
                       "ball_start", "goal_center", "goal_radius", "bounds_min", "bounds_max"},
                      "ball");
      auto num = [&doc](const char* key, double& slot) {
        if (doc.contains(key)) slot = number(doc[key], std::string("ball.") + key);
      };
      auto v3 = [&doc](const char* key, Vec3& slot) {
        if (doc.contains(key)) slot = vec3(doc[key], std::string("ball.") + key);
      };
      num("radius", b->radius);
      num("damping", b->damping);
      num("restitution", b->restitution);
      num("grab_radius", b->grab_radius);
      num("goal_speed_eps", b->goal_speed_eps);
      num("default_push_gain", b->default_push_gain);
      num("goal_radius", b->goal_radius);
      v3("ball_start", b->ball_start);
      v3("goal_center", b->goal_center);
      v3("bounds_min", b->bounds.min);
      v3("bounds_max", b->bounds.max);
    } else {
      auto& d = std::get<DrawConfig>(config);
      requireOnlyKeys(doc,
                      {"canvas_point", "canvas_normal", "contact_threshold", "base_width", "spot_base",
                       "spot_spread", "cover_radius", "target_polyline", "ink_budget"},
                      "draw");
      auto num = [&doc](const char* key, double& slot) {
        if (doc.contains(key)) slot = number(doc[key], std::string("draw.") + key);
      };
      if (doc.contains("canvas_point")) d.canvas.point = vec3(doc["canvas_point"], "draw.canvas_point");
      if (doc.contains("canvas_normal")) d.canvas.normal = vec3(doc["canvas_normal"], "draw.canvas_normal");
      num("contact_threshold", d.contact_threshold);
      num("base_width", d.base_width);
      num("spot_base", d.spot_base);
      num("spot_spread", d.spot_spread);
      num("cover_radius", d.cover_radius);
      if (doc.contains("target_polyline")) {
        const Json& poly = doc["target_polyline"];
        if (!poly.is_array()) bad("draw.target_polyline must be an array of 2-D points");
        d.target_polyline.clear();
        for (std::size_t i = 0; i < poly.size(); ++i) {
          d.target_polyline.push_back(vec2(poly[i], "draw.target_polyline[" + std::to_string(i) + "]"));
        }
      }
      if (doc.contains("ink_budget") && !doc["ink_budget"].is_null()) {
        if (!doc["ink_budget"].is_number_integer()) bad("draw.ink_budget must be an integer");
        d.ink_budget = doc["ink_budget"].get<std::int64_t>();
      }
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::BadConfig) throw;
    throw Error(ErrorCode::BadConfig, e.detail());
  }
  validate_task_config(config);
  return config;
}

Json task_config_to_json(const TaskConfig& config) {
  if (const auto* b = std::get_if<BallConfig>(&config)) {
    return Json{{"radius", b->radius},
                {"damping", b->damping},
                {"restitution", b->restitution},
                {"grab_radius", b->grab_radius},
                {"goal_speed_eps", b->goal_speed_eps},
                {"default_push_gain", b->default_push_gain},
                {"ball_start", vec(b->ball_start)},
                {"goal_center", vec(b->goal_center)},
                {"goal_radius", b->goal_radius},
                {"bounds_min", vec(b->bounds.min)},
                {"bounds_max", vec(b->bounds.max)}};
  }
  const auto& d = std::get<DrawConfig>(config);
  Json poly = Json::array();
  for (const auto& v : d.target_polyline) poly.push_back(vec(v));
  return Json{{"canvas_point", vec(d.canvas.point)},
              {"canvas_normal", vec(d.canvas.normal)},
              {"contact_threshold", d.contact_threshold},
              {"base_width", d.base_width},
              {"spot_base", d.spot_base},
              {"spot_spread", d.spot_spread},
              {"cover_radius", d.cover_radius},
              {"target_polyline", std::move(poly)},
              {"ink_budget", d.ink_budget ? Json(*d.ink_budget) : Json(nullptr)}};
}

}  // namespace limbswap
