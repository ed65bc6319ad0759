#include "limbswap/session.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "limbswap/error.hpp"
#include "limbswap/pose_io.hpp"

namespace limbswap {

using namespace json_util;

namespace {

double tickTime(std::int64_t tick, double rate) { return static_cast<double>(tick) * (1.0 / rate); }

EngineEvent fromGesture(const GestureEvent& g) {
  EngineEvent e{std::string(to_string(g.kind)), g.tick, std::nullopt, std::nullopt, ""};
  if (g.kind == GestureEventKind::Swipe) {
    e.direction = g.direction;
    e.speed = g.speed;
  }
  return e;
}

void appendDeltas(std::vector<StrokeDelta>& pending, const std::vector<StrokeDelta>& fresh) {
  for (const auto& d : fresh) {
    if (!pending.empty() && pending.back().stroke_index == d.stroke_index) {
      pending.back().points.insert(pending.back().points.end(), d.points.begin(), d.points.end());
    } else {
      pending.push_back(d);
    }
  }
}

// ---- canonical hashing ------------------------------------------------------

class Fnv1a {
 public:
  void bytes(const void* data, std::size_t size) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      hash_ ^= p[i];
      hash_ *= 0x00000100000001b3ull;
    }
  }
  void u8(std::uint8_t v) { bytes(&v, 1); }
  void u64(std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(buf, 8);
  }
  void str(const std::string& s) {
    u64(s.size());
    bytes(s.data(), s.size());
  }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ull;
};

void hashJson(const Json& j, Fnv1a& h) {
  switch (j.type()) {
    case Json::value_t::null: h.u8(0); break;
    case Json::value_t::boolean: h.u8(1); h.u8(j.get<bool>() ? 1 : 0); break;
    case Json::value_t::number_integer: h.u8(2); h.u64(static_cast<std::uint64_t>(j.get<std::int64_t>())); break;
    case Json::value_t::number_unsigned: h.u8(3); h.u64(j.get<std::uint64_t>()); break;
    case Json::value_t::number_float: h.u8(4); h.u64(std::bit_cast<std::uint64_t>(j.get<double>())); break;
    case Json::value_t::string: h.u8(5); h.str(j.get_ref<const std::string&>()); break;
    case Json::value_t::array:
      h.u8(6);
      h.u64(j.size());
      for (const auto& v : j) hashJson(v, h);
      break;
    case Json::value_t::object:
      h.u8(7);
      h.u64(j.size());
      for (const auto& [k, v] : j.items()) {
        h.str(k);
        hashJson(v, h);
      }
      break;
    default: h.u8(8); break;
  }
}

// ---- JSON helpers for state pieces -----------------------------------------

Json optVec(const std::optional<Vec3>& v) { return v ? vec(*v) : Json(nullptr); }
std::optional<Vec3> optVec3(const Json& doc, const char* key, const std::string& path) {
  const auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) return std::nullopt;
  return vec3(*it, path + "." + key);
}
Json optInt(const std::optional<std::int64_t>& v) { return v ? Json(*v) : Json(nullptr); }
std::optional<std::int64_t> optInt64(const Json& doc, const char* key, const std::string& path) {
  const auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) return std::nullopt;
  if (!it->is_number_integer()) throw Error(ErrorCode::Schema, path + "." + key + ": expected an integer");
  return it->get<std::int64_t>();
}
Json optStr(const std::optional<std::string>& v) { return v ? Json(*v) : Json(nullptr); }
std::optional<std::string> optString(const Json& doc, const char* key, const std::string& path) {
  const auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) return std::nullopt;
  return json_util::string(*it, path + "." + key);
}
std::int64_t int64(const Json& doc, const char* key, const std::string& path) {
  const Json& v = member(doc, key, path);
  if (!v.is_number_integer()) throw Error(ErrorCode::Schema, path + "." + key + ": expected an integer");
  return v.get<std::int64_t>();
}
bool boolean(const Json& doc, const char* key, const std::string& path) {
  const Json& v = member(doc, key, path);
  if (!v.is_boolean()) throw Error(ErrorCode::Schema, path + "." + key + ": expected a boolean");
  return v.get<bool>();
}

Json objectPoseToJson(const ObjectPose& p) {
  Json anchors = Json::array();
  for (const auto& a : p.anchors_world) {
    anchors.push_back(Json{{"name", a.name}, {"position", vec(a.position)}, {"direction", vec(a.direction)}});
  }
  return Json{{"translation", vec(p.transform.translation)},
              {"rotation", json_util::quat(p.transform.rotation)},
              {"scale", p.transform.scale},
              {"joint_angles", p.joint_angles},
              {"anchors", std::move(anchors)}};
}

ObjectPose objectPoseFromJson(const Json& j, const std::string& path) {
  ObjectPose p;
  p.transform.translation = vec3(member(j, "translation", path), path + ".translation");
  p.transform.rotation = json_util::quat(member(j, "rotation", path), path + ".rotation");
  p.transform.scale = number(member(j, "scale", path), path + ".scale");
  const Json& joints = member(j, "joint_angles", path);
  if (!joints.is_array()) throw Error(ErrorCode::Schema, path + ".joint_angles: expected an array");
  for (std::size_t i = 0; i < joints.size(); ++i) {
    p.joint_angles.push_back(number(joints[i], path + ".joint_angles[" + std::to_string(i) + "]"));
  }
  const Json& anchors = member(j, "anchors", path);
  if (!anchors.is_array()) throw Error(ErrorCode::Schema, path + ".anchors: expected an array");
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    const std::string ap = path + ".anchors[" + std::to_string(i) + "]";
    p.anchors_world.push_back({json_util::string(member(anchors[i], "name", ap), ap + ".name"),
                               vec3(member(anchors[i], "position", ap), ap + ".position"),
                               vec3(member(anchors[i], "direction", ap), ap + ".direction")});
  }
  return p;
}

Json strokePointsToJson(const std::vector<StrokePoint>& points) {
  Json out = Json::array();
  for (const auto& p : points) out.push_back(Json{{"p", vec(p.position)}, {"w", p.width}});
  return out;
}

std::vector<StrokePoint> strokePointsFromJson(const Json& j, const std::string& path) {
  if (!j.is_array()) throw Error(ErrorCode::Schema, path + ": expected an array");
  std::vector<StrokePoint> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string pp = path + "[" + std::to_string(i) + "]";
    out.push_back({vec2(member(j[i], "p", pp), pp + ".p"), number(member(j[i], "w", pp), pp + ".w")});
  }
  return out;
}

Json deltasToJson(const std::vector<StrokeDelta>& deltas) {
  Json out = Json::array();
  for (const auto& d : deltas) out.push_back(Json{{"stroke", d.stroke_index}, {"points", strokePointsToJson(d.points)}});
  return out;
}

std::vector<StrokeDelta> deltasFromJson(const Json& j, const std::string& path) {
  if (!j.is_array()) throw Error(ErrorCode::Schema, path + ": expected an array");
  std::vector<StrokeDelta> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string dp = path + "[" + std::to_string(i) + "]";
    const Json& idx = member(j[i], "stroke", dp);
    if (!idx.is_number_unsigned() && !(idx.is_number_integer() && idx.get<std::int64_t>() >= 0)) {
      throw Error(ErrorCode::Schema, dp + ".stroke: expected a non-negative integer");
    }
    out.push_back({idx.get<std::size_t>(), strokePointsFromJson(member(j[i], "points", dp), dp + ".points")});
  }
  return out;
}

Json detectorToJson(const DetectorState& d) {
  return Json{{"pinch_active", d.pinch_active},
              {"grab_active", d.grab_active},
              {"still_active", d.still_active},
              {"has_previous", d.has_previous},
              {"previous_time", d.previous_time},
              {"previous_palm", vec(d.previous_palm)},
              {"palm_velocity", vec(d.palm_velocity)},
              {"swipe_duration", d.swipe_duration},
              {"swipe_displacement", vec(d.swipe_displacement)},
              {"swipe_emitted", d.swipe_emitted},
              {"swipe_this_step", d.swipe_this_step},
              {"still_duration", d.still_duration}};
}

DetectorState detectorFromJson(const Json& j, const std::string& path) {
  DetectorState d;
  d.pinch_active = boolean(j, "pinch_active", path);
  d.grab_active = boolean(j, "grab_active", path);
  d.still_active = boolean(j, "still_active", path);
  d.has_previous = boolean(j, "has_previous", path);
  d.previous_time = number(member(j, "previous_time", path), path + ".previous_time");
  d.previous_palm = vec3(member(j, "previous_palm", path), path + ".previous_palm");
  d.palm_velocity = vec3(member(j, "palm_velocity", path), path + ".palm_velocity");
  d.swipe_duration = number(member(j, "swipe_duration", path), path + ".swipe_duration");
  d.swipe_displacement = vec3(member(j, "swipe_displacement", path), path + ".swipe_displacement");
  d.swipe_emitted = boolean(j, "swipe_emitted", path);
  d.swipe_this_step = boolean(j, "swipe_this_step", path);
  d.still_duration = number(member(j, "still_duration", path), path + ".still_duration");
  return d;
}

Json taskStateToJson(const TaskState& task) {
  if (const auto* b = std::get_if<BallTaskState>(&task)) {
    return Json{{"kind", "ball"},
                {"ball_position", vec(b->ball_position)},
                {"ball_velocity", vec(b->ball_velocity)},
                {"ball_radius", b->ball_radius},
                {"attached_to", optStr(b->attached_to)},
                {"goal_center", vec(b->goal_center)},
                {"goal_radius", b->goal_radius},
                {"bounds_min", vec(b->bounds.min)},
                {"bounds_max", vec(b->bounds.max)},
                {"start_position", vec(b->start_position)},
                {"done_position", optVec(b->done_position)},
                {"path_length_accum", b->path_length_accum},
                {"start_tick", optInt(b->start_tick)},
                {"done_tick", optInt(b->done_tick)},
                {"ticks", b->ticks}};
  }
  const auto& d = std::get<DrawTaskState>(task);
  Json strokes = Json::array();
  for (const auto& s : d.strokes) strokes.push_back(strokePointsToJson(s));
  Json poly = Json::array();
  for (const auto& v : d.target_polyline) poly.push_back(vec(v));
  return Json{{"kind", "draw"},
              {"canvas_point", vec(d.canvas.point)},
              {"canvas_normal", vec(d.canvas.normal)},
              {"strokes", std::move(strokes)},
              {"target_polyline", std::move(poly)},
              {"ink_budget", optInt(d.ink_budget)},
              {"stroke_open", d.stroke_open},
              {"emission_credit", d.emission_credit},
              {"ticks", d.ticks}};
}

TaskState taskStateFromJson(const Json& j, const std::string& path) {
  const std::string kind = json_util::string(member(j, "kind", path), path + ".kind");
  if (kind == "ball") {
    BallTaskState b;
    b.ball_position = vec3(member(j, "ball_position", path), path + ".ball_position");
    b.ball_velocity = vec3(member(j, "ball_velocity", path), path + ".ball_velocity");
    b.ball_radius = number(member(j, "ball_radius", path), path + ".ball_radius");
    b.attached_to = optString(j, "attached_to", path);
    b.goal_center = vec3(member(j, "goal_center", path), path + ".goal_center");
    b.goal_radius = number(member(j, "goal_radius", path), path + ".goal_radius");
    b.bounds.min = vec3(member(j, "bounds_min", path), path + ".bounds_min");
    b.bounds.max = vec3(member(j, "bounds_max", path), path + ".bounds_max");
    b.start_position = vec3(member(j, "start_position", path), path + ".start_position");
    b.done_position = optVec3(j, "done_position", path);
    b.path_length_accum = number(member(j, "path_length_accum", path), path + ".path_length_accum");
    b.start_tick = optInt64(j, "start_tick", path);
    b.done_tick = optInt64(j, "done_tick", path);
    b.ticks = int64(j, "ticks", path);
    return b;
  }
  if (kind != "draw") throw Error(ErrorCode::Schema, path + ".kind: unknown task kind '" + kind + "'");
  DrawTaskState d;
  d.canvas.point = vec3(member(j, "canvas_point", path), path + ".canvas_point");
  d.canvas.normal = vec3(member(j, "canvas_normal", path), path + ".canvas_normal");
  const Json& strokes = member(j, "strokes", path);
  if (!strokes.is_array()) throw Error(ErrorCode::Schema, path + ".strokes: expected an array");
  for (std::size_t i = 0; i < strokes.size(); ++i) {
    d.strokes.push_back(strokePointsFromJson(strokes[i], path + ".strokes[" + std::to_string(i) + "]"));
  }
  const Json& poly = member(j, "target_polyline", path);
  for (std::size_t i = 0; i < poly.size(); ++i) {
    d.target_polyline.push_back(vec2(poly[i], path + ".target_polyline[" + std::to_string(i) + "]"));
  }
  d.ink_budget = optInt64(j, "ink_budget", path);
  d.stroke_open = boolean(j, "stroke_open", path);
  d.emission_credit = number(member(j, "emission_credit", path), path + ".emission_credit");
  d.ticks = int64(j, "ticks", path);
  return d;
}

std::string_view limbName(Limb limb) { return limb == Limb::Left ? "Left" : "Right"; }

}  // namespace

// ---------------------------------------------------------------------------- engine

void validate_session_config(const SessionConfig& c) {
  if (!(c.tick_rate_hz > 0.0) || !std::isfinite(c.tick_rate_hz)) {
    throw Error(ErrorCode::BadConfig, "tick_rate_hz must be positive");
  }
  if (!(c.output_frame_rate_hz > 0.0) || !std::isfinite(c.output_frame_rate_hz)) {
    throw Error(ErrorCode::BadConfig, "output_frame_rate_hz must be positive");
  }
  if (c.tick_rate_hz < c.output_frame_rate_hz) {
    throw Error(ErrorCode::BadConfig, "tick rate must be at least the output frame rate");
  }
  const double ratio = c.tick_rate_hz / c.output_frame_rate_hz;
  if (std::abs(ratio - std::round(ratio)) > 1e-9) {
    throw Error(ErrorCode::BadConfig, "tick rate must be a whole multiple of the output frame rate");
  }
  if (1.0 / c.tick_rate_hz > 0.1) throw Error(ErrorCode::BadConfig, "tick rate must be at least 10 Hz");
  validate_gesture_config(c.gestures);
  validate_task_config(c.task);
}

std::int64_t frame_stride(const SessionConfig& c) {
  return static_cast<std::int64_t>(std::llround(c.tick_rate_hz / c.output_frame_rate_hz));
}

SessionState create_session(const SessionConfig& config, const Catalog& catalog, std::int64_t start_tick) {
  const ProsthesisSpec* spec = find_spec(catalog, config.prosthesis_id);
  if (spec == nullptr) {
    throw Error(ErrorCode::UnknownProsthesis, "unknown prosthesis '" + config.prosthesis_id + "'");
  }
  validate_session_config(config);

  SessionState s;
  s.config = config;
  s.spec = *spec;
  if (start_tick < 0) throw Error(ErrorCode::BadConfig, "start tick must be non-negative");
  s.tick = start_tick;
  const HandPoseFrame neutral = neutral_pose(tickTime(start_tick, config.tick_rate_hz));
  s.latest_input = neutral;
  s.segment_start = neutral;
  s.current_pose = neutral;
  s.smoothed = retarget(neutral, s.spec);
  if (const auto* ball = std::get_if<BallConfig>(&config.task)) {
    s.task = make_ball_state(*ball);
  } else {
    s.task = make_draw_state(std::get<DrawConfig>(config.task));
  }
  return s;
}

StepResult step(SessionState s, const std::optional<HandPoseFrame>& input) {
  const double dt = 1.0 / s.config.tick_rate_hz;
  const std::int64_t tick = s.tick;
  const double now = tickTime(tick, s.config.tick_rate_hz);

  // validate
  bool snap = false;
  if (input) {
    try {
      const HandPoseFrame frame = validate_frame(*input);
      if (s.has_input && frame.timestamp_s < s.latest_input.timestamp_s) {
        s.pending_events.push_back({"DroppedInput", tick, std::nullopt, std::nullopt, "stale timestamp"});
      } else {
        s.segment_start = s.has_input ? s.current_pose : frame;
        snap = !s.has_input;
        s.latest_input = frame;
        s.has_input = true;
      }
    } catch (const Error& e) {
      s.pending_events.push_back({"DroppedInput", tick, std::nullopt, std::nullopt, e.what()});
    }
  }

  // interpolate to the tick
  HandPoseFrame pose;
  if (!s.has_input) {
    pose = neutral_pose(now);
  } else if (s.latest_input.timestamp_s <= now) {
    pose = s.latest_input;
  } else if (s.segment_start.timestamp_s < now) {
    const double frac = (now - s.segment_start.timestamp_s) /
                        (s.latest_input.timestamp_s - s.segment_start.timestamp_s);
    pose = interpolate(s.segment_start, s.latest_input, frac);
  } else {
    pose = s.segment_start;
  }
  pose.timestamp_s = now;
  const HandPoseFrame previous = s.current_pose;

  // attach, articulate, smooth
  const ObjectPose target = retarget(pose, s.spec);
  ObjectPose smoothed = snap ? target : smooth(s.smoothed, target, s.spec.motion_smoothing_alpha, dt, dt);
  place_anchors(s.spec, smoothed);
  const Vec3 object_velocity =
      snap || tick == 0 ? Vec3::Zero() : Vec3((smoothed.transform.translation - s.smoothed.transform.translation) / dt);
  const Vec3 palm_velocity =
      snap || tick == 0 ? Vec3::Zero() : Vec3((pose.palm_position - previous.palm_position) / dt);

  // gestures
  if (snap) s.detector.has_previous = false;
  auto [gesture_events, detector] = detect_gestures(std::span(&pose, 1), s.detector, s.config.gestures, tick);
  s.detector = detector;
  for (const auto& g : gesture_events) s.pending_events.push_back(fromGesture(g));

  // task
  ProsthesisInput in;
  in.spec = &s.spec;
  in.proxies = collision_proxy_world(s.spec, smoothed);
  in.proxy_velocity = object_velocity;
  in.palm_velocity = palm_velocity;
  in.anchors_world = smoothed.anchors_world;
  in.gestures = {s.detector.pinch_active, s.detector.grab_active, s.detector.still_active,
                 s.detector.swipe_this_step};
  if (auto* ball = std::get_if<BallTaskState>(&s.task)) {
    auto [next, events] = ball_step(std::move(*ball), in, std::get<BallConfig>(s.config.task), dt);
    *ball = std::move(next);
    for (const auto& e : events) s.pending_events.push_back({std::string(to_string(e.kind)), tick, {}, {}, e.detail});
  } else {
    auto& draw = std::get<DrawTaskState>(s.task);
    DrawStepResult r = draw_step(std::move(draw), in, std::get<DrawConfig>(s.config.task), dt);
    draw = std::move(r.state);
    appendDeltas(s.pending_deltas, r.deltas);
    for (const auto& e : r.events) s.pending_events.push_back({std::string(to_string(e.kind)), tick, {}, {}, e.detail});
  }

  s.current_pose = pose;
  s.smoothed = std::move(smoothed);
  s.tick = tick + 1;

  StepResult result;
  if (tick % frame_stride(s.config) == 0) {
    RenderFrame f;
    f.tick = tick;
    f.time_s = now;
    f.object = s.smoothed;
    f.hand_visible = false;
    if (const auto* ball = std::get_if<BallTaskState>(&s.task)) {
      f.task_view.ball_position = ball->ball_position;
      f.task_view.ball_velocity = ball->ball_velocity;
      f.task_view.attached_to = ball->attached_to;
    }
    f.task_view.stroke_deltas = std::move(s.pending_deltas);
    f.events = std::move(s.pending_events);
    s.pending_deltas.clear();
    s.pending_events.clear();
    f.metrics_snapshot = session_metrics(s);
    f.state_hash = state_hash(s);
    result.frame = std::move(f);
  }
  result.state = std::move(s);
  return result;
}

TaskMetrics session_metrics(const SessionState& s) {
  if (const auto* ball = std::get_if<BallTaskState>(&s.task)) {
    return task_metrics(*ball, 1.0 / s.config.tick_rate_hz);
  }
  return task_metrics(std::get<DrawTaskState>(s.task), std::get<DrawConfig>(s.config.task));
}

std::uint64_t state_hash(const SessionState& state) {
  Fnv1a h;
  hashJson(session_state_to_json(state), h);
  return h.value();
}

std::string hash_hex(std::uint64_t hash) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

Json session_state_to_json(const SessionState& s) {
  Json events = Json::array();
  for (const auto& e : s.pending_events) events.push_back(event_to_json(e));
  return Json{{"config",
               {{"prosthesis_id", s.config.prosthesis_id},
                {"task_id", task_id(s.config.task)},
                {"task", task_config_to_json(s.config.task)},
                {"tick_rate_hz", s.config.tick_rate_hz},
                {"output_frame_rate_hz", s.config.output_frame_rate_hz},
                {"gestures", gesture_config_to_json(s.config.gestures)},
                {"replaced_limb", limbName(s.config.replaced_limb)}}},
              {"spec", spec_to_json(s.spec)},
              {"tick", s.tick},
              {"has_input", s.has_input},
              {"latest_input", pose_to_json(s.latest_input)},
              {"segment_start", pose_to_json(s.segment_start)},
              {"current_pose", pose_to_json(s.current_pose)},
              {"detector", detectorToJson(s.detector)},
              {"smoothed", objectPoseToJson(s.smoothed)},
              {"task", taskStateToJson(s.task)},
              {"pending_events", std::move(events)},
              {"pending_deltas", deltasToJson(s.pending_deltas)}};
}

SessionState session_state_from_json(const Json& doc) {
  const std::string path = "state";
  SessionState s;
  const Json& c = member(doc, "config", path);
  s.config.prosthesis_id = json_util::string(member(c, "prosthesis_id", "state.config"), "state.config.prosthesis_id");
  const std::string task = json_util::string(member(c, "task_id", "state.config"), "state.config.task_id");
  s.config.task = task_config_from_json(task, member(c, "task", "state.config"));
  s.config.tick_rate_hz = number(member(c, "tick_rate_hz", "state.config"), "state.config.tick_rate_hz");
  s.config.output_frame_rate_hz =
      number(member(c, "output_frame_rate_hz", "state.config"), "state.config.output_frame_rate_hz");
  s.config.gestures = gesture_config_from_json(member(c, "gestures", "state.config"));
  const std::string limb = json_util::string(member(c, "replaced_limb", "state.config"), "state.config.replaced_limb");
  if (limb != "Left" && limb != "Right") throw Error(ErrorCode::Schema, "state.config.replaced_limb: bad value");
  s.config.replaced_limb = limb == "Left" ? Limb::Left : Limb::Right;

  s.spec = load_spec(member(doc, "spec", path).dump());
  s.tick = int64(doc, "tick", path);
  s.has_input = boolean(doc, "has_input", path);
  s.latest_input = pose_from_json(member(doc, "latest_input", path), "state.latest_input");
  s.segment_start = pose_from_json(member(doc, "segment_start", path), "state.segment_start");
  s.current_pose = pose_from_json(member(doc, "current_pose", path), "state.current_pose");
  s.detector = detectorFromJson(member(doc, "detector", path), "state.detector");
  s.smoothed = objectPoseFromJson(member(doc, "smoothed", path), "state.smoothed");
  s.task = taskStateFromJson(member(doc, "task", path), "state.task");
  for (const auto& e : member(doc, "pending_events", path)) s.pending_events.push_back(event_from_json(e));
  s.pending_deltas = deltasFromJson(member(doc, "pending_deltas", path), "state.pending_deltas");
  return s;
}

ReplayResult run_replay(const PoseTrace& trace, const SessionConfig& config, const Catalog& catalog) {
  validate_trace(trace);
  PoseTrace rebased = trace;
  const double t0 = trace.frames.front().timestamp_s;
  for (auto& f : rebased.frames) f.timestamp_s -= t0;
  const PoseTrace ticks = resample_trace(rebased, config.tick_rate_hz);

  ReplayResult result;
  SessionState state = create_session(config, catalog);
  for (const auto& frame : ticks.frames) {
    StepResult r = step(std::move(state), frame);
    state = std::move(r.state);
    if (r.frame) result.frames.push_back(std::move(*r.frame));
  }
  result.metrics = session_metrics(state);
  result.final_state = std::move(state);
  return result;
}

// ---------------------------------------------------------------------------- frame log

Json event_to_json(const EngineEvent& e) {
  Json j{{"kind", e.kind}, {"tick", e.tick}};
  if (e.direction) j["direction"] = vec(*e.direction);
  if (e.speed) j["speed"] = *e.speed;
  if (!e.detail.empty()) j["detail"] = e.detail;
  return j;
}

EngineEvent event_from_json(const Json& j) {
  const std::string path = "event";
  requireOnlyKeys(j, {"kind", "tick", "direction", "speed", "detail"}, path);
  EngineEvent e;
  e.kind = json_util::string(member(j, "kind", path), path + ".kind");
  e.tick = int64(j, "tick", path);
  e.direction = optVec3(j, "direction", path);
  if (j.contains("speed")) e.speed = number(j["speed"], path + ".speed");
  if (j.contains("detail")) e.detail = json_util::string(j["detail"], path + ".detail");
  return e;
}

Json frame_to_json(const RenderFrame& f) {
  Json events = Json::array();
  for (const auto& e : f.events) events.push_back(event_to_json(e));
  return Json{{"tick", f.tick},
              {"time_s", f.time_s},
              {"object", objectPoseToJson(f.object)},
              {"hand_visible", f.hand_visible},
              {"task_view",
               {{"ball_position", optVec(f.task_view.ball_position)},
                {"ball_velocity", optVec(f.task_view.ball_velocity)},
                {"attached_to", optStr(f.task_view.attached_to)},
                {"stroke_deltas", deltasToJson(f.task_view.stroke_deltas)}}},
              {"events", std::move(events)},
              {"metrics", f.metrics_snapshot ? metrics_to_json(*f.metrics_snapshot) : Json(nullptr)},
              {"state_hash", hash_hex(f.state_hash)}};
}

RenderFrame frame_from_json(const Json& j, const std::string& path) {
  RenderFrame f;
  f.tick = int64(j, "tick", path);
  f.time_s = number(member(j, "time_s", path), path + ".time_s");
  f.object = objectPoseFromJson(member(j, "object", path), path + ".object");
  f.hand_visible = boolean(j, "hand_visible", path);
  const Json& view = member(j, "task_view", path);
  f.task_view.ball_position = optVec3(view, "ball_position", path + ".task_view");
  f.task_view.ball_velocity = optVec3(view, "ball_velocity", path + ".task_view");
  f.task_view.attached_to = optString(view, "attached_to", path + ".task_view");
  f.task_view.stroke_deltas = deltasFromJson(member(view, "stroke_deltas", path + ".task_view"), path + ".task_view.stroke_deltas");
  const Json& events = member(j, "events", path);
  if (!events.is_array()) throw Error(ErrorCode::Schema, path + ".events: expected an array");
  for (const auto& e : events) f.events.push_back(event_from_json(e));
  const Json& metrics = member(j, "metrics", path);
  if (!metrics.is_null()) f.metrics_snapshot = metrics_from_json(metrics);
  const std::string hex = json_util::string(member(j, "state_hash", path), path + ".state_hash");
  if (hex.size() != 16 || hex.find_first_not_of("0123456789abcdef") != std::string::npos) {
    throw Error(ErrorCode::Schema, path + ".state_hash: expected 16 hex digits");
  }
  f.state_hash = std::stoull(hex, nullptr, 16);
  return f;
}

std::string record_frames(const std::vector<RenderFrame>& frames) {
  std::string out = Json{{"format", "render-frames"}, {"version", 1}}.dump();
  out += '\n';
  for (const auto& f : frames) {
    out += frame_to_json(f).dump();
    out += '\n';
  }
  return out;
}

std::vector<RenderFrame> load_frames(std::string_view content) {
  std::istringstream in{std::string(content)};
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  std::vector<RenderFrame> frames;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    const Json record = parse(line, where);
    if (!header) {
      if (!record.is_object() || record.value("format", "") != "render-frames" || record.value("version", 0) != 1) {
        throw Error(ErrorCode::Parse, where + ": missing render-frames header");
      }
      header = true;
      continue;
    }
    try {
      frames.push_back(frame_from_json(record, where));
    } catch (const Error& e) {
      throw Error(ErrorCode::Parse, e.detail());
    }
  }
  if (!header) throw Error(ErrorCode::Parse, "frame log has no header");
  return frames;
}

}  // namespace limbswap
