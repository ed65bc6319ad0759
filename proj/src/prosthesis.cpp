#include "limbswap/prosthesis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <regex>
#include <set>
#include <sstream>

#include "limbswap/error.hpp"

#ifndef LIMBSWAP_DATA_DIR
#define LIMBSWAP_DATA_DIR "data"
#endif

namespace limbswap {

using namespace json_util;

namespace {

constexpr double kUnitTolerance = 1e-6;

template <typename Enum, std::size_t N>
Enum parseEnum(const Json& value, const std::string& path, const std::array<Enum, N>& values) {
  const std::string text = json_util::string(value, path);
  for (Enum e : values) {
    if (to_string(e) == text) return e;
  }
  throw Error(ErrorCode::Schema, path + ": unknown value '" + text + "'");
}

constexpr std::array kRoles = {AnchorRole::Tip, AnchorRole::Nozzle, AnchorRole::Grip,
                               AnchorRole::Surface, AnchorRole::EffectorBase};
constexpr std::array kGestures = {GestureKind::Pinch, GestureKind::Grab, GestureKind::Swipe,
                                  GestureKind::Stillness};

std::string channelToString(const ArticulationChannel& c) {
  switch (c.source) {
    case ArticulationChannel::Source::FingerFlexion: return "FingerFlexion:" + std::to_string(c.finger);
    case ArticulationChannel::Source::GrabStrength: return "GrabStrength";
    case ArticulationChannel::Source::PinchStrength: return "PinchStrength";
  }
  return "";
}

ArticulationChannel channelFromJson(const Json& value, const std::string& path) {
  const std::string text = json_util::string(value, path);
  ArticulationChannel c;
  if (text == "GrabStrength") {
    c.source = ArticulationChannel::Source::GrabStrength;
  } else if (text == "PinchStrength") {
    c.source = ArticulationChannel::Source::PinchStrength;
  } else if (text.rfind("FingerFlexion:", 0) == 0) {
    c.source = ArticulationChannel::Source::FingerFlexion;
    const std::string digits = text.substr(std::string("FingerFlexion:").size());
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), ::isdigit) || digits.size() > 3) {
      throw Error(ErrorCode::Schema, path + ": bad finger index in '" + text + "'");
    }
    c.finger = std::stoi(digits);
  } else {
    throw Error(ErrorCode::Schema, path + ": unknown channel '" + text + "'");
  }
  return c;
}

std::optional<std::string> optionalString(const Json& object, const char* key, const std::string& path) {
  const auto it = object.find(key);
  if (it == object.end() || it->is_null()) return std::nullopt;
  return json_util::string(*it, path + "." + key);
}

GeometryPrimitive primitiveFromJson(const Json& j, const std::string& path) {
  GeometryPrimitive prim;
  const std::string shape = json_util::string(member(j, "shape", path), path + ".shape");
  if (shape == "sphere") {
    requireOnlyKeys(j, {"shape", "center", "radius", "joint"}, path);
    prim.shape = SpherePrimitive{vec3(member(j, "center", path), path + ".center"),
                                 number(member(j, "radius", path), path + ".radius")};
  } else if (shape == "capsule") {
    requireOnlyKeys(j, {"shape", "p0", "p1", "radius", "joint"}, path);
    prim.shape = CapsulePrimitive{vec3(member(j, "p0", path), path + ".p0"),
                                  vec3(member(j, "p1", path), path + ".p1"),
                                  number(member(j, "radius", path), path + ".radius")};
  } else if (shape == "box") {
    requireOnlyKeys(j, {"shape", "center", "half_extents", "orientation", "joint"}, path);
    BoxPrimitive box;
    box.center = vec3(member(j, "center", path), path + ".center");
    box.half_extents = vec3(member(j, "half_extents", path), path + ".half_extents");
    if (j.contains("orientation")) box.orientation = json_util::quat(j["orientation"], path + ".orientation");
    prim.shape = box;
  } else {
    throw Error(ErrorCode::Schema, path + ".shape: unknown shape '" + shape + "'");
  }
  prim.joint = optionalString(j, "joint", path);
  return prim;
}

Json primitiveToJson(const GeometryPrimitive& prim) {
  Json j = std::visit(
      [](const auto& s) -> Json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SpherePrimitive>) {
          return Json{{"shape", "sphere"}, {"center", vec(s.center)}, {"radius", s.radius}};
        } else if constexpr (std::is_same_v<T, CapsulePrimitive>) {
          return Json{{"shape", "capsule"}, {"p0", vec(s.p0)}, {"p1", vec(s.p1)}, {"radius", s.radius}};
        } else {
          return Json{{"shape", "box"},
                      {"center", vec(s.center)},
                      {"half_extents", vec(s.half_extents)},
                      {"orientation", json_util::quat(s.orientation)}};
        }
      },
      prim.shape);
  if (prim.joint) j["joint"] = *prim.joint;
  return j;
}

Affordance affordanceFromJson(const Json& j, const std::string& path) {
  Affordance a;
  a.gesture = parseEnum(member(j, "gesture", path), path + ".gesture", kGestures);
  const std::string action = json_util::string(member(j, "action", path), path + ".action");
  if (action == "Trigger") {
    requireOnlyKeys(j, {"gesture", "action", "emission_rate"}, path);
    a.action = TriggerAction{number(member(j, "emission_rate", path), path + ".emission_rate")};
  } else if (action == "GrabAttach") {
    requireOnlyKeys(j, {"gesture", "action"}, path);
    a.action = GrabAttachAction{};
  } else if (action == "Push") {
    requireOnlyKeys(j, {"gesture", "action", "impulse_gain"}, path);
    a.action = PushAction{number(member(j, "impulse_gain", path), path + ".impulse_gain")};
  } else if (action == "DelicateTouch") {
    requireOnlyKeys(j, {"gesture", "action", "max_speed"}, path);
    a.action = DelicateTouchAction{number(member(j, "max_speed", path), path + ".max_speed")};
  } else {
    throw Error(ErrorCode::Schema, path + ".action: unknown action '" + action + "'");
  }
  return a;
}

Json affordanceToJson(const Affordance& a) {
  Json j{{"gesture", to_string(a.gesture)}, {"action", to_string(kind_of(a.action))}};
  std::visit(
      [&j](const auto& act) {
        using T = std::decay_t<decltype(act)>;
        if constexpr (std::is_same_v<T, TriggerAction>) j["emission_rate"] = act.emission_rate;
        if constexpr (std::is_same_v<T, PushAction>) j["impulse_gain"] = act.impulse_gain;
        if constexpr (std::is_same_v<T, DelicateTouchAction>) j["max_speed"] = act.max_speed;
      },
      a.action);
  return j;
}

const Json& arrayMember(const Json& doc, const char* key) {
  const Json& v = member(doc, key, "spec");
  if (!v.is_array()) throw Error(ErrorCode::Schema, std::string("spec.") + key + ": expected an array");
  return v;
}

bool isUnit(const Vec3& v) { return v.allFinite() && std::abs(v.norm() - 1.0) <= kUnitTolerance; }

void checkAxis(const Vec3& v, const std::string& path, ValidationReport& report) {
  if (!v.allFinite()) {
    report.push_back({path, "non-finite vector"});
  } else if (v.norm() < 1e-12) {
    report.push_back({path, "zero axis"});
  } else if (!isUnit(v)) {
    report.push_back({path, "not a unit vector"});
  }
}

}  // namespace

std::string_view to_string(AnchorRole role) {
  switch (role) {
    case AnchorRole::Tip: return "Tip";
    case AnchorRole::Nozzle: return "Nozzle";
    case AnchorRole::Grip: return "Grip";
    case AnchorRole::Surface: return "Surface";
    case AnchorRole::EffectorBase: return "EffectorBase";
  }
  return "";
}

std::string_view to_string(GestureKind gesture) {
  switch (gesture) {
    case GestureKind::Pinch: return "Pinch";
    case GestureKind::Grab: return "Grab";
    case GestureKind::Swipe: return "Swipe";
    case GestureKind::Stillness: return "Stillness";
  }
  return "";
}

std::string_view to_string(ActionKind action) {
  switch (action) {
    case ActionKind::Trigger: return "Trigger";
    case ActionKind::GrabAttach: return "GrabAttach";
    case ActionKind::Push: return "Push";
    case ActionKind::DelicateTouch: return "DelicateTouch";
  }
  return "";
}

ActionKind kind_of(const AffordanceAction& action) { return static_cast<ActionKind>(action.index()); }

bool ProsthesisSpec::operator==(const ProsthesisSpec& o) const {
  return spec_version == o.spec_version && id == o.id && display_name == o.display_name &&
         geometry == o.geometry && mesh_ref == o.mesh_ref &&
         attachment.translation == o.attachment.translation &&
         attachment.rotation.coeffs() == o.attachment.rotation.coeffs() &&
         attachment.scale == o.attachment.scale && anchors == o.anchors &&
         affordances == o.affordances && articulation == o.articulation &&
         motion_smoothing_alpha == o.motion_smoothing_alpha;
}

double bounding_radius(const ProsthesisSpec& spec) {
  double r = 0.0;
  for (const auto& prim : spec.geometry) {
    const double reach = std::visit(
        [](const auto& s) -> double {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, SpherePrimitive>) {
            return s.center.norm() + s.radius;
          } else if constexpr (std::is_same_v<T, CapsulePrimitive>) {
            return std::max(s.p0.norm(), s.p1.norm()) + s.radius;
          } else {
            return s.center.norm() + s.half_extents.norm();
          }
        },
        prim.shape);
    r = std::max(r, reach);
  }
  return r;
}

ValidationReport validate_spec(const ProsthesisSpec& spec) {
  ValidationReport report;
  auto add = [&report](std::string path, std::string message) {
    report.push_back({std::move(path), std::move(message)});
  };

  if (spec.spec_version != 1) add("spec_version", "unsupported version");
  static const std::regex token("[A-Za-z0-9_.-]+");
  if (!std::regex_match(spec.id, token)) add("id", "id must be a non-empty token");
  if (spec.geometry.empty()) add("geometry", "at least one primitive is required");
  if (spec.mesh_ref && spec.mesh_ref->empty()) add("mesh_ref", "empty path");

  std::set<std::string> joint_names;
  for (std::size_t i = 0; i < spec.articulation.size(); ++i) {
    const Joint& j = spec.articulation[i];
    const std::string path = "articulation[" + std::to_string(i) + "]";
    if (j.name.empty()) add(path + ".name", "empty joint name");
    if (!joint_names.insert(j.name).second) add(path + ".name", "duplicate joint name '" + j.name + "'");
    checkAxis(j.axis, path + ".axis", report);
    if (!j.pivot.allFinite()) add(path + ".pivot", "non-finite pivot");
    if (!std::isfinite(j.angle_lo) || !std::isfinite(j.angle_hi)) {
      add(path, "non-finite angle limits");
    } else if (j.angle_lo > j.angle_hi) {
      add(path, "angle_lo exceeds angle_hi");
    }
    if (j.channel.source == ArticulationChannel::Source::FingerFlexion &&
        (j.channel.finger < 0 || j.channel.finger > 4)) {
      add(path + ".channel", "finger index outside 0..4");
    }
  }
  auto checkJointRef = [&](const std::optional<std::string>& ref, const std::string& path) {
    if (ref && !joint_names.contains(*ref)) add(path + ".joint", "unknown joint '" + *ref + "'");
  };

  for (std::size_t i = 0; i < spec.geometry.size(); ++i) {
    const std::string path = "geometry[" + std::to_string(i) + "]";
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, SpherePrimitive>) {
            if (!s.center.allFinite()) add(path + ".center", "non-finite center");
            if (!(s.radius > 0.0) || !std::isfinite(s.radius)) add(path + ".radius", "radius must be positive");
          } else if constexpr (std::is_same_v<T, CapsulePrimitive>) {
            if (!s.p0.allFinite() || !s.p1.allFinite()) add(path, "non-finite endpoint");
            if (!(s.radius > 0.0) || !std::isfinite(s.radius)) add(path + ".radius", "radius must be positive");
          } else {
            if (!s.center.allFinite()) add(path + ".center", "non-finite center");
            if (!s.half_extents.allFinite() || !(s.half_extents.minCoeff() > 0.0)) {
              add(path + ".half_extents", "half extents must be positive");
            }
            if (!s.orientation.coeffs().allFinite() ||
                std::abs(s.orientation.norm() - 1.0) > kUnitTolerance) {
              add(path + ".orientation", "not a unit quaternion");
            }
          }
        },
        spec.geometry[i].shape);
    checkJointRef(spec.geometry[i].joint, path);
  }

  const auto& att = spec.attachment;
  if (!att.translation.allFinite()) add("attachment.translation", "non-finite translation");
  if (!att.rotation.coeffs().allFinite() || std::abs(att.rotation.norm() - 1.0) > kUnitTolerance) {
    add("attachment.rotation", "not a unit quaternion");
  }
  if (!(att.scale > 0.0) || !std::isfinite(att.scale)) add("attachment.scale", "scale must be positive");

  const double bound = 2.0 * bounding_radius(spec);
  std::set<std::string> anchor_names;
  for (std::size_t i = 0; i < spec.anchors.size(); ++i) {
    const Anchor& a = spec.anchors[i];
    const std::string path = "anchors[" + std::to_string(i) + "]";
    if (a.name.empty()) add(path + ".name", "empty anchor name");
    if (!anchor_names.insert(a.name).second) add(path + ".name", "duplicate anchor name '" + a.name + "'");
    if (!a.local_position.allFinite()) {
      add(path + ".local_position", "non-finite position");
    } else if (a.local_position.norm() > bound + 1e-12) {
      add(path + ".local_position", "anchor outside bounds");
    }
    checkAxis(a.local_direction, path + ".local_direction", report);
    checkJointRef(a.joint, path);
  }

  for (std::size_t i = 0; i < spec.affordances.size(); ++i) {
    const std::string path = "affordances[" + std::to_string(i) + "]";
    std::visit(
        [&](const auto& act) {
          using T = std::decay_t<decltype(act)>;
          auto positive = [&](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v)) add(path + "." + name, "parameter must be positive");
          };
          if constexpr (std::is_same_v<T, TriggerAction>) {
            positive(act.emission_rate, "emission_rate");
            if (!has_anchor(spec, AnchorRole::Nozzle) && !has_anchor(spec, AnchorRole::Tip)) {
              add(path, "Trigger requires a Nozzle or Tip anchor");
            }
          } else if constexpr (std::is_same_v<T, GrabAttachAction>) {
            if (!has_anchor(spec, AnchorRole::Grip)) add(path, "GrabAttach requires a Grip anchor");
          } else if constexpr (std::is_same_v<T, PushAction>) {
            positive(act.impulse_gain, "impulse_gain");
          } else {
            positive(act.max_speed, "max_speed");
          }
        },
        spec.affordances[i].action);
  }

  if (!std::isfinite(spec.motion_smoothing_alpha) || spec.motion_smoothing_alpha < 0.0 ||
      spec.motion_smoothing_alpha > 1.0) {
    add("motion_smoothing_alpha", "must lie in [0, 1]");
  }
  return report;
}

Json spec_to_json(const ProsthesisSpec& spec) {
  Json geometry = Json::array();
  for (const auto& p : spec.geometry) geometry.push_back(primitiveToJson(p));
  Json anchors = Json::array();
  for (const auto& a : spec.anchors) {
    Json j{{"name", a.name},
           {"local_position", vec(a.local_position)},
           {"local_direction", vec(a.local_direction)},
           {"role", to_string(a.role)}};
    if (a.joint) j["joint"] = *a.joint;
    anchors.push_back(std::move(j));
  }
  Json affordances = Json::array();
  for (const auto& a : spec.affordances) affordances.push_back(affordanceToJson(a));
  Json articulation = Json::array();
  for (const auto& j : spec.articulation) {
    articulation.push_back(Json{{"name", j.name},
                                {"axis", vec(j.axis)},
                                {"pivot", vec(j.pivot)},
                                {"angle_lo", j.angle_lo},
                                {"angle_hi", j.angle_hi},
                                {"channel", channelToString(j.channel)}});
  }
  Json doc{{"spec_version", spec.spec_version},
           {"id", spec.id},
           {"display_name", spec.display_name},
           {"geometry", std::move(geometry)}};
  if (spec.mesh_ref) doc["mesh_ref"] = *spec.mesh_ref;
  doc["attachment"] = Json{{"translation", vec(spec.attachment.translation)},
                           {"rotation", json_util::quat(spec.attachment.rotation)},
                           {"scale", spec.attachment.scale}};
  doc["anchors"] = std::move(anchors);
  doc["affordances"] = std::move(affordances);
  doc["articulation"] = std::move(articulation);
  doc["motion_smoothing_alpha"] = spec.motion_smoothing_alpha;
  return doc;
}

std::string serialize_spec(const ProsthesisSpec& spec) { return spec_to_json(spec).dump(2) + "\n"; }

ProsthesisSpec load_spec(std::string_view document) {
  const Json doc = parse(document, "prosthesis spec");
  if (!doc.is_object()) throw Error(ErrorCode::Schema, "spec: expected an object");
  const Json& version = member(doc, "spec_version", "spec");
  if (!version.is_number_integer()) throw Error(ErrorCode::Schema, "spec.spec_version: expected an integer");
  if (version.get<int>() != 1) {
    throw Error(ErrorCode::Schema, "spec.spec_version: unsupported version " + version.dump());
  }
  requireOnlyKeys(doc,
                  {"spec_version", "id", "display_name", "geometry", "mesh_ref", "attachment", "anchors",
                   "affordances", "articulation", "motion_smoothing_alpha"},
                  "spec");

  ProsthesisSpec spec;
  spec.id = json_util::string(member(doc, "id", "spec"), "spec.id");
  spec.display_name = json_util::string(member(doc, "display_name", "spec"), "spec.display_name");
  spec.mesh_ref = optionalString(doc, "mesh_ref", "spec");

  const Json& geometry = arrayMember(doc, "geometry");
  for (std::size_t i = 0; i < geometry.size(); ++i) {
    spec.geometry.push_back(primitiveFromJson(geometry[i], "spec.geometry[" + std::to_string(i) + "]"));
  }

  const Json& att = member(doc, "attachment", "spec");
  requireOnlyKeys(att, {"translation", "rotation", "scale"}, "spec.attachment");
  spec.attachment.translation = vec3(member(att, "translation", "spec.attachment"), "spec.attachment.translation");
  spec.attachment.rotation = json_util::quat(member(att, "rotation", "spec.attachment"), "spec.attachment.rotation");
  spec.attachment.scale = number(member(att, "scale", "spec.attachment"), "spec.attachment.scale");

  const Json& anchors = arrayMember(doc, "anchors");
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    const std::string path = "spec.anchors[" + std::to_string(i) + "]";
    const Json& j = anchors[i];
    requireOnlyKeys(j, {"name", "local_position", "local_direction", "role", "joint"}, path);
    Anchor a;
    a.name = json_util::string(member(j, "name", path), path + ".name");
    a.local_position = vec3(member(j, "local_position", path), path + ".local_position");
    a.local_direction = vec3(member(j, "local_direction", path), path + ".local_direction");
    a.role = parseEnum(member(j, "role", path), path + ".role", kRoles);
    a.joint = optionalString(j, "joint", path);
    spec.anchors.push_back(std::move(a));
  }

  const Json& affordances = arrayMember(doc, "affordances");
  for (std::size_t i = 0; i < affordances.size(); ++i) {
    spec.affordances.push_back(affordanceFromJson(affordances[i], "spec.affordances[" + std::to_string(i) + "]"));
  }

  const Json& articulation = arrayMember(doc, "articulation");
  for (std::size_t i = 0; i < articulation.size(); ++i) {
    const std::string path = "spec.articulation[" + std::to_string(i) + "]";
    const Json& j = articulation[i];
    requireOnlyKeys(j, {"name", "axis", "pivot", "angle_lo", "angle_hi", "channel"}, path);
    Joint joint;
    joint.name = json_util::string(member(j, "name", path), path + ".name");
    joint.axis = vec3(member(j, "axis", path), path + ".axis");
    joint.pivot = vec3(member(j, "pivot", path), path + ".pivot");
    joint.angle_lo = number(member(j, "angle_lo", path), path + ".angle_lo");
    joint.angle_hi = number(member(j, "angle_hi", path), path + ".angle_hi");
    joint.channel = channelFromJson(member(j, "channel", path), path + ".channel");
    spec.articulation.push_back(std::move(joint));
  }

  spec.motion_smoothing_alpha =
      number(member(doc, "motion_smoothing_alpha", "spec"), "spec.motion_smoothing_alpha");

  const ValidationReport report = validate_spec(spec);
  if (!report.empty()) {
    std::ostringstream os;
    os << "spec '" << spec.id << "': ";
    for (std::size_t i = 0; i < report.size(); ++i) {
      if (i) os << "; ";
      os << report[i].path << ": " << report[i].message;
    }
    throw Error(ErrorCode::Invariant, os.str());
  }
  return spec;
}

ProsthesisSpec load_spec_file(const std::string& path) {
  try {
    return load_spec(readFile(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Io) throw;
    throw Error(e.code(), path + ": " + e.detail());
  }
}

std::optional<AffordanceAction> affordance_lookup(const ProsthesisSpec& spec, GestureKind gesture) {
  for (const auto& a : spec.affordances) {
    if (a.gesture == gesture) return a.action;
  }
  return std::nullopt;
}

const Affordance* find_affordance(const ProsthesisSpec& spec, ActionKind kind) {
  for (const auto& a : spec.affordances) {
    if (kind_of(a.action) == kind) return &a;
  }
  return nullptr;
}

const Anchor* find_anchor(const ProsthesisSpec& spec, AnchorRole role) {
  for (const auto& a : spec.anchors) {
    if (a.role == role) return &a;
  }
  return nullptr;
}

bool has_anchor(const ProsthesisSpec& spec, AnchorRole role) { return find_anchor(spec, role) != nullptr; }

std::string default_catalog_dir() {
  if (const char* env = std::getenv("LIMBSWAP_CATALOG"); env != nullptr && *env != '\0') return env;
  return std::string(LIMBSWAP_DATA_DIR) + "/catalog";
}

Catalog load_catalog(const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw Error(ErrorCode::Io, "catalog directory not found: " + dir);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && name.size() > 16 &&
        name.ends_with(".prosthesis.json")) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  Catalog catalog;
  for (const auto& file : files) {
    ProsthesisSpec spec = load_spec_file(file.string());
    if (find_spec(catalog, spec.id) != nullptr) {
      throw Error(ErrorCode::Schema, file.string() + ": duplicate prosthesis id '" + spec.id + "'");
    }
    catalog.push_back(std::move(spec));
  }
  return catalog;
}

Catalog builtin_catalog() { return load_catalog(default_catalog_dir()); }

const ProsthesisSpec* find_spec(const Catalog& catalog, std::string_view id) {
  for (const auto& spec : catalog) {
    if (spec.id == id) return &spec;
  }
  return nullptr;
}

Mesh load_obj(std::string_view content) {
  Mesh mesh;
  std::istringstream in{std::string(content)};
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&line_no](const std::string& what) {
    throw Error(ErrorCode::Parse, "OBJ line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Vec3 v;
      if (!(ls >> v.x() >> v.y() >> v.z()) || !v.allFinite()) fail("bad vertex");
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::array<int, 3> tri{};
      std::string ref;
      int count = 0;
      while (ls >> ref) {
        if (count == 3) fail("only triangular faces are supported");
        const std::string head = ref.substr(0, ref.find('/'));
        int idx = 0;
        try {
          idx = std::stoi(head);
        } catch (const std::exception&) {
          fail("bad face index '" + ref + "'");
        }
        const int n = static_cast<int>(mesh.vertices.size());
        const int zero_based = idx > 0 ? idx - 1 : n + idx;
        if (idx == 0 || zero_based < 0 || zero_based >= n) fail("face index out of range");
        tri[static_cast<std::size_t>(count++)] = zero_based;
      }
      if (count != 3) fail("only triangular faces are supported");
      mesh.triangles.push_back(tri);
    }
  }
  return mesh;
}

}  // namespace limbswap
