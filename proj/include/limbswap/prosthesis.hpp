#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "limbswap/geometry.hpp"
#include "limbswap/json_fwd.hpp"

namespace limbswap {

enum class AnchorRole { Tip, Nozzle, Grip, Surface, EffectorBase };
enum class GestureKind { Pinch, Grab, Swipe, Stillness };
enum class ActionKind { Trigger, GrabAttach, Push, DelicateTouch };

std::string_view to_string(AnchorRole role);
std::string_view to_string(GestureKind gesture);
std::string_view to_string(ActionKind action);

struct TriggerAction {
  double emission_rate = 120.0;  // ink points per second
  bool operator==(const TriggerAction&) const = default;
};
struct GrabAttachAction {
  bool operator==(const GrabAttachAction&) const = default;
};
struct PushAction {
  double impulse_gain = 1.0;
  bool operator==(const PushAction&) const = default;
};
/// Contact only imparts impulse while the palm moves no faster than max_speed.
struct DelicateTouchAction {
  double max_speed = 0.25;  // m/s
  bool operator==(const DelicateTouchAction&) const = default;
};

using AffordanceAction = std::variant<TriggerAction, GrabAttachAction, PushAction, DelicateTouchAction>;

ActionKind kind_of(const AffordanceAction& action);

struct Affordance {
  GestureKind gesture = GestureKind::Pinch;
  AffordanceAction action;
  bool operator==(const Affordance&) const = default;
};

struct SpherePrimitive {
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
  bool operator==(const SpherePrimitive&) const = default;
};
struct CapsulePrimitive {
  Vec3 p0 = Vec3::Zero();
  Vec3 p1 = Vec3::Zero();
  double radius = 0.0;
  bool operator==(const CapsulePrimitive&) const = default;
};
struct BoxPrimitive {
  Vec3 center = Vec3::Zero();
  Vec3 half_extents = Vec3::Zero();
  Quat orientation = Quat::Identity();
  bool operator==(const BoxPrimitive& o) const {
    return center == o.center && half_extents == o.half_extents &&
           orientation.coeffs() == o.orientation.coeffs();
  }
};

/// Collision primitive in the object-local frame, optionally carried by an articulation joint.
struct GeometryPrimitive {
  std::variant<SpherePrimitive, CapsulePrimitive, BoxPrimitive> shape;
  std::optional<std::string> joint;
  bool operator==(const GeometryPrimitive&) const = default;
};

struct Anchor {
  std::string name;
  Vec3 local_position = Vec3::Zero();
  Vec3 local_direction = Vec3::UnitZ();
  AnchorRole role = AnchorRole::Tip;
  std::optional<std::string> joint;
  bool operator==(const Anchor&) const = default;
};

struct ArticulationChannel {
  enum class Source { FingerFlexion, GrabStrength, PinchStrength };
  Source source = Source::FingerFlexion;
  int finger = 0;  // only meaningful for FingerFlexion
  bool operator==(const ArticulationChannel&) const = default;
};

/// Single-axis revolute joint about `pivot` in the object-local frame.
struct Joint {
  std::string name;
  Vec3 axis = Vec3::UnitX();
  Vec3 pivot = Vec3::Zero();
  double angle_lo = 0.0;
  double angle_hi = 0.0;
  ArticulationChannel channel;
  bool operator==(const Joint&) const = default;
};

struct ProsthesisSpec {
  int spec_version = 1;
  std::string id;
  std::string display_name;
  std::vector<GeometryPrimitive> geometry;
  std::optional<std::string> mesh_ref;
  RigidTransformd attachment;  // object-local -> wrist frame
  std::vector<Anchor> anchors;
  std::vector<Affordance> affordances;
  std::vector<Joint> articulation;
  double motion_smoothing_alpha = 0.0;

  bool is_static() const { return articulation.empty(); }
  bool operator==(const ProsthesisSpec& other) const;
};

struct Violation {
  std::string path;
  std::string message;
};

using ValidationReport = std::vector<Violation>;

/// All type invariants plus: every anchor lies within twice the geometry bounding radius.
ValidationReport validate_spec(const ProsthesisSpec& spec);

/// Strict schema. Throws Error{Parse}, Error{Schema} (with field path) or Error{Invariant}.
ProsthesisSpec load_spec(std::string_view document);
ProsthesisSpec load_spec_file(const std::string& path);

Json spec_to_json(const ProsthesisSpec& spec);
std::string serialize_spec(const ProsthesisSpec& spec);

/// Radius about the object-local origin that encloses every primitive.
double bounding_radius(const ProsthesisSpec& spec);

/// First affordance for `gesture` in declaration order.
std::optional<AffordanceAction> affordance_lookup(const ProsthesisSpec& spec, GestureKind gesture);

/// First affordance carrying an action of the given kind.
const Affordance* find_affordance(const ProsthesisSpec& spec, ActionKind kind);
const Anchor* find_anchor(const ProsthesisSpec& spec, AnchorRole role);
bool has_anchor(const ProsthesisSpec& spec, AnchorRole role);

using Catalog = std::vector<ProsthesisSpec>;

/// Directory named by LIMBSWAP_CATALOG, else the catalog shipped with the sources.
std::string default_catalog_dir();
/// Loads every `*.prosthesis.json` in `dir`, sorted by file name. Duplicate ids are an Error{Schema}.
Catalog load_catalog(const std::string& dir);
Catalog builtin_catalog();
const ProsthesisSpec* find_spec(const Catalog& catalog, std::string_view id);

struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;  // zero-based
};

/// OBJ subset: `v x y z` and triangular `f a b c` (with optional /vt/vn suffixes). Comments and
/// other statements are ignored. Throws Error{Parse} with the line number.
Mesh load_obj(std::string_view content);

}  // namespace limbswap
