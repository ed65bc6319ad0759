#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "limbswap/json_fwd.hpp"
#include "limbswap/pose.hpp"
#include "limbswap/prosthesis.hpp"
#include "limbswap/session.hpp"
#include "limbswap/tasks.hpp"

// Wire protocol v1: one JSON object per message, kind in "type", payload fields beside it.
namespace limbswap::protocol {

inline constexpr int kVersion = 1;

enum class Code {
  UnknownType,
  MissingField,
  InvalidField,
  Malformed,
  VersionMismatch,
  UnknownState,
  UnknownProsthesis,
  UnknownTask,
  BadConfig,
  Internal,
};

/// Wire tokens such as "UNKNOWN_TYPE".
std::string_view to_string(Code code);
Code code_from_string(std::string_view token);

class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(Code code, std::string detail);
  Code code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  Code code_;
  std::string detail_;
};

// ---- client -> server

struct Hello {
  int version = kVersion;
  std::string client_name;
  bool operator==(const Hello&) const = default;
};
struct Pose {
  HandPoseFrame frame;  // unvalidated; the engine drops bad frames with DroppedInput
  bool operator==(const Pose&) const = default;
};
struct SelectProsthesis {
  std::string id;
  bool operator==(const SelectProsthesis&) const = default;
};
struct SelectTask {
  std::string id;
  Json config = Json::object();  // overrides merged over the task defaults
  bool operator==(const SelectTask&) const = default;
};
struct Reset {
  bool operator==(const Reset&) const = default;
};
struct ListProstheses {
  bool operator==(const ListProstheses&) const = default;
};

using ClientMessage = std::variant<Hello, Pose, SelectProsthesis, SelectTask, Reset, ListProstheses>;

// ---- server -> client

struct AffordanceSummary {
  std::string gesture;
  std::string action;
  bool operator==(const AffordanceSummary&) const = default;
};

struct CatalogEntry {
  std::string id;
  std::string display_name;
  bool is_static = true;
  std::vector<AffordanceSummary> affordances;
  bool operator==(const CatalogEntry&) const = default;
};

struct HelloAck {
  int version = kVersion;
  std::vector<CatalogEntry> catalog;
  std::vector<std::string> tasks;
  std::string prosthesis;  // current selection
  std::string task;
  double tick_rate_hz = 120.0;
  double output_frame_rate_hz = 60.0;
  bool operator==(const HelloAck&) const = default;
};
struct FrameMessage {
  RenderFrame frame;
  bool operator==(const FrameMessage&) const = default;
};
struct MetricsMessage {
  TaskMetrics metrics;
  bool operator==(const MetricsMessage&) const = default;
};
struct EventMessage {
  EngineEvent event;
  bool operator==(const EventMessage&) const = default;
};
struct ErrorMessage {
  Code code = Code::Internal;
  std::string message;
  bool operator==(const ErrorMessage&) const = default;
};
struct CatalogMessage {
  std::vector<CatalogEntry> prostheses;
  bool operator==(const CatalogMessage&) const = default;
};

using ServerMessage =
    std::variant<HelloAck, FrameMessage, MetricsMessage, EventMessage, ErrorMessage, CatalogMessage>;

std::string_view type_of(const ClientMessage& message);
/// The "type" token of a message if it is a JSON object carrying one.
std::optional<std::string> peek_type(std::string_view text);
bool is_client_type(std::string_view type);
std::string_view type_of(const ServerMessage& message);

/// Compact single-line JSON without a trailing newline.
std::string encode(const ClientMessage& message);
std::string encode(const ServerMessage& message);

/// Throws ProtocolError: Malformed (not JSON / not an object), UnknownType, MissingField and
/// InvalidField (detail is the field path, e.g. "$.palm_pos[1]").
ClientMessage decode_client(std::string_view text);
ServerMessage decode_server(std::string_view text);

CatalogEntry summarize(const ProsthesisSpec& spec);
std::vector<CatalogEntry> summarize(const Catalog& catalog);

}  // namespace limbswap::protocol
