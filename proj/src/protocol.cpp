#include "limbswap/protocol.hpp"

#include <algorithm>
#include <array>
#include <utility>

#include "limbswap/error.hpp"
#include "limbswap/pose_io.hpp"

namespace limbswap::protocol {

using namespace json_util;

namespace {

constexpr std::array<std::pair<Code, std::string_view>, 10> kCodes{{
    {Code::UnknownType, "UNKNOWN_TYPE"},
    {Code::MissingField, "MISSING_FIELD"},
    {Code::InvalidField, "INVALID_FIELD"},
    {Code::Malformed, "MALFORMED"},
    {Code::VersionMismatch, "VERSION_MISMATCH"},
    {Code::UnknownState, "UNKNOWN_STATE"},
    {Code::UnknownProsthesis, "UNKNOWN_PROSTHESIS"},
    {Code::UnknownTask, "UNKNOWN_TASK"},
    {Code::BadConfig, "BAD_CONFIG"},
    {Code::Internal, "INTERNAL"},
}};

constexpr std::array<std::string_view, 6> kClientTypes{"hello",       "pose",  "select_prosthesis",
                                                      "select_task", "reset", "list_prostheses"};
constexpr std::string_view kRoot = "$";
constexpr std::string_view kMissingSuffix = ": missing field";

/// Prefixes `type` to a payload object, keeping the payload's field order.
Json envelope(std::string_view type, const Json& payload) {
  Json out{{"type", std::string(type)}};
  for (const auto& [k, v] : payload.items()) out[k] = v;
  return out;
}

Json stripEnvelope(Json doc) {
  doc.erase("type");
  doc.erase("version");
  return doc;
}

[[noreturn]] void rethrow(const Error& e) {
  const std::string detail = e.detail();
  if (e.code() == ErrorCode::Schema && detail.size() > kMissingSuffix.size() &&
      detail.compare(detail.size() - kMissingSuffix.size(), kMissingSuffix.size(), kMissingSuffix) == 0) {
    throw ProtocolError(Code::MissingField, detail.substr(0, detail.size() - kMissingSuffix.size()));
  }
  throw ProtocolError(Code::InvalidField, detail);
}

int integer(const Json& doc, std::string_view key) {
  const std::string path = std::string(kRoot) + "." + std::string(key);
  const Json& v = member(doc, key, std::string(kRoot));
  if (!v.is_number_integer()) throw Error(ErrorCode::Schema, path + ": expected an integer");
  return v.get<int>();
}

std::string text(const Json& doc, std::string_view key, const std::string& path = std::string(kRoot)) {
  return json_util::string(member(doc, key, path), path + "." + std::string(key));
}

bool flag(const Json& doc, std::string_view key, const std::string& path) {
  const Json& v = member(doc, key, path);
  if (!v.is_boolean()) throw Error(ErrorCode::Schema, path + "." + std::string(key) + ": expected a boolean");
  return v.get<bool>();
}

const Json& array(const Json& doc, std::string_view key, const std::string& path = std::string(kRoot)) {
  const Json& v = member(doc, key, path);
  if (!v.is_array()) throw Error(ErrorCode::Schema, path + "." + std::string(key) + ": expected an array");
  return v;
}

Json entriesToJson(const std::vector<CatalogEntry>& entries) {
  Json out = Json::array();
  for (const auto& e : entries) {
    Json aff = Json::array();
    for (const auto& a : e.affordances) aff.push_back(Json{{"gesture", a.gesture}, {"action", a.action}});
    out.push_back(Json{{"id", e.id}, {"display_name", e.display_name}, {"static", e.is_static}, {"affordances", aff}});
  }
  return out;
}

std::vector<CatalogEntry> entriesFromJson(const Json& doc, std::string_view key) {
  std::vector<CatalogEntry> out;
  const Json& list = array(doc, key);
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string p = std::string(kRoot) + "." + std::string(key) + "[" + std::to_string(i) + "]";
    CatalogEntry e;
    e.id = text(list[i], "id", p);
    e.display_name = text(list[i], "display_name", p);
    e.is_static = flag(list[i], "static", p);
    const Json& aff = array(list[i], "affordances", p);
    for (std::size_t j = 0; j < aff.size(); ++j) {
      const std::string ap = p + ".affordances[" + std::to_string(j) + "]";
      e.affordances.push_back({text(aff[j], "gesture", ap), text(aff[j], "action", ap)});
    }
    out.push_back(std::move(e));
  }
  return out;
}

Json parseObject(std::string_view input) {
  Json doc;
  try {
    doc = Json::parse(input);
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(Code::Malformed, e.what());
  }
  if (!doc.is_object()) throw ProtocolError(Code::Malformed, "message must be a JSON object");
  const auto it = doc.find("type");
  if (it == doc.end()) throw ProtocolError(Code::MissingField, "$.type");
  if (!it->is_string()) throw ProtocolError(Code::InvalidField, "$.type: expected a string");
  return doc;
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

std::string_view to_string(Code code) {
  for (const auto& [c, name] : kCodes) {
    if (c == code) return name;
  }
  return "INTERNAL";
}

Code code_from_string(std::string_view token) {
  for (const auto& [c, name] : kCodes) {
    if (name == token) return c;
  }
  throw ProtocolError(Code::InvalidField, "$.code: unknown error code '" + std::string(token) + "'");
}

ProtocolError::ProtocolError(Code code, std::string detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code), detail_(std::move(detail)) {}

std::string_view type_of(const ClientMessage& message) { return kClientTypes[message.index()]; }

std::string_view type_of(const ServerMessage& message) {
  static constexpr std::array<std::string_view, 6> kNames{"hello_ack", "frame", "metrics",
                                                          "event",     "error", "catalog"};
  return kNames[message.index()];
}

std::optional<std::string> peek_type(std::string_view input) {
  const Json doc = Json::parse(input, nullptr, false);
  if (!doc.is_object()) return std::nullopt;
  const auto it = doc.find("type");
  if (it == doc.end() || !it->is_string()) return std::nullopt;
  return it->get<std::string>();
}

bool is_client_type(std::string_view type) {
  return std::find(kClientTypes.begin(), kClientTypes.end(), type) != kClientTypes.end();
}

std::string encode(const ClientMessage& message) {
  const Json payload = std::visit(
      Overloaded{
          [](const Hello& m) { return Json{{"version", m.version}, {"client_name", m.client_name}}; },
          [](const Pose& m) { return pose_to_json(m.frame); },
          [](const SelectProsthesis& m) { return Json{{"id", m.id}}; },
          [](const SelectTask& m) { return Json{{"id", m.id}, {"config", m.config}}; },
          [](const Reset&) { return Json::object(); },
          [](const ListProstheses&) { return Json::object(); },
      },
      message);
  return envelope(type_of(message), payload).dump();
}

std::string encode(const ServerMessage& message) {
  const Json payload = std::visit(
      Overloaded{
          [](const HelloAck& m) {
            return Json{{"version", m.version},
                        {"catalog", entriesToJson(m.catalog)},
                        {"tasks", m.tasks},
                        {"prosthesis", m.prosthesis},
                        {"task", m.task},
                        {"tick_rate_hz", m.tick_rate_hz},
                        {"output_frame_rate_hz", m.output_frame_rate_hz}};
          },
          [](const FrameMessage& m) { return frame_to_json(m.frame); },
          [](const MetricsMessage& m) { return Json{{"metrics", metrics_to_json(m.metrics)}}; },
          [](const EventMessage& m) { return event_to_json(m.event); },
          [](const ErrorMessage& m) { return Json{{"code", std::string(to_string(m.code))}, {"message", m.message}}; },
          [](const CatalogMessage& m) { return Json{{"prostheses", entriesToJson(m.prostheses)}}; },
      },
      message);
  return envelope(type_of(message), payload).dump();
}

ClientMessage decode_client(std::string_view input) {
  const Json doc = parseObject(input);
  const std::string type = doc["type"].get<std::string>();
  const std::string root(kRoot);
  try {
    if (type == "hello") return Hello{integer(doc, "version"), text(doc, "client_name")};
    if (type == "pose") return Pose{pose_raw_from_json(doc, root)};
    if (type == "select_prosthesis") return SelectProsthesis{text(doc, "id")};
    if (type == "select_task") {
      SelectTask m{text(doc, "id"), Json::object()};
      if (const auto it = doc.find("config"); it != doc.end() && !it->is_null()) {
        if (!it->is_object()) throw Error(ErrorCode::Schema, "$.config: expected an object");
        m.config = *it;
      }
      return m;
    }
    if (type == "reset") return Reset{};
    if (type == "list_prostheses") return ListProstheses{};
  } catch (const Error& e) {
    rethrow(e);
  }
  throw ProtocolError(Code::UnknownType, "unknown message type '" + type + "'");
}

ServerMessage decode_server(std::string_view input) {
  const Json doc = parseObject(input);
  const std::string type = doc["type"].get<std::string>();
  const std::string root(kRoot);
  try {
    if (type == "hello_ack") {
      HelloAck m;
      m.version = integer(doc, "version");
      m.catalog = entriesFromJson(doc, "catalog");
      const Json& tasks = array(doc, "tasks");
      for (std::size_t i = 0; i < tasks.size(); ++i) {
        m.tasks.push_back(json_util::string(tasks[i], "$.tasks[" + std::to_string(i) + "]"));
      }
      m.prosthesis = text(doc, "prosthesis");
      m.task = text(doc, "task");
      m.tick_rate_hz = number(member(doc, "tick_rate_hz", root), "$.tick_rate_hz");
      m.output_frame_rate_hz = number(member(doc, "output_frame_rate_hz", root), "$.output_frame_rate_hz");
      return m;
    }
    if (type == "frame") return FrameMessage{frame_from_json(doc, root)};
    if (type == "metrics") return MetricsMessage{metrics_from_json(member(doc, "metrics", root))};
    if (type == "event") return EventMessage{event_from_json(stripEnvelope(doc))};
    if (type == "error") {
      const std::string token = text(doc, "code");
      return ErrorMessage{code_from_string(token), text(doc, "message")};
    }
    if (type == "catalog") return CatalogMessage{entriesFromJson(doc, "prostheses")};
  } catch (const Error& e) {
    rethrow(e);
  }
  throw ProtocolError(Code::UnknownType, "unknown message type '" + type + "'");
}

CatalogEntry summarize(const ProsthesisSpec& spec) {
  CatalogEntry e{spec.id, spec.display_name, spec.is_static(), {}};
  for (const auto& a : spec.affordances) {
    e.affordances.push_back({std::string(limbswap::to_string(a.gesture)),
                             std::string(limbswap::to_string(kind_of(a.action)))});
  }
  return e;
}

std::vector<CatalogEntry> summarize(const Catalog& catalog) {
  std::vector<CatalogEntry> out;
  out.reserve(catalog.size());
  for (const auto& spec : catalog) out.push_back(summarize(spec));
  return out;
}

}  // namespace limbswap::protocol
