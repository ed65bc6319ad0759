#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "limbswap/geometry.hpp"

namespace limbswap {

/// Key order is preserved on output so golden files read in declaration order.
using Json = nlohmann::ordered_json;

namespace json_util {

Json vec(const Vec3& v);
Json vec(const Vec2& v);
Json quat(const Quat& q);  // [w, x, y, z]

/// Accessors that throw Error{Schema} naming `path` on a missing or mistyped member.
const Json& member(const Json& object, std::string_view key, const std::string& path);
double number(const Json& value, const std::string& path);
Vec3 vec3(const Json& value, const std::string& path);
Vec2 vec2(const Json& value, const std::string& path);
Quat quat(const Json& value, const std::string& path);
std::string string(const Json& value, const std::string& path);

/// Rejects any member of `object` not listed in `allowed`.
void requireOnlyKeys(const Json& object, const std::vector<std::string_view>& allowed,
                     const std::string& path);

/// Parses text, mapping syntax errors to Error{Parse}.
Json parse(std::string_view text, const std::string& what);

std::string readFile(const std::string& path);
/// Writes via a temporary file and rename so readers never observe a partial file.
void writeFileAtomic(const std::string& path, std::string_view content);

}  // namespace json_util
}  // namespace limbswap
