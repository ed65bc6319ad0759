#include "limbswap/json_fwd.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "limbswap/error.hpp"

namespace limbswap::json_util {

Json vec(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }
Json vec(const Vec2& v) { return Json::array({v.x(), v.y()}); }
Json quat(const Quat& q) { return Json::array({q.w(), q.x(), q.y(), q.z()}); }

const Json& member(const Json& object, std::string_view key, const std::string& path) {
  if (!object.is_object()) throw Error(ErrorCode::Schema, path + ": expected an object");
  const auto it = object.find(std::string(key));
  if (it == object.end()) {
    throw Error(ErrorCode::Schema, path + "." + std::string(key) + ": missing field");
  }
  return *it;
}

double number(const Json& value, const std::string& path) {
  if (!value.is_number()) throw Error(ErrorCode::Schema, path + ": expected a number");
  return value.get<double>();
}

namespace {
template <int N>
Eigen::Matrix<double, N, 1> fixedArray(const Json& value, const std::string& path) {
  if (!value.is_array() || value.size() != static_cast<std::size_t>(N)) {
    throw Error(ErrorCode::Schema, path + ": expected an array of " + std::to_string(N) + " numbers");
  }
  Eigen::Matrix<double, N, 1> out;
  for (int i = 0; i < N; ++i) out[i] = number(value[i], path + "[" + std::to_string(i) + "]");
  return out;
}
}  // namespace

Vec3 vec3(const Json& value, const std::string& path) { return fixedArray<3>(value, path); }
Vec2 vec2(const Json& value, const std::string& path) { return fixedArray<2>(value, path); }

Quat quat(const Json& value, const std::string& path) {
  const auto c = fixedArray<4>(value, path);
  return Quat(c[0], c[1], c[2], c[3]);
}

std::string string(const Json& value, const std::string& path) {
  if (!value.is_string()) throw Error(ErrorCode::Schema, path + ": expected a string");
  return value.get<std::string>();
}

void requireOnlyKeys(const Json& object, const std::vector<std::string_view>& allowed,
                     const std::string& path) {
  if (!object.is_object()) throw Error(ErrorCode::Schema, path + ": expected an object");
  for (const auto& [key, _] : object.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw Error(ErrorCode::Schema, path + "." + key + ": unknown field");
    }
  }
}

Json parse(std::string_view text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::Parse, what + ": " + e.what());
  }
}

std::string readFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void writeFileAtomic(const std::string& path, std::string_view content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::Io, "write failed for " + path);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::Io, "cannot rename into " + path);
  }
}

}  // namespace limbswap::json_util
