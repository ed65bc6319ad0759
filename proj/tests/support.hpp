#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "limbswap/cli.hpp"
#include "limbswap/json_fwd.hpp"
#include "limbswap/prosthesis.hpp"
#include "limbswap/session.hpp"
#include "limbswap/tasks.hpp"

namespace limbswap::testing {

inline std::string dataPath(const std::string& relative) { return std::string(LIMBSWAP_DATA_DIR) + "/" + relative; }

inline const Catalog& catalog() {
  static const Catalog c = load_catalog(dataPath("catalog"));
  return c;
}

inline const ProsthesisSpec& spec(const std::string& id) {
  const ProsthesisSpec* s = find_spec(catalog(), id);
  if (s == nullptr) throw std::runtime_error("missing catalog spec " + id);
  return *s;
}

inline PoseTrace trace(const std::string& name) { return load_trace_any(dataPath("traces/" + name + ".poses.jsonl")); }

inline TaskConfig shippedTask(const std::string& id) {
  return task_config_from_json(id, json_util::parse(json_util::readFile(dataPath("tasks/" + id + ".json")), id));
}

inline SessionConfig sessionConfig(const std::string& prosthesis, const std::string& task) {
  SessionConfig c;
  c.prosthesis_id = prosthesis;
  c.task = shippedTask(task);
  return c;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("limbswap-test-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline Quat randomRotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Quat q(n(rng), n(rng), n(rng), n(rng));
  return q.normalized();
}

inline Vec3 randomVec(std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng), u(rng)};
}

}  // namespace limbswap::testing
