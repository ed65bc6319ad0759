#include "limbswap/cli.hpp"

#include <csignal>
#include <filesystem>
#include <iostream>
#include <optional>
#include <ostream>

#include "CLI11.hpp"
#include "limbswap/error.hpp"
#include "limbswap/pose_io.hpp"
#include "limbswap/scan.hpp"
#include "limbswap/server.hpp"
#include "limbswap/session.hpp"
#include "limbswap/synth.hpp"

namespace limbswap {

namespace {

std::atomic<Server*> g_server{nullptr};

extern "C" void onSignal(int) {
  if (Server* s = g_server.load()) s->stop();
}

Catalog catalogFrom(const std::string& dir) { return load_catalog(dir.empty() ? default_catalog_dir() : dir); }

/// Resolves --prosthesis: an existing file is loaded and added to the catalog, anything else is an id.
std::string resolveProsthesis(const std::string& arg, Catalog& catalog) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(arg, ec)) return arg;
  ProsthesisSpec spec = load_spec_file(arg);
  const std::string id = spec.id;
  std::erase_if(catalog, [&](const ProsthesisSpec& s) { return s.id == id; });
  catalog.push_back(std::move(spec));
  return id;
}

Json readJsonFile(const std::string& path) { return json_util::parse(json_util::readFile(path), path); }

struct SimulateArgs {
  std::string trace;
  std::string prosthesis;
  std::string task;
  std::string task_config;
  std::string gesture_config;
  std::string out;
  std::string frames;
  std::string catalog;
};

int simulate(const SimulateArgs& a, std::ostream& out) {
  Catalog catalog = catalogFrom(a.catalog);
  SessionConfig config;
  config.prosthesis_id = resolveProsthesis(a.prosthesis, catalog);
  config.task = a.task_config.empty() ? default_task_config(a.task)
                                      : task_config_from_json(a.task, readJsonFile(a.task_config));
  if (!a.gesture_config.empty()) config.gestures = gesture_config_from_json(readJsonFile(a.gesture_config));

  const PoseTrace trace = load_trace_any(a.trace);
  const ReplayResult result = run_replay(trace, config, catalog);

  const Json doc{{"format", "task-metrics"},
                 {"version", 1},
                 {"prosthesis", config.prosthesis_id},
                 {"task", std::string(task_id(config.task))},
                 {"ticks", result.final_state.tick},
                 {"frames", result.frames.size()},
                 {"final_state_hash", hash_hex(state_hash(result.final_state))},
                 {"metrics", metrics_to_json(result.metrics)}};
  if (!a.frames.empty()) json_util::writeFileAtomic(a.frames, record_frames(result.frames));
  if (a.out.empty()) {
    out << doc.dump(2) << '\n';
  } else {
    json_util::writeFileAtomic(a.out, doc.dump(2) + "\n");
    out << "wrote " << a.out << " (" << result.frames.size() << " frames)\n";
  }
  return kExitOk;
}

struct ServeArgs {
  std::string bind = "127.0.0.1:7878";
  std::string catalog;
  std::string ui_dir;
  double time_scale = 1.0;
  std::string prosthesis = "whisk";
  std::string task = "ball";
  bool verbose = false;
};

int serve(const ServeArgs& a, std::ostream& out) {
  ServerOptions options;
  std::tie(options.host, options.port) = parse_bind(a.bind);
  if (!a.ui_dir.empty()) options.ui_dir = a.ui_dir;
  options.time_scale = a.time_scale;
  options.verbose = a.verbose;
  options.defaults.prosthesis_id = a.prosthesis;
  options.defaults.task = default_task_config(a.task);

  Server server(catalogFrom(a.catalog), options);
  const std::uint16_t port = server.listen();
  out << "listening on " << options.host << ":" << port << std::endl;
  g_server = &server;
  std::signal(SIGINT, onSignal);
  std::signal(SIGTERM, onSignal);
  server.run();
  g_server = nullptr;
  return kExitOk;
}

int validate(const std::string& path, std::ostream& out) {
  const ProsthesisSpec spec = load_spec_file(path);
  out << "valid: " << spec.id << (spec.is_static() ? " (static)" : " (articulated)") << '\n';
  return kExitOk;
}

struct IngestArgs {
  std::string cloud;
  std::string id;
  double voxel = 0.02;
  std::string name;
  std::string out;
};

int ingest(const IngestArgs& a, std::ostream& out) {
  PointCloud cloud = load_ply(json_util::readFile(a.cloud));
  cloud.source_label = a.cloud;
  ScanOptions options;
  options.voxel = a.voxel;
  options.display_name = a.name;
  const ProsthesisSpec spec = scan_to_spec(cloud, a.id, options);
  json_util::writeFileAtomic(a.out, serialize_spec(spec) + "\n");
  out << "wrote " << a.out << ": " << spec.geometry.size() << " proxy spheres from " << cloud.points.size()
      << " points\n";
  return kExitOk;
}

int replay(const std::string& path, bool hash, std::ostream& out) {
  const auto frames = load_frames(json_util::readFile(path));
  if (hash) {
    if (frames.empty()) throw Error(ErrorCode::Parse, path + ": frame log is empty; no digest to print");
    out << hash_hex(frames.back().state_hash) << '\n';
  } else {
    out << frames.size() << " frames";
    if (!frames.empty()) out << ", ticks " << frames.front().tick << ".." << frames.back().tick;
    out << '\n';
  }
  return kExitOk;
}

int listCatalog(const std::string& dir, std::ostream& out) {
  for (const auto& spec : catalogFrom(dir)) {
    out << spec.id << '\t' << spec.display_name << '\n';
  }
  return kExitOk;
}

int synth(const std::string& generator, const std::string& path, std::ostream& out) {
  const auto [script, rate] = parse_generator(readJsonFile(generator));
  PoseTrace trace = synth_trace(script, rate);
  trace.source_label = std::filesystem::path(generator).filename().string();
  const std::string text = write_pose_trace(trace);
  if (path.empty()) {
    out << text;
  } else {
    json_util::writeFileAtomic(path, text);
    out << "wrote " << path << " (" << trace.frames.size() << " frames)\n";
  }
  return kExitOk;
}

}  // namespace

PoseTrace load_trace_any(const std::string& path) {
  const std::string content = json_util::readFile(path);
  if (Json::accept(content)) {
    const Json doc = Json::parse(content);
    if (doc.is_object() && doc.contains("generator")) {
      try {
        const auto [script, rate] = parse_generator(doc);
        PoseTrace trace = synth_trace(script, rate);
        trace.source_label = path;
        return trace;
      } catch (const Error& e) {
        throw Error(e.code(), path + ": " + e.detail());
      }
    }
  }
  try {
    return parse_pose_trace(content);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.detail());
  }
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Virtual prosthesis engine: replay traces, serve live sessions, ingest scans", "limbswap"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Run a pose trace through a session and report metrics");
  simulate_cmd->add_option("--trace", sim.trace, "Pose trace (.poses.jsonl) or generator document")->required();
  simulate_cmd->add_option("--prosthesis", sim.prosthesis, "Catalog id or spec file")->required();
  simulate_cmd->add_option("--task", sim.task, "Task id: ball | draw")->required();
  simulate_cmd->add_option("--task-config", sim.task_config, "Task config overrides");
  simulate_cmd->add_option("--gesture-config", sim.gesture_config, "Gesture threshold overrides");
  simulate_cmd->add_option("--out", sim.out, "Metrics document (default: stdout)");
  simulate_cmd->add_option("--frames", sim.frames, "Frame log output (.frames.jsonl)");
  simulate_cmd->add_option("--catalog", sim.catalog, "Catalog directory");

  ServeArgs srv;
  auto* serve_cmd = app.add_subcommand("serve", "Accept live clients over TCP or WebSocket");
  serve_cmd->add_option("--bind", srv.bind, "host:port")->capture_default_str();
  serve_cmd->add_option("--catalog", srv.catalog, "Catalog directory");
  serve_cmd->add_option("--serve-ui", srv.ui_dir, "Serve static UI files from this directory");
  serve_cmd->add_option("--time-scale", srv.time_scale, "Engine seconds per wall-clock second")
      ->capture_default_str();
  serve_cmd->add_option("--prosthesis", srv.prosthesis, "Initial prosthesis for new sessions")->capture_default_str();
  serve_cmd->add_option("--task", srv.task, "Initial task for new sessions")->capture_default_str();
  serve_cmd->add_flag("-v,--verbose", srv.verbose, "Log connections to stderr");

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "Check a prosthesis spec file");
  validate_cmd->add_option("spec", validate_path, "Spec file")->required();

  IngestArgs ing;
  auto* ingest_cmd = app.add_subcommand("ingest-scan", "Turn an ASCII PLY point cloud into a prosthesis spec");
  ingest_cmd->add_option("cloud", ing.cloud, "Point cloud (.ply)")->required();
  ingest_cmd->add_option("--id", ing.id, "Spec id")->required();
  ingest_cmd->add_option("--voxel", ing.voxel, "Proxy voxel size in metres")->capture_default_str();
  ingest_cmd->add_option("--name", ing.name, "Display name");
  ingest_cmd->add_option("--out", ing.out, "Spec file to write")->required();

  std::string replay_path;
  bool replay_hash = false;
  auto* replay_cmd = app.add_subcommand("replay", "Inspect a recorded frame log");
  replay_cmd->add_option("--frames", replay_path, "Frame log (.frames.jsonl)")->required();
  replay_cmd->add_flag("--hash", replay_hash, "Print the final state digest");

  std::string catalog_dir;
  auto* catalog_cmd = app.add_subcommand("catalog", "List catalog prostheses");
  catalog_cmd->add_option("--catalog", catalog_dir, "Catalog directory");

  std::string generator_path, synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "Write a pose trace from a generator document");
  synth_cmd->add_option("generator", generator_path, "Generator document (.json)")->required();
  synth_cmd->add_option("--out", synth_out, "Trace output (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "limbswap: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*simulate_cmd) return simulate(sim, out);
    if (*serve_cmd) return serve(srv, out);
    if (*validate_cmd) return validate(validate_path, out);
    if (*ingest_cmd) return ingest(ing, out);
    if (*replay_cmd) return replay(replay_path, replay_hash, out);
    if (*catalog_cmd) return listCatalog(catalog_dir, out);
    if (*synth_cmd) return synth(generator_path, synth_out, out);
  } catch (const Error& e) {
    err << "limbswap: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "limbswap: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace limbswap
