#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "limbswap/cli.hpp"
#include "limbswap/json_fwd.hpp"
#include "limbswap/session.hpp"
#include "support.hpp"

using namespace limbswap;
using limbswap::testing::dataPath;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

CliResult run(std::vector<std::string> args) {
  args.insert(args.begin(), "limbswap");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliResult r;
  r.code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

}  // namespace

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(run({"simulate", "--trace", "x"}).code, kExitUsage);
  const CliResult help = run({"--help"});
  EXPECT_EQ(help.code, kExitOk);
  EXPECT_NE(help.out.find("simulate"), std::string::npos);
}

TEST(Cli, Validate) {
  const CliResult ok = run({"validate", dataPath("catalog/whisk.prosthesis.json")});
  EXPECT_EQ(ok.code, kExitOk);
  EXPECT_EQ(ok.out, "valid: whisk (static)\n");
  EXPECT_EQ(run({"validate", dataPath("catalog/tentacle_octet.prosthesis.json")}).out,
            "valid: tentacle_octet (articulated)\n");

  limbswap::testing::TempDir dir;
  std::ofstream(dir.file("bad.json")) << R"({"format":"prosthesis","version":1,"id":"x"})";
  const CliResult bad = run({"validate", dir.file("bad.json")});
  EXPECT_EQ(bad.code, kExitData);
  EXPECT_NE(bad.err.find("Schema"), std::string::npos) << bad.err;
}

TEST(Cli, MissingTraceNamesThePath) {
  const CliResult r = run({"simulate", "--trace", "/nonexistent/t.poses.jsonl", "--prosthesis", "paw", "--task", "ball"});
  EXPECT_EQ(r.code, kExitData);
  EXPECT_NE(r.err.find("/nonexistent/t.poses.jsonl"), std::string::npos) << r.err;
}

TEST(Cli, SimulateWritesMetricsAndFrames) {
  limbswap::testing::TempDir dir;
  const CliResult r = run({"simulate", "--trace", dataPath("traces/reach_and_swipe.poses.jsonl"), "--prosthesis", "paw",
                     "--task", "ball", "--out", dir.file("m.json"), "--frames", dir.file("f.frames.jsonl")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json doc = json_util::parse(json_util::readFile(dir.file("m.json")), "m.json");
  EXPECT_EQ(doc.at("format"), "task-metrics");
  EXPECT_EQ(doc.at("prosthesis"), "paw");
  EXPECT_EQ(doc.at("task"), "ball");
  EXPECT_TRUE(doc.at("metrics").is_object());

  // replay --hash reports the digest of the final recorded frame, which matches the metrics doc.
  const auto frames = load_frames(json_util::readFile(dir.file("f.frames.jsonl")));
  ASSERT_FALSE(frames.empty());
  const CliResult h = run({"replay", "--frames", dir.file("f.frames.jsonl"), "--hash"});
  EXPECT_EQ(h.code, kExitOk);
  EXPECT_EQ(h.out, hash_hex(frames.back().state_hash) + "\n");

  const CliResult summary = run({"replay", "--frames", dir.file("f.frames.jsonl")});
  EXPECT_EQ(summary.out.rfind(std::to_string(frames.size()) + " frames", 0), 0u);

  // Generator documents are accepted wherever a trace is.
  EXPECT_EQ(run({"simulate", "--trace", dataPath("traces/reach_and_swipe.json"), "--prosthesis", "paw", "--task",
                 "ball", "--out", dir.file("m2.json")})
                .code,
            kExitOk);
  EXPECT_EQ(json_util::readFile(dir.file("m.json")), json_util::readFile(dir.file("m2.json")));
}

TEST(Cli, SimulateAcceptsSpecFile) {
  const CliResult r = run({"simulate", "--trace", dataPath("traces/pen_stroke.poses.jsonl"), "--prosthesis",
                     dataPath("catalog/pen.prosthesis.json"), "--task", "draw"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(Json::parse(r.out).at("prosthesis"), "pen");
  EXPECT_EQ(run({"simulate", "--trace", dataPath("traces/pen_stroke.poses.jsonl"), "--prosthesis", "jetpack",
                 "--task", "draw"})
                .code,
            kExitData);
  EXPECT_EQ(run({"simulate", "--trace", dataPath("traces/pen_stroke.poses.jsonl"), "--prosthesis", "pen", "--task",
                 "juggle"})
                .code,
            kExitData);
}

TEST(Cli, ReplayEmptyLogFails) {
  limbswap::testing::TempDir dir;
  std::ofstream(dir.file("empty.frames.jsonl")) << "";
  EXPECT_EQ(run({"replay", "--frames", dir.file("empty.frames.jsonl"), "--hash"}).code, kExitData);
}

TEST(Cli, IngestScan) {
  limbswap::testing::TempDir dir;
  const CliResult r = run({"ingest-scan", dataPath("scans/spoon.ply"), "--id", "spoon", "--name", "Spoon", "--out",
                     dir.file("spoon.prosthesis.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(run({"validate", dir.file("spoon.prosthesis.json")}).out, "valid: spoon (static)\n");

  std::ofstream(dir.file("flat.ply")) << "ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\n"
                                         "property float y\nproperty float z\nend_header\n0 0 0\n1 0 0\n0 1 0\n";
  const CliResult bad = run({"ingest-scan", dir.file("flat.ply"), "--id", "flat", "--out", dir.file("flat.json")});
  EXPECT_EQ(bad.code, kExitData);
  EXPECT_NE(bad.err.find("DegenerateCloud"), std::string::npos) << bad.err;
  EXPECT_FALSE(std::filesystem::exists(dir.file("flat.json")));
}

TEST(Cli, CatalogAndSynth) {
  const CliResult c = run({"catalog"});
  EXPECT_EQ(c.code, kExitOk);
  EXPECT_NE(c.out.find("whisk\t"), std::string::npos);
  const CliResult s = run({"synth", dataPath("traces/hold_still.json")});
  EXPECT_EQ(s.code, kExitOk);
  EXPECT_EQ(s.out, json_util::readFile(dataPath("traces/hold_still.poses.jsonl")));
}
