#include <gtest/gtest.h>

#include <algorithm>
#include <tuple>

#include "limbswap/error.hpp"
#include "limbswap/session.hpp"
#include "limbswap/synth.hpp"
#include "support.hpp"

using namespace limbswap;
using limbswap::testing::catalog;
using limbswap::testing::sessionConfig;
using limbswap::testing::trace;

namespace {

ErrorCode createError(const SessionConfig& c) {
  try {
    create_session(c, catalog());
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Io;
}

std::size_t countKind(const std::vector<RenderFrame>& frames, const std::string& kind) {
  std::size_t n = 0;
  for (const auto& f : frames) {
    for (const auto& e : f.events) n += e.kind == kind;
  }
  return n;
}

}  // namespace

TEST(CreateSession, Errors) {
  SessionConfig c = sessionConfig("jetpack", "ball");
  EXPECT_EQ(createError(c), ErrorCode::UnknownProsthesis);
  c = sessionConfig("whisk", "ball");
  c.tick_rate_hz = 60.0;
  c.output_frame_rate_hz = 120.0;
  EXPECT_EQ(createError(c), ErrorCode::BadConfig);
  c = sessionConfig("whisk", "ball");
  c.output_frame_rate_hz = 50.0;  // 120 / 50 is not whole
  EXPECT_EQ(createError(c), ErrorCode::BadConfig);
  c = sessionConfig("whisk", "ball");
  c.gestures.pinch_end = 0.95;
  EXPECT_EQ(createError(c), ErrorCode::BadConfig);
  EXPECT_THROW(create_session(sessionConfig("whisk", "ball"), catalog(), -1), Error);
}

TEST(Step, OneTwentyTicksGiveSixtyFrames) {
  SessionState s = create_session(sessionConfig("whisk", "ball"), catalog());
  std::vector<std::int64_t> ticks;
  for (int i = 0; i < 120; ++i) {
    StepResult r = step(std::move(s), std::nullopt);
    s = std::move(r.state);
    if (r.frame) ticks.push_back(r.frame->tick);
  }
  ASSERT_EQ(ticks.size(), 60u);
  for (std::size_t k = 0; k < ticks.size(); ++k) EXPECT_EQ(ticks[k], static_cast<std::int64_t>(2 * k));
  EXPECT_EQ(s.tick, 120);
  EXPECT_EQ(frame_stride(s.config), 2);
}

TEST(Step, FramesNeverShowTheHand) {
  const ReplayResult r = run_replay(trace("hold_still"), sessionConfig("paw", "ball"), catalog());
  for (const auto& f : r.frames) EXPECT_FALSE(f.hand_visible);
}

TEST(Step, StaleAndInvalidInputIsDropped) {
  SessionState s = create_session(sessionConfig("whisk", "ball"), catalog());
  s = step(std::move(s), neutral_pose(0.0)).state;  // tick 0
  s = step(std::move(s), neutral_pose(0.5)).state;  // tick 1
  StepResult r = step(std::move(s), neutral_pose(0.2));  // tick 2: older than the newest input
  ASSERT_TRUE(r.frame.has_value());
  EXPECT_EQ(countKind({*r.frame}, "DroppedInput"), 1u);
  EXPECT_EQ(r.state.latest_input.timestamp_s, 0.5);

  HandPoseFrame bad = neutral_pose(0.6);
  bad.pinch_strength = 3.0;
  r = step(std::move(r.state), bad);  // tick 3: out of range
  EXPECT_FALSE(r.frame.has_value());
  r = step(std::move(r.state), std::nullopt);  // tick 4 reports it
  ASSERT_TRUE(r.frame.has_value());
  ASSERT_EQ(countKind({*r.frame}, "DroppedInput"), 1u);
  EXPECT_NE(r.frame->events[0].detail.find("pinch_strength"), std::string::npos) << r.frame->events[0].detail;
  EXPECT_EQ(r.frame->events[0].tick, 3);
  EXPECT_EQ(r.state.latest_input.timestamp_s, 0.5);
}

TEST(Replay, SwipeMovesBallAlongPositiveX) {
  const ReplayResult r = run_replay(trace("reach_and_swipe"), sessionConfig("paw", "ball"), catalog());
  const auto& ball = std::get<BallTaskState>(r.final_state.task);
  const BallConfig defaults = std::get<BallConfig>(limbswap::testing::shippedTask("ball"));
  EXPECT_GT(ball.ball_position.x() - defaults.ball_start.x(), 0.3);
  EXPECT_NEAR(ball.ball_position.y(), defaults.ball_start.y(), 1e-6);
  EXPECT_EQ(countKind(r.frames, "Swipe"), 1u);
  EXPECT_GE(countKind(r.frames, "BallContact"), 1u);
  EXPECT_EQ(countKind(r.frames, "GoalReached"), 1u);
  ASSERT_TRUE(r.metrics.time_to_goal_s.has_value());
  EXPECT_GT(*r.metrics.path_efficiency, 0.9);
  EXPECT_LE(*r.metrics.path_efficiency, 1.0);
}

TEST(Replay, HashIsDeterministicAndProsthesisSensitive) {
  const PoseTrace t = trace("reach_and_swipe");
  const ReplayResult a = run_replay(t, sessionConfig("paw", "ball"), catalog());
  const ReplayResult b = run_replay(t, sessionConfig("paw", "ball"), catalog());
  ASSERT_EQ(a.frames.size(), b.frames.size());
  for (std::size_t i = 0; i < a.frames.size(); ++i) EXPECT_EQ(a.frames[i].state_hash, b.frames[i].state_hash);
  EXPECT_EQ(state_hash(a.final_state), state_hash(b.final_state));
  const ReplayResult w = run_replay(t, sessionConfig("whisk", "ball"), catalog());
  EXPECT_NE(state_hash(w.final_state), state_hash(a.final_state));
  EXPECT_EQ(hash_hex(0x1234abcdULL), "000000001234abcd");
}

TEST(SessionState, JsonRoundTripPreservesHash) {
  for (const auto& [prosthesis, task, name] :
       {std::tuple{"paw", "ball", "reach_and_swipe"}, std::tuple{"airbrush", "draw", "airbrush_sweep"},
        std::tuple{"hook", "ball", "hold_still"}}) {
    const ReplayResult r = run_replay(trace(name), sessionConfig(prosthesis, task), catalog());
    const Json doc = session_state_to_json(r.final_state);
    const SessionState back = session_state_from_json(doc);
    EXPECT_EQ(state_hash(back), state_hash(r.final_state)) << prosthesis;
    EXPECT_EQ(session_state_to_json(back), doc);
    // Resuming from the restored state continues identically.
    StepResult x = step(r.final_state, std::nullopt);
    StepResult y = step(back, std::nullopt);
    EXPECT_EQ(state_hash(x.state), state_hash(y.state));
  }
}

TEST(Replay, HoldStillDrawsNothing) {
  for (const char* id : {"pen", "airbrush", "paintbrush"}) {
    const ReplayResult r = run_replay(trace("hold_still"), sessionConfig(id, "draw"), catalog());
    EXPECT_TRUE(std::get<DrawTaskState>(r.final_state.task).strokes.empty()) << id;
  }
}

TEST(Replay, PenTracesTargetPolyline) {
  const ReplayResult r = run_replay(trace("pen_stroke"), sessionConfig("pen", "draw"), catalog());
  ASSERT_TRUE(r.metrics.ink_coverage.has_value());
  EXPECT_EQ(*r.metrics.ink_coverage, 1.0);
  ASSERT_TRUE(r.metrics.stroke_rms_deviation_m.has_value());
  EXPECT_LE(*r.metrics.stroke_rms_deviation_m, 0.001);
  EXPECT_EQ(std::get<DrawTaskState>(r.final_state.task).strokes.size(), 1u);
}

TEST(Replay, HoverPinchSeparatesToolKinds) {
  const PoseTrace t = trace("pen_hover_pinch");
  EXPECT_TRUE(std::get<DrawTaskState>(run_replay(t, sessionConfig("pen", "draw"), catalog()).final_state.task)
                  .strokes.empty());
  EXPECT_FALSE(std::get<DrawTaskState>(run_replay(t, sessionConfig("airbrush", "draw"), catalog()).final_state.task)
                   .strokes.empty());
}

TEST(Replay, StrokeDeltasRebuildStrokes) {
  const ReplayResult r = run_replay(trace("airbrush_sweep"), sessionConfig("airbrush", "draw"), catalog());
  std::vector<Stroke> rebuilt;
  for (const auto& f : r.frames) {
    for (const auto& d : f.task_view.stroke_deltas) {
      if (rebuilt.size() <= d.stroke_index) rebuilt.resize(d.stroke_index + 1);
      rebuilt[d.stroke_index].insert(rebuilt[d.stroke_index].end(), d.points.begin(), d.points.end());
    }
  }
  const auto& strokes = std::get<DrawTaskState>(r.final_state.task).strokes;
  // Deltas produced after the last output tick are still pending; everything before it is present.
  ASSERT_EQ(rebuilt.size(), strokes.size());
  EXPECT_EQ(strokes.size(), 2u);  // two trigger windows
  for (std::size_t i = 0; i < strokes.size(); ++i) {
    ASSERT_LE(rebuilt[i].size(), strokes[i].size());
    EXPECT_TRUE(std::equal(rebuilt[i].begin(), rebuilt[i].end(), strokes[i].begin()));
  }
}

TEST(Step, HoldsLastPoseWhenInputStops) {
  SessionState s = create_session(sessionConfig("whisk", "ball"), catalog());
  HandPoseFrame f = neutral_pose(0.0);
  f.wrist_position = Vec3(0.1, 0.05, 0.2);
  f.palm_position = f.wrist_position + Vec3(0, 0, 0.08);
  s = step(std::move(s), f).state;
  const Vec3 held = s.smoothed.transform.translation;
  for (int i = 0; i < 30; ++i) s = step(std::move(s), std::nullopt).state;
  EXPECT_EQ(s.smoothed.transform.translation, held);
  EXPECT_EQ(s.current_pose.wrist_position, f.wrist_position);
}

TEST(Step, InterpolatesTowardFutureInput) {
  SessionState s = create_session(sessionConfig("whisk", "ball"), catalog());
  s = step(std::move(s), neutral_pose(0.0)).state;  // tick 0 snaps
  HandPoseFrame ahead = neutral_pose(4.0 / 120.0);
  ahead.wrist_position = Vec3(0.04, 0.0, 0.0);
  ahead.palm_position = ahead.wrist_position + Vec3(0, 0, 0.08);
  s = step(std::move(s), ahead).state;  // tick 1: a quarter of the way from tick 0's pose
  EXPECT_NEAR(s.current_pose.wrist_position.x(), 0.01, 1e-12);
  s = step(std::move(s), std::nullopt).state;
  EXPECT_NEAR(s.current_pose.wrist_position.x(), 0.02, 1e-12);
}

TEST(FrameLog, RoundTrip) {
  const ReplayResult r = run_replay(trace("pen_stroke"), sessionConfig("pen", "draw"), catalog());
  const std::string text = record_frames(r.frames);
  EXPECT_EQ(load_frames(text), r.frames);
  EXPECT_EQ(record_frames(load_frames(text)), text);
}

TEST(FrameLog, TruncatedLogNamesTheLine) {
  const ReplayResult r = run_replay(trace("hold_still"), sessionConfig("whisk", "ball"), catalog());
  std::string text = record_frames(r.frames);
  // Cut the fourth line (third frame) in half.
  std::size_t pos = 0;
  for (int i = 0; i < 3; ++i) pos = text.find('\n', pos) + 1;
  text = text.substr(0, pos + 40);
  try {
    load_frames(text);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Parse);
    EXPECT_NE(e.detail().find("line 4"), std::string::npos) << e.detail();
  }
}

TEST(FrameLog, EmptyAndHeaderless) {
  EXPECT_TRUE(load_frames(record_frames({})).empty());
  EXPECT_THROW(load_frames(""), Error);
  EXPECT_THROW(load_frames("{\"tick\":0}\n"), Error);
}

TEST(Events, JsonRejectsUnknownKeys) {
  EngineEvent e{"Swipe", 12, Vec3::UnitX(), 1.4, ""};
  EXPECT_EQ(event_from_json(event_to_json(e)), e);
  Json j = event_to_json(e);
  j["colour"] = "red";
  EXPECT_THROW(event_from_json(j), Error);
}
