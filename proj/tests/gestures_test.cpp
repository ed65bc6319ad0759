#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <span>

#include "limbswap/error.hpp"
#include "limbswap/gestures.hpp"
#include "limbswap/pose.hpp"

using namespace limbswap;

namespace {

constexpr double kDt = 1.0 / 120.0;

HandPoseFrame sample(int k, double pinch = 0.0, double grab = 0.0, Vec3 palm = Vec3(0, 0, 0.08)) {
  HandPoseFrame f = neutral_pose(k * kDt);
  f.pinch_strength = pinch;
  f.grab_strength = grab;
  f.palm_position = palm;
  f.wrist_position = palm - Vec3(0, 0, 0.08);
  return f;
}

/// Feeds frames one at a time, the way the engine does.
std::vector<GestureEvent> runOneByOne(const std::vector<HandPoseFrame>& frames, const GestureConfig& config = {}) {
  DetectorState state;
  std::vector<GestureEvent> all;
  for (std::size_t k = 0; k < frames.size(); ++k) {
    auto [events, next] = detect_gestures(std::span(&frames[k], 1), state, config, static_cast<std::int64_t>(k));
    state = next;
    all.insert(all.end(), events.begin(), events.end());
  }
  return all;
}

std::vector<GestureEventKind> kinds(const std::vector<GestureEvent>& events) {
  std::vector<GestureEventKind> out;
  for (const auto& e : events) out.push_back(e.kind);
  return out;
}

}  // namespace

TEST(Pinch, StartsAtThresholdAndEndsBelowRelease) {
  // 0.5 -> 0.85 (start) -> 0.7 (held: inside the band) -> 0.55 (end)
  const std::vector<HandPoseFrame> frames = {sample(0, 0.5), sample(1, 0.85), sample(2, 0.7), sample(3, 0.55)};
  const auto events = runOneByOne(frames);
  ASSERT_EQ(events.size(), 2u);
  EXPECT_EQ(events[0].kind, GestureEventKind::PinchStart);
  EXPECT_EQ(events[0].tick, 1);
  EXPECT_EQ(events[1].kind, GestureEventKind::PinchEnd);
  EXPECT_EQ(events[1].tick, 3);
}

TEST(Pinch, ThresholdsAreInclusive) {
  const auto events = runOneByOne({sample(0, 0.8), sample(1, 0.6)});
  EXPECT_EQ(kinds(events), (std::vector{GestureEventKind::PinchStart, GestureEventKind::PinchEnd}));
}

TEST(Pinch, OscillationInsideBandDoesNotFlicker) {
  std::vector<HandPoseFrame> frames = {sample(0, 0.9)};
  for (int k = 1; k < 200; ++k) frames.push_back(sample(k, k % 2 ? 0.61 : 0.79));
  std::vector<GestureEventKind> pinch;
  for (auto k : kinds(runOneByOne(frames))) {
    if (k == GestureEventKind::PinchStart || k == GestureEventKind::PinchEnd) pinch.push_back(k);
  }
  EXPECT_EQ(pinch, (std::vector{GestureEventKind::PinchStart}));
}

TEST(Grab, IndependentOfPinch) {
  const auto events = runOneByOne({sample(0, 0.9, 0.0), sample(1, 0.9, 0.95), sample(2, 0.1, 0.95)});
  EXPECT_EQ(kinds(events), (std::vector{GestureEventKind::PinchStart, GestureEventKind::GrabStart,
                                        GestureEventKind::PinchEnd}));
}

TEST(Swipe, SixtyMillisecondsAtOnePointFiveEmitsOnce) {
  // 0.06 s at 1.5 m/s along +x, then rest. Minimum duration is 0.05 s.
  std::vector<HandPoseFrame> frames;
  Vec3 palm(0, 0, 0.08);
  frames.push_back(sample(0, 0, 0, palm));
  int k = 1;
  for (; k <= 7; ++k) {  // 7 intervals of 1/120 s ~ 0.058 s
    palm.x() += 1.5 * kDt;
    frames.push_back(sample(k, 0, 0, palm));
  }
  for (int j = 0; j < 20; ++j, ++k) frames.push_back(sample(k, 0, 0, palm));
  const auto events = runOneByOne(frames);
  std::vector<GestureEvent> swipes;
  for (const auto& e : events) {
    if (e.kind == GestureEventKind::Swipe) swipes.push_back(e);
  }
  ASSERT_EQ(swipes.size(), 1u);
  EXPECT_NEAR(swipes[0].speed, 1.5, 1e-9);
  EXPECT_NEAR((swipes[0].direction - Vec3::UnitX()).norm(), 0.0, 1e-12);
  // 0.05 s is six intervals, so the swipe fires on the sixth moving frame.
  EXPECT_EQ(swipes[0].tick, 6);
}

TEST(Swipe, TooShortOrTooSlowIsIgnored) {
  std::vector<HandPoseFrame> frames;
  Vec3 palm(0, 0, 0.08);
  frames.push_back(sample(0, 0, 0, palm));
  for (int k = 1; k <= 4; ++k) {  // 4 intervals: 0.033 s
    palm.x() += 2.0 * kDt;
    frames.push_back(sample(k, 0, 0, palm));
  }
  for (int k = 5; k < 40; ++k) {  // long but slow
    palm.x() += 0.9 * kDt;
    frames.push_back(sample(k, 0, 0, palm));
  }
  for (const auto& e : runOneByOne(frames)) EXPECT_NE(e.kind, GestureEventKind::Swipe);
}

TEST(Stillness, StartsAfterMinimumDurationAndEndsOnMotion) {
  std::vector<HandPoseFrame> frames;
  for (int k = 0; k <= 40; ++k) frames.push_back(sample(k));
  frames.push_back(sample(41, 0, 0, Vec3(0.01, 0, 0.08)));
  const auto events = runOneByOne(frames);
  ASSERT_EQ(events.size(), 2u);
  EXPECT_EQ(events[0].kind, GestureEventKind::StillnessStart);
  EXPECT_EQ(events[0].tick, 36);  // 36 intervals = 0.3 s
  EXPECT_EQ(events[1].kind, GestureEventKind::StillnessEnd);
  EXPECT_EQ(events[1].tick, 41);
}

TEST(Detector, SkipsFramesThatAreNotNewer) {
  DetectorState state;
  const HandPoseFrame a = sample(5, 0.9);
  auto [first, s1] = detect_gestures(std::span(&a, 1), state, {}, 0);
  HandPoseFrame older = sample(4, 0.1);
  auto [second, s2] = detect_gestures(std::span(&older, 1), s1, {}, 1);
  EXPECT_TRUE(second.empty());
  EXPECT_EQ(s2.previous_time, a.timestamp_s);
}

TEST(Detector, BatchEqualsOneByOne) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<HandPoseFrame> frames;
  for (int k = 0; k < 300; ++k) frames.push_back(sample(k, u(rng), u(rng), Vec3(0.02 * std::sin(k * 0.3), 0, 0.08)));
  const auto one = kinds(runOneByOne(frames));
  auto [batch, _] = detect_gestures(frames, DetectorState{}, {}, 0);
  EXPECT_EQ(kinds(batch), one);
}

TEST(Config, ValidationAndMerge) {
  GestureConfig c;
  c.pinch_end = 0.9;
  EXPECT_THROW(validate_gesture_config(c), Error);
  const GestureConfig merged = gesture_config_from_json(Json{{"swipe_speed_min", 1.5}});
  EXPECT_EQ(merged.swipe_speed_min, 1.5);
  EXPECT_EQ(merged.pinch_start, GestureConfig{}.pinch_start);
  EXPECT_THROW(gesture_config_from_json(Json{{"pinch", 0.5}}), Error);
  EXPECT_EQ(gesture_config_from_json(gesture_config_to_json(merged)), merged);
}

TEST(Hysteresis, FuzzAgainstReferenceMachine) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const GestureConfig config;
  for (int run = 0; run < 50; ++run) {
    std::vector<HandPoseFrame> frames;
    for (int k = 0; k < 500; ++k) frames.push_back(sample(k, u(rng)));
    // Reference: a two-state machine written independently of the detector.
    bool on = false;
    std::vector<GestureEventKind> expected;
    for (const auto& f : frames) {
      if (!on && f.pinch_strength >= config.pinch_start) {
        on = true;
        expected.push_back(GestureEventKind::PinchStart);
      } else if (on && f.pinch_strength <= config.pinch_end) {
        on = false;
        expected.push_back(GestureEventKind::PinchEnd);
      }
    }
    std::vector<GestureEventKind> got;
    for (auto k : kinds(runOneByOne(frames, config))) {
      if (k == GestureEventKind::PinchStart || k == GestureEventKind::PinchEnd) got.push_back(k);
    }
    ASSERT_EQ(got, expected);
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_EQ(got[i], i % 2 == 0 ? GestureEventKind::PinchStart : GestureEventKind::PinchEnd);
    }
  }
}
