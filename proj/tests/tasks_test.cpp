#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "limbswap/error.hpp"
#include "limbswap/tasks.hpp"
#include "support.hpp"

using namespace limbswap;
using limbswap::testing::spec;

namespace {

constexpr double kDt = 1.0 / 120.0;

BallConfig quietBall() {
  BallConfig c;
  c.damping = 0.0;
  c.ball_start = Vec3(0.0, 0.0, 0.08);
  return c;
}

/// One proxy sphere overlapping the ball from -x and moving toward it.
ProsthesisInput pushingInput(const ProsthesisSpec& s, const BallTaskState& ball, const Vec3& velocity,
                             const Vec3& palm_velocity) {
  ProsthesisInput in;
  in.spec = &s;
  in.proxies = {Sphere{ball.ball_position - Vec3(ball.ball_radius + 0.02 - 0.005, 0.0, 0.0), 0.02}};
  in.proxy_velocity = velocity;
  in.palm_velocity = palm_velocity;
  return in;
}

ProsthesisInput anchorInput(const ProsthesisSpec& s, const std::string& name, const Vec3& position,
                            const Vec3& direction = -Vec3::UnitZ()) {
  ProsthesisInput in;
  in.spec = &s;
  in.anchors_world = {AnchorWorld{name, position, direction}};
  return in;
}

}  // namespace

TEST(Ball, DampingMatchesClosedForm) {
  BallConfig c = quietBall();
  c.damping = 2.0;
  c.ball_start = Vec3(-0.3, 0.0, 0.08);
  BallTaskState s = make_ball_state(c);
  s.ball_velocity = Vec3(1.0, 0.0, 0.0);
  const ProsthesisInput none;
  for (int i = 0; i < 120; ++i) s = ball_step(s, none, c, kDt).first;
  const double t = 1.0;
  // v(t) = v0 exp(-k t); x(t) = x0 + v0 (1 - exp(-k t)) / k
  EXPECT_NEAR(s.ball_velocity.x(), std::exp(-c.damping * t), 1e-12);
  const double x_oracle = -0.3 + (1.0 - std::exp(-c.damping * t)) / c.damping;
  EXPECT_NEAR((s.ball_position.x() + 0.3) / (x_oracle + 0.3), 1.0, 0.01);
  EXPECT_EQ(s.ticks, 120);
}

TEST(Ball, WallReflectionUsesRestitution) {
  BallConfig c = quietBall();
  c.ball_start = Vec3(0.64, 0.0, 0.08);  // wall at 0.7 - 0.05
  BallTaskState s = make_ball_state(c);
  s.ball_velocity = Vec3(2.0, 0.0, 0.0);
  s = ball_step(s, {}, c, kDt).first;
  EXPECT_DOUBLE_EQ(s.ball_position.x(), 0.65);
  EXPECT_NEAR(s.ball_velocity.x(), -1.0, 1e-15);
}

TEST(Ball, PushImpulseAlongContactNormal) {
  const ProsthesisSpec& whisk = spec("whisk");  // Push gain 1.0
  const BallConfig c = quietBall();
  BallTaskState s = make_ball_state(c);
  const ProsthesisInput in = pushingInput(whisk, s, Vec3(0.8, 0.0, 0.0), Vec3(0.8, 0.0, 0.0));
  auto [next, events] = ball_step(s, in, c, kDt);
  // approach speed 0.8 along +x, gain 1
  EXPECT_NEAR(next.ball_velocity.x(), 0.8, 1e-12);
  ASSERT_FALSE(events.empty());
  EXPECT_EQ(events[0].kind, TaskEventKind::BallContact);
  // Separating proxies impart nothing.
  auto [after, none] = ball_step(s, pushingInput(whisk, s, Vec3(-0.5, 0, 0), Vec3::Zero()), c, kDt);
  EXPECT_EQ(after.ball_velocity, Vec3::Zero());
  EXPECT_TRUE(none.empty());
}

TEST(Ball, ImpulseGainScalesWithAffordance) {
  const BallConfig c = quietBall();
  const BallTaskState s = make_ball_state(c);
  const double hammer = ball_step(s, pushingInput(spec("hammer"), s, Vec3(0.4, 0, 0), Vec3::Zero()), c, kDt)
                            .first.ball_velocity.x();
  EXPECT_NEAR(hammer, 1.5 * 0.4, 1e-12);
}

TEST(Ball, DelicateTouchBlocksFastContact) {
  const ProsthesisSpec& butterfly = spec("butterfly");
  const double max_speed = std::get<DelicateTouchAction>(*affordance_lookup(butterfly, GestureKind::Stillness)).max_speed;
  const BallConfig c = quietBall();
  BallTaskState s = make_ball_state(c);
  s.ball_velocity = Vec3(0.01, 0.02, 0.0);
  const Vec3 fast = Vec3::UnitX() * (2.0 * max_speed);
  const BallTaskState blocked = ball_step(s, pushingInput(butterfly, s, fast, fast), c, kDt).first;
  EXPECT_LT((blocked.ball_velocity - s.ball_velocity).norm(), 1e-9);

  const Vec3 slow = Vec3::UnitX() * (0.5 * max_speed);
  const BallTaskState pushed = ball_step(s, pushingInput(butterfly, s, slow, slow), c, kDt).first;
  EXPECT_GT(pushed.ball_velocity.x(), s.ball_velocity.x() + 0.05);
}

TEST(Ball, GrabAttachNeedsTheAffordance) {
  const BallConfig c = quietBall();
  const BallTaskState s = make_ball_state(c);
  ProsthesisInput hook = anchorInput(spec("hook"), "hook", s.ball_position + Vec3(0.03, 0, 0));
  hook.gestures.grab = true;
  auto [held, events] = ball_step(s, hook, c, kDt);
  ASSERT_TRUE(held.attached_to.has_value());
  EXPECT_EQ(*held.attached_to, "hook");
  EXPECT_EQ(held.ball_position, s.ball_position + Vec3(0.03, 0, 0));
  ASSERT_EQ(events.size(), 1u);
  EXPECT_EQ(events[0].kind, TaskEventKind::BallAttached);

  // Carried along while the grab is held, released when it ends.
  hook.anchors_world[0].position += Vec3(0.01, 0, 0);
  const BallTaskState carried = ball_step(held, hook, c, kDt).first;
  EXPECT_NEAR(carried.ball_velocity.x(), 0.01 / kDt, 1e-9);
  hook.gestures.grab = false;
  auto [released, rel_events] = ball_step(carried, hook, c, kDt);
  EXPECT_FALSE(released.attached_to.has_value());
  EXPECT_EQ(rel_events.front().kind, TaskEventKind::BallReleased);

  // The paw has no Grip anchor and no GrabAttach: a held grab does nothing.
  ProsthesisInput paw = anchorInput(spec("paw"), "pad", s.ball_position);
  paw.gestures.grab = true;
  EXPECT_FALSE(ball_step(s, paw, c, kDt).first.attached_to.has_value());
}

TEST(Ball, GoalAndMetrics) {
  BallConfig c = quietBall();
  c.ball_start = Vec3(0.40, 0.0, 0.08);
  BallTaskState s = make_ball_state(c);
  std::vector<TaskEvent> all;
  for (int i = 0; i < 3; ++i) {
    s.ball_velocity = i == 0 ? Vec3(0.9, 0, 0) : Vec3::Zero();  // x = 0.4075 after the first step
    auto [n, ev] = ball_step(s, {}, c, kDt);
    s = n;
    all.insert(all.end(), ev.begin(), ev.end());
  }
  ASSERT_TRUE(s.done_tick.has_value());
  EXPECT_EQ(*s.done_tick, 2);
  const TaskMetrics m = task_metrics(s, kDt);
  ASSERT_TRUE(m.time_to_goal_s.has_value());
  EXPECT_NEAR(*m.time_to_goal_s, 2.0 * kDt, 1e-15);
  EXPECT_NEAR(*m.path_efficiency, 1.0, 1e-12);
  EXPECT_FALSE(task_metrics(make_ball_state(c), kDt).time_to_goal_s.has_value());

  // Drifting inside the goal afterwards leaves the metrics alone.
  s.ball_velocity = Vec3(0.01, 0, 0);
  const BallTaskState later = ball_step(s, {}, c, kDt).first;
  EXPECT_EQ(later.path_length_accum, s.path_length_accum);
  EXPECT_EQ(task_metrics(later, kDt), m);
}

TEST(Ball, RejectsBadDt) {
  const BallConfig c;
  EXPECT_THROW(ball_step(make_ball_state(c), {}, c, 0.0), Error);
  EXPECT_THROW(ball_step(make_ball_state(c), {}, c, 0.2), Error);
}

TEST(RayPlane, MatchesParametricOracle) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 500; ++i) {
    const Vec3 n = limbswap::testing::randomVec(rng, 1.0).normalized();
    const Planed plane{limbswap::testing::randomVec(rng, 1.0), n};
    const Vec3 origin = limbswap::testing::randomVec(rng, 2.0);
    const Vec3 dir = limbswap::testing::randomVec(rng, 1.0).normalized();
    const auto hit = ray_plane(origin, dir, plane);
    const double denom = n.dot(dir);
    const double t = n.dot(plane.point - origin) / denom;
    if (std::abs(denom) <= 1e-9 || t < 0.0) {
      EXPECT_FALSE(hit.has_value());
      continue;
    }
    ASSERT_TRUE(hit.has_value());
    const double tol = 1e-12 * std::max(1.0, t);
    EXPECT_NEAR(n.dot(*hit - plane.point), 0.0, tol);
    EXPECT_NEAR((*hit - (origin + t * dir)).norm(), 0.0, tol);
  }
  EXPECT_FALSE(ray_plane(Vec3(0, 0, 1), Vec3::UnitX(), Planed{}).has_value());
  EXPECT_FALSE(ray_plane(Vec3(0, 0, 1), Vec3::UnitZ(), Planed{}).has_value());
}

TEST(Draw, TipContactProducesStrokes) {
  const ProsthesisSpec& pen = spec("pen");
  DrawConfig c;
  c.target_polyline = {{0.0, 0.0}, {0.01, 0.0}};
  DrawTaskState s = make_draw_state(c);
  std::vector<TaskEvent> events;
  for (int i = 0; i <= 10; ++i) {
    const double z = i < 8 ? -0.002 : 0.02;  // lifted for the last steps
    auto r = draw_step(s, anchorInput(pen, "tip", Vec3(0.001 * i, 0.0, z)), c, kDt);
    s = r.state;
    events.insert(events.end(), r.events.begin(), r.events.end());
  }
  ASSERT_EQ(s.strokes.size(), 1u);
  EXPECT_EQ(s.strokes[0].size(), 8u);
  // width = base * (1 + penetration / threshold)
  EXPECT_NEAR(s.strokes[0][0].width, c.base_width * (1.0 + 0.002 / c.contact_threshold), 1e-15);
  ASSERT_EQ(events.size(), 2u);
  EXPECT_EQ(events[0].kind, TaskEventKind::StrokeStarted);
  EXPECT_EQ(events[1].kind, TaskEventKind::StrokeEnded);

  const TaskMetrics m = task_metrics(s, c);
  EXPECT_NEAR(*m.stroke_rms_deviation_m, 0.0, 1e-15);
  EXPECT_EQ(*m.ink_coverage, 1.0);
}

TEST(Draw, InkBudgetCapsPoints) {
  DrawConfig c;
  c.ink_budget = 3;
  DrawTaskState s = make_draw_state(c);
  for (int i = 0; i < 10; ++i) s = draw_step(s, anchorInput(spec("pen"), "tip", Vec3(0.001 * i, 0, 0)), c, kDt).state;
  ASSERT_EQ(s.strokes.size(), 1u);
  EXPECT_EQ(s.strokes[0].size(), 3u);
  EXPECT_EQ(*s.ink_budget, 0);
}

TEST(Draw, NozzleSpraysOnlyWhileTriggered) {
  const ProsthesisSpec& airbrush = spec("airbrush");
  const DrawConfig c;
  DrawTaskState s = make_draw_state(c);
  ProsthesisInput in = anchorInput(airbrush, "nozzle", Vec3(0.02, 0.03, 0.2));
  s = draw_step(s, in, c, kDt).state;
  EXPECT_TRUE(s.strokes.empty());
  in.gestures.pinch = true;
  const auto r = draw_step(s, in, c, kDt);
  ASSERT_EQ(r.state.strokes.size(), 1u);
  const StrokePoint& p = r.state.strokes[0][0];
  EXPECT_NEAR((p.position - Vec2(0.02, 0.03)).norm(), 0.0, 1e-15);
  EXPECT_NEAR(p.width, c.spot_base + c.spot_spread * 0.2, 1e-15);
  ASSERT_EQ(r.deltas.size(), 1u);
  EXPECT_EQ(r.deltas[0].points[0], p);
}

TEST(Draw, EmissionRateLimitsPoints) {
  ProsthesisSpec slow = spec("airbrush");
  for (auto& a : slow.affordances) {
    if (auto* t = std::get_if<TriggerAction>(&a.action)) t->emission_rate = 60.0;
  }
  const DrawConfig c;
  DrawTaskState s = make_draw_state(c);
  ProsthesisInput in = anchorInput(slow, "nozzle", Vec3(0, 0, 0.2));
  in.gestures.pinch = true;
  for (int i = 0; i < 120; ++i) s = draw_step(s, in, c, kDt).state;
  ASSERT_EQ(s.strokes.size(), 1u);
  EXPECT_EQ(s.strokes[0].size(), 60u);
}

TEST(Draw, RmsOracle) {
  DrawTaskState s = make_draw_state(DrawConfig{});
  s.target_polyline = {{0.0, 0.0}, {1.0, 0.0}};
  s.strokes = {{{{0.5, 0.003}, 0.002}, {{0.2, -0.004}, 0.002}}};
  const TaskMetrics m = task_metrics(s, DrawConfig{});
  EXPECT_NEAR(*m.stroke_rms_deviation_m, std::sqrt((0.003 * 0.003 + 0.004 * 0.004) / 2.0), 1e-15);
  EXPECT_EQ(*m.ink_coverage, 0.0);
}

TEST(TaskConfigDoc, MergeAndReject) {
  const TaskConfig c = task_config_from_json("ball", Json{{"damping", 3.0}});
  EXPECT_EQ(std::get<BallConfig>(c).damping, 3.0);
  EXPECT_EQ(task_config_from_json("ball", task_config_to_json(c)), c);
  const TaskConfig d = limbswap::testing::shippedTask("draw");
  EXPECT_EQ(task_config_from_json("draw", task_config_to_json(d)), d);
  try {
    task_config_from_json("ball", Json{{"gravity", 9.8}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BadConfig);
  }
  EXPECT_THROW(task_config_from_json("ball", Json{{"restitution", 2.0}}), Error);
  EXPECT_THROW(default_task_config("juggle"), Error);
}

TEST(Metrics, JsonRoundTrip) {
  TaskMetrics m;
  m.time_to_goal_s = 1.25;
  m.ink_coverage = 0.5;
  EXPECT_EQ(metrics_from_json(metrics_to_json(m)), m);
}
