#include <gtest/gtest.h>

#include <random>

#include "test_support.hpp"

using namespace densnav;

namespace {

Environment two_obstacle_env() {
  Environment env;
  env.workspace = {Vec2(-5.0, -10.0), Vec2(15.0, 10.0)};
  env.target = Vec2(10.0, 0.0);
  env.obstacles = {{Vec2(6.0, 3.5), 2.5, 3.0}, {Vec2(3.0, -3.5), 2.5, 3.0}};
  return env;
}

bool has_failure(const ValidationReport& r, const std::string& needle) {
  for (const auto& f : r.failures)
    if (f.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST(Validate, ShippedLayoutPasses) {
  EXPECT_TRUE(validate_environment(two_obstacle_env()).ok());
  EXPECT_TRUE(validate_environment(two_obstacle_env(), DensityParams{}).ok());
}

TEST(Validate, EqualRadiiRejected) {
  Environment env = two_obstacle_env();
  env.obstacles[0].radius_sense = 2.5;
  const auto r = validate_environment(env);
  EXPECT_TRUE(has_failure(r, "sensing radius must exceed unsafe radius"));
}

TEST(Validate, TargetAtObstacleCentre) {
  Environment env = two_obstacle_env();
  env.target = env.obstacles[1].center;
  EXPECT_TRUE(has_failure(validate_environment(env), "target inside sensing ball"));
}

TEST(Validate, ObstacleMustFitWorkspace) {
  Environment env = two_obstacle_env();
  env.obstacles[0].center = Vec2(14.0, 8.0);
  EXPECT_TRUE(has_failure(validate_environment(env), "unsafe ball not contained in workspace"));
}

TEST(Validate, TargetOutsideWorkspace) {
  Environment env = two_obstacle_env();
  env.target = Vec2(20.0, 0.0);
  EXPECT_TRUE(has_failure(validate_environment(env), "target outside workspace"));
}

TEST(Validate, SensingBallMayNotReachBlendBall) {
  Environment env = two_obstacle_env();
  env.obstacles[0].center = Vec2(10.0, 3.9);
  EXPECT_TRUE(validate_environment(env).ok());
  EXPECT_TRUE(has_failure(validate_environment(env, DensityParams{}),
                          "sensing ball intersects target blend ball"));
}

TEST(Validate, ShrinkingUnsafeRadiusIsMonotone) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> cx(-3.0, 13.0), cy(-8.0, 8.0), rr(0.2, 3.0),
      gap(0.1, 2.0), shrink(0.05, 1.0);
  int passing = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    Environment env;
    env.workspace = {Vec2(-5.0, -10.0), Vec2(15.0, 10.0)};
    env.target = Vec2(10.0, 0.0);
    const double r = rr(rng);
    env.obstacles = {{Vec2(cx(rng), cy(rng)), r, r + gap(rng)}};
    if (!validate_environment(env, DensityParams{}).ok()) continue;
    ++passing;
    env.obstacles[0].radius_unsafe *= shrink(rng);
    EXPECT_TRUE(validate_environment(env, DensityParams{}).ok());
  }
  EXPECT_GT(passing, 100);
}

TEST(Classify, CentreIsUnsafeWithNegativeClearance) {
  const Environment env = two_obstacle_env();
  const RegionLabel l = classify_point(env, DensityParams{}, env.obstacles[1].center);
  EXPECT_EQ(l.kind, RegionKind::Unsafe);
  ASSERT_TRUE(l.obstacle.has_value());
  EXPECT_EQ(*l.obstacle, 1u);
  EXPECT_DOUBLE_EQ(l.clearance, -2.5);
}

TEST(Classify, SensingCircleResolvesInward) {
  const Environment env = two_obstacle_env();
  const RegionLabel l = classify_point(env, DensityParams{}, Vec2(9.0, 3.5));
  EXPECT_EQ(l.kind, RegionKind::Sensing);
  EXPECT_EQ(*l.obstacle, 0u);
  const RegionLabel u = classify_point(env, DensityParams{}, Vec2(8.5, 3.5));
  EXPECT_EQ(u.kind, RegionKind::Unsafe);
}

TEST(Classify, FreeAndTargetBlend) {
  const Environment env = two_obstacle_env();
  EXPECT_EQ(classify_point(env, DensityParams{}, Vec2(-4.0, 8.0)).kind, RegionKind::Free);
  EXPECT_EQ(classify_point(env, DensityParams{}, Vec2(10.5, 0.2)).kind, RegionKind::TargetBlend);
}

TEST(Classify, AgreesWithMinClearance) {
  const Environment env = two_obstacle_env();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ux(-5.0, 15.0), uy(-10.0, 10.0);
  for (int i = 0; i < 20000; ++i) {
    const Vec2 x(ux(rng), uy(rng));
    const RegionLabel l = classify_point(env, DensityParams{}, x);
    const double c = min_clearance(env, x);
    EXPECT_EQ(l.kind == RegionKind::Unsafe, c <= 0.0);
    EXPECT_DOUBLE_EQ(l.clearance, c);
    if (l.kind == RegionKind::Unsafe)
      EXPECT_DOUBLE_EQ(env.obstacles[*l.obstacle].distance(x) - 2.5, c);
  }
}

TEST(MinClearance, Examples) {
  Environment env;
  env.workspace = {Vec2(-10.0, -10.0), Vec2(10.0, 10.0)};
  env.target = Vec2(-8.0, -8.0);
  EXPECT_EQ(min_clearance(env, Vec2(1.0, 1.0)), std::numeric_limits<double>::infinity());
  env.obstacles = {{Vec2(5.0, 0.0), 2.5, 3.0}};
  EXPECT_DOUBLE_EQ(min_clearance(env, Vec2(5.0, 3.0)), 0.5);
  EXPECT_DOUBLE_EQ(min_clearance(env, Vec2(7.5, 0.0)), 0.0);
  EXPECT_TRUE(env.in_unsafe(Vec2(7.5, 0.0)));
}
