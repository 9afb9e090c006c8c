#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "densnav/params.hpp"

namespace densnav {

using Vec2 = Eigen::Vector2d;

// Circular unsafe ball of radius `radius_unsafe` wrapped in a sensing ball
// of radius `radius_sense`. The annulus in between is where the field
// starts to react to the obstacle.
struct Obstacle {
  Vec2 center = Vec2::Zero();
  double radius_unsafe = 1.0;
  double radius_sense = 2.0;

  double distance(const Vec2& x) const { return (x - center).norm(); }
  // Closed ball: boundary points are unsafe.
  bool contains_unsafe(const Vec2& x) const {
    return distance(x) <= radius_unsafe;
  }

  bool operator==(const Obstacle& o) const {
    return center == o.center && radius_unsafe == o.radius_unsafe &&
           radius_sense == o.radius_sense;
  }
};

struct Box {
  Vec2 lower = Vec2(-1.0, -1.0);
  Vec2 upper = Vec2(1.0, 1.0);

  bool contains(const Vec2& x) const {
    return x.x() >= lower.x() && x.x() <= upper.x() && x.y() >= lower.y() &&
           x.y() <= upper.y();
  }
  Vec2 extent() const { return upper - lower; }

  bool operator==(const Box& o) const { return lower == o.lower && upper == o.upper; }
};

struct Environment {
  Box workspace;
  Vec2 target = Vec2::Zero();
  std::vector<Obstacle> obstacles;

  bool in_unsafe(const Vec2& x) const {
    for (const auto& ob : obstacles)
      if (ob.contains_unsafe(x)) return true;
    return false;
  }

  bool operator==(const Environment& o) const {
    return workspace == o.workspace && target == o.target && obstacles == o.obstacles;
  }
};

struct ValidationReport {
  std::vector<std::string> failures;

  bool ok() const { return failures.empty(); }
  explicit operator bool() const { return ok(); }
};

inline ValidationReport validate_environment(const Environment& env) {
  ValidationReport report;
  auto fail = [&](std::string msg) { report.failures.push_back(std::move(msg)); };
  const Box& ws = env.workspace;

  if (!(ws.lower.x() < ws.upper.x() && ws.lower.y() < ws.upper.y()))
    fail("workspace lower corner must be strictly below upper corner");
  if (!ws.contains(env.target)) fail("target outside workspace");

  for (std::size_t k = 0; k < env.obstacles.size(); ++k) {
    const Obstacle& ob = env.obstacles[k];
    const std::string tag = "obstacle " + std::to_string(k) + ": ";
    if (!(ob.radius_unsafe > 0.0)) fail(tag + "unsafe radius must be positive");
    if (!(ob.radius_sense > ob.radius_unsafe))
      fail(tag + "sensing radius must exceed unsafe radius");
    if (ob.distance(env.target) <= ob.radius_sense)
      fail(tag + "target inside sensing ball");
    const Vec2 r = Vec2::Constant(ob.radius_unsafe);
    if (!(ws.contains(ob.center - r) && ws.contains(ob.center + r)))
      fail(tag + "unsafe ball not contained in workspace");
  }
  return report;
}

// Environment checks plus the ones that depend on the density tunables: the
// parameters themselves and an obstacle-free blend ball about the target.
inline ValidationReport validate_environment(const Environment& env,
                                             const DensityParams& params) {
  ValidationReport report = validate_environment(env);
  for (auto& msg : validate_params(params)) report.failures.push_back("density: " + msg);
  for (std::size_t k = 0; k < env.obstacles.size(); ++k) {
    const Obstacle& ob = env.obstacles[k];
    if (ob.distance(env.target) <= ob.radius_sense + params.blend_outer)
      report.failures.push_back("obstacle " + std::to_string(k) +
                                ": sensing ball intersects target blend ball");
  }
  return report;
}

// Signed distance to the nearest unsafe ball; +inf without obstacles.
inline double min_clearance(const Environment& env, const Vec2& x) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& ob : env.obstacles) best = std::min(best, ob.distance(x) - ob.radius_unsafe);
  return best;
}

enum class RegionKind { Unsafe, Sensing, Free, TargetBlend };

struct RegionLabel {
  RegionKind kind = RegionKind::Free;
  std::optional<std::size_t> obstacle;  // set for Unsafe and Sensing
  double clearance = std::numeric_limits<double>::infinity();
};

// Boundaries resolve inward: a point on an unsafe circle is Unsafe, a point
// on a sensing circle is Sensing.
inline RegionLabel classify_point(const Environment& env, const DensityParams& params,
                                  const Vec2& x) {
  RegionLabel label;
  std::optional<std::size_t> nearest;
  std::optional<std::size_t> sensing;
  double sensing_clearance = std::numeric_limits<double>::infinity();

  for (std::size_t k = 0; k < env.obstacles.size(); ++k) {
    const Obstacle& ob = env.obstacles[k];
    const double d = ob.distance(x);
    const double c = d - ob.radius_unsafe;
    if (c < label.clearance) {
      label.clearance = c;
      nearest = k;
    }
    if (d <= ob.radius_sense && c < sensing_clearance) {
      sensing_clearance = c;
      sensing = k;
    }
  }

  if (nearest && env.obstacles[*nearest].contains_unsafe(x)) {
    label.kind = RegionKind::Unsafe;
    label.obstacle = nearest;
  } else if (sensing) {
    label.kind = RegionKind::Sensing;
    label.obstacle = sensing;
  } else if ((x - env.target).norm() <= params.blend_outer) {
    label.kind = RegionKind::TargetBlend;
  } else {
    label.kind = RegionKind::Free;
  }
  return label;
}

}  // namespace densnav
