#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "densnav/env.hpp"
#include "densnav/errors.hpp"
#include "densnav/params.hpp"

namespace densnav {

// f(t) = exp(-1/t) for t > 0, 0 otherwise. C-infinity, flat at the origin.
inline double elementary_f(double tau) { return tau > 0.0 ? std::exp(-1.0 / tau) : 0.0; }

// Smooth step f(t) / (f(t) + f(1 - t)). Zero for t <= 0, one for t >= 1.
//
// On (0, 1) it is evaluated as 1 / (1 + exp(1/t - 1/(1-t))), which is the
// same ratio with f(t) divided out and stays finite where f(t) underflows.
inline double smooth_step(double tau) {
  if (tau <= 0.0) return 0.0;
  if (tau >= 1.0) return 1.0;
  const double z = 1.0 / tau - 1.0 / (1.0 - tau);
  return 1.0 / (1.0 + std::exp(z));
}

inline double smooth_step_deriv(double tau) {
  if (tau <= 0.0 || tau >= 1.0) return 0.0;
  const double s = smooth_step(tau);
  const double u = 1.0 - tau;
  return s * (1.0 - s) * (1.0 / (tau * tau) + 1.0 / (u * u));
}

namespace detail {

// Argument of the smooth step for obstacle `ob`: 0 on the unsafe circle,
// 1 on the sensing circle.
inline double annulus_coordinate(const Obstacle& ob, const Vec2& x) {
  const double r2 = ob.radius_unsafe * ob.radius_unsafe;
  const double s2 = ob.radius_sense * ob.radius_sense;
  return ((x - ob.center).squaredNorm() - r2) / (s2 - r2);
}

}  // namespace detail

// Inverse bump: 0 on the closed unsafe ball, 1 outside the sensing ball.
inline double bump(const Obstacle& ob, const Vec2& x) {
  if (ob.contains_unsafe(x)) return 0.0;
  return smooth_step(detail::annulus_coordinate(ob, x));
}

inline Vec2 bump_grad(const Obstacle& ob, const Vec2& x) {
  if (ob.contains_unsafe(x)) return Vec2::Zero();
  const double tau = detail::annulus_coordinate(ob, x);
  if (tau >= 1.0) return Vec2::Zero();
  const double span = ob.radius_sense * ob.radius_sense - ob.radius_unsafe * ob.radius_unsafe;
  return smooth_step_deriv(tau) * 2.0 * (x - ob.center) / span;
}

namespace detail {

inline double checked_potential(const Environment& env, const DensityParams& params,
                                const Vec2& x) {
  const double dist = (x - env.target).norm();
  if (dist < params.singularity_radius())
    throw SingularityError("density evaluated within " +
                           std::to_string(params.singularity_radius()) + " of the target");
  return dist * dist;
}

}  // namespace detail

// rho(x) = prod_k Phi_k(x) / V(x)^alpha with V(x) = |x - target|^2.
inline double density(const Environment& env, const DensityParams& params, const Vec2& x) {
  const double v = detail::checked_potential(env, params, x);
  double prod = 1.0;
  for (const auto& ob : env.obstacles) {
    prod *= bump(ob, x);
    if (prod == 0.0) return 0.0;
  }
  return prod * std::pow(v, -params.alpha);
}

struct GradientEval {
  Vec2 grad = Vec2::Zero();
  bool inside_unsafe = false;
};

// Product-rule gradient of rho. Products over the other obstacles come from
// prefix/suffix sweeps so no bump value is ever divided out.
inline GradientEval density_grad(const Environment& env, const DensityParams& params,
                                 const Vec2& x) {
  const double v = detail::checked_potential(env, params, x);
  GradientEval out;
  for (const auto& ob : env.obstacles) {
    if (ob.contains_unsafe(x)) {
      out.inside_unsafe = true;
      return out;
    }
  }

  const std::size_t n = env.obstacles.size();
  std::vector<double> phi(n);
  std::vector<double> suffix(n + 1, 1.0);
  for (std::size_t k = 0; k < n; ++k) phi[k] = bump(env.obstacles[k], x);
  for (std::size_t k = n; k-- > 0;) suffix[k] = suffix[k + 1] * phi[k];

  Vec2 sum_terms = Vec2::Zero();
  double prefix = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2 g = bump_grad(env.obstacles[k], x);
    if (g.x() != 0.0 || g.y() != 0.0) sum_terms += g * (prefix * suffix[k + 1]);
    prefix *= phi[k];
  }

  const double v_pow = std::pow(v, -params.alpha);
  const Vec2 d = x - env.target;
  out.grad = v_pow * sum_terms - params.alpha * (v_pow / v) * 2.0 * d * suffix[0];
  return out;
}

// Central-difference gradient of rho with step params.fd_step.
inline Vec2 density_grad_fd(const Environment& env, const DensityParams& params,
                            const Vec2& x) {
  const double h = params.fd_step;
  const Vec2 ex(h, 0.0);
  const Vec2 ey(0.0, h);
  return Vec2((density(env, params, x + ex) - density(env, params, x - ex)) / (2.0 * h),
              (density(env, params, x + ey) - density(env, params, x - ey)) / (2.0 * h));
}

// div(rho * grad rho) at x by central differences of the analytic field.
inline double divergence_at(const Environment& env, const DensityParams& params,
                            const Vec2& x) {
  const double h = params.fd_step;
  auto field = [&](const Vec2& p) -> Vec2 {
    return density(env, params, p) * density_grad(env, params, p).grad;
  };
  const Vec2 ex(h, 0.0);
  const Vec2 ey(0.0, h);
  return (field(x + ex).x() - field(x - ex).x()) / (2.0 * h) +
         (field(x + ey).y() - field(x - ey).y()) / (2.0 * h);
}

struct DivergenceReport {
  std::size_t samples_total = 0;
  std::size_t samples_positive = 0;
  double min_value = std::numeric_limits<double>::infinity();
  Vec2 worst_point = Vec2::Constant(std::numeric_limits<double>::quiet_NaN());

  double positive_fraction() const {
    return samples_total == 0 ? 0.0
                              : static_cast<double>(samples_positive) /
                                    static_cast<double>(samples_total);
  }
};

// Whether a grid node takes part in the divergence check: outside every
// unsafe ball, away from the unsafe and sensing circles by more than the
// collar width, and outside the blend ball about the target.
inline bool divergence_sample_admissible(const Environment& env, const DensityParams& params,
                                         const Vec2& x, double collar) {
  if ((x - env.target).norm() <= params.blend_outer) return false;
  for (const auto& ob : env.obstacles) {
    const double d = ob.distance(x);
    if (d <= ob.radius_unsafe) return false;
    if (std::abs(d - ob.radius_unsafe) < collar) return false;
    if (std::abs(d - ob.radius_sense) < collar) return false;
  }
  return true;
}

// Samples the divergence condition on a cell-centred grid over the
// workspace. A spacing larger than the workspace yields no samples.
inline DivergenceReport check_divergence(const Environment& env, const DensityParams& params,
                                         double grid_spacing) {
  if (!(grid_spacing > 0.0)) throw std::invalid_argument("grid spacing must be positive");
  DivergenceReport report;
  const Vec2 extent = env.workspace.extent();
  const auto nx = static_cast<std::size_t>(std::floor(extent.x() / grid_spacing));
  const auto ny = static_cast<std::size_t>(std::floor(extent.y() / grid_spacing));
  const double collar = 2.0 * grid_spacing;

  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      const Vec2 x = env.workspace.lower +
                     Vec2((static_cast<double>(i) + 0.5) * grid_spacing,
                          (static_cast<double>(j) + 0.5) * grid_spacing);
      if (!divergence_sample_admissible(env, params, x, collar)) continue;
      const double div = divergence_at(env, params, x);
      ++report.samples_total;
      if (div > 0.0) ++report.samples_positive;
      if (div < report.min_value) {
        report.min_value = div;
        report.worst_point = x;
      }
    }
  }
  return report;
}

// Relative gradient error with an absolute floor: discrepancies below
// `abs_floor` are ignored, which keeps points where the gradient itself is
// vanishingly small (deep in a flat region of the bump) from dominating.
inline double gradient_relative_error(const Vec2& analytic, const Vec2& reference,
                                      double abs_floor = 1e-9) {
  const double excess = std::max(0.0, (analytic - reference).norm() - abs_floor);
  return excess / std::max(analytic.norm(), abs_floor);
}

// True when x is outside every unsafe ball, at least `margin` away from each
// unsafe and sensing circle, and farther than the singularity radius plus
// `margin` from the target.
inline bool gradient_sample_admissible(const Environment& env, const DensityParams& params,
                                       const Vec2& x, double margin) {
  if ((x - env.target).norm() < params.singularity_radius() + margin) return false;
  for (const auto& ob : env.obstacles) {
    const double d = ob.distance(x);
    if (d <= ob.radius_unsafe + margin) return false;
    if (std::abs(d - ob.radius_sense) < margin) return false;
  }
  return true;
}

struct GradientCheckReport {
  std::size_t samples = 0;
  std::size_t failures = 0;  // samples above the tolerance
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  Vec2 worst_point = Vec2::Constant(std::numeric_limits<double>::quiet_NaN());
};

// Compares density_grad with density_grad_fd at `count` points drawn
// uniformly from the workspace (rejection-sampled to stay 3 fd steps clear
// of every boundary and of the target).
inline GradientCheckReport check_gradient(const Environment& env, const DensityParams& params,
                                          std::size_t count, std::uint64_t seed,
                                          double tolerance = 1e-6) {
  GradientCheckReport report;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(env.workspace.lower.x(), env.workspace.upper.x());
  std::uniform_real_distribution<double> uy(env.workspace.lower.y(), env.workspace.upper.y());
  const double margin = 3.0 * params.fd_step;
  std::size_t attempts = 0;
  while (report.samples < count) {
    if (++attempts > 1000 * count + 1000)
      throw Error("could not draw admissible gradient-check samples");
    const double px = ux(rng);
    const double py = uy(rng);
    const Vec2 x(px, py);
    if (!gradient_sample_admissible(env, params, x, margin)) continue;
    const Vec2 analytic = density_grad(env, params, x).grad;
    const Vec2 fd = density_grad_fd(env, params, x);
    const double rel = gradient_relative_error(analytic, fd);
    ++report.samples;
    if (rel > tolerance) ++report.failures;
    report.max_abs_error = std::max(report.max_abs_error, (analytic - fd).norm());
    if (rel >= report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst_point = x;
    }
  }
  return report;
}

}  // namespace densnav
