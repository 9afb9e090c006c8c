#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <future>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "densnav/density.hpp"
#include "densnav/env.hpp"
#include "densnav/errors.hpp"

namespace densnav {

enum class TerminalStatus { Converged, MaxSteps, EnteredUnsafe };

inline const char* to_string(TerminalStatus s) {
  switch (s) {
    case TerminalStatus::Converged: return "Converged";
    case TerminalStatus::MaxSteps: return "MaxSteps";
    case TerminalStatus::EnteredUnsafe: return "EnteredUnsafe";
  }
  return "Unknown";
}

struct TrajectorySample {
  double t = 0.0;
  Vec2 x = Vec2::Zero();
  Vec2 u = Vec2::Zero();
  double clearance = std::numeric_limits<double>::infinity();
};

struct Trajectory {
  double dt = 0.01;
  std::vector<TrajectorySample> samples;
  TerminalStatus terminal_status = TerminalStatus::MaxSteps;

  std::size_t size() const { return samples.size(); }
  double duration() const { return dt * static_cast<double>(samples.size()); }
  const Vec2& final_state() const { return samples.back().x; }
};

struct PlannerConfig {
  double dt = 0.01;
  double convergence_eps = 0.01;
  std::size_t max_steps = 1000000;
  double filter_beta = 1.0;
  std::size_t filter_window = 1;

  bool operator==(const PlannerConfig&) const = default;
};

inline std::vector<std::string> validate_planner_config(const PlannerConfig& cfg) {
  std::vector<std::string> failures;
  if (!(cfg.dt > 0.0)) failures.emplace_back("dt must be positive");
  if (!(cfg.convergence_eps > 0.0)) failures.emplace_back("convergence_eps must be positive");
  if (cfg.max_steps < 1) failures.emplace_back("max_steps must be at least 1");
  if (!(cfg.filter_beta > 0.0 && cfg.filter_beta <= 1.0))
    failures.emplace_back("filter_beta must lie in (0, 1]");
  if (cfg.filter_window < 1 || cfg.filter_window % 2 == 0)
    failures.emplace_back("filter_window must be an odd positive count");
  return failures;
}

// Density gradient away from the target, blended into -(x - target) near it:
//
//   xdot = (1 - s(tau)) grad rho(x) - s(tau) (x - target)
//   tau  = (blend_outer^2 - |x - target|^2) / (blend_outer^2 - blend_inner^2)
//
// so the field is exactly linear attraction inside blend_inner and exactly
// grad rho outside blend_outer.
inline Vec2 feedback_velocity(const Environment& env, const DensityParams& params,
                              const Vec2& x) {
  if (env.in_unsafe(x)) throw InsideUnsafeError("feedback requested inside an unsafe set");
  const Vec2 d = x - env.target;
  const double n2 = d.squaredNorm();
  const double inner2 = params.blend_inner * params.blend_inner;
  const double outer2 = params.blend_outer * params.blend_outer;
  if (n2 <= inner2) return -d;

  const Vec2 grad = density_grad(env, params, x).grad;
  if (n2 >= outer2) return grad;
  const double w = smooth_step((outer2 - n2) / (outer2 - inner2));
  return (1.0 - w) * grad - w * d;
}

// Explicit Euler rollout of the feedback field. The last sample holds the
// terminal state; for EnteredUnsafe its command is zero.
inline Trajectory integrate_plan(const Environment& env, const DensityParams& params,
                                 const PlannerConfig& cfg, const Vec2& x0) {
  if (env.in_unsafe(x0)) throw InvalidStartError("initial state lies inside an unsafe set");

  Trajectory traj;
  traj.dt = cfg.dt;
  Vec2 x = x0;
  const double eps2 = cfg.convergence_eps * cfg.convergence_eps;

  for (std::size_t step = 0;; ++step) {
    const double t = static_cast<double>(step) * cfg.dt;
    const Vec2 u = feedback_velocity(env, params, x);
    traj.samples.push_back({t, x, u, min_clearance(env, x)});

    if ((x - env.target).squaredNorm() <= eps2) {
      traj.terminal_status = TerminalStatus::Converged;
      return traj;
    }
    if (step == cfg.max_steps) {
      traj.terminal_status = TerminalStatus::MaxSteps;
      return traj;
    }

    x += cfg.dt * u;
    if (env.in_unsafe(x)) {
      traj.samples.push_back({t + cfg.dt, x, Vec2::Zero(), min_clearance(env, x)});
      traj.terminal_status = TerminalStatus::EnteredUnsafe;
      return traj;
    }
  }
}

// Time spent inside a set: dt times the number of samples the predicate
// accepts.
inline double occupancy(const Trajectory& traj, const std::function<bool(const Vec2&)>& in_set) {
  std::size_t count = 0;
  for (const auto& s : traj.samples)
    if (in_set(s.x)) ++count;
  return traj.dt * static_cast<double>(count);
}

inline double unsafe_occupancy(const Environment& env, const Trajectory& traj) {
  return occupancy(traj, [&](const Vec2& x) { return env.in_unsafe(x); });
}

inline double min_trajectory_clearance(const Trajectory& traj) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : traj.samples) best = std::min(best, s.clearance);
  return best;
}

// Recompute the clearance annotation of every sample, e.g. after filtering.
inline void annotate_clearance(const Environment& env, Trajectory& traj) {
  for (auto& s : traj.samples) s.clearance = min_clearance(env, s.x);
}

// y_0 = x_0, y_i = y_{i-1} + beta (x_i - y_{i-1}); applied to states and
// commands alike. Clearance annotations are copied, not recomputed.
inline Trajectory first_order_filter(const Trajectory& traj, double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("filter beta must lie in (0, 1]");
  Trajectory out = traj;
  for (std::size_t i = 1; i < out.samples.size(); ++i) {
    auto& cur = out.samples[i];
    const auto& prev = out.samples[i - 1];
    cur.x = prev.x + beta * (traj.samples[i].x - prev.x);
    cur.u = prev.u + beta * (traj.samples[i].u - prev.u);
  }
  return out;
}

// Centred window mean; near the ends the window shrinks symmetrically.
inline Trajectory moving_average(const Trajectory& traj, std::size_t window) {
  if (window == 0 || window % 2 == 0)
    throw std::invalid_argument("moving average window must be odd and positive");
  const std::size_t n = traj.samples.size();
  if (window > n)
    throw WindowTooLargeError("moving average window " + std::to_string(window) +
                              " exceeds " + std::to_string(n) + " samples");
  Trajectory out = traj;
  const std::size_t half = window / 2;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t h = std::min({half, i, n - 1 - i});
    Vec2 sx = Vec2::Zero();
    Vec2 su = Vec2::Zero();
    for (std::size_t j = i - h; j <= i + h; ++j) {
      sx += traj.samples[j].x;
      su += traj.samples[j].u;
    }
    const double m = static_cast<double>(2 * h + 1);
    out.samples[i].x = sx / m;
    out.samples[i].u = su / m;
  }
  return out;
}

// Largest angle in radians between consecutive nonzero commands.
inline double max_turning_angle(const Trajectory& traj) {
  double best = 0.0;
  for (std::size_t i = 1; i < traj.samples.size(); ++i) {
    const Vec2& a = traj.samples[i - 1].u;
    const Vec2& b = traj.samples[i].u;
    if (a.squaredNorm() == 0.0 || b.squaredNorm() == 0.0) continue;
    const double cross = a.x() * b.y() - a.y() * b.x();
    best = std::max(best, std::abs(std::atan2(cross, a.dot(b))));
  }
  return best;
}

// Sample-wise maximum distance between two trajectories; the shorter one is
// held at its final state.
inline double max_deviation(const Trajectory& a, const Trajectory& b) {
  if (a.samples.empty() || b.samples.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t n = std::max(a.size(), b.size());
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& pa = a.samples[std::min(i, a.size() - 1)].x;
    const Vec2& pb = b.samples[std::min(i, b.size() - 1)].x;
    best = std::max(best, (pa - pb).norm());
  }
  return best;
}

// One fully specified planner configuration in a sweep.
struct SweepCase {
  std::string label;
  Environment env;
  DensityParams params;
  PlannerConfig cfg;
};

struct SweepRun {
  std::size_t case_index = 0;
  std::size_t start_index = 0;
  std::optional<Trajectory> trajectory;
  std::string error;
};

struct SweepCaseSummary {
  std::size_t runs = 0;
  std::size_t converged = 0;
  double convergence_rate = 0.0;
  double min_clearance = std::numeric_limits<double>::infinity();
  double unsafe_occupancy = 0.0;
  double max_turning_angle = 0.0;
};

struct SweepReport {
  std::vector<SweepRun> runs;  // case-major: runs[c * starts + s]
  std::vector<SweepCaseSummary> cases;
  // deviation[a][b]: max over start points of max_deviation between the
  // trajectories of cases a and b. NaN where either run failed.
  std::vector<std::vector<double>> deviation;
};

namespace detail {

inline SweepRun run_case(const SweepCase& c, const Vec2& x0) {
  SweepRun run;
  try {
    const auto report = validate_environment(c.env, c.params);
    if (!report.ok()) throw Error("invalid configuration: " + report.failures.front());
    run.trajectory = integrate_plan(c.env, c.params, c.cfg, x0);
  } catch (const std::exception& e) {
    run.error = e.what();
  }
  return run;
}

}  // namespace detail

// Runs every case from every start point. Runs are independent and spread
// over at most `workers` threads; the report does not depend on scheduling.
inline SweepReport sweep(const std::vector<SweepCase>& cases, const std::vector<Vec2>& starts,
                         unsigned workers = std::max(1u, std::thread::hardware_concurrency())) {
  SweepReport report;
  const std::size_t n_runs = cases.size() * starts.size();
  report.runs.resize(n_runs);

  std::vector<std::future<void>> pending;
  std::size_t next = 0;
  auto launch = [&](std::size_t idx) {
    return std::async(std::launch::async, [&, idx] {
      SweepRun r = detail::run_case(cases[idx / starts.size()], starts[idx % starts.size()]);
      r.case_index = idx / starts.size();
      r.start_index = idx % starts.size();
      report.runs[idx] = std::move(r);
    });
  };
  workers = std::max(1u, workers);
  while (next < n_runs || !pending.empty()) {
    while (next < n_runs && pending.size() < workers) pending.push_back(launch(next++));
    pending.front().get();
    pending.erase(pending.begin());
  }

  report.cases.resize(cases.size());
  for (const auto& run : report.runs) {
    auto& sum = report.cases[run.case_index];
    ++sum.runs;
    if (!run.trajectory) continue;
    const Trajectory& tr = *run.trajectory;
    if (tr.terminal_status == TerminalStatus::Converged) ++sum.converged;
    sum.min_clearance = std::min(sum.min_clearance, min_trajectory_clearance(tr));
    sum.unsafe_occupancy += unsafe_occupancy(cases[run.case_index].env, tr);
    sum.max_turning_angle = std::max(sum.max_turning_angle, max_turning_angle(tr));
  }
  for (auto& sum : report.cases)
    sum.convergence_rate =
        sum.runs == 0 ? 0.0 : static_cast<double>(sum.converged) / static_cast<double>(sum.runs);

  const std::size_t nc = cases.size();
  report.deviation.assign(nc, std::vector<double>(nc, 0.0));
  for (std::size_t a = 0; a < nc; ++a) {
    for (std::size_t b = a + 1; b < nc; ++b) {
      double dev = 0.0;
      for (std::size_t s = 0; s < starts.size(); ++s) {
        const auto& ra = report.runs[a * starts.size() + s].trajectory;
        const auto& rb = report.runs[b * starts.size() + s].trajectory;
        if (!ra || !rb) {
          dev = std::numeric_limits<double>::quiet_NaN();
          break;
        }
        dev = std::max(dev, max_deviation(*ra, *rb));
      }
      report.deviation[a][b] = report.deviation[b][a] = dev;
    }
  }
  return report;
}

}  // namespace densnav
