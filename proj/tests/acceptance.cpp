// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Tolerances and budgets are fixed here, not configurable.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "test_support.hpp"

using namespace densnav;
namespace cli = densnav::cli;
namespace fs = std::filesystem;

namespace {

constexpr double kConvergedFraction = 0.99;
constexpr double kRuntimeBudgetPlanning = 30.0;  // seconds
constexpr double kRuntimeBudgetSweep = 30.0;
constexpr double kRuntimeBudgetTracking = 10.0;
constexpr double kMinPairwiseDeviation = 0.1;
constexpr double kDivergencePositiveFraction = 0.99;
constexpr double kDivergenceClosedFormRel = 1e-4;
constexpr double kGradientRel = 1e-6;
constexpr double kStepIdentityTol = 1e-12;
constexpr double kMpcRel = 1e-6;
constexpr double kTrackingRmsFraction = 0.02;
constexpr double kGrfForceTol = 1e-6;
constexpr double kGrfOracleRel = 0.01;
constexpr double kLegRelationTol = 1e-9;
constexpr double kLegFdTol = 1e-4;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Outcome random_start_convergence() {
  const auto t0 = std::chrono::steady_clock::now();
  const Config c = fixtures::shipped_config("fig2a.json");
  const auto starts = initial_states(c.initial_conditions);
  std::size_t good = 0;
  double worst_clearance = std::numeric_limits<double>::infinity();
  for (const auto& x0 : starts) {
    const Trajectory tr = integrate_plan(c.environment, c.density, c.planner, x0);
    const double clear = min_trajectory_clearance(tr);
    worst_clearance = std::min(worst_clearance, clear);
    if (tr.terminal_status == TerminalStatus::Converged &&
        unsafe_occupancy(c.environment, tr) == 0.0 && clear > 0.0)
      ++good;
  }
  const double secs = seconds_since(t0);
  const double frac = static_cast<double>(good) / static_cast<double>(starts.size());
  return {starts.size() == 100 && frac >= kConvergedFraction && secs < kRuntimeBudgetPlanning,
          std::to_string(good) + "/" + std::to_string(starts.size()) +
              " converged safely, min clearance " + fmt("%.4g", worst_clearance) + ", " +
              fmt("%.2f", secs) + " s"};
}

Outcome parameter_studies() {
  const auto t0 = std::chrono::steady_clock::now();
  auto cases_of = [](const Config& c) {
    std::vector<SweepCase> cases;
    for (const auto& v : expand_sweep(c))
      cases.push_back({v.label, v.config.environment, v.config.density, v.config.planner});
    return cases;
  };
  const Config s2 = fixtures::shipped_config("fig2a_s2_sweep.json");
  const SweepReport rs = sweep(cases_of(s2), initial_states(s2.initial_conditions));
  double min_dev = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rs.deviation.size(); ++i)
    for (std::size_t j = i + 1; j < rs.deviation.size(); ++j)
      min_dev = std::min(min_dev, std::isnan(rs.deviation[i][j]) ? -1.0 : rs.deviation[i][j]);

  const Config al = fixtures::shipped_config("fig2b_alpha_sweep.json");
  const SweepReport ra = sweep(cases_of(al), initial_states(al.initial_conditions));
  const bool both = ra.cases.size() == 2 && ra.cases[0].converged == ra.cases[0].runs &&
                    ra.cases[1].converged == ra.cases[1].runs;
  const double a_hi = ra.cases[0].max_turning_angle;
  const double a_lo = ra.cases[1].max_turning_angle;
  const double secs = seconds_since(t0);
  return {rs.deviation.size() == 3 && min_dev > kMinPairwiseDeviation && both && a_lo < a_hi &&
              secs < kRuntimeBudgetSweep,
          "s2 min pairwise deviation " + fmt("%.4g", min_dev) + "; turning angle alpha=0.2 " +
              fmt("%.4g", a_hi) + " vs alpha=0.002 " + fmt("%.4g", a_lo) + "; " +
              fmt("%.2f", secs) + " s"};
}

Outcome density_certificate() {
  const Config c = fixtures::shipped_config("fig2a.json");
  const DivergenceReport r = check_divergence(c.environment, c.density, 0.05);
  const Environment free_env = fixtures::free_environment();
  DensityParams p = c.density;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ux(-5.0, 15.0), uy(-10.0, 10.0);
  double worst = 0.0;
  int checked = 0;
  while (checked < 500) {
    const Vec2 x(ux(rng), uy(rng));
    const Vec2 d = x - free_env.target;
    if (d.norm() <= p.blend_outer) continue;
    const double v = d.squaredNorm();
    const double closed = 8.0 * p.alpha * p.alpha * std::pow(v, -2.0 * p.alpha - 1.0);
    worst = std::max(worst, std::abs(divergence_at(free_env, p, x) - closed) / closed);
    ++checked;
  }
  return {r.positive_fraction() >= kDivergencePositiveFraction && worst <= kDivergenceClosedFormRel,
          "positive at " + std::to_string(r.samples_positive) + "/" + std::to_string(r.samples_total) +
              " nodes (" + fmt("%.5f", r.positive_fraction()) + "); closed-form max rel error " +
              fmt("%.3g", worst)};
}

Outcome gradient_oracle() {
  const Config c = fixtures::shipped_config("fig2a.json");
  const GradientCheckReport r = check_gradient(c.environment, c.density, 1000, 1, kGradientRel);
  return {r.samples == 1000 && r.failures == 0 && r.max_rel_error <= kGradientRel,
          std::to_string(r.samples) + " points, max rel error " + fmt("%.3g", r.max_rel_error) +
              ", failures " + std::to_string(r.failures)};
}

Outcome smooth_step_identities() {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(-0.25, 1.25);
  double worst_sym = 0.0;
  bool monotone = true;
  for (int i = 0; i < 10000; ++i) {
    const double t = u(rng);
    worst_sym = std::max(worst_sym, std::abs(smooth_step(t) + smooth_step(1.0 - t) - 1.0));
    const double s = u(rng);
    const double lo = std::min(t, s), hi = std::max(t, s);
    if (smooth_step(lo) > smooth_step(hi)) monotone = false;
  }
  const Obstacle ob{Vec2::Zero(), 1.0, 3.0};
  const double b0 = bump(ob, Vec2(1.0, 0.0));
  const double bh = bump(ob, Vec2(1.0, 2.0));
  const double b1 = bump(ob, Vec2(0.0, 3.0));
  const bool bounds = std::abs(b0) <= kStepIdentityTol && std::abs(bh - 0.5) <= kStepIdentityTol &&
                      std::abs(b1 - 1.0) <= kStepIdentityTol;
  return {worst_sym <= kStepIdentityTol && monotone && bounds,
          "symmetry max error " + fmt("%.3g", worst_sym) + ", monotone " + (monotone ? "yes" : "no") +
              ", bump boundary values " + fmt("%.17g", b0) + "/" + fmt("%.17g", bh) + "/" +
              fmt("%.17g", b1)};
}

Outcome mpc_oracle() {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> uh(1, 5);
  std::normal_distribution<double> n(0.0, 0.05);
  const BodyModel m;
  double worst = 0.0;
  bool monotone = true;
  for (int trial = 0; trial < 100; ++trial) {
    TrackerConfig cfg;
    cfg.horizon = static_cast<std::size_t>(uh(rng));
    cfg.u_max = Eigen::Vector2d(1e9, 1e9);
    cfg.solver_tol = 1e-10;
    cfg.solver_max_iters = 200000;
    const Vec4 z0(n(rng), n(rng), n(rng), n(rng));
    std::vector<Vec4> ref;
    for (std::size_t k = 0; k < cfg.horizon; ++k) ref.emplace_back(n(rng), n(rng), n(rng), n(rng));
    const Eigen::VectorXd oracle = fixtures::mpc_normal_equation(m, cfg, z0, ref);
    const MpcSolution sol = mpc_step(m, cfg, z0, ref, nullptr, true);
    worst = std::max(worst, (sol.inputs - oracle).norm() / oracle.norm());
    for (std::size_t i = 1; i < sol.cost_history.size(); ++i)
      if (sol.cost_history[i] > sol.cost_history[i - 1] + 1e-12 * std::abs(sol.cost_history[i - 1]))
        monotone = false;
  }
  return {worst <= kMpcRel && monotone, "100 instances, max rel error " + fmt("%.3g", worst) +
                                            ", cost non-increasing " + (monotone ? "yes" : "no")};
}

Outcome tracking_property() {
  const Config c = fixtures::shipped_config("fig2a.json");
  const Trajectory plan = integrate_plan(c.environment, c.density, c.planner, Vec2(-1.0, -2.0));
  const auto t0 = std::chrono::steady_clock::now();
  const Vec4 z0(plan.samples[0].x.x(), plan.samples[0].x.y(), plan.samples[0].u.x(),
                plan.samples[0].u.y());
  const TrackingResult res = track_reference(c.tracker.model, c.tracker.mpc, z0, plan);
  const double secs = seconds_since(t0);
  const double length = path_length(plan);

  // Transverse input while the reference is inside a sensing ball.
  std::vector<double> uy_near;
  for (std::size_t i = 0; i < res.inputs.size(); ++i) {
    const Vec2& x = plan.samples[i].x;
    for (const auto& ob : c.environment.obstacles)
      if (ob.distance(x) <= ob.radius_sense) {
        uy_near.push_back(res.inputs[i].y());
        break;
      }
  }
  const std::size_t flips = cli::sign_changes(uy_near);
  return {plan.terminal_status == TerminalStatus::Converged &&
              res.rms_error < kTrackingRmsFraction * length && flips >= 1 &&
              secs < kRuntimeBudgetTracking,
          "RMS " + fmt("%.4g", res.rms_error) + " over path " + fmt("%.4g", length) + " (" +
              fmt("%.3g", res.rms_error / length) + "), u_y sign changes near obstacles " +
              std::to_string(flips) + ", " + fmt("%.2f", secs) + " s"};
}

Outcome grf_distributor() {
  const Config c = fixtures::shipped_config("fig2a.json");
  const BodyModel& m = c.tracker.model;
  const Stance& stance = c.tracker.stance;
  Vec6 w = cli::gravity_compensation_wrench(m);
  const GrfSolution sym = distribute_grf(stance, w, 1e-9, PgSettings{1e-10, 200000});
  double force_err = 0.0;
  for (const auto& f : sym.forces)
    force_err = std::max(force_err, (f - Vec3(0, 0, w(2) / 4.0)).norm());

  bool feasible = sym.cone_feasible;
  std::mt19937_64 rng(77);
  std::normal_distribution<double> n(0.0, 80.0);
  std::uniform_real_distribution<double> umu(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    Stance st = stance;
    st.friction_mu = umu(rng);
    if (trial % 4 == 0) st.feet[trial % 3].in_contact = false;
    Vec6 wr;
    for (int i = 0; i < 6; ++i) wr(i) = n(rng);
    const GrfSolution s = distribute_grf(st, wr, 1e-6, PgSettings{1e-8, 20000});
    for (std::size_t i = 0; i < s.forces.size(); ++i) {
      if (!in_friction_pyramid(s.forces[i], st.friction_mu)) feasible = false;
      if (!st.feet[i].in_contact && s.forces[i] != Vec3::Zero()) feasible = false;
    }
  }

  std::uniform_real_distribution<double> ux(0.12, 0.25), ufx(-60.0, 60.0), ufz(60.0, 140.0),
      umy(-8.0, 8.0), umu2(0.3, 0.8);
  double worst_gap = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    fixtures::PlanarGrfInstance in;
    in.feet = {Vec3(ux(rng), 0.0, -0.3), Vec3(-ux(rng), 0.0, -0.3)};
    in.mu = umu2(rng);
    in.fx = ufx(rng);
    in.fz = ufz(rng);
    in.my = umy(rng);
    Stance st;
    st.friction_mu = in.mu;
    st.feet = {{in.feet[0], true}, {in.feet[1], true}};
    Vec6 wr = Vec6::Zero();
    wr(0) = in.fx;
    wr(2) = in.fz;
    wr(4) = in.my;
    const GrfSolution s = distribute_grf(st, wr, in.eps, PgSettings{1e-10, 500000});
    const double oracle = fixtures::planar_grf_grid_oracle(in, 400.0, 21, 12);
    worst_gap = std::max(worst_gap, std::abs(s.objective - oracle) / oracle);
  }
  return {force_err <= kGrfForceTol && sym.equilibrium_residual <= kGrfForceTol && feasible &&
              worst_gap <= kGrfOracleRel,
          "mg/4 error " + fmt("%.3g", force_err) + ", residual " + fmt("%.3g", sym.equilibrium_residual) +
              ", pyramid exact " + (feasible ? "yes" : "no") + ", oracle max rel gap " +
              fmt("%.3g", worst_gap)};
}

Outcome leg_relation() {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> uq(-3.0, 3.0), uknee(0.3, 2.8), uv(-4.0, 4.0),
      ua(-20.0, 20.0);
  double worst_rel = 0.0, worst_fd = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    TwoLinkLeg leg;
    leg.q = Eigen::Vector2d(uq(rng), (trial % 2 ? 1.0 : -1.0) * uknee(rng));
    leg.qd = Eigen::Vector2d(uv(rng), uv(rng));
    const Eigen::Vector2d rdd(ua(rng), ua(rng));
    const Eigen::Vector2d qdd = leg_accel_solve(leg, rdd);
    worst_rel = std::max(worst_rel, (leg.jacobian() * qdd + leg.jacobian_dot() * leg.qd - rdd).norm());
    worst_fd = std::max(worst_fd, (fixtures::leg_fd_foot_accel(leg, qdd) - rdd).norm());
  }
  return {worst_rel <= kLegRelationTol && worst_fd <= kLegFdTol,
          "relation residual " + fmt("%.3g", worst_rel) + ", FD oracle error " + fmt("%.3g", worst_fd)};
}

Outcome determinism() {
  const Config c = fixtures::shipped_config("fig2a.json");
  const Config s = fixtures::shipped_config("fig2a_s2_sweep.json");
  const fs::path a = fixtures::scratch_dir("acceptance_a");
  const fs::path b = fixtures::scratch_dir("acceptance_b");
  cli::cmd_plan(c, std::nullopt, a / "plan", 7);
  cli::cmd_plan(c, std::nullopt, b / "plan", 7);
  cli::cmd_sweep(s, a / "sweep", 7, 1);
  cli::cmd_sweep(s, b / "sweep", 7, 3);
  std::size_t compared = 0, equal = 0;
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (entry.path().extension() != ".csv") continue;
    ++compared;
    const fs::path other = b / fs::relative(entry.path(), a);
    if (fs::exists(other) && fixtures::read_file(entry.path()) == fixtures::read_file(other)) ++equal;
  }
  return {compared == 4 && equal == compared,
          std::to_string(equal) + "/" + std::to_string(compared) + " CSV files byte-identical"};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"1 random-start convergence and safety", random_start_convergence},
      {"2 parameter studies (s2 deviation, alpha smoothness)", parameter_studies},
      {"3 divergence certificate", density_certificate},
      {"4 analytic gradient vs finite differences", gradient_oracle},
      {"5 smooth-step identities", smooth_step_identities},
      {"6 MPC normal-equation oracle", mpc_oracle},
      {"7 tracking of the density reference", tracking_property},
      {"8 GRF distribution", grf_distributor},
      {"9 swing-leg acceleration relation", leg_relation},
      {"10 determinism of plan/sweep outputs", determinism},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("[%s] criterion %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
