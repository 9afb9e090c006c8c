#pragma once

// Subcommands behind the densnav command-line tool. Each returns a RunReport
// and writes its artifacts under the output directory; main() only parses
// flags and prints.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "densnav/config.hpp"
#include "densnav/density.hpp"
#include "densnav/io.hpp"
#include "densnav/planner.hpp"
#include "densnav/tracker.hpp"

namespace densnav::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kSuccess = 0, kRunFailure = 1, kConfigError = 2 };

struct RunReport {
  std::string command;
  int exit_code = kSuccess;
  json body = json::object();
  std::vector<std::string> artifacts;
  std::string summary;  // human-readable, for standard output
};

namespace detail {

inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json vec_json(const Vec2& v) { return json::array({v.x(), v.y()}); }

inline void finish(RunReport& report, const fs::path& out_dir) {
  report.body["command"] = report.command;
  report.body["exit_code"] = report.exit_code;
  const fs::path path = out_dir / "report.json";
  report.artifacts.push_back(path.string());
  report.body["artifacts"] = report.artifacts;
  write_text(path.string(), report.body.dump(2) + "\n");
}

inline void write_artifact(RunReport& report, const fs::path& path, const std::string& text) {
  write_text(path.string(), text);
  report.artifacts.push_back(path.string());
}

inline std::vector<Vec2> starts_for(const Config& cfg, std::optional<std::uint64_t> seed) {
  InitialConditions ic = cfg.initial_conditions;
  if (seed && ic.sampled) ic.sampled->seed = *seed;
  return initial_states(ic);
}

inline json trajectory_summary(const Environment& env, const Trajectory& tr) {
  return {{"status", to_string(tr.terminal_status)},
          {"steps", tr.size() - 1},
          {"final_state", vec_json(tr.final_state())},
          {"min_clearance", number_or_null(min_trajectory_clearance(tr))},
          {"unsafe_occupancy_s", unsafe_occupancy(env, tr)},
          {"max_turning_angle_rad", max_turning_angle(tr)}};
}

}  // namespace detail

// Plans from x0 (or the first configured initial condition) and writes
// plan.csv. When the planner section asks for smoothing, the filtered
// reference is written to plan_filtered.csv as well.
inline RunReport cmd_plan(const Config& cfg, std::optional<Vec2> x0, const fs::path& out_dir,
                          std::optional<std::uint64_t> seed = std::nullopt) {
  RunReport report;
  report.command = "plan";
  fs::create_directories(out_dir);
  if (!x0) {
    const auto starts = detail::starts_for(cfg, seed);
    if (starts.empty()) {
      report.exit_code = kConfigError;
      report.body["error"] = "no initial condition given";
      report.summary = "plan: no initial condition given (use --x0 or initial_conditions)";
      detail::finish(report, out_dir);
      return report;
    }
    x0 = starts.front();
  }
  report.body["x0"] = detail::vec_json(*x0);

  Trajectory tr;
  try {
    tr = integrate_plan(cfg.environment, cfg.density, cfg.planner, *x0);
  } catch (const InvalidStartError& e) {
    report.exit_code = kRunFailure;
    report.body["status"] = "InvalidStart";
    report.body["error"] = e.what();
    report.summary = std::string("plan: InvalidStart: ") + e.what();
    detail::finish(report, out_dir);
    return report;
  }

  detail::write_artifact(report, out_dir / "plan.csv", trajectory_csv(tr));
  if (cfg.planner.filter_beta < 1.0 || cfg.planner.filter_window > 1) {
    Trajectory smooth = first_order_filter(tr, cfg.planner.filter_beta);
    if (cfg.planner.filter_window > 1 && cfg.planner.filter_window <= smooth.size())
      smooth = moving_average(smooth, cfg.planner.filter_window);
    annotate_clearance(cfg.environment, smooth);
    detail::write_artifact(report, out_dir / "plan_filtered.csv", trajectory_csv(smooth));
  }

  report.body.update(detail::trajectory_summary(cfg.environment, tr));
  report.exit_code = tr.terminal_status == TerminalStatus::Converged ? kSuccess : kRunFailure;
  std::ostringstream os;
  os << "plan: " << to_string(tr.terminal_status) << " after " << tr.size() - 1
     << " steps, min clearance " << format_number(min_trajectory_clearance(tr))
     << ", unsafe occupancy " << format_number(unsafe_occupancy(cfg.environment, tr)) << " s";
  report.summary = os.str();
  detail::finish(report, out_dir);
  return report;
}

// Runs the cross product of the sweep axes from every initial condition.
// Writes run_<case>_<start>.csv per run plus the aggregate report.
inline RunReport cmd_sweep(const Config& cfg, const fs::path& out_dir,
                           std::optional<std::uint64_t> seed = std::nullopt,
                           unsigned workers = std::max(1u, std::thread::hardware_concurrency())) {
  RunReport report;
  report.command = "sweep";
  fs::create_directories(out_dir);
  auto fail_config = [&](const std::string& msg) {
    report.exit_code = kConfigError;
    report.body["error"] = msg;
    report.summary = "sweep: " + msg;
    detail::finish(report, out_dir);
    return report;
  };
  if (cfg.sweep.empty()) return fail_config("config has no sweep axes");

  std::vector<SweepVariant> variants;
  try {
    variants = expand_sweep(cfg);
  } catch (const ValidationError& e) {
    return fail_config(e.what());
  }
  const auto starts = detail::starts_for(cfg, seed);
  if (starts.empty()) return fail_config("no initial conditions configured");
  if (cfg.initial_conditions.sampled)
    report.body["seed"] = seed.value_or(cfg.initial_conditions.sampled->seed);

  std::vector<SweepCase> cases;
  for (const auto& v : variants)
    cases.push_back({v.label, v.config.environment, v.config.density, v.config.planner});
  const SweepReport sw = sweep(cases, starts, workers);

  json runs = json::array();
  bool all_converged = true;
  for (const auto& run : sw.runs) {
    json r = {{"case", run.case_index}, {"start", run.start_index},
              {"x0", detail::vec_json(starts[run.start_index])}};
    if (run.trajectory) {
      const std::string name =
          "run_" + std::to_string(run.case_index) + "_" + std::to_string(run.start_index) + ".csv";
      detail::write_artifact(report, out_dir / name, trajectory_csv(*run.trajectory));
      r["csv"] = name;
      r.update(detail::trajectory_summary(cases[run.case_index].env, *run.trajectory));
      if (run.trajectory->terminal_status != TerminalStatus::Converged) all_converged = false;
    } else {
      r["status"] = "Error";
      r["error"] = run.error;
      all_converged = false;
    }
    runs.push_back(r);
  }

  json case_list = json::array();
  for (std::size_t c = 0; c < cases.size(); ++c) {
    const auto& s = sw.cases[c];
    case_list.push_back({{"label", cases[c].label},
                         {"runs", s.runs},
                         {"converged", s.converged},
                         {"convergence_rate", s.convergence_rate},
                         {"min_clearance", detail::number_or_null(s.min_clearance)},
                         {"unsafe_occupancy_s", s.unsafe_occupancy},
                         {"max_turning_angle_rad", s.max_turning_angle}});
  }
  json deviation = json::array();
  for (const auto& row : sw.deviation) {
    json r = json::array();
    for (double d : row) r.push_back(detail::number_or_null(d));
    deviation.push_back(r);
  }
  report.body["cases"] = case_list;
  report.body["runs"] = runs;
  report.body["deviation"] = deviation;
  report.exit_code = all_converged ? kSuccess : kRunFailure;

  std::ostringstream os;
  os << "sweep: " << cases.size() << " case(s) x " << starts.size() << " start(s)\n";
  for (std::size_t c = 0; c < cases.size(); ++c)
    os << "  [" << c << "] " << cases[c].label << ": converged " << sw.cases[c].converged << "/"
       << sw.cases[c].runs << ", min clearance " << format_number(sw.cases[c].min_clearance)
       << ", max turning angle " << format_number(sw.cases[c].max_turning_angle) << " rad\n";
  os << "  deviation matrix:\n";
  for (const auto& row : sw.deviation) {
    os << "   ";
    for (double d : row) os << ' ' << format_number(d);
    os << '\n';
  }
  report.summary = os.str();
  detail::finish(report, out_dir);
  return report;
}

// Samples the divergence certificate on a grid and cross-checks the
// analytic gradient against finite differences.
inline RunReport cmd_verify(const Config& cfg, double grid_spacing, const fs::path& out_dir,
                            std::uint64_t seed = 0, std::size_t gradient_samples = 1000) {
  RunReport report;
  report.command = "verify";
  fs::create_directories(out_dir);
  if (!(grid_spacing > 0.0)) {
    report.exit_code = kConfigError;
    report.body["error"] = "grid spacing must be positive";
    report.summary = "verify: grid spacing must be positive";
    detail::finish(report, out_dir);
    return report;
  }
  const DivergenceReport div = check_divergence(cfg.environment, cfg.density, grid_spacing);
  if (div.samples_total == 0) {
    report.exit_code = kConfigError;
    report.body["error"] = "no samples";
    report.summary = "verify: no samples (grid spacing " + format_number(grid_spacing) +
                     " leaves no admissible grid node)";
    detail::finish(report, out_dir);
    return report;
  }
  const GradientCheckReport grad =
      check_gradient(cfg.environment, cfg.density, gradient_samples, seed);

  report.body["grid_spacing"] = grid_spacing;
  report.body["divergence"] = {{"samples_total", div.samples_total},
                               {"samples_positive", div.samples_positive},
                               {"positive_fraction", div.positive_fraction()},
                               {"min_value", div.min_value},
                               {"worst_point", detail::vec_json(div.worst_point)}};
  report.body["gradient_check"] = {{"samples", grad.samples},
                                   {"seed", seed},
                                   {"fd_step", cfg.density.fd_step},
                                   {"max_rel_error", grad.max_rel_error},
                                   {"max_abs_error", grad.max_abs_error},
                                   {"failures_above_1e-6", grad.failures},
                                   {"worst_point", detail::vec_json(grad.worst_point)}};
  std::ostringstream os;
  os << "verify: divergence positive at " << div.samples_positive << "/" << div.samples_total
     << " samples (" << format_number(div.positive_fraction()) << "), min "
     << format_number(div.min_value) << "\n        gradient max relative error "
     << format_number(grad.max_rel_error) << " over " << grad.samples << " points";
  report.summary = os.str();
  detail::finish(report, out_dir);
  return report;
}

// Number of sign changes in a sequence, ignoring entries with magnitude
// at or below `dead_band`.
inline std::size_t sign_changes(const std::vector<double>& v, double dead_band = 1e-9) {
  std::size_t changes = 0;
  int last = 0;
  for (double x : v) {
    const int s = x > dead_band ? 1 : (x < -dead_band ? -1 : 0);
    if (s == 0) continue;
    if (last != 0 && s != last) ++changes;
    last = s;
  }
  return changes;
}

// Tracks a plan CSV with the point-mass receding-horizon controller and
// writes track.csv. A plan whose spacing differs from the tracker dt is
// rejected unless `allow_resample` is set.
inline RunReport cmd_track(const Config& cfg, const fs::path& plan_csv, const fs::path& out_dir,
                           bool allow_resample = false) {
  RunReport report;
  report.command = "track";
  fs::create_directories(out_dir);
  const BodyModel& model = cfg.tracker.model;
  auto fail = [&](int code, const std::string& msg) {
    report.exit_code = code;
    report.body["error"] = msg;
    report.summary = "track: " + msg;
    detail::finish(report, out_dir);
    return report;
  };

  LoadedTrajectory loaded;
  try {
    loaded = load_trajectory_csv(plan_csv.string(), model.dt);
  } catch (const CsvError& e) {
    return fail(kConfigError, e.what());
  }
  Trajectory reference = loaded.trajectory;
  const bool dt_matches = std::abs(reference.dt - model.dt) <= 1e-9 * std::max(1.0, model.dt);
  bool resampled = false;
  if (!dt_matches || !loaded.uniform) {
    if (!allow_resample)
      return fail(kRunFailure, "plan spacing " + format_number(reference.dt) +
                                   " s does not match tracker dt " + format_number(model.dt) +
                                   " s (pass --resample to interpolate)");
    reference = resample(reference, model.dt);
    resampled = true;
  }
  reference.dt = model.dt;

  const Vec4 z0(reference.samples[0].x.x(), reference.samples[0].x.y(),
                reference.samples[0].u.x(), reference.samples[0].u.y());
  TrackingResult res;
  try {
    res = track_reference(model, cfg.tracker.mpc, z0, reference);
  } catch (const Error& e) {
    return fail(kRunFailure, e.what());
  }
  detail::write_artifact(report, out_dir / "track.csv", tracking_csv(res));

  std::vector<double> uy;
  for (const auto& u : res.inputs) uy.push_back(u.y());
  const double length = path_length(reference);
  report.body["resampled"] = resampled;
  report.body["samples"] = res.t.size();
  report.body["rms_error"] = res.rms_error;
  report.body["path_length"] = length;
  report.body["rms_error_over_path_length"] = length > 0.0 ? json(res.rms_error / length) : json(nullptr);
  report.body["unconverged_steps"] = res.unconverged_steps;
  report.body["uy_sign_changes"] = sign_changes(uy);

  std::ostringstream os;
  os << "track: " << res.t.size() << " steps" << (resampled ? " (resampled)" : "")
     << ", RMS error " << format_number(res.rms_error) << " over path length "
     << format_number(length) << ", u_y sign changes " << sign_changes(uy);
  report.summary = os.str();
  detail::finish(report, out_dir);
  return report;
}

// Gravity compensation: the wrench that cancels m g with no moment.
inline Vec6 gravity_compensation_wrench(const BodyModel& model) {
  Vec6 w = Vec6::Zero();
  w.head<3>() = -model.mass * model.gravity;
  return w;
}

inline RunReport cmd_grf(const Config& cfg, std::optional<Vec6> wrench, const fs::path& out_dir) {
  RunReport report;
  report.command = "grf";
  fs::create_directories(out_dir);
  const TrackerSection& ts = cfg.tracker;
  const Vec6 w = wrench.value_or(gravity_compensation_wrench(ts.model));
  json wj = json::array();
  for (int i = 0; i < 6; ++i) wj.push_back(w(i));
  report.body["wrench_des"] = wj;

  if (ts.stance.feet.empty()) {
    report.exit_code = kConfigError;
    report.body["error"] = "tracker.feet is empty";
    report.summary = "grf: tracker.feet is empty";
    detail::finish(report, out_dir);
    return report;
  }

  GrfSolution sol;
  try {
    sol = distribute_grf(ts.stance, w, ts.grf_eps, PgSettings{ts.grf_tol, ts.grf_max_iters});
  } catch (const NoContactsError& e) {
    report.exit_code = kRunFailure;
    report.body["error"] = e.what();
    report.summary = std::string("grf: NoContacts: ") + e.what();
    detail::finish(report, out_dir);
    return report;
  }

  json forces = json::array();
  std::ostringstream os;
  os << "grf: per-foot forces [N]\n";
  for (std::size_t i = 0; i < sol.forces.size(); ++i) {
    const Vec3& f = sol.forces[i];
    forces.push_back({{"foot", i},
                      {"in_contact", ts.stance.feet[i].in_contact},
                      {"force", json::array({f.x(), f.y(), f.z()})},
                      {"in_pyramid", in_friction_pyramid(f, ts.stance.friction_mu)}});
    os << "  foot " << i << (ts.stance.feet[i].in_contact ? " (stance)" : " (swing) ") << ": "
       << format_number(f.x()) << ", " << format_number(f.y()) << ", " << format_number(f.z())
       << '\n';
  }
  os << "  residual " << format_number(sol.equilibrium_residual) << ", cone feasible "
     << (sol.cone_feasible ? "yes" : "no") << ", iterations " << sol.iterations;
  report.body["forces"] = forces;
  report.body["equilibrium_residual"] = sol.equilibrium_residual;
  report.body["cone_feasible"] = sol.cone_feasible;
  report.body["converged"] = sol.converged;
  report.body["iterations"] = sol.iterations;
  report.summary = os.str();
  detail::finish(report, out_dir);
  return report;
}

}  // namespace densnav::cli
