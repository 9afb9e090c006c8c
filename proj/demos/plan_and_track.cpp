// Plans around two obstacles with the density feedback field, then tracks
// the plan with the point-mass receding-horizon controller.

#include <cstdio>

#include "densnav/densnav.hpp"

int main() {
  using namespace densnav;

  Environment env;
  env.workspace = {Vec2(-5.0, -10.0), Vec2(15.0, 10.0)};
  env.target = Vec2(10.0, 0.0);
  env.obstacles = {{Vec2(6.0, 3.5), 2.5, 3.0}, {Vec2(3.0, -3.5), 2.5, 3.0}};

  DensityParams params;
  params.alpha = 0.2;
  if (auto report = validate_environment(env, params); !report) {
    for (const auto& f : report.failures) std::fprintf(stderr, "%s\n", f.c_str());
    return 2;
  }

  PlannerConfig cfg;
  const Trajectory plan = integrate_plan(env, params, cfg, Vec2(-1.0, -2.0));
  std::printf("plan: %s in %zu steps, min clearance %.3f\n", to_string(plan.terminal_status),
              plan.size() - 1, min_trajectory_clearance(plan));

  BodyModel model;
  TrackerConfig tracker;
  const auto& s0 = plan.samples.front();
  const TrackingResult res =
      track_reference(model, tracker, Vec4(s0.x.x(), s0.x.y(), s0.u.x(), s0.u.y()), plan);
  std::printf("track: RMS position error %.4g over a %.3f path\n", res.rms_error,
              path_length(plan));
  return 0;
}
