#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "densnav/commands.hpp"

namespace {

using densnav::cli::RunReport;

template <std::size_t N>
std::optional<std::vector<double>> parse_list(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string cell = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(cell, &used));
      if (used != cell.size()) return std::nullopt;
    } catch (const std::exception&) {
      return std::nullopt;
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (out.size() != N) return std::nullopt;
  return out;
}

int emit(const RunReport& report) {
  if (!report.summary.empty()) {
    (report.exit_code == 0 ? std::cout : std::cerr) << report.summary << '\n';
  }
  return report.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"densnav: density-function motion planning and tracking"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Configuration file (JSON)")->required();
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--seed", seed, "Seed for sampled initial conditions / checks");
  };

  auto* plan = app.add_subcommand("plan", "Integrate the density feedback plan from one start");
  common(plan);
  std::string x0_text;
  plan->add_option("--x0", x0_text, "Start point 'x,y' (default: first initial condition)");

  auto* sweep = app.add_subcommand("sweep", "Run the cross product of the configured sweep axes");
  common(sweep);
  unsigned workers = 0;
  sweep->add_option("--workers", workers, "Worker threads (default: hardware concurrency)");

  auto* verify = app.add_subcommand("verify", "Check the divergence certificate and the gradient");
  common(verify);
  double grid_spacing = 0.05;
  verify->add_option("--grid", grid_spacing, "Grid spacing for the divergence check");

  auto* track = app.add_subcommand("track", "Track a plan CSV with the point-mass MPC");
  common(track);
  std::string plan_csv;
  bool resample = false;
  track->add_option("--plan", plan_csv, "Plan CSV written by 'plan'")->required();
  track->add_flag("--resample", resample, "Interpolate the plan onto the tracker time step");

  auto* grf = app.add_subcommand("grf", "Distribute a body wrench over the configured stance");
  common(grf);
  std::string wrench_text;
  grf->add_option("--wrench", wrench_text,
                  "Desired wrench 'fx,fy,fz,mx,my,mz' (default: gravity compensation)");

  CLI11_PARSE(app, argc, argv);

  densnav::Config cfg;
  try {
    cfg = densnav::load_config(config_path);
  } catch (const densnav::ValidationError& e) {
    std::cerr << "config error:\n";
    for (const auto& p : e.problems()) std::cerr << "  " << p << '\n';
    return densnav::cli::kConfigError;
  } catch (const densnav::Error& e) {
    std::cerr << e.what() << '\n';
    return densnav::cli::kConfigError;
  }

  try {
    if (plan->parsed()) {
      std::optional<densnav::Vec2> x0;
      if (!x0_text.empty()) {
        const auto v = parse_list<2>(x0_text);
        if (!v) {
          std::cerr << "--x0 expects 'x,y'\n";
          return densnav::cli::kConfigError;
        }
        x0 = densnav::Vec2((*v)[0], (*v)[1]);
      }
      return emit(densnav::cli::cmd_plan(cfg, x0, out_dir, seed));
    }
    if (sweep->parsed()) {
      if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
      return emit(densnav::cli::cmd_sweep(cfg, out_dir, seed, workers));
    }
    if (verify->parsed()) return emit(densnav::cli::cmd_verify(cfg, grid_spacing, out_dir, seed.value_or(0)));
    if (track->parsed()) return emit(densnav::cli::cmd_track(cfg, plan_csv, out_dir, resample));
    if (grf->parsed()) {
      std::optional<densnav::Vec6> wrench;
      if (!wrench_text.empty()) {
        const auto v = parse_list<6>(wrench_text);
        if (!v) {
          std::cerr << "--wrench expects six comma-separated numbers\n";
          return densnav::cli::kConfigError;
        }
        wrench = densnav::Vec6(v->data());
      }
      return emit(densnav::cli::cmd_grf(cfg, wrench, out_dir));
    }
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return densnav::cli::kRunFailure;
  }
  return densnav::cli::kConfigError;
}
