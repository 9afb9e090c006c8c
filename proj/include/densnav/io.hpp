#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "densnav/errors.hpp"
#include "densnav/planner.hpp"
#include "densnav/tracker.hpp"

namespace densnav {

inline constexpr const char* kTrajectoryHeader = "t,x,y,ux,uy,clearance";
inline constexpr const char* kTrackingHeader = "t,px,py,vx,vy,ux,uy,err";

// Nine significant digits, C locale.
inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline std::string trajectory_csv(const Trajectory& traj) {
  std::string out = kTrajectoryHeader;
  out += '\n';
  for (const auto& s : traj.samples) {
    out += format_number(s.t) + ',' + format_number(s.x.x()) + ',' + format_number(s.x.y()) +
           ',' + format_number(s.u.x()) + ',' + format_number(s.u.y()) + ',' +
           format_number(s.clearance) + '\n';
  }
  return out;
}

inline std::string tracking_csv(const TrackingResult& res) {
  std::string out = kTrackingHeader;
  out += '\n';
  for (std::size_t i = 0; i < res.t.size(); ++i) {
    const Vec4& z = res.states[i];
    const Eigen::Vector2d& u = res.inputs[i];
    out += format_number(res.t[i]) + ',' + format_number(z(0)) + ',' + format_number(z(1)) +
           ',' + format_number(z(2)) + ',' + format_number(z(3)) + ',' + format_number(u.x()) +
           ',' + format_number(u.y()) + ',' + format_number(res.errors[i]) + '\n';
  }
  return out;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
  if (!out) throw Error("failed writing " + path);
}

class CsvError : public Error {
 public:
  using Error::Error;
};

// Reads a trajectory CSV. The time step is taken from the first two rows
// (or `fallback_dt` for a single row); `uniform` reports whether every
// spacing matches it.
struct LoadedTrajectory {
  Trajectory trajectory;
  bool uniform = true;
};

inline LoadedTrajectory parse_trajectory_csv(const std::string& text, double fallback_dt) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kTrajectoryHeader)
    throw CsvError(std::string("trajectory CSV must start with header '") + kTrajectoryHeader + "'");
  LoadedTrajectory out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string cell;
    double v[6];
    int n = 0;
    while (std::getline(fields, cell, ',')) {
      if (n == 6) break;
      try {
        std::size_t used = 0;
        v[n] = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw CsvError("row " + std::to_string(row) + ": bad number '" + cell + "'");
      }
      ++n;
    }
    if (n != 6) throw CsvError("row " + std::to_string(row) + ": expected 6 fields");
    out.trajectory.samples.push_back({v[0], Vec2(v[1], v[2]), Vec2(v[3], v[4]), v[5]});
  }
  auto& s = out.trajectory.samples;
  if (s.empty()) throw CsvError("trajectory CSV has no rows");
  out.trajectory.dt = s.size() > 1 ? s[1].t - s[0].t : fallback_dt;
  if (!(out.trajectory.dt > 0.0)) throw CsvError("timestamps must increase");
  // Tolerance covers the nine-digit rounding of the timestamps.
  const double tol = 1e-6 * std::max(1.0, std::abs(s.back().t));
  for (std::size_t i = 1; i < s.size(); ++i) {
    const double expected = s[0].t + static_cast<double>(i) * out.trajectory.dt;
    if (std::abs(s[i].t - expected) > tol) out.uniform = false;
  }
  return out;
}

inline LoadedTrajectory load_trajectory_csv(const std::string& path, double fallback_dt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CsvError("cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_trajectory_csv(buf.str(), fallback_dt);
}

// Linear interpolation of positions and commands onto a grid of spacing dt
// starting at the first sample and not extending past the last one.
inline Trajectory resample(const Trajectory& traj, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("resample dt must be positive");
  Trajectory out;
  out.dt = dt;
  out.terminal_status = traj.terminal_status;
  const auto& s = traj.samples;
  if (s.empty()) return out;
  const double t0 = s.front().t;
  const double t_end = s.back().t;
  std::size_t j = 0;
  for (std::size_t i = 0;; ++i) {
    const double t = t0 + static_cast<double>(i) * dt;
    if (t > t_end + 1e-12) break;
    while (j + 1 < s.size() && s[j + 1].t < t) ++j;
    TrajectorySample smp;
    smp.t = t;
    if (j + 1 >= s.size()) {
      smp.x = s.back().x;
      smp.u = s.back().u;
      smp.clearance = s.back().clearance;
    } else {
      const double span = s[j + 1].t - s[j].t;
      const double w = span > 0.0 ? std::clamp((t - s[j].t) / span, 0.0, 1.0) : 0.0;
      smp.x = (1.0 - w) * s[j].x + w * s[j + 1].x;
      smp.u = (1.0 - w) * s[j].u + w * s[j + 1].u;
      smp.clearance = (1.0 - w) * s[j].clearance + w * s[j + 1].clearance;
    }
    out.samples.push_back(smp);
  }
  return out;
}

}  // namespace densnav
