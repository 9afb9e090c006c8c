#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "densnav/env.hpp"
#include "densnav/params.hpp"
#include "densnav/planner.hpp"
#include "densnav/tracker.hpp"

namespace densnav {

using json = nlohmann::json;

class ParseError : public Error {
 public:
  using Error::Error;
};

// Carries every problem found, one message per entry.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> problems)
      : Error(join(problems)), problems_(std::move(problems)) {}
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& p) {
    std::string out;
    for (const auto& s : p) out += (out.empty() ? "" : "; ") + s;
    return out;
  }
  std::vector<std::string> problems_;
};

// Sweep axis: a JSON pointer into the config document and the values it
// takes, e.g. {"path": "/environment/obstacles/1/radius_sense",
// "values": [3, 4, 5]}.
struct SweepAxis {
  std::string path;
  std::vector<double> values;

  bool operator==(const SweepAxis&) const = default;
};

struct SampledStarts {
  Box region;
  std::size_t count = 0;
  std::uint64_t seed = 0;

  bool operator==(const SampledStarts&) const = default;
};

// Initial conditions: an explicit list, or a box sampled uniformly.
struct InitialConditions {
  std::vector<Vec2> points;
  std::optional<SampledStarts> sampled;

  bool operator==(const InitialConditions&) const = default;
};

struct TrackerSection {
  BodyModel model;
  TrackerConfig mpc;
  Stance stance;
  double grf_eps = 1e-9;
  double grf_tol = 1e-10;
  std::size_t grf_max_iters = 200000;

  bool operator==(const TrackerSection&) const = default;
};

struct Config {
  Environment environment;
  DensityParams density;
  PlannerConfig planner;
  TrackerSection tracker;
  std::vector<SweepAxis> sweep;
  InitialConditions initial_conditions;

  bool operator==(const Config&) const = default;
};

namespace detail {

class Reader {
 public:
  std::vector<std::string> problems;

  // Rejects keys outside `allowed`.
  void keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) {
      problems.push_back(where + ": expected an object");
      return;
    }
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : obj.items())
      if (!ok.count(k)) problems.push_back(where + "/" + k + ": unknown key");
  }

  const json* child(const json& obj, const std::string& where, const char* key, bool required) {
    if (!obj.is_object()) return nullptr;
    auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) problems.push_back(where + "/" + key + ": missing required key");
      return nullptr;
    }
    return &*it;
  }

  void number(const json& obj, const std::string& where, const char* key, double& out,
              bool required = true) {
    const json* v = child(obj, where, key, required);
    if (!v) return;
    if (!v->is_number()) {
      problems.push_back(where + "/" + key + ": expected a number");
      return;
    }
    out = v->get<double>();
  }

  template <typename Int>
  void count(const json& obj, const std::string& where, const char* key, Int& out,
             bool required = true) {
    const json* v = child(obj, where, key, required);
    if (!v) return;
    if (!v->is_number_integer() || v->get<std::int64_t>() < 0) {
      problems.push_back(where + "/" + key + ": expected a non-negative integer");
      return;
    }
    out = static_cast<Int>(v->get<std::uint64_t>());
  }

  template <int N>
  void vec(const json& obj, const std::string& where, const char* key,
           Eigen::Matrix<double, N, 1>& out, bool required = true) {
    const json* v = child(obj, where, key, required);
    if (!v) return;
    vec_value(*v, where + "/" + key, out);
  }

  template <int N>
  void vec_value(const json& v, const std::string& where, Eigen::Matrix<double, N, 1>& out) {
    if (!v.is_array() || v.size() != static_cast<std::size_t>(N)) {
      problems.push_back(where + ": expected an array of " + std::to_string(N) + " numbers");
      return;
    }
    for (int i = 0; i < N; ++i) {
      if (!v[static_cast<std::size_t>(i)].is_number()) {
        problems.push_back(where + ": expected an array of " + std::to_string(N) + " numbers");
        return;
      }
      out(i) = v[static_cast<std::size_t>(i)].get<double>();
    }
  }

  void box(const json& obj, const std::string& where, const char* key, Box& out) {
    const json* v = child(obj, where, key, true);
    if (!v) return;
    const std::string w = where + "/" + key;
    keys(*v, w, {"min", "max"});
    vec<2>(*v, w, "min", out.lower);
    vec<2>(*v, w, "max", out.upper);
  }

  void prefix(const std::string& where, const std::vector<std::string>& msgs) {
    for (const auto& m : msgs) problems.push_back(where + ": " + m);
  }
};

inline std::string line_context(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace detail

// Builds a Config from a parsed document. Throws ValidationError listing
// every problem: unknown or missing keys, wrong types, and violated module
// invariants.
inline Config config_from_json(const json& doc) {
  detail::Reader rd;
  Config cfg;
  rd.keys(doc, "", {"environment", "density", "planner", "tracker", "sweep",
                    "initial_conditions"});

  if (const json* env = rd.child(doc, "", "environment", true)) {
    const std::string w = "/environment";
    rd.keys(*env, w, {"workspace", "target", "obstacles"});
    rd.box(*env, w, "workspace", cfg.environment.workspace);
    rd.vec<2>(*env, w, "target", cfg.environment.target);
    if (const json* obs = rd.child(*env, w, "obstacles", false)) {
      if (!obs->is_array()) {
        rd.problems.push_back(w + "/obstacles: expected an array");
      } else {
        for (std::size_t k = 0; k < obs->size(); ++k) {
          const std::string ow = w + "/obstacles/" + std::to_string(k);
          const json& o = (*obs)[k];
          Obstacle ob;
          rd.keys(o, ow, {"center", "radius_unsafe", "radius_sense"});
          rd.vec<2>(o, ow, "center", ob.center);
          rd.number(o, ow, "radius_unsafe", ob.radius_unsafe);
          rd.number(o, ow, "radius_sense", ob.radius_sense);
          cfg.environment.obstacles.push_back(ob);
        }
      }
    }
  }

  if (const json* d = rd.child(doc, "", "density", true)) {
    const std::string w = "/density";
    rd.keys(*d, w, {"alpha", "blend_inner", "blend_outer", "fd_step"});
    rd.number(*d, w, "alpha", cfg.density.alpha);
    rd.number(*d, w, "blend_inner", cfg.density.blend_inner);
    rd.number(*d, w, "blend_outer", cfg.density.blend_outer);
    rd.number(*d, w, "fd_step", cfg.density.fd_step, false);
  }

  if (const json* p = rd.child(doc, "", "planner", true)) {
    const std::string w = "/planner";
    rd.keys(*p, w, {"dt", "convergence_eps", "max_steps", "filter_beta", "filter_window"});
    rd.number(*p, w, "dt", cfg.planner.dt);
    rd.number(*p, w, "convergence_eps", cfg.planner.convergence_eps);
    rd.count(*p, w, "max_steps", cfg.planner.max_steps);
    rd.number(*p, w, "filter_beta", cfg.planner.filter_beta, false);
    rd.count(*p, w, "filter_window", cfg.planner.filter_window, false);
    rd.prefix(w, validate_planner_config(cfg.planner));
  }

  if (const json* t = rd.child(doc, "", "tracker", false)) {
    const std::string w = "/tracker";
    TrackerSection& ts = cfg.tracker;
    rd.keys(*t, w, {"mass", "dt", "gravity", "horizon", "q_weight", "k_weight", "u_max",
                    "solver_tol", "solver_max_iters", "friction_mu", "feet", "grf_eps",
                    "grf_tol", "grf_max_iters"});
    rd.number(*t, w, "mass", ts.model.mass);
    rd.number(*t, w, "dt", ts.model.dt);
    rd.vec<3>(*t, w, "gravity", ts.model.gravity, false);
    rd.count(*t, w, "horizon", ts.mpc.horizon);
    rd.vec<4>(*t, w, "q_weight", ts.mpc.q_weight);
    rd.vec<2>(*t, w, "k_weight", ts.mpc.k_weight);
    rd.vec<2>(*t, w, "u_max", ts.mpc.u_max);
    rd.number(*t, w, "solver_tol", ts.mpc.solver_tol, false);
    rd.count(*t, w, "solver_max_iters", ts.mpc.solver_max_iters, false);
    rd.number(*t, w, "friction_mu", ts.stance.friction_mu, false);
    rd.number(*t, w, "grf_eps", ts.grf_eps, false);
    rd.number(*t, w, "grf_tol", ts.grf_tol, false);
    rd.count(*t, w, "grf_max_iters", ts.grf_max_iters, false);
    if (const json* feet = rd.child(*t, w, "feet", false)) {
      if (!feet->is_array()) {
        rd.problems.push_back(w + "/feet: expected an array");
      } else {
        for (std::size_t i = 0; i < feet->size(); ++i) {
          const std::string fw = w + "/feet/" + std::to_string(i);
          const json& f = (*feet)[i];
          Foot foot;
          rd.keys(f, fw, {"position", "in_contact"});
          rd.vec<3>(f, fw, "position", foot.position);
          if (const json* c = rd.child(f, fw, "in_contact", false)) {
            if (c->is_boolean()) foot.in_contact = c->get<bool>();
            else rd.problems.push_back(fw + "/in_contact: expected a boolean");
          }
          ts.stance.feet.push_back(foot);
        }
      }
    }
    rd.prefix(w, validate_tracker(ts.model, ts.mpc));
    if (!(ts.stance.friction_mu >= 0.0)) rd.problems.push_back(w + ": friction_mu must be non-negative");
    if (!(ts.grf_eps > 0.0)) rd.problems.push_back(w + ": grf_eps must be positive");
  }

  if (const json* s = rd.child(doc, "", "sweep", false)) {
    if (!s->is_array()) {
      rd.problems.push_back("/sweep: expected an array");
    } else {
      for (std::size_t i = 0; i < s->size(); ++i) {
        const std::string aw = "/sweep/" + std::to_string(i);
        const json& a = (*s)[i];
        SweepAxis axis;
        rd.keys(a, aw, {"path", "values"});
        if (const json* p = rd.child(a, aw, "path", true)) {
          if (p->is_string()) axis.path = p->get<std::string>();
          else rd.problems.push_back(aw + "/path: expected a string");
        }
        if (const json* v = rd.child(a, aw, "values", true)) {
          if (!v->is_array() || v->empty()) {
            rd.problems.push_back(aw + "/values: expected a non-empty array of numbers");
          } else {
            for (const auto& x : *v) {
              if (x.is_number()) axis.values.push_back(x.get<double>());
              else rd.problems.push_back(aw + "/values: expected numbers");
            }
          }
        }
        cfg.sweep.push_back(axis);
      }
    }
  }

  if (const json* ic = rd.child(doc, "", "initial_conditions", false)) {
    const std::string w = "/initial_conditions";
    rd.keys(*ic, w, {"points", "sample"});
    if (const json* pts = rd.child(*ic, w, "points", false)) {
      if (!pts->is_array()) {
        rd.problems.push_back(w + "/points: expected an array");
      } else {
        for (std::size_t i = 0; i < pts->size(); ++i) {
          Vec2 p;
          rd.vec_value((*pts)[i], w + "/points/" + std::to_string(i), p);
          cfg.initial_conditions.points.push_back(p);
        }
      }
    }
    if (const json* smp = rd.child(*ic, w, "sample", false)) {
      const std::string sw = w + "/sample";
      SampledStarts s;
      rd.keys(*smp, sw, {"region", "count", "seed"});
      rd.box(*smp, sw, "region", s.region);
      rd.count(*smp, sw, "count", s.count);
      rd.count(*smp, sw, "seed", s.seed);
      cfg.initial_conditions.sampled = s;
    }
  }

  if (rd.problems.empty()) {
    for (auto& m : validate_environment(cfg.environment, cfg.density).failures)
      rd.problems.push_back("/environment: " + m);
    for (std::size_t i = 0; i < cfg.initial_conditions.points.size(); ++i)
      if (cfg.environment.in_unsafe(cfg.initial_conditions.points[i]))
        rd.problems.push_back("/initial_conditions/points/" + std::to_string(i) +
                              ": inside an unsafe set");
  }
  if (!rd.problems.empty()) throw ValidationError(rd.problems);
  return cfg;
}

inline Config parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("config parse error at " + detail::line_context(text, e.byte) + ": " +
                     e.what());
  }
  return config_from_json(doc);
}

inline Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

namespace detail {

template <int N>
json to_array(const Eigen::Matrix<double, N, 1>& v) {
  json a = json::array();
  for (int i = 0; i < N; ++i) a.push_back(v(i));
  return a;
}

inline json box_json(const Box& b) {
  return {{"min", to_array<2>(b.lower)}, {"max", to_array<2>(b.upper)}};
}

}  // namespace detail

inline json config_to_json(const Config& cfg) {
  using detail::to_array;
  json doc;
  json obstacles = json::array();
  for (const auto& ob : cfg.environment.obstacles)
    obstacles.push_back({{"center", to_array<2>(ob.center)},
                         {"radius_unsafe", ob.radius_unsafe},
                         {"radius_sense", ob.radius_sense}});
  doc["environment"] = {{"workspace", detail::box_json(cfg.environment.workspace)},
                        {"target", to_array<2>(cfg.environment.target)},
                        {"obstacles", obstacles}};
  doc["density"] = {{"alpha", cfg.density.alpha},
                    {"blend_inner", cfg.density.blend_inner},
                    {"blend_outer", cfg.density.blend_outer},
                    {"fd_step", cfg.density.fd_step}};
  doc["planner"] = {{"dt", cfg.planner.dt},
                    {"convergence_eps", cfg.planner.convergence_eps},
                    {"max_steps", cfg.planner.max_steps},
                    {"filter_beta", cfg.planner.filter_beta},
                    {"filter_window", cfg.planner.filter_window}};

  const TrackerSection& ts = cfg.tracker;
  json feet = json::array();
  for (const auto& f : ts.stance.feet)
    feet.push_back({{"position", to_array<3>(f.position)}, {"in_contact", f.in_contact}});
  doc["tracker"] = {{"mass", ts.model.mass},
                    {"dt", ts.model.dt},
                    {"gravity", to_array<3>(ts.model.gravity)},
                    {"horizon", ts.mpc.horizon},
                    {"q_weight", to_array<4>(ts.mpc.q_weight)},
                    {"k_weight", to_array<2>(ts.mpc.k_weight)},
                    {"u_max", to_array<2>(ts.mpc.u_max)},
                    {"solver_tol", ts.mpc.solver_tol},
                    {"solver_max_iters", ts.mpc.solver_max_iters},
                    {"friction_mu", ts.stance.friction_mu},
                    {"feet", feet},
                    {"grf_eps", ts.grf_eps},
                    {"grf_tol", ts.grf_tol},
                    {"grf_max_iters", ts.grf_max_iters}};

  json axes = json::array();
  for (const auto& a : cfg.sweep) axes.push_back({{"path", a.path}, {"values", a.values}});
  doc["sweep"] = axes;

  json ic = json::object();
  json pts = json::array();
  for (const auto& p : cfg.initial_conditions.points) pts.push_back(to_array<2>(p));
  ic["points"] = pts;
  if (cfg.initial_conditions.sampled) {
    const auto& s = *cfg.initial_conditions.sampled;
    ic["sample"] = {{"region", detail::box_json(s.region)}, {"count", s.count}, {"seed", s.seed}};
  }
  doc["initial_conditions"] = ic;
  return doc;
}

// Explicit points first, then `count` uniform draws from the sample region.
// The draw sequence depends only on the seed.
inline std::vector<Vec2> initial_states(const InitialConditions& ic) {
  std::vector<Vec2> out = ic.points;
  if (ic.sampled) {
    const auto& s = *ic.sampled;
    std::mt19937_64 rng(s.seed);
    std::uniform_real_distribution<double> ux(s.region.lower.x(), s.region.upper.x());
    std::uniform_real_distribution<double> uy(s.region.lower.y(), s.region.upper.y());
    for (std::size_t i = 0; i < s.count; ++i) {
      const double x = ux(rng);
      const double y = uy(rng);
      out.emplace_back(x, y);
    }
  }
  return out;
}

// One config per point of the cross product of the sweep axes, the first
// axis varying slowest. Each variant is re-validated.
struct SweepVariant {
  std::string label;
  Config config;
};

inline std::vector<SweepVariant> expand_sweep(const Config& base) {
  std::vector<SweepVariant> out;
  const json doc = config_to_json(base);
  std::vector<std::size_t> idx(base.sweep.size(), 0);
  while (true) {
    json variant = doc;
    std::string label;
    for (std::size_t a = 0; a < base.sweep.size(); ++a) {
      const auto& axis = base.sweep[a];
      json::json_pointer ptr;
      try {
        ptr = json::json_pointer(axis.path);
      } catch (const json::exception& e) {
        throw ValidationError({"/sweep/" + std::to_string(a) + "/path: " + e.what()});
      }
      if (!variant.contains(ptr))
        throw ValidationError({"/sweep/" + std::to_string(a) + "/path: " + axis.path +
                               " does not name a config value"});
      const double value = axis.values[idx[a]];
      if (std::floor(value) == value && std::abs(value) < 1e15)
        variant[ptr] = static_cast<std::int64_t>(value);
      else
        variant[ptr] = value;
      std::ostringstream os;
      os << axis.path << "=" << axis.values[idx[a]];
      label += (label.empty() ? "" : ",") + os.str();
    }
    variant["sweep"] = json::array();
    out.push_back({label, config_from_json(variant)});
    out.back().config.sweep = base.sweep;

    std::size_t a = base.sweep.size();
    while (a > 0) {
      --a;
      if (++idx[a] < base.sweep[a].values.size()) break;
      idx[a] = 0;
      if (a == 0) return out;
    }
    if (base.sweep.empty()) return out;
  }
}

}  // namespace densnav
