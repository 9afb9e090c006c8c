#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Dense>

#include "densnav/errors.hpp"
#include "densnav/planner.hpp"
#include "densnav/projected_gradient.hpp"

namespace densnav {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;

struct BodyModel {
  double mass = 12.0;
  double dt = 0.01;
  Vec3 gravity = Vec3(0.0, 0.0, -9.81);

  bool operator==(const BodyModel& o) const {
    return mass == o.mass && dt == o.dt && gravity == o.gravity;
  }
};

struct TrackerConfig {
  std::size_t horizon = 10;
  Vec4 q_weight = Vec4(1e4, 1e4, 10.0, 10.0);  // px, py, vx, vy
  Eigen::Vector2d k_weight = Eigen::Vector2d(1e-4, 1e-4);
  Eigen::Vector2d u_max = Eigen::Vector2d(50.0, 50.0);
  double solver_tol = 1e-8;
  std::size_t solver_max_iters = 5000;

  bool operator==(const TrackerConfig& o) const {
    return horizon == o.horizon && q_weight == o.q_weight && k_weight == o.k_weight &&
           u_max == o.u_max && solver_tol == o.solver_tol &&
           solver_max_iters == o.solver_max_iters;
  }
};

inline std::vector<std::string> validate_tracker(const BodyModel& model,
                                                 const TrackerConfig& cfg) {
  std::vector<std::string> failures;
  if (!(model.mass > 0.0)) failures.emplace_back("mass must be positive");
  if (!(model.dt > 0.0)) failures.emplace_back("dt must be positive");
  if (cfg.horizon < 1) failures.emplace_back("horizon must be at least 1");
  if (!(cfg.q_weight.array() >= 0.0).all())
    failures.emplace_back("q_weight entries must be non-negative");
  if (!(cfg.k_weight.array() > 0.0).all())
    failures.emplace_back("k_weight entries must be positive");
  if (!(cfg.u_max.array() >= 0.0).all())
    failures.emplace_back("u_max entries must be non-negative");
  if (!(cfg.solver_tol > 0.0)) failures.emplace_back("solver_tol must be positive");
  return failures;
}

// ---------------------------------------------------------------------------
// Centroidal dynamics and contact forces
// ---------------------------------------------------------------------------

struct Foot {
  Vec3 position = Vec3::Zero();  // relative to the centre of mass
  bool in_contact = true;

  bool operator==(const Foot& o) const {
    return position == o.position && in_contact == o.in_contact;
  }
};

struct Stance {
  std::vector<Foot> feet;
  double friction_mu = 0.6;

  std::size_t contact_count() const {
    return static_cast<std::size_t>(
        std::count_if(feet.begin(), feet.end(), [](const Foot& f) { return f.in_contact; }));
  }

  bool operator==(const Stance& o) const {
    return feet == o.feet && friction_mu == o.friction_mu;
  }
};

// Rate of centroidal momentum: [sum f_i + m g ; sum r_i x f_i + tau_i] over
// feet in contact. Swing feet are selected out.
inline Vec6 centroidal_rate(const Stance& stance, const std::vector<Vec3>& forces,
                            const std::vector<Vec3>& contact_torques, const BodyModel& model) {
  if (forces.size() != stance.feet.size() || contact_torques.size() != stance.feet.size())
    throw DimensionMismatchError("one force and one torque per foot required");
  Vec6 rate = Vec6::Zero();
  rate.head<3>() = model.mass * model.gravity;
  for (std::size_t i = 0; i < stance.feet.size(); ++i) {
    if (!stance.feet[i].in_contact) continue;
    rate.head<3>() += forces[i];
    rate.tail<3>() += stance.feet[i].position.cross(forces[i]) + contact_torques[i];
  }
  return rate;
}

inline bool in_friction_pyramid(const Vec3& f, double mu) {
  return f.z() >= 0.0 && std::abs(f.x()) <= mu * f.z() && std::abs(f.y()) <= mu * f.z();
}

// Clamp onto the four-face friction pyramid: normal force floored at zero,
// then each tangential component clamped to mu times the normal force.
// Always lands inside the pyramid but is not the nearest point.
inline void clamp_to_pyramid(Eigen::Ref<Eigen::Vector3d> f, double mu) {
  f.z() = std::max(f.z(), 0.0);
  const double lim = mu * f.z();
  f.x() = std::clamp(f.x(), -lim, lim);
  f.y() = std::clamp(f.y(), -lim, lim);
}

// Euclidean projection onto the pyramid |fx| <= mu fz, |fy| <= mu fz.
// The nearest point lies in the interior, on one of the four faces, on one
// of the four edges, or at the apex; every candidate is formed and the
// closest feasible one kept. A final clamp absorbs rounding so the result
// satisfies the constraints exactly.
inline void project_to_pyramid(Eigen::Ref<Eigen::Vector3d> f, double mu) {
  const Eigen::Vector3d p = f;
  const double slack = 1e-12 * std::max(1.0, p.norm());
  auto feasible = [&](const Eigen::Vector3d& c) {
    return c.z() >= -slack && std::abs(c.x()) <= mu * c.z() + slack &&
           std::abs(c.y()) <= mu * c.z() + slack;
  };
  if (feasible(p)) {
    clamp_to_pyramid(f, mu);
    return;
  }

  Eigen::Vector3d best = Eigen::Vector3d::Zero();
  double best_dist = p.squaredNorm();
  auto consider = [&](const Eigen::Vector3d& c) {
    const double d = (c - p).squaredNorm();
    if (d < best_dist && feasible(c)) {
      best = c;
      best_dist = d;
    }
  };
  const double norm = std::sqrt(1.0 + mu * mu);
  for (int axis = 0; axis < 2; ++axis) {
    for (double sign : {1.0, -1.0}) {
      Eigen::Vector3d n = Eigen::Vector3d::Zero();
      n(axis) = sign / norm;
      n.z() = -mu / norm;
      const double dist = n.dot(p);
      if (dist > 0.0) consider(p - dist * n);
    }
  }
  for (double sx : {1.0, -1.0}) {
    for (double sy : {1.0, -1.0}) {
      const Eigen::Vector3d d = Eigen::Vector3d(sx * mu, sy * mu, 1.0).normalized();
      consider(std::max(0.0, d.dot(p)) * d);
    }
  }
  f = best;
  clamp_to_pyramid(f, mu);
}

struct GrfSolution {
  std::vector<Vec3> forces;  // one per foot; zero on swing feet
  double equilibrium_residual = 0.0;
  double objective = 0.0;
  bool cone_feasible = false;
  bool converged = false;
  std::size_t iterations = 0;
};

namespace detail {

// Rows 0-2 sum the contact forces, rows 3-5 sum their moments about the COM.
inline Eigen::MatrixXd wrench_map(const Stance& stance) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(6, 3 * static_cast<Eigen::Index>(stance.contact_count()));
  Eigen::Index col = 0;
  for (const auto& foot : stance.feet) {
    if (!foot.in_contact) continue;
    const Vec3& r = foot.position;
    m.block<3, 3>(0, col) = Eigen::Matrix3d::Identity();
    Eigen::Matrix3d skew;
    skew << 0.0, -r.z(), r.y(), r.z(), 0.0, -r.x(), -r.y(), r.x(), 0.0;
    m.block<3, 3>(3, col) = skew;
    col += 3;
  }
  return m;
}

}  // namespace detail

// Objective used by distribute_grf, exposed for oracles and diagnostics:
// |A f - w|^2 + eps |f|^2 over the forces of feet in contact.
inline double grf_objective(const Stance& stance, const std::vector<Vec3>& forces,
                            const Vec6& wrench_des, double eps) {
  Vec6 achieved = Vec6::Zero();
  double reg = 0.0;
  for (std::size_t i = 0; i < stance.feet.size(); ++i) {
    if (!stance.feet[i].in_contact) continue;
    achieved.head<3>() += forces[i];
    achieved.tail<3>() += stance.feet[i].position.cross(forces[i]);
    reg += forces[i].squaredNorm();
  }
  return (achieved - wrench_des).squaredNorm() + eps * reg;
}

// Distributes a desired body wrench over the feet in contact by projected
// gradient descent on |A f - w|^2 + eps |f|^2. Every iterate is projected
// into the friction pyramid, so the result is always feasible. Swing feet
// carry exactly zero force.
inline GrfSolution distribute_grf(const Stance& stance, const Vec6& wrench_des, double eps,
                                  const PgSettings& settings = {}) {
  if (stance.contact_count() == 0) throw NoContactsError("no foot in contact");
  if (!(eps > 0.0)) throw std::invalid_argument("regularisation eps must be positive");

  const Eigen::MatrixXd a = detail::wrench_map(stance);
  const Eigen::Index n = a.cols();
  // 0.5 f'Hf + g'f equals the objective up to the constant |w|^2.
  const Eigen::MatrixXd h =
      2.0 * (a.transpose() * a + eps * Eigen::MatrixXd::Identity(n, n));
  const Eigen::VectorXd g = -2.0 * a.transpose() * wrench_des;
  const double mu = stance.friction_mu;
  auto project = [mu](Eigen::VectorXd& f) {
    for (Eigen::Index i = 0; i < f.size(); i += 3) project_to_pyramid(f.segment<3>(i), mu);
  };

  PgResult pg = projected_gradient(h, g, Eigen::VectorXd::Zero(n), project, settings);

  GrfSolution sol;
  sol.forces.assign(stance.feet.size(), Vec3::Zero());
  Eigen::Index col = 0;
  for (std::size_t i = 0; i < stance.feet.size(); ++i) {
    if (!stance.feet[i].in_contact) continue;
    sol.forces[i] = pg.x.segment<3>(col);
    col += 3;
  }
  sol.equilibrium_residual = (a * pg.x - wrench_des).norm();
  sol.objective = grf_objective(stance, sol.forces, wrench_des, eps);
  sol.cone_feasible = std::all_of(sol.forces.begin(), sol.forces.end(),
                                  [mu](const Vec3& f) { return in_friction_pyramid(f, mu); });
  sol.converged = pg.converged;
  sol.iterations = pg.iterations;
  return sol;
}

// ---------------------------------------------------------------------------
// Point-mass receding-horizon tracking
// ---------------------------------------------------------------------------

// z+ = A z + B u for the planar point mass, state (px, py, vx, vy), input a
// horizontal force.
struct StepMap {
  Eigen::Matrix4d a;
  Eigen::Matrix<double, 4, 2> b;

  Vec4 apply(const Vec4& z, const Eigen::Vector2d& u) const { return a * z + b * u; }
};

// Exact zero-order-hold discretisation of the double integrator.
inline StepMap discretize_body(const BodyModel& model) {
  const double dt = model.dt;
  StepMap m;
  m.a.setIdentity();
  m.a(0, 2) = dt;
  m.a(1, 3) = dt;
  m.b.setZero();
  m.b(0, 0) = dt * dt / (2.0 * model.mass);
  m.b(1, 1) = dt * dt / (2.0 * model.mass);
  m.b(2, 0) = dt / model.mass;
  m.b(3, 1) = dt / model.mass;
  return m;
}

// Stacked prediction X = Phi z0 + Gamma U over a horizon, with X holding
// z_1 .. z_N and U holding u_0 .. u_{N-1}.
struct CondensedPrediction {
  Eigen::MatrixXd phi;    // 4N x 4
  Eigen::MatrixXd gamma;  // 4N x 2N
};

inline CondensedPrediction condense(const StepMap& m, std::size_t horizon) {
  const auto n = static_cast<Eigen::Index>(horizon);
  CondensedPrediction c;
  c.phi.resize(4 * n, 4);
  c.gamma = Eigen::MatrixXd::Zero(4 * n, 2 * n);
  Eigen::Matrix4d a_pow = m.a;
  std::vector<Eigen::Matrix<double, 4, 2>> ab(horizon);  // A^j B
  ab[0] = m.b;
  for (std::size_t j = 1; j < horizon; ++j) ab[j] = m.a * ab[j - 1];
  for (Eigen::Index k = 0; k < n; ++k) {
    c.phi.block<4, 4>(4 * k, 0) = a_pow;
    a_pow = m.a * a_pow;
    for (Eigen::Index j = 0; j <= k; ++j)
      c.gamma.block<4, 2>(4 * k, 2 * j) = ab[static_cast<std::size_t>(k - j)];
  }
  return c;
}

struct MpcQp {
  Eigen::MatrixXd hessian;
  Eigen::VectorXd linear;
  double constant = 0.0;
  CondensedPrediction prediction;
};

// Cost sum_k |z_{k+1} - ref_k|_Q^2 + |u_k|_K^2 written as
// 0.5 U'HU + g'U + c over the stacked inputs.
inline MpcQp build_mpc_qp(const BodyModel& model, const TrackerConfig& cfg, const Vec4& z0,
                          const std::vector<Vec4>& ref_window) {
  const std::size_t horizon = cfg.horizon;
  if (ref_window.size() != horizon)
    throw DimensionMismatchError("reference window length must equal the horizon");
  MpcQp qp;
  qp.prediction = condense(discretize_body(model), horizon);
  const auto n = static_cast<Eigen::Index>(horizon);

  Eigen::VectorXd q_diag(4 * n), k_diag(2 * n), ref(4 * n);
  for (Eigen::Index k = 0; k < n; ++k) {
    q_diag.segment<4>(4 * k) = cfg.q_weight;
    k_diag.segment<2>(2 * k) = cfg.k_weight;
    ref.segment<4>(4 * k) = ref_window[static_cast<std::size_t>(k)];
  }
  const Eigen::MatrixXd& gamma = qp.prediction.gamma;
  const Eigen::VectorXd free_error = qp.prediction.phi * z0 - ref;
  const Eigen::MatrixXd qg = q_diag.asDiagonal() * gamma;

  qp.hessian = 2.0 * (gamma.transpose() * qg);
  qp.hessian.diagonal() += 2.0 * k_diag;
  qp.linear = 2.0 * qg.transpose() * free_error;
  qp.constant = free_error.dot(q_diag.asDiagonal() * free_error);
  return qp;
}

struct MpcSolution {
  Eigen::Vector2d u0 = Eigen::Vector2d::Zero();
  Eigen::VectorXd inputs;          // u_0 .. u_{N-1} stacked
  std::vector<Vec4> predicted;     // z_1 .. z_N
  double cost = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
  std::vector<double> cost_history;
};

// One receding-horizon solve: box-constrained projected gradient on the
// condensed quadratic cost. A non-converged solve still returns its best
// iterate with `converged` cleared.
inline MpcSolution mpc_step(const BodyModel& model, const TrackerConfig& cfg, const Vec4& z0,
                            const std::vector<Vec4>& ref_window,
                            const Eigen::VectorXd* warm_start = nullptr,
                            bool record_history = false) {
  const MpcQp qp = build_mpc_qp(model, cfg, z0, ref_window);
  const auto n = static_cast<Eigen::Index>(cfg.horizon);
  const Eigen::Vector2d u_max = cfg.u_max;
  auto project = [u_max](Eigen::VectorXd& u) {
    for (Eigen::Index k = 0; k < u.size(); k += 2) {
      u(k) = std::clamp(u(k), -u_max.x(), u_max.x());
      u(k + 1) = std::clamp(u(k + 1), -u_max.y(), u_max.y());
    }
  };
  Eigen::VectorXd start = Eigen::VectorXd::Zero(2 * n);
  if (warm_start != nullptr && warm_start->size() == 2 * n) start = *warm_start;

  PgSettings settings{cfg.solver_tol, cfg.solver_max_iters, record_history};
  PgResult pg = projected_gradient(qp.hessian, qp.linear, start, project, settings);

  MpcSolution sol;
  sol.inputs = pg.x;
  sol.u0 = pg.x.head<2>();
  const Eigen::VectorXd states = qp.prediction.phi * z0 + qp.prediction.gamma * pg.x;
  sol.predicted.resize(cfg.horizon);
  for (Eigen::Index k = 0; k < n; ++k) sol.predicted[static_cast<std::size_t>(k)] = states.segment<4>(4 * k);
  sol.cost = 0.5 * pg.x.dot(qp.hessian * pg.x) + qp.linear.dot(pg.x) + qp.constant;
  sol.converged = pg.converged;
  sol.iterations = pg.iterations;
  for (double c : pg.cost_history) sol.cost_history.push_back(c + qp.constant);
  return sol;
}

struct TrackingResult {
  std::vector<double> t;
  std::vector<Vec4> states;             // realised (px, py, vx, vy)
  std::vector<Eigen::Vector2d> inputs;  // applied force per step
  std::vector<double> errors;           // position error per step
  double rms_error = 0.0;
  std::size_t unconverged_steps = 0;
};

// Reference states (position, velocity) taken from a planner trajectory.
inline std::vector<Vec4> reference_states(const Trajectory& reference) {
  std::vector<Vec4> out;
  out.reserve(reference.size());
  for (const auto& s : reference.samples) out.emplace_back(s.x.x(), s.x.y(), s.u.x(), s.u.y());
  return out;
}

// Closed-loop rollout: at each reference sample solve the horizon problem
// against the next N reference states (the last one repeated past the end)
// and apply the first input. The previous solution, shifted by one step,
// warm-starts the next solve.
inline TrackingResult track_reference(const BodyModel& model, const TrackerConfig& cfg,
                                      const Vec4& z0, const Trajectory& reference) {
  if (reference.samples.empty()) throw std::invalid_argument("empty reference trajectory");
  if (std::abs(reference.dt - model.dt) > 1e-12 * std::max(1.0, model.dt))
    throw TimeStepMismatchError("reference spacing " + std::to_string(reference.dt) +
                                " s differs from tracker dt " + std::to_string(model.dt) + " s");

  const StepMap step = discretize_body(model);
  const std::vector<Vec4> ref = reference_states(reference);
  const std::size_t n = ref.size();
  TrackingResult res;
  Vec4 z = z0;
  Eigen::VectorXd warm;
  std::vector<Vec4> window(cfg.horizon);
  double sq_sum = 0.0;

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < cfg.horizon; ++k) window[k] = ref[std::min(i + 1 + k, n - 1)];
    const MpcSolution sol = mpc_step(model, cfg, z, window, warm.size() ? &warm : nullptr);
    if (!sol.converged) ++res.unconverged_steps;

    const double err = (z.head<2>() - ref[i].head<2>()).norm();
    res.t.push_back(reference.samples[i].t);
    res.states.push_back(z);
    res.inputs.push_back(sol.u0);
    res.errors.push_back(err);
    sq_sum += err * err;

    warm.resize(sol.inputs.size());
    const Eigen::Index len = sol.inputs.size();
    warm.head(len - 2) = sol.inputs.tail(len - 2);
    warm.tail<2>() = sol.inputs.tail<2>();
    z = step.apply(z, sol.u0);
  }
  res.rms_error = std::sqrt(sq_sum / static_cast<double>(n));
  return res;
}

// Length of the polyline through the trajectory positions.
inline double path_length(const Trajectory& traj) {
  double len = 0.0;
  for (std::size_t i = 1; i < traj.samples.size(); ++i)
    len += (traj.samples[i].x - traj.samples[i - 1].x).norm();
  return len;
}

// ---------------------------------------------------------------------------
// Swing leg and joint drive
// ---------------------------------------------------------------------------

// Planar two-link leg; joint angles measured from the x axis (hip) and
// relative to the upper link (knee).
struct TwoLinkLeg {
  Eigen::Vector2d link_lengths = Eigen::Vector2d(0.2, 0.2);
  Eigen::Vector2d q = Eigen::Vector2d::Zero();
  Eigen::Vector2d qd = Eigen::Vector2d::Zero();

  Eigen::Vector2d foot_position(const Eigen::Vector2d& angles) const {
    const double l1 = link_lengths.x();
    const double l2 = link_lengths.y();
    const double a = angles.x();
    const double ab = angles.x() + angles.y();
    return {l1 * std::cos(a) + l2 * std::cos(ab), l1 * std::sin(a) + l2 * std::sin(ab)};
  }
  Eigen::Vector2d foot_position() const { return foot_position(q); }

  Eigen::Matrix2d jacobian() const {
    const double l1 = link_lengths.x();
    const double l2 = link_lengths.y();
    const double s1 = std::sin(q.x()), c1 = std::cos(q.x());
    const double s12 = std::sin(q.x() + q.y()), c12 = std::cos(q.x() + q.y());
    Eigen::Matrix2d j;
    j << -l1 * s1 - l2 * s12, -l2 * s12, l1 * c1 + l2 * c12, l2 * c12;
    return j;
  }

  Eigen::Matrix2d jacobian_dot() const {
    const double l1 = link_lengths.x();
    const double l2 = link_lengths.y();
    const double s1 = std::sin(q.x()), c1 = std::cos(q.x());
    const double s12 = std::sin(q.x() + q.y()), c12 = std::cos(q.x() + q.y());
    const double w1 = qd.x();
    const double w12 = qd.x() + qd.y();
    Eigen::Matrix2d jd;
    jd << -l1 * c1 * w1 - l2 * c12 * w12, -l2 * c12 * w12, -l1 * s1 * w1 - l2 * s12 * w12,
        -l2 * s12 * w12;
    return jd;
  }
};

// Joint accelerations realising a desired foot acceleration:
// J qdd + Jdot qd = rdd.
inline Eigen::Vector2d leg_accel_solve(const TwoLinkLeg& leg, const Eigen::Vector2d& foot_accel) {
  if (!(leg.link_lengths.array() > 0.0).all())
    throw std::invalid_argument("link lengths must be positive");
  const Eigen::Matrix2d j = leg.jacobian();
  if (std::abs(j.determinant()) <= 1e-8)
    throw SingularConfigurationError("leg Jacobian is singular (knee fully extended or folded)");
  return j.partialPivLu().solve(foot_accel - leg.jacobian_dot() * leg.qd);
}

// tau_a = tau_ff + Kp (q* - q) + Kd (qd* - qd), gains given as diagonals.
inline Eigen::VectorXd pid_torque(const Eigen::VectorXd& tau_ff, const Eigen::VectorXd& q_star,
                                  const Eigen::VectorXd& qd_star, const Eigen::VectorXd& q,
                                  const Eigen::VectorXd& qd, const Eigen::VectorXd& kp,
                                  const Eigen::VectorXd& kd) {
  const Eigen::Index n = tau_ff.size();
  for (const Eigen::VectorXd* v : {&q_star, &qd_star, &q, &qd, &kp, &kd})
    if (v->size() != n) throw DimensionMismatchError("pid_torque arguments differ in length");
  return tau_ff + kp.cwiseProduct(q_star - q) + kd.cwiseProduct(qd_star - qd);
}

}  // namespace densnav
