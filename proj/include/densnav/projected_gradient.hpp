#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace densnav {

// Largest eigenvalue of a symmetric positive semidefinite matrix by power
// iteration from a fixed start vector.
inline double largest_eigenvalue(const Eigen::MatrixXd& h, std::size_t max_iters = 1000,
                                 double rel_tol = 1e-12) {
  if (h.rows() == 0) return 0.0;
  Eigen::VectorXd v = Eigen::VectorXd::Ones(h.rows()).normalized();
  double lambda = 0.0;
  for (std::size_t it = 0; it < max_iters; ++it) {
    Eigen::VectorXd w = h * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    const double next = v.dot(w);
    v = w / norm;
    if (std::abs(next - lambda) <= rel_tol * std::abs(next)) return next;
    lambda = next;
  }
  return lambda;
}

struct PgSettings {
  double tol = 1e-9;
  std::size_t max_iters = 10000;
  bool record_history = false;
};

struct PgResult {
  Eigen::VectorXd x;
  std::size_t iterations = 0;
  bool converged = false;
  double gradient_mapping_norm = 0.0;
  double step_size = 0.0;
  std::vector<double> cost_history;  // objective at the start and after each step
};

// Minimises 0.5 x'Hx + g'x over the set enforced by `project` with fixed
// step 1/L, L the largest eigenvalue of H. Stops once the gradient mapping
// L * (x - P(x - grad / L)) has norm <= tol.
//
// `project` maps a vector in place onto the feasible set.
template <typename Project>
PgResult projected_gradient(const Eigen::MatrixXd& h, const Eigen::VectorXd& g,
                            Eigen::VectorXd x, Project&& project, const PgSettings& settings) {
  PgResult res;
  const double lipschitz = std::max(largest_eigenvalue(h), 1e-300);
  const double step = 1.0 / lipschitz;
  res.step_size = step;

  auto cost = [&](const Eigen::VectorXd& y) { return 0.5 * y.dot(h * y) + g.dot(y); };
  project(x);
  if (settings.record_history) res.cost_history.push_back(cost(x));

  for (std::size_t it = 0;; ++it) {
    Eigen::VectorXd next = x - step * (h * x + g);
    project(next);
    res.gradient_mapping_norm = (x - next).norm() * lipschitz;
    if (res.gradient_mapping_norm <= settings.tol) {
      res.converged = true;
      res.iterations = it;
      break;
    }
    if (it == settings.max_iters) {
      res.iterations = it;
      break;
    }
    x = std::move(next);
    if (settings.record_history) res.cost_history.push_back(cost(x));
  }
  res.x = std::move(x);
  return res;
}

}  // namespace densnav
