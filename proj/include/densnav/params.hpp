#pragma once

#include <string>
#include <vector>

namespace densnav {

// Tunables of the density field and its numerical checks.
//
// Inside the ball of radius `blend_inner` about the target the feedback
// field is pure linear attraction; beyond `blend_outer` it is the density
// gradient; in between the two are blended with a smooth step.
struct DensityParams {
  double alpha = 0.2;
  double blend_inner = 0.5;
  double blend_outer = 1.0;
  double fd_step = 1e-5;

  // Radius of the ball about the target where density evaluation refuses
  // to run.
  double singularity_radius() const { return blend_inner / 10.0; }

  bool operator==(const DensityParams&) const = default;
};

inline std::vector<std::string> validate_params(const DensityParams& p) {
  std::vector<std::string> failures;
  if (!(p.alpha > 0.0)) failures.emplace_back("alpha must be positive");
  if (!(p.blend_inner > 0.0)) failures.emplace_back("blend_inner must be positive");
  if (!(p.blend_outer > p.blend_inner))
    failures.emplace_back("blend_outer must exceed blend_inner");
  if (!(p.fd_step > 0.0)) failures.emplace_back("fd_step must be positive");
  return failures;
}

}  // namespace densnav
