#pragma once

#include <functional>

#include "ldlab/action.hpp"

namespace ldlab {

/// Per-step feasibility record for an integrated flow. The inequality gap
/// is <grad f, v> - L(x, v) - H_ddagger(x, grad f(x)), nonnegative up to
/// solver tolerance for velocities selected from the active piece.
struct FlowStepCertificate {
  bool in_tangent_cone = false;
  bool projected_back = false;  // Euler step left E and was projected
  double ineq_gap = 0.0;
};

struct FlowResult {
  Path path;
  std::vector<FlowStepCertificate> certificates;  // one per step
  int projected_steps = 0;
};

/// Explicit Euler integration of the zero-cost dynamics: per step the
/// velocity is grad_p H_{J*(x)}(x, 0) projected onto the tangent cone,
/// and states that exit E by at most one step length are projected back.
FlowResult zero_cost_flow(const HamiltonianFamily& ham, const Vec& x0,
                          double T, double dt);

/// Same integrator with momentum grad_field(x) per step; certificates
/// record the controlled-flow inequality per step.
FlowResult controlled_flow(const HamiltonianFamily& ham,
                           const std::function<Vec(const Vec&)>& grad_field,
                           const Vec& x0, double T, double dt);

/// Empirical sup of |grad_p H_{J*(x)}(x, 0)| / (1 + |x|) over a
/// quasi-random grid in the box (points outside E are skipped).
double growth_bound_probe(const HamiltonianFamily& ham, const Vec& box_lo,
                          const Vec& box_hi, int points = 4096);

}  // namespace ldlab
