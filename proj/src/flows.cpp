#include "ldlab/flows.hpp"

#include <algorithm>
#include <cmath>

#include "ldlab/halton.hpp"

namespace ldlab {

namespace {

FlowResult integrate(const HamiltonianFamily& ham,
                     const std::function<Vec(const Vec&)>* grad_field,
                     const Vec& x0, double T, double dt) {
  const auto& space = ham.space();
  if (!(dt > 0.0) || !(T > 0.0))
    throw ValidationError("flow integration requires T > 0 and dt > 0");
  if (!space.contains(x0))
    throw ValidationError("flow start point lies outside the state space");
  FlowResult out;
  out.path.times.push_back(0.0);
  out.path.states.push_back(x0);
  Vec x = x0;
  const Vec zero(x0.size(), 0.0);
  double t = 0.0;
  while (t < T - 1e-12 * T) {
    const double h = std::min(dt, T - t);
    const FaceIndex J = space.active_set(x);
    const Vec p = grad_field ? (*grad_field)(x) : zero;
    const Vec v = space.project_tangent(x, ham.grad_p_piece(J, x, p));
    FlowStepCertificate cert;
    cert.in_tangent_cone = space.tangent_cone_contains(x, v);
    const double L = legendre_full(ham, x, v).value;
    cert.ineq_gap = dot(p, v) - L - ham.ddagger(x, p);
    Vec xn = x;
    axpy(h, v, xn);
    if (!space.contains(xn)) {
      const Vec fixed = space.project_point(xn);
      if (norm2(fixed - xn) > h * norm2(v) + 100.0 * space.tol())
        throw ValidationError(
            "flow step left the state space by more than one step length; "
            "the velocity selection is inconsistent with the boundary");
      xn = fixed;
      cert.projected_back = true;
      ++out.projected_steps;
    }
    out.certificates.push_back(cert);
    t += h;
    x = xn;
    out.path.times.push_back(t);
    out.path.states.push_back(x);
  }
  return out;
}

}  // namespace

FlowResult zero_cost_flow(const HamiltonianFamily& ham, const Vec& x0,
                          double T, double dt) {
  return integrate(ham, nullptr, x0, T, dt);
}

FlowResult controlled_flow(const HamiltonianFamily& ham,
                           const std::function<Vec(const Vec&)>& grad_field,
                           const Vec& x0, double T, double dt) {
  return integrate(ham, &grad_field, x0, T, dt);
}

double growth_bound_probe(const HamiltonianFamily& ham, const Vec& box_lo,
                          const Vec& box_hi, int points) {
  const auto& space = ham.space();
  double sup = 0.0;
  for (int i = 0; i < points; ++i) {
    const Vec x = halton_point(static_cast<unsigned long long>(i), box_lo, box_hi);
    if (!space.contains(x)) continue;
    const Vec v = ham.grad_p_piece(space.active_set(x), x, Vec(x.size(), 0.0));
    sup = std::max(sup, norm2(v) / (1.0 + norm2(x)));
  }
  return sup;
}

}  // namespace ldlab
