#pragma once

#include <optional>
#include <utility>

#include "ldlab/hamiltonian.hpp"

namespace ldlab {

enum class LegendreStatus {
  attained,           // sup reached at a finite p (argmax_p set)
  limit_at_infinity,  // objective converges along an unbounded direction
  infinite            // sup is +infinity
};

const char* to_string(LegendreStatus s);

/// Result of a Legendre transform evaluation: the action density value
/// (extended real, >= 0 up to round-off), the maximizing momentum when
/// attained, and how the supremum was realized.
struct LagrangianEval {
  double value = kInf;
  std::optional<Vec> argmax_p;
  LegendreStatus status = LegendreStatus::infinite;
};

/// L_J(x, v) = sup_p <p,v> - H_J(x,p). Safeguarded Newton on the strictly
/// concave objective; brackets expand to |p| = 60 per coordinate before an
/// unattained supremum is classified as a limit (finite value) or +inf.
LagrangianEval legendre_piece(const HamiltonianFamily& ham, const FaceIndex& J,
                              const Vec& x, const Vec& v);

/// Closed-form Lagrangian of H(p) = a(e^p - 1) + b(e^{-p} - 1):
/// with s = sqrt(v^2 + 4ab), returns v log((v+s)/(2a)) + a + b - s.
/// For b = 0: +inf when v < 0, a when v = 0, v log(v/a) - v + a when v > 0.
/// Testing oracle; requires a > 0, b >= 0.
double closed_form_two_sided(double a, double b, double v);

/// L(x, v) = sup_p <p,v> - H_dagger(x,p): the lower semicontinuous convex
/// envelope in v. Interior points reduce to legendre_piece with J = empty;
/// at boundary points the sup decomposes into orthant cells of momentum
/// space cut by the sign of p_i on coordinates carrying a switchable
/// harvesting term, each cell a smooth constrained concave problem.
LagrangianEval legendre_full(const HamiltonianFamily& ham, const Vec& x,
                             const Vec& v);

/// Convex decomposition certificate for the hull Lagrangian: weights sum
/// to one, sum of weighted velocities reproduces v, and only pieces whose
/// face set is active at x appear.
struct HullCertificate {
  std::vector<FaceIndex> pieces;
  std::vector<double> weights;
  std::vector<Vec> velocities;
  std::vector<double> costs;  // L_J(x, v_J) per kept piece
};

/// L_hat(x, v): minimize sum_J lambda_J L_J(x, v_J) over convex
/// decompositions v = sum lambda_J v_J across the pieces active at x.
/// Searches one- and two-piece decompositions (scalar weight search with
/// inner convex velocity splits); multi-dimensional decompositions beyond
/// pairs are out of scope. Returns +inf when no finite split exists.
std::pair<double, HullCertificate> lagrangian_hull(const HamiltonianFamily& ham,
                                                   const Vec& x, const Vec& v);

}  // namespace ldlab
