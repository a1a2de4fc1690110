#pragma once

#include <functional>
#include <string>

#include "ldlab/legendre.hpp"

namespace ldlab {

/// Discretized path: strictly increasing time grid with one state per knot.
struct Path {
  Vec times;
  std::vector<Vec> states;
};

/// validates grid monotonicity and state membership; throws ValidationError
void check_path(const Polyhedron& space, const Path& path);

struct SegmentEval {
  Vec velocity;
  double density = 0.0;  // action density L at the segment midpoint
  double weight = 0.0;   // quadrature weight (the segment duration)
};

struct ActionReport {
  double total = 0.0;  // +inf iff any segment is infeasible
  std::vector<SegmentEval> per_segment;
  std::vector<int> infeasible_segments;
};

/// Midpoint-rule action integral: per segment, velocity is the difference
/// quotient, the density is L at the segment midpoint (projected into E
/// when round-off pushes it out by at most a tolerance), and the total is
/// the duration-weighted sum.
ActionReport action(const HamiltonianFamily& ham, const Path& path);

struct MinimizeOptions {
  int max_iters = 400;
  double grad_tol = 1e-8;
  double penalty = 10.0;  // quadratic weight on infeasible-velocity residuals
  int threads = 1;        // starts run in parallel when > 1
};

struct MinimizeResult {
  Path path;
  ActionReport report;
  bool converged = false;
  int iterations = 0;
  double best_start_value = kInf;  // best true action among the starts
  std::string note;
};

/// Fixed-endpoint action minimization over interior knots on a uniform
/// grid with N segments: spectral projected-gradient descent with
/// tangent-cone projected directions and point projection for feasibility
/// repair. Two deterministic starts: the straight line, and the zero-cost
/// flow followed from x0 to its nearest approach to x1 spliced with a
/// straight line. Infinite densities are smoothed during descent by
/// projecting the velocity onto the cone of available jump directions plus
/// a quadratic penalty; the reported action is always the true one. When
/// no start and no descent produces a finite action the result carries
/// total = +inf and an explanation.
MinimizeResult minimize_action(const HamiltonianFamily& ham, const Vec& x0,
                               const Vec& x1, double T, int N,
                               const MinimizeOptions& opts = {});

/// sup over discretized paths from x of payoff(path end at time t) minus
/// the path action — a lower bound for the variational supremum (the
/// class of paths is restricted to the grid). Same engine as
/// minimize_action with a free terminal knot.
struct VariationalResult {
  double value = -kInf;
  Path path;
  double path_action = kInf;
  bool converged = false;
};

VariationalResult variational_value(
    const HamiltonianFamily& ham,
    const std::function<double(const Vec&)>& terminal_payoff, double t,
    const Vec& x, int N, const MinimizeOptions& opts = {});

}  // namespace ldlab
