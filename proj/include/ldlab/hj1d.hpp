#pragma once

#include <functional>
#include <memory>
#include <string>

#include "ldlab/hamiltonian.hpp"

namespace ldlab {

/// Uniform node set on a truncated interval of a one-dimensional state
/// space. Ends that coincide with a closed face of E are true boundaries
/// (they use the boundary Hamiltonian); other ends are truncations and
/// carry a sponge margin excluded from reported norms.
struct Grid1D {
  Vec nodes;
  double h_x = 0.0;
  bool left_true_boundary = false;
  bool right_true_boundary = false;
  int sponge_left = 0;
  int sponge_right = 0;

  int size() const { return static_cast<int>(nodes.size()); }
  bool in_sponge(int i) const {
    return i < sponge_left || i >= size() - sponge_right;
  }
};

/// M segments over [lo, hi] inside E; 20% sponge at each truncation end.
Grid1D make_grid(const HamiltonianFamily& ham, double lo, double hi, int M);

/// Which limiting Hamiltonian governs true boundary nodes: the pointwise
/// max over boundary pieces (dagger) or the pointwise min (ddagger).
enum class HjVariant { dagger, ddagger };

struct HjSolution {
  Vec f;
  int iterations = 0;
  double residual = kInf;
  bool converged = false;
  Vec residual_history;  // sampled every few sweeps
};

/// Monotone Godunov discretization of the resolvent equation
///   f - lambda H(x, f') = h
/// with implicit nodal updates and damped Jacobi sweeps. The numerical
/// Hamiltonian is oriented so that raising any neighbor value never
/// lowers a nodal update (raising h's side of the equation is monotone),
/// which also makes constant h exact. Missing one-sided slopes at the
/// ends are taken as zero.
class ResolventScheme {
 public:
  ResolventScheme(const HamiltonianFamily& ham, double lambda,
                  std::function<double(double)> h, Grid1D grid,
                  HjVariant variant);
  ~ResolventScheme();
  ResolventScheme(const ResolventScheme&) = delete;
  ResolventScheme& operator=(const ResolventScheme&) = delete;

  /// Godunov numerical Hamiltonian at node i from one-sided slopes
  double flux(int i, double p_minus, double p_plus) const;
  /// implicit nodal update: the z solving z = h_i + lambda*flux_i(z; f)
  double node_update(int i, const Vec& f) const;
  /// one damped Jacobi sweep
  Vec sweep(const Vec& f) const;
  /// sup-norm fixed-point defect over all nodes
  double residual(const Vec& f) const;
  /// damped iteration from f = h until the defect drops below tol
  HjSolution solve(int max_iters = 40000, double tol = 1e-10) const;

  const Grid1D& grid() const;
  double h_at(int i) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

HjSolution solve_resolvent(const HamiltonianFamily& ham, double lambda,
                           const std::function<double(double)>& h,
                           const Grid1D& grid, HjVariant variant,
                           int max_iters = 40000, double tol = 1e-10);

/// Cross-scheme comparison under grid refinement: the sup-gap between the
/// dagger and ddagger solutions over non-sponge nodes should shrink
/// roughly linearly in h_x when the two limiting problems share their
/// solution (the empirical signature of the comparison principle).
struct ComparisonProbe {
  struct Level {
    int segments = 0;
    double h_x = 0.0;
    double gap = 0.0;
    bool converged = false;
  };
  std::vector<Level> levels;
  std::vector<double> ratios;  // successive gap ratios
  bool consistent = false;
  std::string note;
};

ComparisonProbe comparison_probe(const HamiltonianFamily& ham, double lambda,
                                 const std::function<double(double)>& h,
                                 double lo, double hi,
                                 const std::vector<int>& refinements);

/// Pointwise discounted variational value
///   sup over paths gamma from x of
///     integral lambda^{-1} e^{-t/lambda} (h(gamma(t)) - running action) dt,
/// discretized on an exponential time grid and optimized by projected
/// gradient ascent. The reported value is a lower-bound certificate: it is
/// attained by a concrete feasible discrete path (up to quadrature).
struct VariationalPoint {
  double value = -kInf;
  double tail = 0.0;  // analytic contribution beyond the horizon
  bool converged = false;
  Vec path_states;
  Vec path_times;
};

VariationalPoint variational_resolvent_point(
    const HamiltonianFamily& ham, double lambda,
    const std::function<double(double)>& h, double x, double horizon, int N);

}  // namespace ldlab
