#pragma once

#include <map>
#include <string>

#include "ldlab/expr.hpp"
#include "ldlab/hamiltonian.hpp"

namespace ldlab {

/// Lyapunov-type candidate for confining optimal paths: nonnegative,
/// vanishing at a declared point, with compact sublevel sets and a finite
/// Hamiltonian sup along its gradient field.
struct ContainmentCandidate {
  Expr upsilon;                // scalar expression in x1..xd
  std::vector<Expr> gradient;  // analytic partials, one per coordinate
  Vec x0;                      // declared zero point
  std::map<std::string, double> params;

  double value(const Vec& x) const;
  Vec grad(const Vec& x) const;
};

ContainmentCandidate make_candidate(const std::string& upsilon,
                                    const std::vector<std::string>& gradient,
                                    Vec x0,
                                    std::map<std::string, double> params = {});

/// Probe ranges shared by the numeric condition checks. All checks are
/// pure reports over these finite ranges; nothing downstream gates on
/// them, and a verdict never claims more than the probed range.
struct ProbeSpec {
  Vec lo, hi;           // probe box, intersected with the state space
  int points = 4096;    // quasi-random interior probe count
  int ray_points = 10;  // samples per escape ray (geometric spacing)
};

struct RayReport {
  Vec direction;                // unit escape direction (recession ray)
  bool toward_open_face = false;  // approach to an open face instead
  int face = -1;
  bool escaping = false;   // the ray actually leaves every compact set
  bool increasing = false;  // candidate grows along the escape
  double first_value = 0.0;
  double last_value = 0.0;
};

struct ContainmentReport {
  // nonnegativity and the declared zero point (exact checks on the grid)
  bool nonneg_ok = false;
  double min_value = kInf;
  Vec min_arg;
  bool zero_point_ok = false;
  double value_at_x0 = kInf;
  // sublevel-set compactness probe along boundary-escaping rays
  bool compact_ok = false;
  std::vector<RayReport> rays;
  // quantitative sup over the grid of max_J H_J(z, grad Upsilon(z))
  double sup_h = -kInf;
  Vec argmax;
  std::vector<double> shell_sup;  // sup of the H probe per distance shell
  bool sup_divergence = false;    // the sup keeps growing with distance
  int usable_points = 0;
  int domain_errors = 0;  // probe points where the candidate was undefined
  bool ok = false;        // every item above passed
};

ContainmentReport check_containment(const HamiltonianFamily& ham,
                                    const ContainmentCandidate& cand,
                                    const ProbeSpec& probe);

/// Offspring exponential-moment probe: empirical sup over probe states of
///   sum_k (k / (1+|x|))^2 * exp(alpha * k / (1+|x|)) * v_k(x).
/// Reports a finite/divergent trend verdict and whether the materialized
/// offspring list is long enough for the sum to have settled.
struct OffspringMomentReport {
  double alpha = 0.0;
  double sup_value = -kInf;
  Vec argmax;
  std::vector<double> shell_sup;
  bool divergent = false;
  double worst_tail_fraction = 0.0;  // last listed term / partial sum
  bool truncation_dominated = false;
  int usable_points = 0;
  bool ok = false;  // bounded trend and trustworthy truncation
};

OffspringMomentReport check_offspring_moment(const ModelSpec& model,
                                             double alpha,
                                             const ProbeSpec& probe);

/// Tail classification of p -> inf_{x in K} H(x, d*p) as p -> d*infinity.
enum class TailTrend { divergent, uniform, inconclusive };
std::string to_string(TailTrend t);

struct DirectionTrend {
  int direction = +1;
  TailTrend verdict = TailTrend::inconclusive;
  double inf_at_pmax = 0.0;    // inf over K of H(x, d*p_max)
  double inf_at_decade = 0.0;  // same at p_max/10
  double sup_variation = kInf;  // sup over K of H-variation on the decade
  Vec fitted_h;  // uniform case: limiting values on the K grid
};

struct BoundarySignCheck {
  int face = -1;
  bool ok = false;
  double worst_violation = 0.0;
  double worst_p = 0.0;
};

/// Interior classification per direction plus the boundary/interior sign
/// relations: with inward face normal n, H_face - H_empty must be >= 0
/// where p*n >= 0 and <= 0 where p*n <= 0. One-dimensional models only.
struct InteriorConditionReport {
  DirectionTrend minus;
  DirectionTrend plus;
  std::vector<BoundarySignCheck> boundary_signs;
  double k_lo = 0.0, k_hi = 0.0;
  double p_max = 0.0;
};

InteriorConditionReport check_interior_condition(const HamiltonianFamily& ham,
                                                 double k_lo, double k_hi,
                                                 double p_max = 40.0,
                                                 int k_points = 64,
                                                 int p_points = 48);

/// Boundary-point verdict for one face and escape direction d:
///   strong      - inf over K (boundary point included) diverges as
///                 p -> d*infinity,
///   weak1       - uniform convergence over K to a finite tail function,
///   weak2_probe - a sampled two-point sequence family approaching the
///                 boundary keeps liminf [H(x_a,p_a) - H(y_a,p_a)] <= 0;
///                 HEURISTIC: the underlying condition quantifies over all
///                 sequences, the probe samples finitely many,
///   fail        - none of the above on the probed ranges.
enum class BoundaryVerdict { strong, weak1, weak2_probe, fail };
std::string to_string(BoundaryVerdict v);

struct SequenceProbeEntry {
  double c = 0.0, q = 0.0, alpha = 0.0, value = 0.0;
};

struct BoundaryConditionReport {
  BoundaryVerdict verdict = BoundaryVerdict::fail;
  int face = -1;
  int direction = +1;
  bool heuristic = false;  // true iff verdict == weak2_probe
  DirectionTrend trend;    // over K with the boundary point included
  double weak2_sup = kInf;  // max over families of the tail probe value
  std::vector<SequenceProbeEntry> weak2_entries;
  std::string note;
};

BoundaryConditionReport check_boundary_condition(const HamiltonianFamily& ham,
                                                 int face, int direction,
                                                 double k_lo, double k_hi,
                                                 double p_max = 40.0);

/// Orthant-model probe. Case (a): fitted M with H(x,p) >= -|p| M on the
/// probe box plus strictly positive immigration and harvesting rates on
/// every coordinate face; case (b): superlinear growth of H in |p|;
/// otherwise fail. Also reports the gradient-based bound
/// H(x,p) >= -|p| |grad_p H(x,0)| that holds for smooth Hamiltonians.
struct OrthantConditionReport {
  char case_verdict = 'f';  // 'a', 'b' or 'f'
  double fitted_m = 0.0;
  bool lower_bound_ok = false;
  double c1_bound_m = 0.0;
  bool c1_bound_ok = false;
  std::vector<double> immigration_min;  // per coordinate, on its zero face
  std::vector<double> harvesting_min;
  bool rates_positive = false;
  bool superlinear = false;
  double superlinear_ratio = 0.0;
  Vec box_lo, box_hi;
};

OrthantConditionReport check_orthant_condition(const HamiltonianFamily& ham,
                                               const Vec& box_lo,
                                               const Vec& box_hi,
                                               int points = 512);

/// A-priori confinement constant C = sup_K Upsilon + M + T * sup_z H_J(z,
/// grad Upsilon(z)) and the bounding box of the sublevel set
/// {Upsilon <= C}, located by ray bisection from the candidate zero point.
struct ConfinementReport {
  double c = 0.0;
  double sup_upsilon_k = 0.0;
  double sup_h = 0.0;
  Vec box_lo, box_hi;
  std::vector<bool> reached;  // per ray: sublevel edge found inside reach
};

ConfinementReport apriori_confinement(const HamiltonianFamily& ham,
                                      const ContainmentCandidate& cand,
                                      const Vec& k_lo, const Vec& k_hi,
                                      double T, double M,
                                      const ProbeSpec& probe);

}  // namespace ldlab
