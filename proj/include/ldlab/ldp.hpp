#pragma once

#include <cstdint>
#include <string>

#include "ldlab/simulate.hpp"

namespace ldlab {

/// -(1/n) * log P[Poisson(n*rho*t) >= ceil(n*a)], the scaled upper-tail
/// exponent of an immigration-only count at time t, computed by a stable
/// scaled tail summation (log-space leading term, ratio-accumulated tail).
/// Requires a >= rho*t; as n grows the value decreases toward the
/// closed-form limit a*log(a/(rho*t)) - a + rho*t.
double exact_poisson_rate(double rho, double t, double a, long long n);

/// Closed-form limit of exact_poisson_rate as n -> infinity.
double poisson_rate_limit(double rho, double t, double a);

/// Serializable event over a rescaled sample path X(t)/n. Two forms:
/// a terminal-value threshold on one coordinate, or a tube condition
/// (sup over the reference grid of |X - reference|_inf <= eps).
struct EventPredicate {
  enum class Kind { terminal_above, terminal_below, tube };

  Kind kind = Kind::terminal_above;
  int coord = 0;           // coordinate for the terminal forms
  double threshold = 0.0;  // X_coord(T)/n >= threshold (above) / <= (below)
  Path reference;          // tube center, sampled on its own time grid
  double eps = 0.0;        // tube radius (sup norm)

  bool evaluate(const Trajectory& traj, double T) const;
};

struct McRateResult {
  long long n = 0;
  long long reps = 0;
  long long hits = 0;
  double p_hat = 0.0;
  double wilson_lo = 0.0;  // 95% score interval for the probability
  double wilson_hi = 0.0;
  double estimate = 0.0;   // -(1/n) log p_hat
  double rate_lo = 0.0;    // -(1/n) log wilson_hi
  double rate_hi = 0.0;    // -(1/n) log wilson_lo
};

/// Monte Carlo estimate of the scaled event exponent -(1/n) log P[event]
/// with a 95% Wilson score interval mapped through the same transform.
/// Replicas are simulated deterministically (replica id = index) and may
/// run in parallel. Fewer than 5 hits raise ConvergenceError: this is a
/// moderate-deviations probe; deep tails need more replicas or an exactly
/// solvable comparison model.
McRateResult mc_rate(const ModelSpec& model, const EventPredicate& event,
                     long long n, long long reps, std::uint64_t seed,
                     const Vec& x0, double T, int threads = 1);

/// The boundary-failure demonstration for the pure birth model: the path
/// gamma(t) = t^2 has a finite action integral under the interior
/// Lagrangian, yet the process started at population zero never produces
/// a single birth, so the naive interior rate formula cannot describe
/// events that leave the zero boundary.
struct FailureDemoReport {
  double path_action = 0.0;    // quadrature action of gamma(t)=t^2, N segments
  double action_target = 0.0;  // log 2 - 1/6
  int segments = 0;
  long long n = 0;             // simulation scale
  long long replicas = 0;
  long long hits = 0;          // replicas whose count ever reached n/2
  std::string note;
};

FailureDemoReport failure_demo(long long replicas = 1000000,
                               long long n = 100, int segments = 10000,
                               int threads = 1);

}  // namespace ldlab
