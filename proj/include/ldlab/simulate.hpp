#pragma once

#include <cstdint>

#include "ldlab/action.hpp"

namespace ldlab {

/// Exact jump-chain sample at scale n: counts over event times. states
/// holds the initial state plus one entry per event; transition_ids index
/// the model's transitions first, then its offspring entries.
struct Trajectory {
  long long n = 1;
  std::vector<double> event_times;
  std::vector<std::vector<long long>> states;
  std::vector<int> transition_ids;
  bool truncated = false;         // stopped by max_events
  long long suppressed_exits = 0;  // positive-rate proposals that would
                                   // have left the lattice of E
};

struct SimConfig {
  long long n = 1;
  double T = 1.0;
  std::uint64_t seed = 0;
  std::uint64_t replica = 0;  // domain separation for ensembles
  long long max_events = 10000000;
};

/// Standard stochastic simulation algorithm. Default finite-n rates are
/// the exact scaling n * r(q/n); a transition's rate_n expression (over
/// counts q with parameter n bound) overrides this. Harvesting channels
/// carry the indicator 1{q_i != 0}; any channel whose jump would leave
/// the lattice of E is suppressed and counted. Two uniforms per event at
/// counters (2i, 2i+1), so trajectories are bit-identical given
/// (model, cfg, q0).
Trajectory simulate(const ModelSpec& model, const SimConfig& cfg,
                    const std::vector<long long>& q0);

/// Right-continuous sampling of the rescaled process X(t)/n on a grid.
Path rescale(const Trajectory& traj, const Vec& grid);

struct GrowthGuardReport {
  double sup_ratio = 0.0;     // max over probes of total rate / (1 + sum q)
  double fit_exponent = 0.0;  // log-log slope of total rate in |q|
  bool superlinear_warning = false;  // fit exponent > 1.05
};

/// Empirical well-posedness probe: total event rate against 1 + sum q on
/// lattice points with |q|_inf <= q_max.
GrowthGuardReport rate_growth_guard(const ModelSpec& model, long long n,
                                    long long q_max);

struct LlnEntry {
  long long n = 0;
  double median = 0.0;
  double q90 = 0.0;
  double mean = 0.0;
};

struct LlnReport {
  std::vector<LlnEntry> entries;          // one per requested n
  bool monotone_median = false;           // medians strictly decrease in n
  std::vector<std::vector<double>> sup_devs;  // per n: per-replica sup dev
};

/// Ensemble check of the law of large numbers against the zero-cost flow
/// from x0: per n, the distribution over replicas of
/// sup_{t<=T} |X_n(t)/n - x(t)|_inf on a uniform grid.
LlnReport lln_report(const ModelSpec& model,
                     const std::vector<long long>& n_list, double T, int reps,
                     std::uint64_t seed, const Vec& x0, int threads = 1);

}  // namespace ldlab
