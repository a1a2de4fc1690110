#include "ldlab/ldp.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "ldlab/action.hpp"
#include "ldlab/errors.hpp"

namespace ldlab {

namespace {

// ceil(v) robust against values that sit a round-off below an integer
long long robust_ceil(double v) {
  double slack = 1e-9 * std::max(1.0, std::fabs(v));
  return static_cast<long long>(std::ceil(v - slack));
}

}  // namespace

double poisson_rate_limit(double rho, double t, double a) {
  if (!(rho > 0.0) || !(t > 0.0)) {
    throw ValidationError("poisson_rate_limit: rho and t must be positive");
  }
  double mean = rho * t;
  if (a < mean) {
    throw ValidationError("poisson_rate_limit: requires a >= rho*t");
  }
  if (a == mean) return 0.0;
  return a * std::log(a / mean) - a + mean;
}

double exact_poisson_rate(double rho, double t, double a, long long n) {
  if (!(rho > 0.0) || !(t > 0.0)) {
    throw ValidationError("exact_poisson_rate: rho and t must be positive");
  }
  if (n < 1) throw ValidationError("exact_poisson_rate: n must be >= 1");
  double mean = rho * t;
  if (a < mean - 1e-12 * std::max(1.0, mean)) {
    throw ValidationError(
        "exact_poisson_rate: upper tail requires a >= rho*t");
  }
  double mu = static_cast<double>(n) * mean;
  long long K = std::max<long long>(0, robust_ceil(static_cast<double>(n) * a));
  if (K == 0) return 0.0;  // P[X >= 0] = 1

  // log of the leading term P[X = K]
  double log_lead =
      -mu + static_cast<double>(K) * std::log(mu) - std::lgamma(K + 1.0);

  // tail relative to the leading term; terms are non-increasing since
  // K >= mu, so the ratio products decay and the loop terminates fast
  double scaled_sum = 1.0;
  double prod = 1.0;
  long long k = K;
  const long long guard = K + 20000000;
  while (true) {
    ++k;
    if (k > guard) {
      throw ConvergenceError("exact_poisson_rate: tail summation stalled");
    }
    prod *= mu / static_cast<double>(k);
    scaled_sum += prod;
    if (prod < 1e-18 * scaled_sum) break;
  }

  double log_p = log_lead + std::log(scaled_sum);
  if (log_p > 0.0) log_p = 0.0;  // round-off clamp: probabilities are <= 1
  return -log_p / static_cast<double>(n);
}

bool EventPredicate::evaluate(const Trajectory& traj, double T) const {
  switch (kind) {
    case Kind::terminal_above:
    case Kind::terminal_below: {
      Path sampled = rescale(traj, Vec{T});
      double value = sampled.states[0].at(coord);
      double slack = 1e-12 * (1.0 + std::fabs(threshold));
      return kind == Kind::terminal_above ? value >= threshold - slack
                                          : value <= threshold + slack;
    }
    case Kind::tube: {
      if (reference.times.empty()) {
        throw ValidationError("tube predicate needs a reference path");
      }
      Path sampled = rescale(traj, reference.times);
      for (std::size_t i = 0; i < reference.times.size(); ++i) {
        Vec diff = sampled.states[i] - reference.states[i];
        if (norm_inf(diff) > eps) return false;
      }
      return true;
    }
  }
  return false;
}

McRateResult mc_rate(const ModelSpec& model, const EventPredicate& event,
                     long long n, long long reps, std::uint64_t seed,
                     const Vec& x0, double T, int threads) {
  if (reps < 1) throw ValidationError("mc_rate: reps must be >= 1");
  if (n < 1) throw ValidationError("mc_rate: n must be >= 1");
  if (static_cast<int>(x0.size()) != model.space.dim()) {
    throw ValidationError("mc_rate: x0 dimension mismatch");
  }
  std::vector<long long> q0(x0.size());
  for (std::size_t i = 0; i < x0.size(); ++i) {
    q0[i] = std::llround(x0[i] * static_cast<double>(n));
  }

  int nt = std::max(1, threads);
  std::vector<long long> chunk_hits(nt, 0);
  auto worker = [&](int w) {
    long long local = 0;
    for (long long r = w; r < reps; r += nt) {
      SimConfig cfg;
      cfg.n = n;
      cfg.T = T;
      cfg.seed = seed;
      cfg.replica = static_cast<std::uint64_t>(r);
      Trajectory traj = simulate(model, cfg, q0);
      if (event.evaluate(traj, T)) ++local;
    }
    chunk_hits[w] = local;
  };
  if (nt == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (int w = 0; w < nt; ++w) pool.emplace_back(worker, w);
    for (auto& th : pool) th.join();
  }

  long long hits = 0;
  for (long long h : chunk_hits) hits += h;
  if (hits < 5) {
    throw ConvergenceError(
        "mc_rate: fewer than 5 event hits in " + std::to_string(reps) +
        " replicas; this estimator targets moderate deviations - deeper "
        "tails need more replicas or an exactly solvable comparison model");
  }

  McRateResult out;
  out.n = n;
  out.reps = reps;
  out.hits = hits;
  double m = static_cast<double>(reps);
  double p = static_cast<double>(hits) / m;
  out.p_hat = p;
  const double z = 1.96;  // 95% score interval
  double denom = 1.0 + z * z / m;
  double center = (p + z * z / (2.0 * m)) / denom;
  double half =
      z * std::sqrt(p * (1.0 - p) / m + z * z / (4.0 * m * m)) / denom;
  out.wilson_lo = std::max(0.0, center - half);
  out.wilson_hi = std::min(1.0, center + half);
  double dn = static_cast<double>(n);
  out.estimate = -std::log(p) / dn;
  out.rate_lo = out.wilson_hi >= 1.0 ? 0.0 : -std::log(out.wilson_hi) / dn;
  out.rate_hi = out.wilson_lo <= 0.0 ? kInf : -std::log(out.wilson_lo) / dn;
  return out;
}

FailureDemoReport failure_demo(long long replicas, long long n, int segments,
                               int threads) {
  if (replicas < 1) throw ValidationError("failure_demo: replicas >= 1");
  if (n < 2) throw ValidationError("failure_demo: n >= 2");
  if (segments < 2) throw ValidationError("failure_demo: segments >= 2");

  ModelSpec yule = builtin_model("yule");
  HamiltonianFamily fam(yule);

  // quadrature action of gamma(t) = t^2 on [0, 1]
  Path path;
  path.times.resize(segments + 1);
  path.states.resize(segments + 1);
  for (int i = 0; i <= segments; ++i) {
    double t = static_cast<double>(i) / segments;
    path.times[i] = t;
    path.states[i] = Vec{t * t};
  }
  ActionReport report = action(fam, path);

  // simulation from the zero boundary: count replicas that ever reach n/2
  long long target = n / 2;
  int nt = std::max(1, threads);
  std::vector<long long> chunk_hits(nt, 0);
  auto worker = [&](int w) {
    long long local = 0;
    for (long long r = w; r < replicas; r += nt) {
      SimConfig cfg;
      cfg.n = n;
      cfg.T = 1.0;
      cfg.seed = 0x1d9fULL;
      cfg.replica = static_cast<std::uint64_t>(r);
      Trajectory traj = simulate(yule, cfg, {0});
      for (const auto& q : traj.states) {
        if (q[0] >= target) {
          ++local;
          break;
        }
      }
    }
    chunk_hits[w] = local;
  };
  if (nt == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (int w = 0; w < nt; ++w) pool.emplace_back(worker, w);
    for (auto& th : pool) th.join();
  }
  long long hits = 0;
  for (long long h : chunk_hits) hits += h;

  FailureDemoReport out;
  out.path_action = report.total;
  out.action_target = std::log(2.0) - 1.0 / 6.0;
  out.segments = segments;
  out.n = n;
  out.replicas = replicas;
  out.hits = hits;
  out.note =
      "the quadratic path leaving zero has a finite interior action "
      "integral, but a pure birth process started at population zero has "
      "total jump rate zero and never moves, so interior action values do "
      "not transfer to events that must leave the zero boundary; the "
      "boundary-aware Lagrangian (which charges +infinity for leaving an "
      "absorbing zero state) is the correct object there";
  return out;
}

}  // namespace ldlab
