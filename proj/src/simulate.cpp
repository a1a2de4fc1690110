#include "ldlab/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "ldlab/flows.hpp"
#include "ldlab/halton.hpp"
#include "ldlab/rng.hpp"

namespace ldlab {

namespace {

struct Channel {
  std::vector<long long> gamma;
  TransitionKind kind = TransitionKind::interaction;
  int harvest_axis = -1;   // coordinate tested by the indicator
  int transition_index = -1;
  int offspring_index = -1;
};

std::vector<Channel> build_channels(const ModelSpec& m) {
  std::vector<Channel> out;
  const int d = m.space.dim();
  for (std::size_t ti = 0; ti < m.transitions.size(); ++ti) {
    const auto& t = m.transitions[ti];
    Channel c;
    c.gamma.assign(t.gamma.begin(), t.gamma.end());
    c.kind = t.kind;
    c.transition_index = static_cast<int>(ti);
    if (t.kind == TransitionKind::harvesting)
      for (int i = 0; i < d; ++i)
        if (t.gamma[static_cast<std::size_t>(i)] != 0) c.harvest_axis = i;
    out.push_back(std::move(c));
  }
  for (std::size_t oi = 0; oi < m.offspring.size(); ++oi) {
    Channel c;
    c.gamma.assign(static_cast<std::size_t>(d), 0);
    c.gamma[0] = m.offspring[oi].first;
    c.offspring_index = static_cast<int>(oi);
    out.push_back(std::move(c));
  }
  return out;
}

/// does the lattice point q lie in (the lattice slice of) E?
bool lattice_feasible(const Polyhedron& space, const std::vector<long long>& q,
                      long long n) {
  Vec x(q.size());
  for (std::size_t i = 0; i < q.size(); ++i)
    x[i] = static_cast<double>(q[i]) / static_cast<double>(n);
  return space.contains(x);
}

double uniform_at(const CounterRng& rng, std::uint64_t counter) {
  return (static_cast<double>(rng.at(counter) >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

Trajectory simulate(const ModelSpec& model, const SimConfig& cfg,
                    const std::vector<long long>& q0) {
  if (cfg.n < 1 || !(cfg.T > 0.0))
    throw ValidationError("simulation requires n >= 1 and T > 0");
  const int d = model.space.dim();
  if (static_cast<int>(q0.size()) != d)
    throw ValidationError("initial counts have wrong dimension");
  if (!lattice_feasible(model.space, q0, cfg.n))
    throw ValidationError(
        "initial counts lie outside the state space at this scale (note: "
        "open boundaries exclude their face, e.g. a (0,1] model needs "
        "q0 >= 1)");

  const std::vector<Channel> channels = build_channels(model);
  std::map<std::string, double> params_n = model.params;
  params_n["n"] = static_cast<double>(cfg.n);

  Trajectory traj;
  traj.n = cfg.n;
  traj.states.push_back(q0);

  std::vector<long long> q = q0;
  Vec x(static_cast<std::size_t>(d));
  std::vector<double> rates(channels.size(), 0.0);
  CounterRng rng(cfg.seed, cfg.replica);
  double t = 0.0;

  for (long long ev = 0;; ++ev) {
    if (ev >= cfg.max_events) {
      traj.truncated = true;
      break;
    }
    for (int i = 0; i < d; ++i)
      x[static_cast<std::size_t>(i)] =
          static_cast<double>(q[static_cast<std::size_t>(i)]) /
          static_cast<double>(cfg.n);
    double total = 0.0;
    for (std::size_t c = 0; c < channels.size(); ++c) {
      const Channel& ch = channels[c];
      double r;
      if (ch.transition_index >= 0) {
        const auto& tr =
            model.transitions[static_cast<std::size_t>(ch.transition_index)];
        if (tr.rate_n) {
          Vec qv(q.begin(), q.end());
          r = tr.rate_n->eval(qv, params_n);
        } else {
          r = static_cast<double>(cfg.n) * model.eval_rate(tr, x);
        }
        if (ch.kind == TransitionKind::harvesting &&
            q[static_cast<std::size_t>(ch.harvest_axis)] == 0)
          r = 0.0;  // boundary indicator
      } else {
        const auto& vk =
            model.offspring[static_cast<std::size_t>(ch.offspring_index)];
        // n * (q1/n) * v_k(q/n) = q1 * v_k(q/n)
        r = static_cast<double>(q[0]) * vk.second.eval(x, model.params);
      }
      if (r < 0.0) {
        if (r < -1e-9 * static_cast<double>(cfg.n))
          throw ValidationError("negative event rate encountered during simulation");
        r = 0.0;
      }
      if (r > 0.0) {
        std::vector<long long> qn = q;
        for (int i = 0; i < d; ++i) qn[static_cast<std::size_t>(i)] += ch.gamma[static_cast<std::size_t>(i)];
        if (!lattice_feasible(model.space, qn, cfg.n)) {
          ++traj.suppressed_exits;
          r = 0.0;
        }
      }
      rates[c] = r;
      total += r;
    }
    if (!std::isfinite(total) || total > 1e18)
      throw ConvergenceError("total event rate overflow at t=" + std::to_string(t));
    if (total <= 0.0) break;  // absorbed: no further events before T

    const std::uint64_t base = 2 * static_cast<std::uint64_t>(ev);
    const double u1 = uniform_at(rng, base);
    const double dt = -std::log(u1) / total;
    if (!(t + dt <= cfg.T)) break;
    t += dt;
    const double u2 = uniform_at(rng, base + 1);
    double target = u2 * total;
    std::size_t pick = 0;
    for (; pick + 1 < channels.size(); ++pick) {
      target -= rates[pick];
      if (target <= 0.0) break;
    }
    // guard against landing on a zero-rate tail channel through round-off
    while (rates[pick] <= 0.0 && pick > 0) --pick;
    for (int i = 0; i < d; ++i)
      q[static_cast<std::size_t>(i)] += channels[pick].gamma[static_cast<std::size_t>(i)];
    traj.event_times.push_back(t);
    traj.states.push_back(q);
    traj.transition_ids.push_back(static_cast<int>(pick));
  }
  return traj;
}

Path rescale(const Trajectory& traj, const Vec& grid) {
  Path p;
  p.times = grid;
  const double invn = 1.0 / static_cast<double>(traj.n);
  std::size_t k = 0;  // number of events with time <= t
  for (double t : grid) {
    while (k < traj.event_times.size() && traj.event_times[k] <= t) ++k;
    const auto& q = traj.states[k];
    Vec x(q.size());
    for (std::size_t i = 0; i < q.size(); ++i)
      x[i] = static_cast<double>(q[i]) * invn;
    p.states.push_back(std::move(x));
  }
  return p;
}

GrowthGuardReport rate_growth_guard(const ModelSpec& model, long long n,
                                    long long q_max) {
  const int d = model.space.dim();
  std::map<std::string, double> params_n = model.params;
  params_n["n"] = static_cast<double>(n);
  auto total_rate = [&](const std::vector<long long>& q) {
    Vec x(q.size());
    for (std::size_t i = 0; i < q.size(); ++i)
      x[i] = static_cast<double>(q[i]) / static_cast<double>(n);
    if (!model.space.contains(x)) return -1.0;
    double total = 0.0;
    for (const auto& tr : model.transitions) {
      double r;
      if (tr.rate_n) {
        Vec qv(q.begin(), q.end());
        r = tr.rate_n->eval(qv, params_n);
      } else {
        r = static_cast<double>(n) * model.eval_rate(tr, x);
      }
      if (tr.kind == TransitionKind::harvesting) {
        for (int i = 0; i < d; ++i)
          if (tr.gamma[static_cast<std::size_t>(i)] != 0 &&
              q[static_cast<std::size_t>(i)] == 0)
            r = 0.0;
      }
      total += std::max(r, 0.0);
    }
    for (const auto& [k, vk] : model.offspring)
      total += static_cast<double>(q[0]) * std::max(vk.eval(x, model.params), 0.0);
    return total;
  };

  // probe set: scaled diagonal plus quasi-random lattice points
  std::vector<std::vector<long long>> probes;
  const int steps = 256;
  for (int s = 0; s <= steps; ++s) {
    const long long v = (q_max * s) / steps;
    probes.push_back(std::vector<long long>(static_cast<std::size_t>(d), v));
  }
  Vec lo(static_cast<std::size_t>(d), 0.0), hi(static_cast<std::size_t>(d),
                                               static_cast<double>(q_max));
  for (int i = 0; i < 512; ++i) {
    const Vec x = halton_point(static_cast<unsigned long long>(i), lo, hi);
    std::vector<long long> q(x.size());
    for (std::size_t c = 0; c < x.size(); ++c)
      q[c] = static_cast<long long>(std::llround(x[c]));
    probes.push_back(std::move(q));
  }

  GrowthGuardReport rep;
  std::vector<std::pair<double, double>> loglog;
  for (const auto& q : probes) {
    const double r = total_rate(q);
    if (r < 0.0) continue;  // outside E
    long long sumq = 0;
    for (long long qi : q) sumq += qi;
    rep.sup_ratio = std::max(rep.sup_ratio, r / (1.0 + static_cast<double>(sumq)));
    if (r > 0.0 && sumq > 0)
      loglog.emplace_back(std::log(1.0 + static_cast<double>(sumq)), std::log(r));
  }
  // least-squares slope over the upper decade of |q|
  double cutoff = 0.0;
  for (const auto& [lx, ly] : loglog) cutoff = std::max(cutoff, lx);
  cutoff -= std::log(10.0);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (const auto& [lx, ly] : loglog) {
    if (lx < cutoff) continue;
    sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
    ++cnt;
  }
  if (cnt >= 2 && sxx * cnt - sx * sx > 1e-12)
    rep.fit_exponent = (sxy * cnt - sx * sy) / (sxx * cnt - sx * sx);
  rep.superlinear_warning = rep.fit_exponent > 1.05;
  return rep;
}

LlnReport lln_report(const ModelSpec& model,
                     const std::vector<long long>& n_list, double T, int reps,
                     std::uint64_t seed, const Vec& x0, int threads) {
  const HamiltonianFamily ham(model);
  const int grid_pts = 512;
  const FlowResult flow = zero_cost_flow(ham, x0, T, T / grid_pts);
  const Vec& grid = flow.path.times;

  LlnReport rep;
  for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
    const long long n = n_list[ni];
    std::vector<long long> q0(x0.size());
    for (std::size_t i = 0; i < x0.size(); ++i)
      q0[i] = std::llround(x0[i] * static_cast<double>(n));
    std::vector<double> devs(static_cast<std::size_t>(reps), 0.0);

    auto run_range = [&](int lo, int hi) {
      for (int r = lo; r < hi; ++r) {
        SimConfig cfg;
        cfg.n = n;
        cfg.T = T;
        cfg.seed = seed;
        cfg.replica = static_cast<std::uint64_t>(ni) * 1000003ull +
                      static_cast<std::uint64_t>(r);
        const Trajectory traj = simulate(model, cfg, q0);
        const Path sampled = rescale(traj, grid);
        double sup = 0.0;
        for (std::size_t g = 0; g < grid.size(); ++g)
          sup = std::max(sup, norm_inf(sampled.states[g] - flow.path.states[g]));
        devs[static_cast<std::size_t>(r)] = sup;
      }
    };
    if (threads > 1) {
      std::vector<std::thread> pool;
      const int per = (reps + threads - 1) / threads;
      for (int th = 0; th < threads; ++th) {
        const int lo = th * per, hi = std::min(reps, (th + 1) * per);
        if (lo < hi) pool.emplace_back(run_range, lo, hi);
      }
      for (auto& th : pool) th.join();
    } else {
      run_range(0, reps);
    }

    std::vector<double> sorted = devs;
    std::sort(sorted.begin(), sorted.end());
    LlnEntry entry;
    entry.n = n;
    entry.median = sorted[sorted.size() / 2];
    entry.q90 = sorted[static_cast<std::size_t>(0.9 * (sorted.size() - 1))];
    double mean = 0.0;
    for (double v : sorted) mean += v;
    entry.mean = mean / sorted.size();
    rep.entries.push_back(entry);
    rep.sup_devs.push_back(std::move(devs));
  }
  rep.monotone_median = true;
  for (std::size_t i = 1; i < rep.entries.size(); ++i)
    if (!(rep.entries[i].median < rep.entries[i - 1].median))
      rep.monotone_median = false;
  return rep;
}

}  // namespace ldlab
