#include "ldlab/action.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <thread>

#include "ldlab/flows.hpp"

namespace ldlab {

void check_path(const Polyhedron& space, const Path& path) {
  if (path.times.size() != path.states.size())
    throw ValidationError("path has mismatched time and state counts");
  if (path.times.size() < 2)
    throw ValidationError("path needs at least two knots");
  for (std::size_t i = 1; i < path.times.size(); ++i)
    if (!(path.times[i] > path.times[i - 1]))
      throw ValidationError("path time grid is not strictly increasing");
  for (const auto& s : path.states)
    if (!space.contains(s))
      throw ValidationError("path state outside the state space");
}

ActionReport action(const HamiltonianFamily& ham, const Path& path) {
  const auto& space = ham.space();
  check_path(space, path);
  ActionReport rep;
  bool infinite = false;
  for (std::size_t i = 0; i + 1 < path.times.size(); ++i) {
    const double dt = path.times[i + 1] - path.times[i];
    Vec v = path.states[i + 1] - path.states[i];
    for (double& c : v) c /= dt;
    Vec mid = 0.5 * (path.states[i] + path.states[i + 1]);
    if (!space.contains(mid)) {
      const Vec fixed = space.project_point(mid);
      if (norm2(fixed - mid) > 100.0 * space.tol() * (1.0 + norm2(mid)))
        throw ValidationError("segment midpoint outside the state space");
      mid = fixed;
    }
    const double dens = legendre_full(ham, mid, v).value;
    rep.per_segment.push_back({v, dens, dt});
    if (std::isfinite(dens)) {
      rep.total += dt * dens;
    } else {
      infinite = true;
      rep.infeasible_segments.push_back(static_cast<int>(i));
    }
  }
  if (infinite) rep.total = kInf;
  return rep;
}

namespace {

/// Finite surrogate for the action density: the true L when finite, else
/// L at the velocity projected onto the cone of available jump directions
/// plus a quadratic penalty on the residual.
struct SurrogateEval {
  double value = 0.0;
  std::optional<Vec> p_star;  // dL/dv when the true L is attained
};

SurrogateEval surrogate_density(const HamiltonianFamily& ham, const Vec& mid,
                                const Vec& v, double penalty) {
  LagrangianEval e = legendre_full(ham, mid, v);
  if (std::isfinite(e.value))
    return {e.value, e.status == LegendreStatus::attained ? e.argmax_p
                                                          : std::nullopt};
  std::vector<Vec> cols;
  for (const auto& t : ham.terms_at(mid))
    if (t.rate > 1e-14) cols.push_back(t.gamma);
  Vec vp = nnls_cone_point(cols, v);
  LagrangianEval ep = legendre_full(ham, mid, vp);
  double base = ep.value;
  if (!std::isfinite(base)) {
    vp = 0.5 * vp;  // cones are closed under shrinking toward the apex
    ep = legendre_full(ham, mid, vp);
    base = std::isfinite(ep.value) ? ep.value : 1e6;
  }
  const Vec r = v - vp;
  return {base + penalty * dot(r, r), std::nullopt};
}

/// Discrete-action objective over the free knots of a uniform path grid.
/// Fixed terminal: z = interior knots x_1..x_{N-1}. Free terminal (with a
/// payoff): z additionally carries x_N and F subtracts payoff(x_N).
class PathObjective {
 public:
  PathObjective(const HamiltonianFamily& ham, Vec x0, std::optional<Vec> x1,
                double T, int N, double penalty,
                const std::function<double(const Vec&)>* payoff)
      : ham_(ham), x0_(std::move(x0)), x1_(std::move(x1)), T_(T), N_(N),
        penalty_(penalty), payoff_(payoff) {}

  int num_free() const { return x1_ ? N_ - 1 : N_; }

  std::vector<Vec> clip(std::vector<Vec> z) const {
    for (auto& k : z)
      if (!ham_.space().contains(k)) k = ham_.space().project_point(k);
    return z;
  }

  Path to_path(const std::vector<Vec>& z) const {
    Path p;
    p.times.resize(static_cast<std::size_t>(N_) + 1);
    for (int i = 0; i <= N_; ++i)
      p.times[static_cast<std::size_t>(i)] = T_ * i / N_;
    p.states.push_back(x0_);
    for (const auto& k : z) p.states.push_back(k);
    if (x1_) p.states.push_back(*x1_);
    return p;
  }

  double eval(const std::vector<Vec>& z, std::vector<Vec>* grad) const {
    const Path path = to_path(z);
    const std::size_t d = x0_.size();
    const double h = T_ / N_;
    if (grad) grad->assign(z.size(), Vec(d, 0.0));
    double F = 0.0;
    for (int i = 0; i < N_; ++i) {
      const Vec& a = path.states[static_cast<std::size_t>(i)];
      const Vec& b = path.states[static_cast<std::size_t>(i) + 1];
      Vec v = b - a;
      for (double& c : v) c /= h;
      Vec mid = 0.5 * (a + b);
      if (!ham_.space().contains(mid)) mid = ham_.space().project_point(mid);
      const SurrogateEval s = surrogate_density(ham_, mid, v, penalty_);
      F += h * s.value;
      if (!grad) continue;
      // dL/dv: analytic momentum when available, else finite differences
      Vec dv(d, 0.0);
      if (s.p_star) {
        dv = *s.p_star;
      } else {
        for (std::size_t c = 0; c < d; ++c) {
          const double step = 1e-6 * (1.0 + std::abs(v[c]));
          Vec vp = v, vm = v;
          vp[c] += step;
          vm[c] -= step;
          dv[c] = (surrogate_density(ham_, mid, vp, penalty_).value -
                   surrogate_density(ham_, mid, vm, penalty_).value) /
                  (2.0 * step);
        }
      }
      // dL/dx at the midpoint by central differences
      Vec dx(d, 0.0);
      for (std::size_t c = 0; c < d; ++c) {
        const double step = 1e-5 * (1.0 + std::abs(mid[c]));
        Vec mp = mid, mm = mid;
        mp[c] += step;
        mm[c] -= step;
        if (!ham_.space().contains(mp)) mp = ham_.space().project_point(mp);
        if (!ham_.space().contains(mm)) mm = ham_.space().project_point(mm);
        const double denom = mp[c] - mm[c];
        if (std::abs(denom) < 1e-300) continue;
        dx[c] = (surrogate_density(ham_, mp, v, penalty_).value -
                 surrogate_density(ham_, mm, v, penalty_).value) /
                denom;
      }
      // knot i is free when i >= 1; knot i+1 is free when i+1 <= num_free
      if (i >= 1) {
        Vec& g = (*grad)[static_cast<std::size_t>(i - 1)];
        for (std::size_t c = 0; c < d; ++c) g[c] += 0.5 * h * dx[c] - dv[c];
      }
      if (i + 1 <= num_free()) {
        Vec& g = (*grad)[static_cast<std::size_t>(i)];
        for (std::size_t c = 0; c < d; ++c) g[c] += 0.5 * h * dx[c] + dv[c];
      }
    }
    if (payoff_) {
      const Vec& end = path.states.back();
      F -= (*payoff_)(end);
      if (grad) {
        Vec& g = grad->back();
        for (std::size_t c = 0; c < d; ++c) {
          const double step = 1e-6 * (1.0 + std::abs(end[c]));
          Vec ep = end, em = end;
          ep[c] += step;
          em[c] -= step;
          g[c] -= ((*payoff_)(ep) - (*payoff_)(em)) / (2.0 * step);
        }
      }
    }
    return F;
  }

  const HamiltonianFamily& ham() const { return ham_; }

 private:
  const HamiltonianFamily& ham_;
  Vec x0_;
  std::optional<Vec> x1_;
  double T_;
  int N_;
  double penalty_;
  const std::function<double(const Vec&)>* payoff_;
};

struct SpgOutcome {
  std::vector<Vec> z;
  double F = kInf;
  int iters = 0;
  bool converged = false;
};

double stack_dot(const std::vector<Vec>& a, const std::vector<Vec>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += dot(a[i], b[i]);
  return s;
}

/// spectral projected gradient with nonmonotone line search; directions
/// are projected onto tangent cones at boundary knots and iterates are
/// projected back into E
SpgOutcome spg_minimize(const PathObjective& obj, std::vector<Vec> z,
                        const MinimizeOptions& opts) {
  SpgOutcome out;
  const auto& space = obj.ham().space();
  z = obj.clip(std::move(z));
  std::vector<Vec> g;
  double F = obj.eval(z, &g);
  double gn0 = 0.0;
  for (const auto& gi : g) gn0 = std::max(gn0, norm_inf(gi));
  double alpha = 1.0 / (1.0 + gn0);
  std::deque<double> hist{F};
  double window_base = F;
  for (int it = 0; it < opts.max_iters; ++it) {
    out.iters = it + 1;
    // finite-difference gradients carry noise well above grad_tol, so a
    // stalled objective counts as convergence too
    if (it > 0 && it % 10 == 0) {
      if (window_base - F <= 1e-8 * (1.0 + std::abs(F))) {
        out.converged = true;
        break;
      }
      window_base = F;
    }
    // projected steepest-descent direction
    std::vector<Vec> dir(z.size());
    double pgn = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) {
      Vec d = -1.0 * g[j];
      d = space.project_tangent(z[j], d);
      pgn = std::max(pgn, norm_inf(d));
      dir[j] = std::move(d);
    }
    if (pgn <= opts.grad_tol * (1.0 + std::abs(F))) {
      out.converged = true;
      break;
    }
    const double Fmax = *std::max_element(hist.begin(), hist.end());
    double t = alpha;
    std::vector<Vec> zt;
    double Ft = kInf;
    bool moved = false;
    for (int back = 0; back < 40; ++back) {
      zt = z;
      for (std::size_t j = 0; j < z.size(); ++j) axpy(t, dir[j], zt[j]);
      zt = obj.clip(std::move(zt));
      Ft = obj.eval(zt, nullptr);
      std::vector<Vec> step(z.size());
      for (std::size_t j = 0; j < z.size(); ++j) step[j] = zt[j] - z[j];
      if (std::isfinite(Ft) && Ft <= Fmax + 1e-4 * stack_dot(g, step)) {
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) {
      out.converged = true;  // no descent available at line-search resolution
      break;
    }
    std::vector<Vec> gt;
    const double Fn = obj.eval(zt, &gt);
    // Barzilai-Borwein step length for the next iteration
    std::vector<Vec> s(z.size()), y(z.size());
    for (std::size_t j = 0; j < z.size(); ++j) {
      s[j] = zt[j] - z[j];
      y[j] = gt[j] - g[j];
    }
    const double ss = stack_dot(s, s), sy = stack_dot(s, y);
    alpha = sy > 1e-16 ? std::clamp(ss / sy, 1e-10, 1e8)
                       : std::min(alpha * 2.0, 1e8);
    z.swap(zt);
    g.swap(gt);
    F = Fn;
    hist.push_back(F);
    if (hist.size() > 8) hist.pop_front();
    if (std::sqrt(ss) <= 1e-13 * (1.0 + std::sqrt(stack_dot(z, z)))) {
      out.converged = true;
      break;
    }
  }
  out.z = std::move(z);
  out.F = F;
  return out;
}

std::vector<Vec> straight_start(const Polyhedron& space, const Vec& x0,
                                const Vec& x1, int knots_wanted, int N) {
  std::vector<Vec> z;
  for (int i = 1; i <= knots_wanted; ++i) {
    Vec k = x0;
    const double lam = static_cast<double>(i) / N;
    for (std::size_t c = 0; c < k.size(); ++c)
      k[c] += lam * (x1[c] - x0[c]);
    if (!space.contains(k)) k = space.project_point(k);
    z.push_back(std::move(k));
  }
  return z;
}

std::vector<Vec> splice_start(const HamiltonianFamily& ham, const Vec& x0,
                              const Vec& x1, double T, int N) {
  const FlowResult flow = zero_cost_flow(ham, x0, T, T / N);
  const auto& ks = flow.path.states;  // N+1 knots
  std::size_t jstar = 0;
  double bestd = kInf;
  for (std::size_t j = 0; j + 1 < ks.size(); ++j) {
    const double dj = norm2(ks[j] - x1);
    if (dj < bestd) {
      bestd = dj;
      jstar = j;
    }
  }
  std::vector<Vec> z;
  const auto& space = ham.space();
  for (int i = 1; i < N; ++i) {
    Vec k;
    if (static_cast<std::size_t>(i) <= jstar) {
      k = ks[static_cast<std::size_t>(i)];
    } else {
      const double lam = static_cast<double>(i - static_cast<int>(jstar)) /
                         (N - static_cast<int>(jstar));
      k = ks[jstar];
      for (std::size_t c = 0; c < k.size(); ++c)
        k[c] += lam * (x1[c] - ks[jstar][c]);
    }
    if (!space.contains(k)) k = space.project_point(k);
    z.push_back(std::move(k));
  }
  return z;
}

}  // namespace

MinimizeResult minimize_action(const HamiltonianFamily& ham, const Vec& x0,
                               const Vec& x1, double T, int N,
                               const MinimizeOptions& opts) {
  const auto& space = ham.space();
  if (!space.contains(x0) || !space.contains(x1))
    throw ValidationError("endpoints must lie in the state space");
  if (!(T > 0.0) || N < 1)
    throw ValidationError("minimize_action requires T > 0 and N >= 1");

  PathObjective obj(ham, x0, x1, T, N, opts.penalty, nullptr);
  MinimizeResult res;
  if (N == 1) {
    res.path = obj.to_path({});
    res.report = action(ham, res.path);
    res.converged = true;
    res.best_start_value = res.report.total;
    return res;
  }

  std::vector<std::vector<Vec>> starts;
  starts.push_back(straight_start(space, x0, x1, N - 1, N));
  starts.push_back(splice_start(ham, x0, x1, T, N));

  double best_start = kInf;
  for (const auto& s : starts)
    best_start = std::min(best_start, action(ham, obj.to_path(s)).total);

  std::vector<SpgOutcome> outcomes(starts.size());
  if (opts.threads > 1) {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < starts.size(); ++i)
      pool.emplace_back([&, i] { outcomes[i] = spg_minimize(obj, starts[i], opts); });
    for (auto& th : pool) th.join();
  } else {
    for (std::size_t i = 0; i < starts.size(); ++i)
      outcomes[i] = spg_minimize(obj, starts[i], opts);
  }

  // winner by true action; never worse than the raw starts
  double best = kInf;
  std::vector<Vec> bestz;
  bool bestconv = false;
  int iters = 0;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    iters += outcomes[i].iters;
    const double truev = action(ham, obj.to_path(outcomes[i].z)).total;
    if (truev < best) {
      best = truev;
      bestz = outcomes[i].z;
      bestconv = outcomes[i].converged;
    }
  }
  for (const auto& s : starts) {
    const double truev = action(ham, obj.to_path(s)).total;
    if (truev < best) {
      best = truev;
      bestz = s;
      bestconv = false;
    }
  }
  if (bestz.empty() && !starts.empty()) bestz = starts[0];
  res.path = obj.to_path(bestz);
  res.report = action(ham, res.path);
  res.converged = bestconv;
  res.iterations = iters;
  res.best_start_value = best_start;
  if (!std::isfinite(res.report.total))
    res.note = "no start or descent produced a finite action; the target "
               "endpoint appears unreachable for this model";
  return res;
}

VariationalResult variational_value(
    const HamiltonianFamily& ham,
    const std::function<double(const Vec&)>& terminal_payoff, double t,
    const Vec& x, int N, const MinimizeOptions& opts) {
  const auto& space = ham.space();
  if (!space.contains(x))
    throw ValidationError("variational base point must lie in the state space");
  if (!(t > 0.0) || N < 1)
    throw ValidationError("variational_value requires t > 0 and N >= 1");

  PathObjective obj(ham, x, std::nullopt, t, N, opts.penalty, &terminal_payoff);

  std::vector<std::vector<Vec>> starts;
  starts.push_back(std::vector<Vec>(static_cast<std::size_t>(N), x));  // rest
  {
    const FlowResult flow = zero_cost_flow(ham, x, t, t / N);
    std::vector<Vec> z(flow.path.states.begin() + 1, flow.path.states.end());
    z.resize(static_cast<std::size_t>(N), flow.path.states.back());
    starts.push_back(std::move(z));
  }

  std::vector<SpgOutcome> outcomes(starts.size());
  if (opts.threads > 1) {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < starts.size(); ++i)
      pool.emplace_back([&, i] { outcomes[i] = spg_minimize(obj, starts[i], opts); });
    for (auto& th : pool) th.join();
  } else {
    for (std::size_t i = 0; i < starts.size(); ++i)
      outcomes[i] = spg_minimize(obj, starts[i], opts);
  }

  VariationalResult res;
  auto consider = [&](const std::vector<Vec>& z, bool conv) {
    const Path p = obj.to_path(z);
    const double act = action(ham, p).total;
    if (!std::isfinite(act)) return;
    const double val = terminal_payoff(p.states.back()) - act;
    if (val > res.value) {
      res.value = val;
      res.path = p;
      res.path_action = act;
      res.converged = conv;
    } else if (val == res.value && conv && !res.converged) {
      // a settled run reaching the same value upgrades the verdict
      res.converged = true;
    }
  };
  for (std::size_t i = 0; i < starts.size(); ++i) {
    consider(starts[i], false);
    consider(outcomes[i].z, outcomes[i].converged);
  }
  return res;
}

}  // namespace ldlab
