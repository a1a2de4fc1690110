#include "ldlab/legendre.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace ldlab {

const char* to_string(LegendreStatus s) {
  switch (s) {
    case LegendreStatus::attained: return "attained";
    case LegendreStatus::limit_at_infinity: return "limit_at_infinity";
    case LegendreStatus::infinite: return "infinite";
  }
  return "?";
}

namespace {

constexpr double kPCap = 60.0;  // bracket expansion limit per coordinate

/// evaluated Hamiltonian terms at a fixed state: H(p) = sum r (e^{<g,p>}-1)
struct TermSet {
  std::vector<Vec> gammas;
  std::vector<double> rates;

  void add(const Vec& g, double r) {
    if (r == 0.0) return;
    gammas.push_back(g);
    rates.push_back(r);
  }
  double H(const Vec& p) const {
    double h = 0.0;
    for (std::size_t i = 0; i < rates.size(); ++i)
      h += rates[i] * (safe_exp(dot(gammas[i], p)) - 1.0);
    return h;
  }
  Vec grad(const Vec& p) const {
    Vec g(p.size(), 0.0);
    for (std::size_t i = 0; i < rates.size(); ++i)
      axpy(rates[i] * safe_exp(dot(gammas[i], p)), gammas[i], g);
    return g;
  }
  std::vector<Vec> hess(const Vec& p) const {
    const std::size_t d = p.size();
    std::vector<Vec> h(d, Vec(d, 0.0));
    for (std::size_t i = 0; i < rates.size(); ++i) {
      const double w = rates[i] * safe_exp(dot(gammas[i], p));
      for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b)
          h[a][b] += w * gammas[i][a] * gammas[i][b];
    }
    return h;
  }
  double H1(double p) const { return H(Vec{p}); }
  double g1(double p) const { return grad(Vec{p})[0]; }
  double h1(double p) const { return hess(Vec{p})[0][0]; }
};

TermSet terms_for_piece(const HamiltonianFamily& ham, const FaceIndex& J,
                        const Vec& x) {
  TermSet ts;
  const auto& faces = ham.space().closed_faces();
  const double tol = ham.space().tol();
  for (const auto& t : ham.terms_at(x)) {
    bool blocked = false;
    for (int j : J)
      if (dot(t.gamma, faces[static_cast<std::size_t>(j)].normal) < -tol)
        blocked = true;
    if (!blocked) ts.add(t.gamma, t.rate);
  }
  return ts;
}

/// sup over p in [lo, hi] of p v - H(p) for scalar momentum. A bound is a
/// "cap" when it stands in for +-infinity (bracket expansion limit); a
/// non-cap bound is a genuine cell wall and clamping there attains the sup.
LagrangianEval solve_1d(const TermSet& ts, double v, double lo, double hi,
                        bool lo_is_cap, bool hi_is_cap) {
  LagrangianEval out;
  auto phi = [&](double p) { return p * v - ts.H1(p); };
  bool has_pos = false, has_neg = false;
  for (std::size_t i = 0; i < ts.rates.size(); ++i) {
    if (ts.rates[i] > 0.0 && ts.gammas[i][0] > 0.0) has_pos = true;
    if (ts.rates[i] > 0.0 && ts.gammas[i][0] < 0.0) has_neg = true;
  }
  const double glo = ts.g1(lo), ghi = ts.g1(hi);
  if (glo >= v) {
    // objective nonincreasing on [lo, hi]: sup sits at lo
    if (!lo_is_cap) {
      out.value = phi(lo);
      out.argmax_p = Vec{lo};
      out.status = LegendreStatus::attained;
      return out;
    }
    if (!has_neg && v < -1e-12) {
      out.value = kInf;
      out.status = LegendreStatus::infinite;
      return out;
    }
    out.value = phi(lo);
    out.status = LegendreStatus::limit_at_infinity;
    return out;
  }
  if (ghi <= v) {
    if (!hi_is_cap) {
      out.value = phi(hi);
      out.argmax_p = Vec{hi};
      out.status = LegendreStatus::attained;
      return out;
    }
    if (!has_pos && v > 1e-12) {
      out.value = kInf;
      out.status = LegendreStatus::infinite;
      return out;
    }
    out.value = phi(hi);
    out.status = LegendreStatus::limit_at_infinity;
    return out;
  }
  // root of g(p) = v inside (lo, hi): safeguarded Newton
  double blo = lo, bhi = hi;
  // initial guess from the matched two-sided surrogate a e^p - b e^{-p} = v
  double a = 0.0, b = 0.0;
  for (std::size_t i = 0; i < ts.rates.size(); ++i) {
    const double g = ts.gammas[i][0];
    if (g > 0.0) a += ts.rates[i] * g;
    if (g < 0.0) b += ts.rates[i] * (-g);
  }
  double p = 0.0;
  if (a > 0.0) {
    const double s = std::sqrt(v * v + 4.0 * a * b);
    if (v + s > 0.0) p = std::log((v + s) / (2.0 * a));
  } else if (b > 0.0 && v < 0.0) {
    p = -std::log(-v / b);
  }
  if (!std::isfinite(p) || p <= blo || p >= bhi) p = 0.5 * (blo + bhi);
  const double psi_tol = 1e-13 * (1.0 + std::abs(v));
  for (int it = 0; it < 200; ++it) {
    const double psi = ts.g1(p) - v;
    if (std::abs(psi) <= psi_tol) break;
    if (psi > 0.0) bhi = p; else blo = p;
    const double dpsi = ts.h1(p);
    double pn = dpsi > 0.0 ? p - psi / dpsi : 0.5 * (blo + bhi);
    // alternate forced bisection: on a dominant exponential branch the
    // Newton step creeps by ~1/gamma_max and would exhaust the budget
    if ((it & 1) != 0 || !std::isfinite(pn) || pn <= blo || pn >= bhi)
      pn = 0.5 * (blo + bhi);
    if (bhi - blo < 1e-16 * (1.0 + std::abs(pn))) { p = pn; break; }
    p = pn;
  }
  out.value = phi(p);
  out.argmax_p = Vec{p};
  out.status = LegendreStatus::attained;
  return out;
}

/// sup over the box [lo, hi] of <p,v> - H(p), d >= 2. Projected damped
/// Newton ascent from p = 0 (always feasible: cells contain the origin).
LagrangianEval solve_nd(const TermSet& ts, const Vec& v, const Vec& lo,
                        const Vec& hi) {
  const std::size_t d = v.size();
  Vec p(d, 0.0);
  double phi = 0.0;  // <0,v> - H(0) = 0
  auto eval_phi = [&](const Vec& q) { return dot(q, v) - ts.H(q); };
  const double gtol = 1e-11 * (1.0 + norm_inf(v));
  LagrangianEval out;
  for (int it = 0; it < 300; ++it) {
    const Vec gH = ts.grad(p);
    Vec g(d);
    for (std::size_t i = 0; i < d; ++i) g[i] = v[i] - gH[i];
    // projected gradient: ignore components pushing out of the box
    Vec pg = g;
    std::vector<char> clipped(d, 0);
    for (std::size_t i = 0; i < d; ++i) {
      if (p[i] <= lo[i] + 1e-14 && g[i] < 0.0) { pg[i] = 0.0; clipped[i] = 1; }
      if (p[i] >= hi[i] - 1e-14 && g[i] > 0.0) { pg[i] = 0.0; clipped[i] = 1; }
    }
    if (norm_inf(pg) <= gtol) {
      out.value = phi;
      out.argmax_p = p;
      out.status = LegendreStatus::attained;
      return out;
    }
    // Newton direction restricted to unclipped coordinates
    std::vector<Vec> Hm = ts.hess(p);
    for (std::size_t i = 0; i < d; ++i) {
      if (!clipped[i]) continue;
      for (std::size_t j2 = 0; j2 < d; ++j2) { Hm[i][j2] = 0.0; Hm[j2][i] = 0.0; }
      Hm[i][i] = 1.0;
    }
    Vec dir;
    try {
      dir = solve_dense(Hm, pg);
    } catch (const std::runtime_error&) {
      dir = pg;
    }
    if (dot(dir, pg) <= 0.0) dir = pg;  // keep an ascent direction
    // cap enormous steps so the line search stays in a sane region
    const double dn = norm2(dir);
    if (dn > 20.0) dir = (20.0 / dn) * dir;
    double t = 1.0;
    bool moved = false;
    while (t >= 1e-14) {
      Vec q = p;
      axpy(t, dir, q);
      for (std::size_t i = 0; i < d; ++i) q[i] = std::clamp(q[i], lo[i], hi[i]);
      const double phin = eval_phi(q);
      Vec step = q - p;
      if (std::isfinite(phin) && phin >= phi + 1e-4 * dot(g, step)) {
        p = q;
        phi = phin;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) {
      // stationary to line-search resolution
      if (norm_inf(pg) <= 1e-6 * (1.0 + norm_inf(v))) {
        out.value = phi;
        out.argmax_p = p;
        out.status = LegendreStatus::attained;
        return out;
      }
      throw ConvergenceError("momentum ascent stalled with projected gradient " +
                             std::to_string(norm_inf(pg)));
    }
    if (norm2(p) > 80.0) {
      // escaping: classify the recession behaviour along p's direction
      Vec u = (1.0 / norm2(p)) * p;
      bool grows = false;
      for (std::size_t i = 0; i < ts.rates.size(); ++i)
        if (ts.rates[i] > 0.0 && dot(ts.gammas[i], u) > 1e-9) grows = true;
      if (!grows) {
        const double uv = dot(u, v);
        if (uv > 1e-9) {
          out.value = kInf;
          out.status = LegendreStatus::infinite;
          return out;
        }
        Vec far = p;
        axpy(kPCap, u, far);
        for (std::size_t i = 0; i < d; ++i)
          far[i] = std::clamp(far[i], lo[i], hi[i]);
        out.value = std::max(phi, eval_phi(far));
        out.status = LegendreStatus::limit_at_infinity;
        return out;
      }
    }
  }
  out.value = phi;
  out.argmax_p = p;
  out.status = LegendreStatus::attained;
  return out;
}

LagrangianEval solve_piece(const TermSet& ts, const Vec& v) {
  if (v.size() == 1) return solve_1d(ts, v[0], -kPCap, kPCap, true, true);
  const Vec lo(v.size(), -kInf), hi(v.size(), kInf);
  return solve_nd(ts, v, lo, hi);
}

}  // namespace

LagrangianEval legendre_piece(const HamiltonianFamily& ham, const FaceIndex& J,
                              const Vec& x, const Vec& v) {
  return solve_piece(terms_for_piece(ham, J, x), v);
}

double closed_form_two_sided(double a, double b, double v) {
  if (!(a > 0.0) || b < 0.0)
    throw ValidationError("closed_form_two_sided requires a > 0, b >= 0");
  if (b == 0.0) {
    if (v < 0.0) return kInf;
    if (v == 0.0) return a;
    return v * std::log(v / a) - v + a;
  }
  const double s = std::sqrt(v * v + 4.0 * a * b);
  // v + s > 0 whenever ab > 0
  return v * std::log((v + s) / (2.0 * a)) + a + b - s;
}

LagrangianEval legendre_full(const HamiltonianFamily& ham, const Vec& x,
                             const Vec& v) {
  const auto views = ham.terms_at(x);
  // coordinates carrying a switchable harvesting term at x
  std::vector<int> cell_coords;
  for (const auto& t : views) {
    if (!(t.blockable && t.kind == TransitionKind::harvesting && t.rate > 0.0))
      continue;
    int axis = 0;
    for (std::size_t i = 0; i < t.gamma.size(); ++i)
      if (t.gamma[i] != 0.0) axis = static_cast<int>(i);
    if (std::find(cell_coords.begin(), cell_coords.end(), axis) ==
        cell_coords.end())
      cell_coords.push_back(axis);
  }
  if (cell_coords.empty()) return legendre_piece(ham, {}, x, v);
  std::sort(cell_coords.begin(), cell_coords.end());
  const std::size_t m = cell_coords.size();
  const std::size_t d = x.size();

  TermSet base;
  std::vector<std::pair<int, std::pair<Vec, double>>> switchable;  // (axis, term)
  for (const auto& t : views) {
    if (t.blockable && t.kind == TransitionKind::harvesting && t.rate > 0.0) {
      int axis = 0;
      for (std::size_t i = 0; i < t.gamma.size(); ++i)
        if (t.gamma[i] != 0.0) axis = static_cast<int>(i);
      switchable.push_back({axis, {t.gamma, t.rate}});
    } else {
      base.add(t.gamma, t.rate);
    }
  }

  LagrangianEval best;
  best.value = -kInf;
  bool first = true;
  for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
    // bit set: p_i >= 0 on this cell, harvesting on coordinate i dropped
    TermSet ts = base;
    Vec lo(d, -kInf), hi(d, kInf);
    std::vector<char> keep_coord(d, 0);
    for (std::size_t ci = 0; ci < m; ++ci) {
      const std::size_t axis = static_cast<std::size_t>(cell_coords[ci]);
      if (mask & (std::size_t{1} << ci)) {
        lo[axis] = 0.0;
      } else {
        hi[axis] = 0.0;
        keep_coord[axis] = 1;
      }
    }
    for (const auto& [axis, term] : switchable)
      if (keep_coord[static_cast<std::size_t>(axis)])
        ts.add(term.first, term.second);
    LagrangianEval e;
    if (d == 1) {
      const bool neg_cell = hi[0] == 0.0;
      e = solve_1d(ts, v[0], neg_cell ? -kPCap : 0.0, neg_cell ? 0.0 : kPCap,
                   neg_cell, !neg_cell);
    } else {
      e = solve_nd(ts, v, lo, hi);
    }
    if (first || e.value > best.value ||
        (e.value == best.value && e.status == LegendreStatus::attained &&
         best.status != LegendreStatus::attained)) {
      best = e;
      first = false;
    }
  }
  return best;
}

namespace {

/// golden-section minimization of a convex extended-real function on [lo,hi]
template <class F>
std::pair<double, double> golden_min(F&& f, double lo, double hi, int iters) {
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - gr * (b - a), d2 = a + gr * (b - a);
  double fc = f(c), fd = f(d2);
  for (int i = 0; i < iters; ++i) {
    if (fc <= fd) {
      b = d2; d2 = c; fd = fc;
      c = b - gr * (b - a); fc = f(c);
    } else {
      a = c; c = d2; fc = fd;
      d2 = a + gr * (b - a); fd = f(d2);
    }
  }
  return fc <= fd ? std::make_pair(c, fc) : std::make_pair(d2, fd);
}

/// grid scan then golden refinement; tolerates +inf plateaus
template <class F>
std::pair<double, double> scan_min(F&& f, double lo, double hi, int grid,
                                   int golden_iters) {
  double best_x = lo, best_f = kInf;
  for (int i = 0; i <= grid; ++i) {
    const double xx = lo + (hi - lo) * i / grid;
    const double fx = f(xx);
    if (fx < best_f) { best_f = fx; best_x = xx; }
  }
  if (!std::isfinite(best_f)) return {best_x, best_f};
  const double h = (hi - lo) / grid;
  auto r = golden_min(f, std::max(lo, best_x - h), std::min(hi, best_x + h),
                      golden_iters);
  return r.second < best_f ? r : std::make_pair(best_x, best_f);
}

}  // namespace

std::pair<double, HullCertificate> lagrangian_hull(const HamiltonianFamily& ham,
                                                   const Vec& x, const Vec& v) {
  const auto pieces = ham.active_pieces(x);
  const std::size_t d = x.size();
  std::vector<TermSet> ts;
  ts.reserve(pieces.size());
  for (const auto& J : pieces) ts.push_back(terms_for_piece(ham, J, x));

  double best = kInf;
  HullCertificate cert;
  auto take_single = [&](std::size_t i) {
    const LagrangianEval e = solve_piece(ts[i], v);
    if (e.value < best) {
      best = e.value;
      cert = HullCertificate{{pieces[i]}, {1.0}, {v}, {e.value}};
    }
  };
  for (std::size_t i = 0; i < pieces.size(); ++i) take_single(i);
  if (pieces.size() == 1) return {best, cert};

  // two-piece decompositions: piece 0 (all terms kept) against each other
  // piece; jointly convex in (lambda, w) with w = lambda * v_A
  const double R = 10.0 * (1.0 + norm_inf(v));
  for (std::size_t bi = 1; bi < pieces.size(); ++bi) {
    const TermSet& A = ts[0];
    const TermSet& B = ts[bi];
    auto inner = [&](double lam, Vec* w_out) {
      Vec w = lam * v;
      double val = kInf;
      for (int sweep = 0; sweep < 2; ++sweep) {
        for (std::size_t ci = 0; ci < d; ++ci) {
          auto slice = [&](double wc) {
            Vec wy = w;
            wy[ci] = wc;
            Vec va = (1.0 / lam) * wy;
            Vec vb = (1.0 / (1.0 - lam)) * (v - wy);
            const double la = solve_piece(A, va).value;
            if (!std::isfinite(la)) return kInf;
            const double lb = solve_piece(B, vb).value;
            if (!std::isfinite(lb)) return kInf;
            return lam * la + (1.0 - lam) * lb;
          };
          auto r = scan_min(slice, w[ci] - R, w[ci] + R, 24, 24);
          if (std::isfinite(r.second)) { w[ci] = r.first; val = r.second; }
        }
      }
      if (!std::isfinite(val)) val = kInf;
      if (w_out) *w_out = w;
      return val;
    };
    auto outer = [&](double lam) { return inner(lam, nullptr); };
    auto r = scan_min(outer, 0.02, 0.98, 16, 12);
    if (r.second < best) {
      Vec w;
      const double val = inner(r.first, &w);
      if (val < best) {
        const double lam = r.first;
        Vec va = (1.0 / lam) * w;
        Vec vb = (1.0 / (1.0 - lam)) * (v - w);
        best = val;
        cert = HullCertificate{{pieces[0], pieces[bi]},
                               {lam, 1.0 - lam},
                               {va, vb},
                               {solve_piece(ts[0], va).value,
                                solve_piece(ts[bi], vb).value}};
      }
    }
  }
  return {best, cert};
}

}  // namespace ldlab
