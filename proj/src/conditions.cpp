#include "ldlab/conditions.hpp"

#include <algorithm>
#include <cmath>

#include "ldlab/errors.hpp"
#include "ldlab/halton.hpp"

namespace ldlab {

namespace {

// quasi-random probe states inside E, paired with usable-point accounting
std::vector<Vec> probe_states(const Polyhedron& space, const ProbeSpec& probe) {
  if (static_cast<int>(probe.lo.size()) != space.dim() ||
      static_cast<int>(probe.hi.size()) != space.dim()) {
    throw ValidationError("probe box dimension mismatch");
  }
  for (int i = 0; i < space.dim(); ++i) {
    if (!(probe.lo[i] < probe.hi[i])) {
      throw ValidationError("probe box must have positive extent");
    }
  }
  std::vector<Vec> out;
  out.reserve(probe.points);
  for (int i = 0; i < probe.points; ++i) {
    Vec x = halton_point(i + 1, probe.lo, probe.hi);
    if (space.contains(x)) out.push_back(std::move(x));
  }
  return out;
}

// sup of `value` per distance shell around `center` (4 equal-count shells)
std::vector<double> shell_sups(const std::vector<Vec>& points,
                               const std::vector<double>& values,
                               const Vec& center) {
  std::vector<std::size_t> order(points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return norm_inf(points[a] - center) < norm_inf(points[b] - center);
  });
  std::vector<double> shells(4, -kInf);
  for (std::size_t r = 0; r < order.size(); ++r) {
    std::size_t shell = std::min<std::size_t>(3, 4 * r / points.size());
    shells[shell] = std::max(shells[shell], values[order[r]]);
  }
  return shells;
}

bool growing_shells(const std::vector<double>& s) {
  if (s.size() < 4) return false;
  for (double v : s) {
    if (v == -kInf) return false;
  }
  return s[3] > s[2] && s[2] > s[1] &&
         s[3] > 2.0 * std::max(s[1], 1e-12) + 1e-9;
}

double piece_1d(const HamiltonianFamily& ham, const FaceIndex& J, double x,
                double p) {
  return ham.piece(J, Vec{x}, Vec{p});
}

// largest step t <= reach with center + t*dir inside E (geometric scan)
double escape_reach(const Polyhedron& space, const Vec& center, const Vec& dir,
                    double reach) {
  double best = 0.0;
  for (int k = 0; k < 40; ++k) {
    double t = reach * std::pow(0.7, k);
    Vec x = center;
    axpy(t, dir, x);
    if (space.contains(x)) {
      best = t;
      break;
    }
  }
  return best;
}

// tail classification of p -> inf over the sampled states of H(x, d*p)
DirectionTrend classify_direction(const HamiltonianFamily& ham,
                                  const std::vector<double>& xs, int direction,
                                  double p_max, int p_points) {
  DirectionTrend out;
  out.direction = direction;
  std::vector<double> ps(p_points);
  for (int j = 0; j < p_points; ++j) {
    // geometric ladder over three decades up to p_max
    ps[j] = p_max * std::pow(10.0, -3.0 + 3.0 * j / (p_points - 1.0));
  }
  double p_decade = p_max / 10.0;

  double inf_pmax = kInf, inf_decade = kInf, sup_var = 0.0;
  out.fitted_h.resize(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double at_pmax = piece_1d(ham, {}, xs[i], direction * p_max);
    double at_decade = piece_1d(ham, {}, xs[i], direction * p_decade);
    inf_pmax = std::min(inf_pmax, at_pmax);
    inf_decade = std::min(inf_decade, at_decade);
    double lo = kInf, hi = -kInf;
    for (double p : ps) {
      if (p < p_decade - 1e-12) continue;
      double v = piece_1d(ham, {}, xs[i], direction * p);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    sup_var = std::max(sup_var, hi - lo);
    out.fitted_h[i] = at_pmax;
  }
  out.inf_at_pmax = inf_pmax;
  out.inf_at_decade = inf_decade;
  out.sup_variation = sup_var;
  if (inf_pmax > 1e3 && inf_pmax > inf_decade + 1e-9) {
    out.verdict = TailTrend::divergent;
  } else if (sup_var < 1e-4) {
    out.verdict = TailTrend::uniform;
  } else {
    out.verdict = TailTrend::inconclusive;
    out.fitted_h.clear();
  }
  return out;
}

std::vector<double> grid_1d(double lo, double hi, int points) {
  std::vector<double> xs;
  xs.reserve(points);
  for (int i = 0; i < points; ++i) {
    xs.push_back(points == 1 ? lo : lo + (hi - lo) * i / (points - 1.0));
  }
  return xs;
}

}  // namespace

double ContainmentCandidate::value(const Vec& x) const {
  return upsilon.eval(x, params);
}

Vec ContainmentCandidate::grad(const Vec& x) const {
  Vec g(gradient.size());
  for (std::size_t i = 0; i < gradient.size(); ++i) {
    g[i] = gradient[i].eval(x, params);
  }
  return g;
}

ContainmentCandidate make_candidate(const std::string& upsilon,
                                    const std::vector<std::string>& gradient,
                                    Vec x0,
                                    std::map<std::string, double> params) {
  ContainmentCandidate cand;
  cand.upsilon = Expr::parse(upsilon);
  cand.gradient.reserve(gradient.size());
  for (const auto& g : gradient) cand.gradient.push_back(Expr::parse(g));
  cand.x0 = std::move(x0);
  cand.params = std::move(params);
  return cand;
}

ContainmentReport check_containment(const HamiltonianFamily& ham,
                                    const ContainmentCandidate& cand,
                                    const ProbeSpec& probe) {
  const Polyhedron& space = ham.space();
  if (static_cast<int>(cand.gradient.size()) != space.dim() ||
      static_cast<int>(cand.x0.size()) != space.dim()) {
    throw ValidationError("containment candidate dimension mismatch");
  }
  ContainmentReport rep;

  std::vector<Vec> points = probe_states(space, probe);
  std::vector<Vec> usable;
  std::vector<double> ups_values;
  std::vector<double> h_values;
  for (auto& x : points) {
    try {
      double u = cand.value(x);
      Vec g = cand.grad(x);
      double h = ham.dagger(x, g);
      usable.push_back(x);
      ups_values.push_back(u);
      h_values.push_back(h);
    } catch (const ExprError&) {
      ++rep.domain_errors;
    }
  }
  rep.usable_points = static_cast<int>(usable.size());
  if (usable.empty()) {
    throw ValidationError(
        "containment probe: candidate undefined on the whole probe box");
  }

  for (std::size_t i = 0; i < usable.size(); ++i) {
    if (ups_values[i] < rep.min_value) {
      rep.min_value = ups_values[i];
      rep.min_arg = usable[i];
    }
    if (h_values[i] > rep.sup_h) {
      rep.sup_h = h_values[i];
      rep.argmax = usable[i];
    }
  }
  rep.nonneg_ok = rep.min_value >= -1e-12;

  try {
    rep.value_at_x0 = cand.value(cand.x0);
    rep.zero_point_ok = std::fabs(rep.value_at_x0) <= 1e-12;
  } catch (const ExprError&) {
    rep.zero_point_ok = false;
  }

  // compactness probe: candidate must grow along every escape route
  double reach = 0.0;
  for (int i = 0; i < space.dim(); ++i) {
    reach = std::max(reach, probe.hi[i] - probe.lo[i]);
  }
  std::vector<Vec> dirs;
  for (int i = 0; i < space.dim(); ++i) {
    Vec e(space.dim(), 0.0);
    e[i] = 1.0;
    dirs.push_back(e);
    e[i] = -1.0;
    dirs.push_back(e);
  }
  if (space.dim() > 1) {
    Vec ones(space.dim(), 1.0 / std::sqrt((double)space.dim()));
    dirs.push_back(ones);
  }
  rep.compact_ok = true;
  for (const auto& dir : dirs) {
    double t_max = escape_reach(space, cand.x0, dir, reach);
    if (t_max < 0.45 * reach) continue;  // bounded direction, not an escape
    RayReport ray;
    ray.direction = dir;
    ray.escaping = true;
    bool increasing = true;
    double prev = -kInf, first = kInf, last = -kInf;
    bool any = false;
    for (int k = probe.ray_points - 1; k >= 0; --k) {
      double t = t_max * std::pow(0.5, k);
      Vec x = cand.x0;
      axpy(t, dir, x);
      if (!space.contains(x)) continue;
      try {
        double u = cand.value(x);
        if (!any) first = u;
        any = true;
        if (u < prev - 1e-9) increasing = false;
        prev = u;
        last = u;
      } catch (const ExprError&) {
        increasing = false;
      }
    }
    ray.increasing = any && increasing && last >= first + 0.2;
    ray.first_value = first;
    ray.last_value = last;
    rep.rays.push_back(ray);
    if (!ray.increasing) rep.compact_ok = false;
  }
  // open faces: the candidate must blow up on approach
  for (std::size_t f = 0; f < space.open_faces().size(); ++f) {
    const HalfSpace& face = space.open_faces()[f];
    RayReport ray;
    ray.toward_open_face = true;
    ray.face = static_cast<int>(f);
    ray.direction = face.normal;
    ray.escaping = true;
    double m0 = face.margin(cand.x0);
    bool increasing = true, any = false;
    double prev = -kInf, first = kInf, last = -kInf;
    for (int k = 0; k < probe.ray_points; ++k) {
      double eps = m0 * std::pow(0.25, k + 1);
      Vec x = cand.x0;
      axpy(eps - m0, face.normal, x);
      if (!space.contains(x)) continue;
      try {
        double u = cand.value(x);  // shrinking eps: approach the face
        if (!any) first = u;
        any = true;
        if (u < prev - 1e-9) increasing = false;
        prev = u;
        last = u;
      } catch (const ExprError&) {
        increasing = false;
      }
    }
    ray.increasing = any && increasing && last >= first + 0.2;
    ray.first_value = first;
    ray.last_value = last;
    rep.rays.push_back(ray);
    if (!ray.increasing) rep.compact_ok = false;
  }

  rep.shell_sup = shell_sups(usable, h_values, cand.x0);
  rep.sup_divergence = growing_shells(rep.shell_sup);

  rep.ok = rep.nonneg_ok && rep.zero_point_ok && rep.compact_ok &&
           !rep.sup_divergence && std::isfinite(rep.sup_h);
  return rep;
}

OffspringMomentReport check_offspring_moment(const ModelSpec& model,
                                             double alpha,
                                             const ProbeSpec& probe) {
  if (model.offspring.empty()) {
    throw ValidationError("offspring moment probe needs an offspring list");
  }
  if (!(alpha > 0.0)) {
    throw ValidationError("offspring moment probe needs alpha > 0");
  }
  OffspringMomentReport rep;
  rep.alpha = alpha;

  std::vector<Vec> points = probe_states(model.space, probe);
  std::vector<Vec> usable;
  std::vector<double> values;
  for (auto& x : points) {
    double denom = 1.0 + std::fabs(x[0]);
    double sum = 0.0, last_term = 0.0, prev_term = 0.0;
    bool bad = false;
    for (const auto& [k, expr] : model.offspring) {
      double vk;
      try {
        vk = expr.eval(x, model.params);
      } catch (const ExprError&) {
        bad = true;
        break;
      }
      double s = static_cast<double>(k) / denom;
      prev_term = last_term;
      last_term = s * s * safe_exp(alpha * s) * vk;
      sum += last_term;
    }
    if (bad) continue;
    usable.push_back(x);
    values.push_back(sum);
    if (sum > rep.sup_value) {
      rep.sup_value = sum;
      rep.argmax = x;
      rep.worst_tail_fraction = sum > 0.0 ? std::fabs(last_term) / sum : 0.0;
      // the cut dominates when the series is still growing where it ends
      rep.truncation_dominated = model.offspring.size() >= 2 &&
                                 std::fabs(last_term) > 1e-6 * sum &&
                                 std::fabs(last_term) >=
                                     0.999 * std::fabs(prev_term);
    }
  }
  rep.usable_points = static_cast<int>(usable.size());
  if (usable.empty()) {
    throw ValidationError("offspring moment probe: no usable probe points");
  }
  rep.shell_sup = shell_sups(usable, values, model.space.witness());
  rep.divergent = growing_shells(rep.shell_sup) || !std::isfinite(rep.sup_value);
  rep.ok = !rep.divergent && !rep.truncation_dominated;
  return rep;
}

std::string to_string(TailTrend t) {
  switch (t) {
    case TailTrend::divergent: return "divergent";
    case TailTrend::uniform: return "uniform";
    case TailTrend::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

std::string to_string(BoundaryVerdict v) {
  switch (v) {
    case BoundaryVerdict::strong: return "strong";
    case BoundaryVerdict::weak1: return "weak1";
    case BoundaryVerdict::weak2_probe: return "weak2-probe";
    case BoundaryVerdict::fail: return "fail";
  }
  return "fail";
}

InteriorConditionReport check_interior_condition(const HamiltonianFamily& ham,
                                                 double k_lo, double k_hi,
                                                 double p_max, int k_points,
                                                 int p_points) {
  if (ham.space().dim() != 1) {
    throw ValidationError("interior condition probe: one-dimensional only");
  }
  if (!(k_lo < k_hi) || !(p_max > 0.0) || k_points < 2 || p_points < 8) {
    throw ValidationError("interior condition probe: bad probe ranges");
  }
  InteriorConditionReport rep;
  rep.k_lo = k_lo;
  rep.k_hi = k_hi;
  rep.p_max = p_max;

  std::vector<double> xs;
  for (double x : grid_1d(k_lo, k_hi, k_points)) {
    if (ham.space().contains(Vec{x})) xs.push_back(x);
  }
  if (xs.empty()) {
    throw ValidationError("interior condition probe: K misses the space");
  }
  rep.minus = classify_direction(ham, xs, -1, p_max, p_points);
  rep.plus = classify_direction(ham, xs, +1, p_max, p_points);

  // boundary sign relations at each finite closed face
  for (std::size_t f = 0; f < ham.space().closed_faces().size(); ++f) {
    const HalfSpace& face = ham.space().closed_faces()[f];
    double z = face.base[0];
    double n = face.normal[0];
    BoundarySignCheck check;
    check.face = static_cast<int>(f);
    check.ok = true;
    FaceIndex J{static_cast<int>(f)};
    for (int j = 0; j < 32; ++j) {
      double mag = p_max * std::pow(10.0, -3.0 + 3.0 * j / 31.0);
      for (double p : {mag, -mag}) {
        double gap = piece_1d(ham, J, z, p) - piece_1d(ham, {}, z, p);
        double scale = 1e-9 * (1.0 + std::fabs(gap));
        // with inward normal n: H_face >= H_empty where p*n >= 0, <= below
        double violation = p * n >= 0.0 ? -gap : gap;
        if (violation > scale && violation > check.worst_violation) {
          check.worst_violation = violation;
          check.worst_p = p;
          check.ok = false;
        }
      }
    }
    rep.boundary_signs.push_back(check);
  }
  return rep;
}

BoundaryConditionReport check_boundary_condition(const HamiltonianFamily& ham,
                                                 int face, int direction,
                                                 double k_lo, double k_hi,
                                                 double p_max) {
  const Polyhedron& space = ham.space();
  if (space.dim() != 1) {
    throw ValidationError("boundary condition probe: one-dimensional only");
  }
  if (face < 0 || face >= static_cast<int>(space.closed_faces().size())) {
    throw ValidationError("boundary condition probe: no such closed face");
  }
  if (direction != 1 && direction != -1) {
    throw ValidationError("boundary condition probe: direction must be +-1");
  }
  BoundaryConditionReport rep;
  rep.face = face;
  rep.direction = direction;

  const HalfSpace& hs = space.closed_faces()[face];
  double z = hs.base[0];
  double inward = hs.normal[0];

  // trend of inf over K with the boundary point included
  std::vector<double> xs{z};
  for (double x : grid_1d(k_lo, k_hi, 64)) {
    if (space.contains(Vec{x})) xs.push_back(x);
  }
  rep.trend = classify_direction(ham, xs, direction, p_max, 48);
  if (rep.trend.verdict == TailTrend::divergent) {
    rep.verdict = BoundaryVerdict::strong;
    rep.note = "inf over K and the boundary point diverges in direction d";
    return rep;
  }
  if (rep.trend.verdict == TailTrend::uniform) {
    rep.verdict = BoundaryVerdict::weak1;
    rep.note = "uniform convergence over K to the fitted tail function";
    return rep;
  }

  // sampled two-point sequences approaching the boundary with momenta
  // p_a = alpha (x_a - y_a) -> d*infinity:
  //   x_a = z + inward * c / sqrt(alpha), y_a = x_a - d*q / sqrt(alpha)
  double gamma_max = 1.0;
  for (const auto& term : ham.terms_at(space.witness())) {
    gamma_max = std::max(gamma_max, norm_inf(term.gamma));
  }
  double sup = -kInf;
  for (double c : {0.5, 1.0, 2.0}) {
    for (double qf : {0.25, 0.5, 0.75}) {
      double q = qf * c;
      std::vector<double> ladder;
      for (double alpha : {1e2, 1e3, 1e4, 1e5}) {
        double s = std::sqrt(alpha);
        if (q * s * gamma_max > 600.0) continue;  // keep exp() finite
        double x = z + inward * c / s;
        double y = x - direction * q / s;
        double p = direction * q * s;
        if (!space.contains(Vec{x}) || !space.contains(Vec{y})) continue;
        double value = piece_1d(ham, {}, x, p) - piece_1d(ham, {}, y, p);
        SequenceProbeEntry entry;
        entry.c = c;
        entry.q = q;
        entry.alpha = alpha;
        entry.value = value;
        rep.weak2_entries.push_back(entry);
        ladder.push_back(value);
      }
      if (ladder.size() >= 2) {
        // liminf estimate: min over the last two ladder values
        double tail = std::min(ladder[ladder.size() - 1],
                               ladder[ladder.size() - 2]);
        sup = std::max(sup, tail);
      }
    }
  }
  rep.weak2_sup = sup;
  if (sup <= 1e-6 && sup > -kInf) {
    rep.verdict = BoundaryVerdict::weak2_probe;
    rep.heuristic = true;
    rep.note =
        "HEURISTIC: sampled sequence families keep the two-point "
        "Hamiltonian gap nonpositive; the condition quantifies over all "
        "sequences and is not certified by finitely many";
  } else {
    rep.verdict = BoundaryVerdict::fail;
    rep.note =
        "no divergence, no uniform tail, and the sampled sequence probe "
        "found a positive gap";
  }
  return rep;
}

OrthantConditionReport check_orthant_condition(const HamiltonianFamily& ham,
                                               const Vec& box_lo,
                                               const Vec& box_hi, int points) {
  const Polyhedron& space = ham.space();
  const int d = space.dim();
  // the probe expects coordinate faces x_i >= 0
  std::vector<int> face_of_coord(d, -1);
  for (std::size_t f = 0; f < space.closed_faces().size(); ++f) {
    const HalfSpace& hs = space.closed_faces()[f];
    int axis = -1;
    for (int i = 0; i < d; ++i) {
      if (std::fabs(hs.normal[i] - 1.0) < 1e-12) {
        axis = i;
      } else if (std::fabs(hs.normal[i]) > 1e-12) {
        axis = -2;
        break;
      }
    }
    if (axis < 0 || std::fabs(dot(hs.base, hs.normal)) > 1e-12) {
      throw ValidationError("orthant condition probe: coordinate faces only");
    }
    face_of_coord[axis] = static_cast<int>(f);
  }
  for (int i = 0; i < d; ++i) {
    if (face_of_coord[i] < 0) {
      throw ValidationError("orthant condition probe: missing face x_i >= 0");
    }
  }

  OrthantConditionReport rep;
  rep.box_lo = box_lo;
  rep.box_hi = box_hi;

  ProbeSpec probe;
  probe.lo = box_lo;
  probe.hi = box_hi;
  probe.points = points;
  std::vector<Vec> xs = probe_states(space, probe);
  if (xs.empty()) {
    throw ValidationError("orthant condition probe: empty probe box");
  }

  // momentum directions: coordinate axes plus quasi-random ones
  std::vector<Vec> dirs;
  for (int i = 0; i < d; ++i) {
    Vec e(d, 0.0);
    e[i] = 1.0;
    dirs.push_back(e);
    e[i] = -1.0;
    dirs.push_back(e);
  }
  for (int k = 0; k < 16; ++k) {
    Vec u(d);
    for (int i = 0; i < d; ++i) u[i] = 2.0 * halton(k + 3, 2 + 3 * i) - 1.0;
    double nn = norm2(u);
    if (nn < 1e-9) continue;
    for (int i = 0; i < d; ++i) u[i] /= nn;
    dirs.push_back(u);
  }

  // fitted lower-bound constant and the smooth-case gradient bound
  double fitted = 0.0, c1m = 0.0;
  bool c1_ok = true;
  for (const auto& x : xs) {
    Vec g0 = ham.grad_p_piece({}, x, Vec(d, 0.0));
    double gn = norm2(g0);
    c1m = std::max(c1m, gn);
    for (const auto& u : dirs) {
      for (double r : {0.25, 1.0, 4.0, 16.0, 40.0}) {
        Vec p = r * u;
        double h = ham.piece({}, x, p);
        fitted = std::max(fitted, -h / r);
        if (h < -r * gn - 1e-7 * (1.0 + std::fabs(h))) c1_ok = false;
      }
    }
  }
  rep.fitted_m = fitted;
  rep.c1_bound_m = c1m;
  rep.c1_bound_ok = c1_ok;
  rep.lower_bound_ok = std::isfinite(fitted);

  // strict positivity of immigration/harvesting rates on each zero face
  rep.immigration_min.assign(d, kInf);
  rep.harvesting_min.assign(d, kInf);
  const auto& model = ham.model();
  for (const auto& x : xs) {
    for (int i = 0; i < d; ++i) {
      Vec on_face = x;
      on_face[i] = 0.0;
      if (!space.contains(on_face)) continue;
      for (const auto& t : model.transitions) {
        if (t.kind == TransitionKind::immigration && t.gamma[i] == 1) {
          rep.immigration_min[i] =
              std::min(rep.immigration_min[i], model.eval_rate(t, on_face));
        }
        if (t.kind == TransitionKind::harvesting && t.gamma[i] == -1) {
          rep.harvesting_min[i] =
              std::min(rep.harvesting_min[i], model.eval_rate(t, on_face));
        }
      }
    }
  }
  rep.rates_positive = true;
  for (int i = 0; i < d; ++i) {
    if (!(rep.immigration_min[i] > 0.0) || !std::isfinite(rep.immigration_min[i]) ||
        !(rep.harvesting_min[i] > 0.0) || !std::isfinite(rep.harvesting_min[i])) {
      rep.rates_positive = false;
    }
  }

  // superlinear growth probe: inf over x of H(x, R u)/R doubling with R
  double worst_ratio = kInf;
  for (const auto& u : dirs) {
    double g20 = kInf, g40 = kInf;
    for (const auto& x : xs) {
      g20 = std::min(g20, ham.piece({}, x, 20.0 * u) / 20.0);
      g40 = std::min(g40, ham.piece({}, x, 40.0 * u) / 40.0);
    }
    double ratio = g20 > 1e-9 ? g40 / g20 : (g40 > 1e3 ? kInf : 0.0);
    worst_ratio = std::min(worst_ratio, ratio);
  }
  rep.superlinear_ratio = worst_ratio;
  rep.superlinear = worst_ratio >= 2.0;

  if (rep.lower_bound_ok && rep.rates_positive) {
    rep.case_verdict = 'a';
  } else if (rep.superlinear) {
    rep.case_verdict = 'b';
  } else {
    rep.case_verdict = 'f';
  }
  return rep;
}

ConfinementReport apriori_confinement(const HamiltonianFamily& ham,
                                      const ContainmentCandidate& cand,
                                      const Vec& k_lo, const Vec& k_hi,
                                      double T, double M,
                                      const ProbeSpec& probe) {
  if (T < 0.0 || M < 0.0) {
    throw ValidationError("apriori_confinement: T and M must be >= 0");
  }
  ContainmentReport cont = check_containment(ham, cand, probe);

  const Polyhedron& space = ham.space();
  ProbeSpec kprobe;
  kprobe.lo = k_lo;
  kprobe.hi = k_hi;
  kprobe.points = 512;
  double sup_k = -kInf;
  for (const auto& x : probe_states(space, kprobe)) {
    try {
      sup_k = std::max(sup_k, cand.value(x));
    } catch (const ExprError&) {
    }
  }
  if (sup_k == -kInf) {
    throw ValidationError("apriori_confinement: K has no usable points");
  }

  ConfinementReport rep;
  rep.sup_upsilon_k = sup_k;
  rep.sup_h = std::max(0.0, cont.sup_h);
  rep.c = sup_k + M + T * rep.sup_h;

  // bounding box of {Upsilon <= c} by bisection along coordinate rays
  const int d = space.dim();
  rep.box_lo = cand.x0;
  rep.box_hi = cand.x0;
  double reach = 0.0;
  for (int i = 0; i < d; ++i) {
    reach = std::max(reach, probe.hi[i] - probe.lo[i]);
  }
  for (int i = 0; i < d; ++i) {
    for (int sgn : {+1, -1}) {
      Vec dir(d, 0.0);
      dir[i] = sgn;
      double t_in = 0.0, t_out = 0.0;
      bool found = false;
      for (int k = 1; k <= 64; ++k) {
        double t = reach * k / 64.0;
        Vec x = cand.x0;
        axpy(t, dir, x);
        if (!space.contains(x)) {
          t_out = t;  // the space itself bounds the sublevel set here
          found = true;
          break;
        }
        double u;
        try {
          u = cand.value(x);
        } catch (const ExprError&) {
          u = kInf;
        }
        if (u > rep.c) {
          t_out = t;
          found = true;
          break;
        }
        t_in = t;
      }
      rep.reached.push_back(found);
      double edge = t_in;
      if (found) {
        for (int it = 0; it < 60; ++it) {
          double t = 0.5 * (t_in + t_out);
          Vec x = cand.x0;
          axpy(t, dir, x);
          bool inside = space.contains(x);
          double u = kInf;
          if (inside) {
            try {
              u = cand.value(x);
            } catch (const ExprError&) {
              u = kInf;
            }
          }
          if (inside && u <= rep.c) t_in = t;
          else t_out = t;
        }
        edge = 0.5 * (t_in + t_out);
      } else {
        edge = reach;
      }
      if (sgn > 0) rep.box_hi[i] = cand.x0[i] + edge;
      else rep.box_lo[i] = cand.x0[i] - edge;
    }
  }
  return rep;
}

}  // namespace ldlab
