#include "ldlab/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>

namespace ldlab {

namespace {
constexpr int kOffspringCap = 200;
constexpr double kTailRel = 1e-14;
}  // namespace

HamiltonianFamily::HamiltonianFamily(ModelSpec model) : model_(std::move(model)) {
  const int d = model_.space.dim();
  for (std::size_t ti = 0; ti < model_.transitions.size(); ++ti) {
    const auto& t = model_.transitions[ti];
    Term term;
    term.gamma_int = t.gamma;
    term.gamma.assign(t.gamma.begin(), t.gamma.end());
    term.transition_index = static_cast<int>(ti);
    term.kind = t.kind;
    terms_.push_back(std::move(term));
  }
  // offspring entries: direction k along the single coordinate, ordered by
  // k so partial sums can stop once the tail is negligible
  std::vector<std::size_t> order(model_.offspring.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return model_.offspring[a].first < model_.offspring[b].first;
  });
  for (std::size_t oi : order) {
    const int k = model_.offspring[oi].first;
    Term term;
    term.gamma_int.assign(static_cast<std::size_t>(d), 0);
    term.gamma.assign(static_cast<std::size_t>(d), 0.0);
    term.gamma_int[0] = k;
    term.gamma[0] = k;
    term.k = k;
    term.offspring_index = static_cast<int>(oi);
    term.kind = TransitionKind::interaction;
    term.offspring = true;
    terms_.push_back(std::move(term));
  }
}

double HamiltonianFamily::term_rate(const Term& t, const Vec& x) const {
  if (!t.offspring)
    return model_.eval_rate(
        model_.transitions[static_cast<std::size_t>(t.transition_index)], x);
  // per-individual weight v_k times the population coordinate
  const auto& [k, vk] =
      model_.offspring[static_cast<std::size_t>(t.offspring_index)];
  (void)k;
  return x[0] * vk.eval(x, model_.params);
}

bool HamiltonianFamily::blocked(const Term& t, const FaceIndex& J) const {
  const double tol = model_.space.tol();
  for (int j : J) {
    const auto& face = model_.space.closed_faces()[static_cast<std::size_t>(j)];
    if (dot(t.gamma, face.normal) < -tol) return true;
  }
  return false;
}

std::vector<double> HamiltonianFamily::rates_at(const Vec& x) const {
  std::vector<double> r(terms_.size(), 0.0);
  double prev = kInf, partial = 0.0;
  int evaluated = 0;
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const auto& t = terms_[i];
    if (!t.offspring) {
      r[i] = term_rate(t, x);
      continue;
    }
    // adaptive tail: offspring terms are sorted by k
    if (evaluated >= kOffspringCap) break;
    const double v = term_rate(t, x);
    ++evaluated;
    r[i] = v;
    partial += std::abs(v);
    if (std::abs(v) < kTailRel * partial && std::abs(v) <= prev) break;
    prev = std::abs(v);
  }
  return r;
}

double HamiltonianFamily::piece(const FaceIndex& J, const Vec& x,
                                const Vec& p) const {
  const std::vector<double> r = rates_at(x);
  double h = 0.0;
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (r[i] == 0.0 || blocked(terms_[i], J)) continue;
    h += r[i] * (safe_exp(dot(terms_[i].gamma, p)) - 1.0);
  }
  return h;
}

Vec HamiltonianFamily::grad_p_piece(const FaceIndex& J, const Vec& x,
                                    const Vec& p) const {
  const std::vector<double> r = rates_at(x);
  Vec g(x.size(), 0.0);
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (r[i] == 0.0 || blocked(terms_[i], J)) continue;
    const double w = r[i] * safe_exp(dot(terms_[i].gamma, p));
    axpy(w, terms_[i].gamma, g);
  }
  return g;
}

std::vector<Vec> HamiltonianFamily::hess_p_piece(const FaceIndex& J,
                                                 const Vec& x,
                                                 const Vec& p) const {
  const std::vector<double> r = rates_at(x);
  const std::size_t d = x.size();
  std::vector<Vec> h(d, Vec(d, 0.0));
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (r[i] == 0.0 || blocked(terms_[i], J)) continue;
    const double w = r[i] * safe_exp(dot(terms_[i].gamma, p));
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b)
        h[a][b] += w * terms_[i].gamma[a] * terms_[i].gamma[b];
  }
  return h;
}

std::vector<std::pair<FaceIndex, std::vector<char>>>
HamiltonianFamily::dedup_subsets(const Vec& x) const {
  const FaceIndex active = model_.space.active_set(x);
  const std::size_t a = active.size();
  if (a > 16)
    throw ValidationError("more than 16 faces active at one state; piece "
                          "enumeration refused");
  // per active face: which terms it blocks
  const double tol = model_.space.tol();
  std::vector<std::vector<char>> face_blocks(a, std::vector<char>(terms_.size(), 0));
  for (std::size_t j = 0; j < a; ++j) {
    const auto& face =
        model_.space.closed_faces()[static_cast<std::size_t>(active[j])];
    for (std::size_t i = 0; i < terms_.size(); ++i)
      if (dot(terms_[i].gamma, face.normal) < -tol) face_blocks[j][i] = 1;
  }
  std::vector<std::pair<FaceIndex, std::vector<char>>> out;
  std::set<std::vector<char>> seen;
  // subsets in increasing popcount order so the smallest representative of
  // each drop-signature is kept
  std::vector<std::uint32_t> order;
  for (std::uint32_t s = 0; s < (1u << a); ++s) order.push_back(s);
  std::sort(order.begin(), order.end(), [](std::uint32_t u, std::uint32_t v) {
    const int pu = __builtin_popcount(u), pv = __builtin_popcount(v);
    return pu != pv ? pu < pv : u < v;
  });
  for (std::uint32_t s : order) {
    std::vector<char> drop(terms_.size(), 0);
    FaceIndex J;
    for (std::size_t j = 0; j < a; ++j) {
      if (!(s & (1u << j))) continue;
      J.push_back(active[j]);
      for (std::size_t i = 0; i < terms_.size(); ++i)
        if (face_blocks[j][i]) drop[i] = 1;
    }
    if (seen.insert(drop).second) out.emplace_back(std::move(J), std::move(drop));
  }
  return out;
}

std::vector<FaceIndex> HamiltonianFamily::active_pieces(const Vec& x) const {
  std::vector<FaceIndex> out;
  for (auto& sub : dedup_subsets(x)) out.push_back(std::move(sub.first));
  return out;
}

double HamiltonianFamily::dagger(const Vec& x, const Vec& p) const {
  const std::vector<double> r = rates_at(x);
  std::vector<double> vals(terms_.size(), 0.0);
  double h0 = 0.0;
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (r[i] == 0.0) continue;
    vals[i] = r[i] * (safe_exp(dot(terms_[i].gamma, p)) - 1.0);
    h0 += vals[i];
  }
  double best = h0;
  for (const auto& sub : dedup_subsets(x)) {
    double h = h0;
    for (std::size_t i = 0; i < terms_.size(); ++i)
      if (sub.second[i]) h -= vals[i];
    best = std::max(best, h);
  }
  return best;
}

double HamiltonianFamily::ddagger(const Vec& x, const Vec& p) const {
  const std::vector<double> r = rates_at(x);
  std::vector<double> vals(terms_.size(), 0.0);
  double h0 = 0.0;
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (r[i] == 0.0) continue;
    vals[i] = r[i] * (safe_exp(dot(terms_[i].gamma, p)) - 1.0);
    h0 += vals[i];
  }
  double best = h0;
  for (const auto& sub : dedup_subsets(x)) {
    double h = h0;
    for (std::size_t i = 0; i < terms_.size(); ++i)
      if (sub.second[i]) h -= vals[i];
    best = std::min(best, h);
  }
  return best;
}

std::vector<HTermView> HamiltonianFamily::terms_at(const Vec& x) const {
  const std::vector<double> r = rates_at(x);
  const FaceIndex active = model_.space.active_set(x);
  const double tol = model_.space.tol();
  std::vector<HTermView> out;
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    HTermView v;
    v.gamma = terms_[i].gamma;
    v.rate = r[i];
    v.kind = terms_[i].kind;
    v.offspring = terms_[i].offspring;
    for (int j : active) {
      const auto& face =
          model_.space.closed_faces()[static_cast<std::size_t>(j)];
      if (dot(v.gamma, face.normal) < -tol) v.blockable = true;
    }
    out.push_back(std::move(v));
  }
  return out;
}

HamiltonianFamily build_hamiltonians(const ModelSpec& m, bool validate) {
  if (validate) {
    const ValidationReport rep = validate_model(m, 2000, 10.0);
    if (!rep.ok) {
      std::string msg = "model '" + m.name + "' failed validation:";
      for (const auto& is : rep.issues)
        if (is.fatal) msg += " " + is.message + ";";
      throw ValidationError(msg);
    }
  }
  return HamiltonianFamily(m);
}

HamiltonianFamily sum_hamiltonians(const HamiltonianFamily& A,
                                   const HamiltonianFamily& B) {
  const auto& sa = A.space();
  const auto& sb = B.space();
  if (sa.dim() != sb.dim())
    throw ValidationError("cannot superpose models of different dimension");
  auto same_faces = [](const std::vector<HalfSpace>& u,
                       const std::vector<HalfSpace>& v) {
    if (u.size() != v.size()) return false;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const Vec db = u[i].base - v[i].base;
      const Vec dn = u[i].normal - v[i].normal;
      if (norm_inf(dn) > 1e-12) return false;
      if (std::abs(dot(db, u[i].normal)) > 1e-12) return false;
    }
    return true;
  };
  if (!same_faces(sa.closed_faces(), sb.closed_faces()) ||
      !same_faces(sa.open_faces(), sb.open_faces()))
    throw ValidationError("cannot superpose models on different state spaces");

  ModelSpec m(A.model().name + "+" + B.model().name, sa);
  m.params = A.model().params;
  for (const auto& [k, v] : B.model().params) {
    auto it = m.params.find(k);
    if (it != m.params.end() && it->second != v)
      throw ValidationError("parameter '" + k +
                            "' has conflicting values in the two summands");
    m.params[k] = v;
  }
  for (const auto& t : A.model().transitions) m.transitions.push_back(t);
  for (const auto& t : B.model().transitions) m.transitions.push_back(t);
  for (const auto& o : A.model().offspring) m.offspring.push_back(o);
  for (const auto& o : B.model().offspring) m.offspring.push_back(o);
  return HamiltonianFamily(std::move(m));
}

}  // namespace ldlab
