#include "ldlab/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "ldlab/halton.hpp"

namespace ldlab {

using nlohmann::json;

std::string to_string(TransitionKind k) {
  switch (k) {
    case TransitionKind::interaction: return "interaction";
    case TransitionKind::immigration: return "immigration";
    case TransitionKind::harvesting: return "harvesting";
  }
  return "?";
}

TransitionKind transition_kind_from_string(const std::string& s) {
  if (s == "interaction") return TransitionKind::interaction;
  if (s == "immigration") return TransitionKind::immigration;
  if (s == "harvesting") return TransitionKind::harvesting;
  throw ValidationError("unknown transition kind '" + s + "'");
}

namespace {

Polyhedron space_from_json(const json& j) {
  if (!j.contains("dim")) throw ValidationError("space: missing dim");
  const int dim = j.at("dim").get<int>();
  const double tol = j.value("tol", 1e-9);
  auto faces = [&](const char* key, bool closed) {
    std::vector<HalfSpace> out;
    if (!j.contains(key)) return out;
    for (const auto& f : j.at(key)) {
      out.emplace_back(f.at("base").get<Vec>(), f.at("normal").get<Vec>(), closed);
    }
    return out;
  };
  if (!j.contains("witness"))
    throw ValidationError("space: missing witness interior point");
  return Polyhedron(dim, faces("closed", true), faces("open", false),
                    j.at("witness").get<Vec>(), tol);
}

json space_to_json(const Polyhedron& p) {
  json j;
  j["dim"] = p.dim();
  j["tol"] = p.tol();
  j["witness"] = p.witness();
  auto faces = [](const std::vector<HalfSpace>& v) {
    json arr = json::array();
    for (const auto& h : v) arr.push_back({{"base", h.base}, {"normal", h.normal}});
    return arr;
  };
  j["closed"] = faces(p.closed_faces());
  j["open"] = faces(p.open_faces());
  return j;
}

}  // namespace

ModelSpec parse_model_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("model JSON parse error: ") + e.what());
  }
  try {
    ModelSpec m(j.value("name", "unnamed"), space_from_json(j.at("space")));
    if (j.contains("params"))
      for (auto it = j.at("params").begin(); it != j.at("params").end(); ++it)
        m.params[it.key()] = it.value().get<double>();
    if (j.contains("transitions")) {
      for (const auto& t : j.at("transitions")) {
        TransitionSpec ts;
        ts.gamma = t.at("gamma").get<std::vector<int>>();
        ts.rate = Expr::parse(t.at("rate").get<std::string>());
        ts.kind = transition_kind_from_string(t.value("kind", "interaction"));
        if (t.contains("rate_n"))
          ts.rate_n = Expr::parse(t.at("rate_n").get<std::string>());
        m.transitions.push_back(std::move(ts));
      }
    }
    if (j.contains("offspring")) {
      for (const auto& o : j.at("offspring")) {
        const int k = o.at(0).get<int>();
        m.offspring.emplace_back(k, Expr::parse(o.at(1).get<std::string>()));
      }
    }
    return m;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("model JSON structure error: ") + e.what());
  }
}

ModelSpec load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model_json(ss.str());
}

std::string model_to_json(const ModelSpec& m) {
  json j;
  j["name"] = m.name;
  j["space"] = space_to_json(m.space);
  j["params"] = m.params;
  json trans = json::array();
  for (const auto& t : m.transitions) {
    json tj;
    tj["gamma"] = t.gamma;
    tj["rate"] = t.rate.print();
    tj["kind"] = to_string(t.kind);
    if (t.rate_n) tj["rate_n"] = t.rate_n->print();
    trans.push_back(tj);
  }
  j["transitions"] = trans;
  if (!m.offspring.empty()) {
    json off = json::array();
    for (const auto& [k, expr] : m.offspring) off.push_back({k, expr.print()});
    j["offspring"] = off;
  }
  return j.dump(2) + "\n";
}

namespace {

// probe box: witness +- span, clipped to axis-aligned faces
void probe_box(const Polyhedron& space, double span, Vec& lo, Vec& hi) {
  const int d = space.dim();
  lo.assign(static_cast<std::size_t>(d), 0.0);
  hi.assign(static_cast<std::size_t>(d), 0.0);
  for (int i = 0; i < d; ++i) {
    lo[static_cast<std::size_t>(i)] = space.witness()[static_cast<std::size_t>(i)] - span;
    hi[static_cast<std::size_t>(i)] = space.witness()[static_cast<std::size_t>(i)] + span;
  }
  auto clip = [&](const HalfSpace& h, bool open) {
    int axis = -1;
    double sign = 0.0;
    for (int i = 0; i < d; ++i) {
      const double c = h.normal[static_cast<std::size_t>(i)];
      if (std::abs(std::abs(c) - 1.0) < 1e-12) {
        if (axis >= 0) return;  // not axis-aligned
        axis = i;
        sign = c;
      } else if (std::abs(c) > 1e-12) {
        return;
      }
    }
    if (axis < 0) return;
    const double eps = open ? std::max(10.0 * space.tol(), 1e-6 * span) : 0.0;
    const double b = h.base[static_cast<std::size_t>(axis)];
    if (sign > 0)
      lo[static_cast<std::size_t>(axis)] = std::max(lo[static_cast<std::size_t>(axis)], b + eps);
    else
      hi[static_cast<std::size_t>(axis)] = std::min(hi[static_cast<std::size_t>(axis)], b - eps);
  };
  for (const auto& h : space.closed_faces()) clip(h, false);
  for (const auto& h : space.open_faces()) clip(h, true);
}

}  // namespace

ValidationReport validate_model(const ModelSpec& m, int probe_points,
                                double box_span) {
  ValidationReport rep;
  auto issue = [&](bool fatal, const std::string& msg) {
    rep.issues.push_back({fatal, msg});
    if (fatal) rep.ok = false;
  };
  const int d = m.space.dim();

  // structural checks
  for (std::size_t ti = 0; ti < m.transitions.size(); ++ti) {
    const auto& t = m.transitions[ti];
    if (static_cast<int>(t.gamma.size()) != d) {
      issue(true, "transition " + std::to_string(ti) + ": gamma dimension mismatch");
      continue;
    }
    bool all_zero = true;
    for (int g : t.gamma)
      if (g != 0) all_zero = false;
    if (all_zero) issue(true, "transition " + std::to_string(ti) + ": zero jump");
    if (t.kind != TransitionKind::interaction) {
      int nz = 0, val = 0;
      for (int g : t.gamma)
        if (g != 0) { ++nz; val = g; }
      const int want = t.kind == TransitionKind::immigration ? 1 : -1;
      if (nz != 1 || val != want)
        issue(true, "transition " + std::to_string(ti) + ": " + to_string(t.kind) +
                        " must jump by " + (want > 0 ? "+" : "-") +
                        "1 in a single coordinate");
    }
    try {
      (void)m.eval_rate(t, m.space.witness());
    } catch (const ExprError& e) {
      issue(true, "transition " + std::to_string(ti) + ": " + e.what());
    }
  }
  for (const auto& [k, vk] : m.offspring) {
    if (k < 1) issue(true, "offspring entry with k < 1");
    if (d != 1) issue(true, "offspring lists are only supported in dimension 1");
    try {
      (void)vk.eval(m.space.witness(), m.params);
    } catch (const ExprError& e) {
      issue(true, std::string("offspring expression: ") + e.what());
    }
  }
  if (!rep.ok) return rep;

  probe_box(m.space, box_span, rep.box_lo, rep.box_hi);
  if (!m.space.open_faces().empty())
    rep.caveats.push_back(
        "open faces present: probes inspect a compact sub-box only; behaviour "
        "arbitrarily close to open boundaries is not certified");

  // rate nonnegativity on a quasi-random grid
  double rate_scale = 0.0;
  int used = 0;
  for (int i = 0; i < probe_points; ++i) {
    const Vec x = halton_point(static_cast<unsigned long long>(i), rep.box_lo, rep.box_hi);
    if (!m.space.contains(x)) continue;
    ++used;
    for (std::size_t ti = 0; ti < m.transitions.size(); ++ti) {
      double r;
      try {
        r = m.eval_rate(m.transitions[ti], x);
      } catch (const ExprError& e) {
        issue(true, "transition " + std::to_string(ti) + " rate: " + e.what());
        return rep;
      }
      rate_scale = std::max(rate_scale, std::abs(r));
      if (r < -1e-12) {
        issue(true, "transition " + std::to_string(ti) + " rate negative (" +
                        std::to_string(r) + ") inside the probe box");
        return rep;
      }
    }
    for (const auto& [k, vk] : m.offspring) {
      const double v = vk.eval(x, m.params);
      rate_scale = std::max(rate_scale, std::abs(v));
      if (v < -1e-12) {
        issue(true, "offspring weight v_" + std::to_string(k) + " negative inside the probe box");
        return rep;
      }
    }
  }
  if (used < probe_points / 10)
    rep.caveats.push_back("fewer than 10% of probe points landed inside E");

  // interaction rates must vanish where their jump exits E
  for (std::size_t fi = 0; fi < m.space.closed_faces().size(); ++fi) {
    const auto& face = m.space.closed_faces()[fi];
    for (std::size_t ti = 0; ti < m.transitions.size(); ++ti) {
      const auto& t = m.transitions[ti];
      if (t.kind != TransitionKind::interaction) continue;
      double gn = 0.0;
      for (int i = 0; i < d; ++i)
        gn += t.gamma[static_cast<std::size_t>(i)] * face.normal[static_cast<std::size_t>(i)];
      if (gn >= -1e-12) continue;  // jump does not exit through this face
      // sample points on the face (project box probes onto the hyperplane)
      int checked = 0;
      for (int i = 0; i < 200 && checked < 32; ++i) {
        Vec x = halton_point(static_cast<unsigned long long>(i), rep.box_lo, rep.box_hi);
        const double mgn = face.margin(x);
        axpy(-mgn, face.normal, x);
        bool on_face_of_E = true;
        for (const auto& h : m.space.closed_faces())
          if (h.margin(x) < -m.space.tol()) on_face_of_E = false;
        for (const auto& h : m.space.open_faces())
          if (!(h.margin(x) > m.space.tol())) on_face_of_E = false;
        if (!on_face_of_E) continue;
        ++checked;
        const double r0 = m.eval_rate(t, x);
        if (std::abs(r0) > 1e-8 * (1.0 + rate_scale)) {
          issue(true, "transition " + std::to_string(ti) +
                          " exits E through face " + std::to_string(fi) +
                          " with nonvanishing rate " + std::to_string(r0));
          return rep;
        }
      }
    }
  }
  return rep;
}

namespace {

ModelSpec make_bdi() {
  ModelSpec m("birth_death_immigration", interval(0.0, kInf));
  m.params["rho"] = 1.0;
  m.transitions.push_back({{1}, Expr::parse("x1"), TransitionKind::interaction, {}});
  m.transitions.push_back({{-1}, Expr::parse("2*x1"), TransitionKind::interaction, {}});
  m.transitions.push_back({{1}, Expr::parse("rho"), TransitionKind::immigration, {}});
  return m;
}

ModelSpec make_bdh() {
  ModelSpec m("birth_death_harvesting", interval(0.0, kInf));
  m.params["rho"] = 1.0;
  m.params["beta"] = 0.5;
  m.transitions.push_back({{1}, Expr::parse("x1"), TransitionKind::interaction, {}});
  m.transitions.push_back({{-1}, Expr::parse("2*x1"), TransitionKind::interaction, {}});
  m.transitions.push_back({{1}, Expr::parse("rho"), TransitionKind::immigration, {}});
  m.transitions.push_back({{-1}, Expr::parse("beta"), TransitionKind::harvesting, {}});
  return m;
}

ModelSpec make_yule() {
  ModelSpec m("yule", interval(0.0, kInf));
  m.transitions.push_back({{1}, Expr::parse("x1"), TransitionKind::interaction, {}});
  return m;
}

Polyhedron open_half_line() {
  return Polyhedron(1, {}, {HalfSpace(Vec{0.0}, Vec{1.0}, false)}, Vec{1.0});
}

ModelSpec make_growing() {
  ModelSpec m("growing_population", open_half_line());
  m.params["r"] = 0.5;
  for (int k = 1; k <= 48; ++k)
    m.offspring.emplace_back(k, Expr::parse("r^" + std::to_string(k)));
  return m;
}

ModelSpec make_poisson_offspring() {
  ModelSpec m("poisson_offspring", open_half_line());
  m.params["beta"] = 1.0;
  double fact = 1.0;
  for (int k = 1; k <= 40; ++k) {
    fact *= k;
    std::ostringstream e;
    e.precision(17);
    e << "exp(-beta)*beta^" << k << "/" << fact;
    m.offspring.emplace_back(k, Expr::parse(e.str()));
  }
  return m;
}

ModelSpec make_si() {
  Polyhedron space(1, {HalfSpace(Vec{1.0}, Vec{-1.0}, true)},
                   {HalfSpace(Vec{0.0}, Vec{1.0}, false)}, Vec{0.5});
  ModelSpec m("si_model", std::move(space));
  m.params["beta"] = 1.0;
  m.transitions.push_back({{1}, Expr::parse("beta*x1*(1-x1)"), TransitionKind::interaction, {}});
  return m;
}

ModelSpec make_interacting() {
  ModelSpec m("interacting_species", orthant(2));
  m.params["kappa"] = 1.0;
  m.params["a"] = 0.5;
  m.params["b"] = 0.5;
  m.transitions.push_back({{1, 0}, Expr::parse("x1*(kappa - min(x1,kappa))"), TransitionKind::interaction, {}});
  m.transitions.push_back({{0, 1}, Expr::parse("x2*(kappa - min(x2,kappa))"), TransitionKind::interaction, {}});
  m.transitions.push_back({{-1, -1}, Expr::parse("min(x1,kappa)*min(x2,kappa)"), TransitionKind::interaction, {}});
  m.transitions.push_back({{1, 0}, Expr::parse("a"), TransitionKind::immigration, {}});
  m.transitions.push_back({{0, 1}, Expr::parse("a"), TransitionKind::immigration, {}});
  m.transitions.push_back({{-1, 0}, Expr::parse("b"), TransitionKind::harvesting, {}});
  m.transitions.push_back({{0, -1}, Expr::parse("b"), TransitionKind::harvesting, {}});
  return m;
}

ModelSpec make_prey_predator() {
  ModelSpec m("prey_predator", orthant(2));
  m.params["kappa"] = 1.0;
  m.params["alpha"] = 1.0;
  m.params["beta"] = 1.0;
  m.params["mu"] = 1.0;
  m.params["a"] = 0.1;
  m.params["b"] = 0.1;
  m.transitions.push_back({{1, 0}, Expr::parse("x1*(kappa - min(x1,kappa))"), TransitionKind::interaction, {}});
  m.transitions.push_back({{-1, 0}, Expr::parse("alpha*min(x1,kappa)*x2"), TransitionKind::interaction, {}});
  m.transitions.push_back({{0, 1}, Expr::parse("beta*min(x1,kappa)*x2"), TransitionKind::interaction, {}});
  m.transitions.push_back({{0, -1}, Expr::parse("mu*x2"), TransitionKind::interaction, {}});
  m.transitions.push_back({{1, 0}, Expr::parse("a"), TransitionKind::immigration, {}});
  m.transitions.push_back({{0, 1}, Expr::parse("a"), TransitionKind::immigration, {}});
  m.transitions.push_back({{-1, 0}, Expr::parse("b"), TransitionKind::harvesting, {}});
  m.transitions.push_back({{0, -1}, Expr::parse("b"), TransitionKind::harvesting, {}});
  return m;
}

ModelSpec make_sir() {
  Polyhedron space = orthant(3);
  ModelSpec m("sir_dynamics",
              Polyhedron(3, space.closed_faces(), {}, Vec{0.3, 0.3, 0.3}));
  m.params["beta"] = 2.0;
  m.params["alpha"] = 1.0;
  m.params["mu"] = 0.2;
  m.params["kappa"] = 1.0;
  m.params["a"] = 0.1;
  m.params["b"] = 0.1;
  m.transitions.push_back({{-1, 1, 0}, Expr::parse("beta*min(x1,kappa)*x2"), TransitionKind::interaction, {}});
  m.transitions.push_back({{0, -1, 1}, Expr::parse("alpha*x2"), TransitionKind::interaction, {}});
  m.transitions.push_back(
      {{1, 0, 0}, Expr::parse("(x1+x2+x3)*(kappa - min(x1+x2+x3,kappa))"), TransitionKind::interaction, {}});
  m.transitions.push_back({{-1, 0, 0}, Expr::parse("mu*x1"), TransitionKind::interaction, {}});
  m.transitions.push_back({{0, -1, 0}, Expr::parse("mu*x2"), TransitionKind::interaction, {}});
  m.transitions.push_back({{0, 0, -1}, Expr::parse("mu*x3"), TransitionKind::interaction, {}});
  for (int i = 0; i < 3; ++i) {
    std::vector<int> up(3, 0), down(3, 0);
    up[static_cast<std::size_t>(i)] = 1;
    down[static_cast<std::size_t>(i)] = -1;
    m.transitions.push_back({up, Expr::parse("a"), TransitionKind::immigration, {}});
    m.transitions.push_back({down, Expr::parse("b"), TransitionKind::harvesting, {}});
  }
  return m;
}

}  // namespace

std::vector<std::string> builtin_model_names() {
  return {"birth_death_immigration",
          "birth_death_harvesting",
          "growing_population",
          "yule",
          "poisson_offspring",
          "si_model",
          "interacting_species",
          "prey_predator",
          "sir_dynamics"};
}

ModelSpec builtin_model(const std::string& name) {
  if (name == "birth_death_immigration") return make_bdi();
  if (name == "birth_death_harvesting") return make_bdh();
  if (name == "growing_population") return make_growing();
  if (name == "yule") return make_yule();
  if (name == "poisson_offspring") return make_poisson_offspring();
  if (name == "si_model") return make_si();
  if (name == "interacting_species") return make_interacting();
  if (name == "prey_predator") return make_prey_predator();
  if (name == "sir_dynamics") return make_sir();
  throw ValidationError("unknown builtin model '" + name + "'");
}

ModelSpec resolve_model(const std::string& ref) {
  constexpr const char* prefix = "builtin:";
  if (ref.rfind(prefix, 0) == 0) return builtin_model(ref.substr(8));
  return load_model_file(ref);
}

}  // namespace ldlab
