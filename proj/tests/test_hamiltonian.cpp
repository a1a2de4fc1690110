#include <cmath>

#include "doctest.h"
#include "ldlab/hamiltonian.hpp"
#include "ldlab/rng.hpp"

using namespace ldlab;

namespace {

// hand-written H for birth(x) + death(2x) + immigration(rho): the additive
// oracle every piece evaluation must reproduce term by term
double bdi_oracle(double x, double p, double rho) {
  return x * (std::exp(p) - 1.0) + 2.0 * x * (std::exp(-p) - 1.0) +
         rho * (std::exp(p) - 1.0);
}

ModelSpec pure_transition_model(const std::string& name, double lo,
                                std::vector<std::pair<std::string, int>> tr) {
  ModelSpec m(name, interval(lo, kInf));
  for (auto& [rate, gamma] : tr) {
    TransitionSpec t;
    t.gamma = {gamma};
    t.rate = Expr::parse(rate);
    t.kind = gamma > 0 ? TransitionKind::immigration
                       : TransitionKind::harvesting;
    m.transitions.push_back(t);
  }
  return m;
}

}  // namespace

TEST_CASE("interior piece matches the term-sum oracle") {
  HamiltonianFamily ham =
      build_hamiltonians(builtin_model("birth_death_immigration"));
  double rho = ham.model().params.at("rho");
  for (double x : {0.2, 1.0, 3.7})
    for (double p : {-2.0, -0.3, 0.0, 0.8, 2.5})
      CHECK(ham.piece({}, {x}, {p}) ==
            doctest::Approx(bdi_oracle(x, p, rho)).epsilon(1e-12));
}

TEST_CASE("H(x, 0) = 0 for every piece of every builtin") {
  for (const auto& name : builtin_model_names()) {
    HamiltonianFamily ham = build_hamiltonians(builtin_model(name));
    Vec w = ham.space().witness();
    Vec zero(w.size(), 0.0);
    for (const auto& J : ham.active_pieces(w))
      CHECK(ham.piece(J, w, zero) == doctest::Approx(0.0));
    // a boundary point: push the witness onto the first closed face
    if (!ham.space().closed_faces().empty()) {
      const auto& face = ham.space().closed_faces()[0];
      Vec xb = w;
      axpy(-face.margin(w), face.normal, xb);
      if (ham.space().contains(xb)) {
        for (const auto& J : ham.active_pieces(xb))
          CHECK(ham.piece(J, xb, zero) == doctest::Approx(0.0));
        CHECK(ham.dagger(xb, zero) == doctest::Approx(0.0));
        CHECK(ham.ddagger(xb, zero) == doctest::Approx(0.0));
      }
    }
  }
}

TEST_CASE("dagger and ddagger bracket every piece") {
  HamiltonianFamily ham =
      build_hamiltonians(builtin_model("birth_death_harvesting"));
  Vec x{0.0};
  auto pieces = ham.active_pieces(x);
  CHECK(pieces.size() == 2);  // empty set and the lower face
  for (double p : {-2.0, -0.5, 0.0, 0.5, 2.0}) {
    double lo = ham.ddagger(x, {p});
    double hi = ham.dagger(x, {p});
    CHECK(lo <= hi + 1e-15);
    for (const auto& J : pieces) {
      double v = ham.piece(J, x, {p});
      CHECK(v >= lo - 1e-15);
      CHECK(v <= hi + 1e-15);
    }
  }
}

TEST_CASE("switching off the lower face drops exiting terms only") {
  HamiltonianFamily ham =
      build_hamiltonians(builtin_model("birth_death_harvesting"));
  double rho = ham.model().params.at("rho");
  double beta = ham.model().params.at("beta");
  // at x = 0 birth and death rates vanish; immigration and harvesting stay
  double p = 1.3;
  CHECK(ham.piece({}, {0.0}, {p}) ==
        doctest::Approx(rho * (std::exp(p) - 1.0) +
                        beta * (std::exp(-p) - 1.0)));
  CHECK(ham.piece({0}, {0.0}, {p}) ==
        doctest::Approx(rho * (std::exp(p) - 1.0)));
}

TEST_CASE("pieces that drop nothing are deduplicated") {
  // pure birth: no jump exits the lower face, so the face piece collapses
  HamiltonianFamily ham = build_hamiltonians(builtin_model("yule"));
  CHECK(ham.active_pieces({0.0}).size() == 1);
  CHECK(ham.active_pieces({0.0})[0].empty());
  CHECK(ham.dagger({0.0}, {2.0}) == doctest::Approx(ham.ddagger({0.0}, {2.0})));
}

TEST_CASE("gradient and Hessian match finite differences") {
  HamiltonianFamily ham =
      build_hamiltonians(builtin_model("interacting_species"));
  Vec x{1.3, 0.7};
  CounterRng rng(5, 0);
  for (int trial = 0; trial < 5; ++trial) {
    Vec p{2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0};
    Vec g = ham.grad_p_piece({}, x, p);
    auto Hss = ham.hess_p_piece({}, x, p);
    const double d = 1e-6;
    for (int i = 0; i < 2; ++i) {
      Vec pp = p, pm = p;
      pp[i] += d;
      pm[i] -= d;
      double fd = (ham.piece({}, x, pp) - ham.piece({}, x, pm)) / (2 * d);
      CHECK(g[i] == doctest::Approx(fd).epsilon(1e-5));
      for (int j = 0; j < 2; ++j) {
        Vec gp = ham.grad_p_piece({}, x, pp);
        Vec gm = ham.grad_p_piece({}, x, pm);
        double fd2 = (gp[j] - gm[j]) / (2 * d);
        CHECK(Hss[i][j] == doctest::Approx(fd2).epsilon(1e-4));
      }
    }
    // convexity along a random segment
    Vec q{2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0};
    double t = rng.uniform();
    Vec mid = t * p + (1.0 - t) * q;
    CHECK(ham.piece({}, x, mid) <=
          t * ham.piece({}, x, p) + (1.0 - t) * ham.piece({}, x, q) + 1e-12);
  }
}

TEST_CASE("offspring terms contribute k-fold jumps with x1-scaled rates") {
  HamiltonianFamily ham =
      build_hamiltonians(builtin_model("poisson_offspring"));
  const ModelSpec& m = ham.model();
  REQUIRE(!m.offspring.empty());
  double x = 1.7, p = 0.4;
  double manual = 0.0;
  for (const auto& [k, nu] : m.offspring)
    manual += x * nu.eval({x}, m.params) * (std::exp(k * p) - 1.0);
  CHECK(ham.piece({}, {x}, {p}) == doctest::Approx(manual).epsilon(1e-9));
  // the offspring rate vanishes at 0, so the lower face drops nothing new
  CHECK(ham.piece({}, {0.0}, {p}) == doctest::Approx(0.0));
}

TEST_CASE("superposition is pointwise additive") {
  ModelSpec birth_death = pure_transition_model("bd", 0.0, {});
  {
    TransitionSpec t;
    t.gamma = {1};
    t.rate = Expr::parse("x1");
    t.kind = TransitionKind::interaction;
    birth_death.transitions.push_back(t);
    t.gamma = {-1};
    t.rate = Expr::parse("2*x1");
    birth_death.transitions.push_back(t);
  }
  ModelSpec immigration = pure_transition_model("imm", 0.0, {{"1", 1}});
  HamiltonianFamily A = build_hamiltonians(birth_death);
  HamiltonianFamily B = build_hamiltonians(immigration);
  HamiltonianFamily S = sum_hamiltonians(A, B);
  for (double x : {0.0, 0.5, 2.0})
    for (double p : {-1.5, 0.0, 0.9})
      CHECK(S.piece({}, {x}, {p}) ==
            doctest::Approx(A.piece({}, {x}, {p}) + B.piece({}, {x}, {p})));
  // and equals the one-shot model with the same transitions
  CHECK(S.piece({}, {1.0}, {0.7}) ==
        doctest::Approx(bdi_oracle(1.0, 0.7, 1.0)));
}

TEST_CASE("conflicting parameter values refuse to merge") {
  ModelSpec a("a", interval(0.0, kInf));
  a.params["c"] = 1.0;
  ModelSpec b("b", interval(0.0, kInf));
  b.params["c"] = 2.0;
  HamiltonianFamily A = build_hamiltonians(a);
  HamiltonianFamily B = build_hamiltonians(b);
  CHECK_THROWS_AS(sum_hamiltonians(A, B), ValidationError);
}

TEST_CASE("building a leaky model throws unless validation is disabled") {
  // a plain (non-harvesting) constant death clock exits [0, inf)
  ModelSpec leaky("leaky", interval(0.0, kInf));
  TransitionSpec t;
  t.gamma = {-1};
  t.rate = Expr::parse("1");
  t.kind = TransitionKind::interaction;
  leaky.transitions.push_back(t);
  CHECK_THROWS_AS(build_hamiltonians(leaky), ValidationError);
  HamiltonianFamily ham = build_hamiltonians(leaky, false);
  CHECK(ham.piece({}, {1.0}, {0.5}) ==
        doctest::Approx(std::exp(-0.5) - 1.0));
}
