#include <cmath>

#include "doctest.h"
#include "ldlab/flows.hpp"

using namespace ldlab;

TEST_CASE("zero-cost flow follows the drift ODE") {
  // drift of birth(x)/death(2x)/immigration(1) is 1 - x: from 2,
  // x(t) = 1 + e^{-t}
  HamiltonianFamily ham =
      build_hamiltonians(builtin_model("birth_death_immigration"));
  FlowResult res = zero_cost_flow(ham, {2.0}, 1.0, 1e-3);
  CHECK(res.path.states.back()[0] ==
        doctest::Approx(1.0 + std::exp(-1.0)).epsilon(2e-3));
  CHECK(res.path.times.back() == doctest::Approx(1.0));
  for (const auto& cert : res.certificates) {
    CHECK(cert.in_tangent_cone);
    CHECK(cert.ineq_gap >= -1e-9);
  }
}

TEST_CASE("equilibria are stationary under the zero-cost flow") {
  HamiltonianFamily ham =
      build_hamiltonians(builtin_model("birth_death_immigration"));
  FlowResult res = zero_cost_flow(ham, {1.0}, 2.0, 1e-3);
  for (const auto& x : res.path.states)
    CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("absorbing boundary points stay put") {
  HamiltonianFamily ham = build_hamiltonians(builtin_model("yule"));
  FlowResult res = zero_cost_flow(ham, {0.0}, 1.0, 1e-2);
  for (const auto& x : res.path.states) CHECK(x[0] == doctest::Approx(0.0));
  CHECK(res.projected_steps == 0);
}

TEST_CASE("flow never leaves the state space") {
  HamiltonianFamily ham =
      build_hamiltonians(builtin_model("birth_death_harvesting"));
  // net outflow at small x: drift x + 1 - 2x - 0.5 pushes up from 0, but
  // start where harvesting dominates to stress the boundary handling
  FlowResult res = zero_cost_flow(ham, {0.1}, 3.0, 1e-3);
  for (const auto& x : res.path.states)
    CHECK(ham.space().contains(x));
}

TEST_CASE("controlled flow with constant momentum tilts the velocity") {
  ModelSpec m("imm", interval(0.0, kInf));
  TransitionSpec t;
  t.gamma = {1};
  t.rate = Expr::parse("1");
  t.kind = TransitionKind::immigration;
  m.transitions.push_back(t);
  HamiltonianFamily ham = build_hamiltonians(m);
  // velocity of e^p - 1 at p = log 2 is 2: from 0 the path is x = 2t
  auto field = [](const Vec&) { return Vec{std::log(2.0)}; };
  FlowResult res = controlled_flow(ham, field, {0.0}, 1.0, 1e-3);
  CHECK(res.path.states.back()[0] == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("velocity growth probe is finite and scales with the rates") {
  HamiltonianFamily ham =
      build_hamiltonians(builtin_model("birth_death_immigration"));
  double g = growth_bound_probe(ham, {0.0}, {20.0}, 2000);
  CHECK(std::isfinite(g));
  CHECK(g > 0.0);
  // |drift| = |1 - x| <= 1 + |x|: the normalized sup stays near 1
  CHECK(g <= 1.5);
}

TEST_CASE("two-species flow approaches interior equilibrium") {
  HamiltonianFamily ham =
      build_hamiltonians(builtin_model("interacting_species"));
  Vec w = ham.space().witness();
  FlowResult res = zero_cost_flow(ham, w, 5.0, 1e-2);
  // whatever the limit is, velocities at the end must have settled
  const auto& xs = res.path.states;
  REQUIRE(xs.size() > 10);
  Vec last = xs.back(), prev = xs[xs.size() - 10];
  CHECK(norm2(last - prev) < 0.5);
  for (const auto& x : xs) CHECK(ham.space().contains(x));
}
