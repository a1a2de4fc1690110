#include <cmath>

#include "doctest.h"
#include "ldlab/hj1d.hpp"
#include "ldlab/rng.hpp"

using namespace ldlab;

namespace {
std::function<double(double)> wavelet() {
  return [](double x) { return std::sin(x) * std::exp(-x); };
}
}  // namespace

TEST_CASE("grid construction marks true boundaries and sponges") {
  HamiltonianFamily ham =
      build_hamiltonians(builtin_model("birth_death_harvesting"));
  Grid1D g = make_grid(ham, 0.0, 6.0, 60);
  CHECK(g.size() == 61);
  CHECK(g.nodes.front() == doctest::Approx(0.0));
  CHECK(g.nodes.back() == doctest::Approx(6.0));
  CHECK(g.left_true_boundary);       // 0 is a closed face of [0, inf)
  CHECK_FALSE(g.right_true_boundary);  // 6 truncates the half line
  CHECK(g.sponge_left == 0);
  CHECK(g.sponge_right > 0);
  CHECK_FALSE(g.in_sponge(0));
  CHECK(g.in_sponge(g.size() - 1));
}

TEST_CASE("constant data is reproduced exactly by both limiting schemes") {
  HamiltonianFamily ham =
      build_hamiltonians(builtin_model("birth_death_harvesting"));
  Grid1D g = make_grid(ham, 0.0, 6.0, 48);
  for (HjVariant variant : {HjVariant::dagger, HjVariant::ddagger}) {
    HjSolution sol =
        solve_resolvent(ham, 0.5, [](double) { return 0.7; }, g, variant);
    CHECK(sol.converged);
    for (double f : sol.f) CHECK(std::fabs(f - 0.7) <= 1e-12);
  }
}

TEST_CASE("nodal updates are monotone in the neighbor values") {
  HamiltonianFamily ham =
      build_hamiltonians(builtin_model("birth_death_harvesting"));
  Grid1D g = make_grid(ham, 0.0, 4.0, 24);
  ResolventScheme scheme(ham, 0.5, wavelet(), g, HjVariant::ddagger);
  CounterRng rng(17, 0);
  for (int trial = 0; trial < 20; ++trial) {
    Vec f(g.size());
    for (double& v : f) v = 2.0 * rng.uniform() - 1.0;
    Vec fup = f;
    for (double& v : fup) v += 0.5 * rng.uniform();
    for (int i = 0; i < g.size(); ++i)
      CHECK(scheme.node_update(i, fup) >= scheme.node_update(i, f) - 1e-9);
  }
}

TEST_CASE("sweeps preserve ordering between solutions") {
  HamiltonianFamily ham =
      build_hamiltonians(builtin_model("birth_death_harvesting"));
  Grid1D g = make_grid(ham, 0.0, 4.0, 24);
  ResolventScheme scheme(ham, 0.5, wavelet(), g, HjVariant::dagger);
  CounterRng rng(23, 0);
  Vec f(g.size()), gup(g.size());
  for (int i = 0; i < g.size(); ++i) {
    f[i] = rng.uniform() - 0.5;
    gup[i] = f[i] + rng.uniform();
  }
  for (int k = 0; k < 5; ++k) {
    f = scheme.sweep(f);
    gup = scheme.sweep(gup);
    for (int i = 0; i < g.size(); ++i) CHECK(gup[i] >= f[i] - 1e-9);
  }
}

TEST_CASE("the max-piece solution dominates the min-piece solution") {
  HamiltonianFamily ham =
      build_hamiltonians(builtin_model("birth_death_harvesting"));
  Grid1D g = make_grid(ham, 0.0, 6.0, 60);
  HjSolution hi = solve_resolvent(ham, 0.5, wavelet(), g, HjVariant::dagger);
  HjSolution lo = solve_resolvent(ham, 0.5, wavelet(), g, HjVariant::ddagger);
  REQUIRE(hi.converged);
  REQUIRE(lo.converged);
  for (int i = 0; i < g.size(); ++i) CHECK(hi.f[i] >= lo.f[i] - 1e-9);
  // residuals really are small fixed-point defects
  ResolventScheme scheme(ham, 0.5, wavelet(), g, HjVariant::dagger);
  CHECK(scheme.residual(hi.f) <= 1e-9);
}

TEST_CASE("interior schemes are variant-independent") {
  // away from the wall the two limiting Hamiltonians coincide, so both
  // variants must produce the same answer on an interior window
  HamiltonianFamily ham =
      build_hamiltonians(builtin_model("birth_death_harvesting"));
  Grid1D g = make_grid(ham, 1.0, 5.0, 40);
  CHECK_FALSE(g.left_true_boundary);
  HjSolution a = solve_resolvent(ham, 0.5, wavelet(), g, HjVariant::dagger);
  HjSolution b = solve_resolvent(ham, 0.5, wavelet(), g, HjVariant::ddagger);
  for (int i = 0; i < g.size(); ++i)
    CHECK(a.f[i] == doctest::Approx(b.f[i]).epsilon(1e-10));
}

TEST_CASE("refinement probe reports a shrinking gap for well-posed data") {
  HamiltonianFamily ham =
      build_hamiltonians(builtin_model("birth_death_harvesting"));
  ComparisonProbe probe =
      comparison_probe(ham, 0.5, wavelet(), 0.0, 6.0, {20, 40, 80});
  REQUIRE(probe.levels.size() == 3);
  CHECK(probe.consistent);
  for (const auto& lv : probe.levels) CHECK(lv.converged);
  for (double r : probe.ratios) CHECK(r < 0.75);
  CHECK_FALSE(probe.note.empty());
}

TEST_CASE("refinement probe collapses for constant data") {
  HamiltonianFamily ham =
      build_hamiltonians(builtin_model("birth_death_harvesting"));
  ComparisonProbe probe = comparison_probe(
      ham, 0.5, [](double) { return 0.3; }, 0.0, 6.0, {20, 40});
  CHECK(probe.consistent);
  for (const auto& lv : probe.levels) CHECK(lv.gap <= 1e-12);
}

TEST_CASE("variational point certifies the scheme from below") {
  HamiltonianFamily ham =
      build_hamiltonians(builtin_model("birth_death_harvesting"));
  double x = 1.5, lambda = 0.5;
  Grid1D g = make_grid(ham, 0.0, 6.0, 160);
  HjSolution sol = solve_resolvent(ham, lambda, wavelet(), g,
                                   HjVariant::dagger);
  REQUIRE(sol.converged);
  int idx = 0;
  for (int i = 0; i < g.size(); ++i)
    if (std::fabs(g.nodes[i] - x) < std::fabs(g.nodes[idx] - x)) idx = i;
  VariationalPoint vp =
      variational_resolvent_point(ham, lambda, wavelet(), x, 12.0, 20);
  CHECK(vp.converged);
  CHECK(vp.path_states.front() == doctest::Approx(x));
  // lower-bound certificate: cannot exceed the scheme value by more than
  // discretization slack
  CHECK(vp.value <= sol.f[idx] + 5e-2);
  CHECK(vp.value >= sol.f[idx] - 5e-2);
}

TEST_CASE("grid construction rejects bad requests") {
  HamiltonianFamily ham =
      build_hamiltonians(builtin_model("birth_death_harvesting"));
  CHECK_THROWS_AS(make_grid(ham, 2.0, 1.0, 40), ValidationError);
  CHECK_THROWS_AS(make_grid(ham, 0.0, 6.0, 2), ValidationError);
  CHECK_THROWS_AS(make_grid(ham, -1.0, 6.0, 40), ValidationError);
}
