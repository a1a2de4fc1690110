#include <cmath>

#include "doctest.h"
#include "ldlab/ldp.hpp"

using namespace ldlab;

namespace {

// Independent tail oracle: -(1/n) log P[Poisson(n rho t) >= ceil(n a)]
// by direct log-sum-exp over the pmf, nothing shared with the library.
double poisson_tail_oracle(double rho, double t, double a, long long n) {
  double mean = n * rho * t;
  long long k0 = (long long)std::ceil(n * a - 1e-12);
  // log pmf(k) = -mean + k log mean - lgamma(k+1)
  auto logpmf = [&](long long k) {
    return -mean + k * std::log(mean) - std::lgamma(double(k) + 1.0);
  };
  double lead = logpmf(k0);
  double sum = 0.0;
  for (long long k = k0; k < k0 + 4000000; ++k) {
    double term = std::exp(logpmf(k) - lead);
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return -(lead + std::log(sum)) / double(n);
}

}  // namespace

TEST_CASE("exact tail exponent matches the direct-sum oracle") {
  for (long long n : {1LL, 7LL, 100LL, 1000LL}) {
    CHECK(exact_poisson_rate(1.0, 1.0, 2.0, n) ==
          doctest::Approx(poisson_tail_oracle(1.0, 1.0, 2.0, n))
              .epsilon(1e-10));
  }
  CHECK(exact_poisson_rate(0.5, 2.0, 3.0, 50) ==
        doctest::Approx(poisson_tail_oracle(0.5, 2.0, 3.0, 50))
            .epsilon(1e-10));
}

TEST_CASE("closed-form limit and monotone approach") {
  CHECK(poisson_rate_limit(1.0, 1.0, 2.0) ==
        doctest::Approx(2.0 * std::log(2.0) - 1.0));
  double prev = kInf;
  for (long long n : {10LL, 100LL, 1000LL}) {
    double r = exact_poisson_rate(1.0, 1.0, 2.0, n);
    CHECK(r < prev);
    CHECK(r > poisson_rate_limit(1.0, 1.0, 2.0));
    prev = r;
  }
}

TEST_CASE("the exponent grows with the threshold") {
  double r1 = exact_poisson_rate(1.0, 1.0, 1.5, 200);
  double r2 = exact_poisson_rate(1.0, 1.0, 2.0, 200);
  double r3 = exact_poisson_rate(1.0, 1.0, 3.0, 200);
  CHECK(r1 < r2);
  CHECK(r2 < r3);
}

TEST_CASE("thresholds below the mean are rejected") {
  CHECK_THROWS_AS(exact_poisson_rate(1.0, 1.0, 0.5, 100), ValidationError);
}

TEST_CASE("Monte Carlo estimate brackets a moderate deviation") {
  ModelSpec m = builtin_model("birth_death_immigration");
  EventPredicate event;
  event.kind = EventPredicate::Kind::terminal_above;
  event.coord = 0;
  event.threshold = 1.3;
  McRateResult res = mc_rate(m, event, 20, 20000, 4, {1.0}, 1.0, 4);
  CHECK(res.hits > 0);
  CHECK(res.hits < res.reps);
  CHECK(res.wilson_lo < res.p_hat);
  CHECK(res.p_hat < res.wilson_hi);
  CHECK(res.rate_lo <= res.estimate);
  CHECK(res.estimate <= res.rate_hi);
  // estimate = -(1/n) log p_hat
  CHECK(res.estimate ==
        doctest::Approx(-std::log(res.p_hat) / res.n).epsilon(1e-12));
}

TEST_CASE("Monte Carlo results do not depend on the thread count") {
  ModelSpec m = builtin_model("birth_death_immigration");
  EventPredicate event;
  event.kind = EventPredicate::Kind::terminal_above;
  event.coord = 0;
  event.threshold = 1.2;
  McRateResult a = mc_rate(m, event, 10, 4000, 4, {1.0}, 1.0, 1);
  McRateResult b = mc_rate(m, event, 10, 4000, 4, {1.0}, 1.0, 8);
  CHECK(a.hits == b.hits);
  CHECK(a.p_hat == b.p_hat);
}

TEST_CASE("zero observed hits refuse a rate estimate") {
  ModelSpec m = builtin_model("birth_death_immigration");
  EventPredicate event;
  event.kind = EventPredicate::Kind::terminal_above;
  event.coord = 0;
  event.threshold = 3.0;  // hopeless at this n/reps budget
  CHECK_THROWS_AS(mc_rate(m, event, 200, 500, 4, {1.0}, 1.0, 4),
                  ConvergenceError);
}

TEST_CASE("unreachable-boundary demonstration: finite action, zero hits") {
  FailureDemoReport rep = failure_demo(20000, 100, 2000, 4);
  CHECK(rep.hits == 0);
  CHECK(rep.replicas == 20000);
  CHECK(std::isfinite(rep.path_action));
  CHECK(rep.path_action ==
        doctest::Approx(std::log(2.0) - 1.0 / 6.0).epsilon(1e-3));
  CHECK(rep.action_target == doctest::Approx(std::log(2.0) - 1.0 / 6.0));
  CHECK_FALSE(rep.note.empty());
}
