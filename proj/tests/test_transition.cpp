#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "markovcount/rate_model.hpp"
#include "markovcount/rng.hpp"
#include "markovcount/transition.hpp"
#include "support/stats.hpp"

using namespace markovcount;

namespace {

RateSchedule make_schedule(std::vector<double> rates) {
  RateSchedule s;
  s.n = static_cast<int>(rates.size()) - 1;
  s.rates = std::move(rates);
  return s;
}

}  // namespace

TEST_CASE("single unit row") {
  for (double alpha : {0.1, 0.7, 2.0, 5.0}) {
    const RateSchedule s = rate_vector(RateModelSpec::susceptible1(alpha), 1);
    const TransitionDistribution row = transition_distribution(s, 0);
    REQUIRE(row.probs.size() == 2);
    CHECK(row.prob(0) == doctest::Approx(std::exp(-alpha)).epsilon(1e-12));
    CHECK(row.prob(1) == doctest::Approx(1.0 - std::exp(-alpha)).epsilon(1e-12));
  }
}

TEST_CASE("independent units give a binomial row") {
  // With per-susceptible rate alpha and no infectivity term the units are
  // independent, so the count at t is Binomial(n, 1 - exp(-alpha t)).
  for (int n : {2, 3, 6, 10}) {
    for (double alpha : {0.3, std::log(2.0), 1.4}) {
      const RateSchedule s = rate_vector(RateModelSpec::susceptible1(alpha), n);
      const TransitionDistribution row = transition_distribution(s, 0);
      const auto pmf = test_support::binomial_pmf(n, 1.0 - std::exp(-alpha));
      for (int r = 0; r <= n; ++r) {
        CHECK(std::fabs(row.prob(r) - pmf[r]) < 1e-12);
      }
    }
  }
  const RateSchedule s = rate_vector(RateModelSpec::susceptible1(std::log(2.0)), 2);
  const TransitionDistribution row = transition_distribution(s, 0);
  CHECK(row.prob(0) == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(row.prob(1) == doctest::Approx(0.50).epsilon(1e-10));
  CHECK(row.prob(2) == doctest::Approx(0.25).epsilon(1e-10));
}

TEST_CASE("absorbing start state gives an exact point mass") {
  const RateSchedule s = rate_vector(RateModelSpec::infectivity1(0.7), 5);
  const TransitionDistribution row = transition_distribution(s, 0);
  CHECK(row.prob(0) == 1.0);
  for (int r = 1; r <= 5; ++r) CHECK(row.prob(r) == 0.0);

  const RateSchedule mid = make_schedule({2.0, 0.0, 3.0, 0.0});
  const TransitionDistribution from1 = transition_distribution(mid, 1);
  CHECK(from1.prob(1) == 1.0);
  CHECK(from1.prob(2) == 0.0);
  CHECK(from1.prob(3) == 0.0);
}

TEST_CASE("states past an absorbing state carry exact zeros") {
  const RateSchedule s = make_schedule({1.0, 2.0, 0.0, 5.0, 0.0});
  const TransitionDistribution row = transition_distribution(s, 0);
  CHECK(row.prob(3) == 0.0);
  CHECK(row.prob(4) == 0.0);
  double sum = 0.0;
  for (int r = 0; r <= 2; ++r) sum += row.prob(r);
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("closed form examples") {
  const RateSchedule s = make_schedule({2.0, 1.0, 0.0});
  const double expected = (1.0 - std::exp(-1.0)) * (1.0 - std::exp(-1.0));
  CHECK(transition_closed_form(s, 0, 2, 1.0) ==
        doctest::Approx(expected).epsilon(1e-12));

  // Staying put only needs the exit rate.
  CHECK(transition_closed_form(s, 0, 0, 0.7) ==
        doctest::Approx(std::exp(-2.0 * 0.7)).epsilon(1e-13));
  CHECK(transition_closed_form(s, 1, 1, 2.0) ==
        doctest::Approx(std::exp(-2.0)).epsilon(1e-13));
}

TEST_CASE("closed form rejects tied rates") {
  const RateSchedule tied = make_schedule({1.0, 1.0 + 1e-8, 0.0});
  CHECK_THROWS_AS(transition_closed_form(tied, 0, 2, 1.0), std::domain_error);
  const RateSchedule exact_tie = make_schedule({3.0, 3.0, 0.0});
  CHECK_THROWS_AS(transition_closed_form(exact_tie, 0, 2, 1.0), std::domain_error);
  // The full-row solver has no such restriction.
  const TransitionDistribution row = transition_distribution(exact_tie, 0);
  CHECK(row.prob(0) + row.prob(1) + row.prob(2) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("closed form agrees with the series row") {
  Rng rng(1503, 0);
  int checked = 0;
  for (int trial = 0; trial < 120; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_int(6));
    const auto s = test_support::random_distinct_schedule(rng, n, 0.2, 4.0);
    const int m = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n)));
    const double t = 0.25 + 1.5 * rng.uniform();
    const TransitionDistribution row = transition_distribution(s, m, t);
    for (int r = m; r <= n; ++r) {
      const double direct = transition_closed_form(s, m, r, t);
      CHECK(std::fabs(direct - row.prob(r)) < 1e-8);
      ++checked;
    }
  }
  CHECK(checked > 400);
}

TEST_CASE("rows are distributions") {
  Rng rng(77, 3);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform_int(12));
    const auto s = test_support::random_schedule(rng, n, 0.0, 50.0);
    const int m = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n) + 1));
    const TransitionDistribution row = transition_distribution(s, m);
    double sum = 0.0;
    for (int r = m; r <= n; ++r) {
      CHECK(row.prob(r) >= 0.0);
      sum += row.prob(r);
    }
    CHECK(std::fabs(sum - 1.0) < 1e-10);
    CHECK(row.prob(m - 1) == 0.0);
  }
}

TEST_CASE("only the products rate times time matter") {
  Rng rng(402, 1);
  for (double c : {0.1, 2.0, 10.0}) {
    for (int trial = 0; trial < 25; ++trial) {
      const int n = 1 + static_cast<int>(rng.uniform_int(8));
      const auto s = test_support::random_schedule(rng, n, 0.1, 5.0);
      RateSchedule scaled = s;
      for (double& r : scaled.rates) r *= c;
      const double t = 0.3 + rng.uniform();
      const TransitionDistribution a = transition_distribution(s, 0, t);
      const TransitionDistribution b = transition_distribution(scaled, 0, t / c);
      for (int r = 0; r <= n; ++r) {
        CHECK(std::fabs(a.prob(r) - b.prob(r)) < 1e-10);
      }
    }
  }
}

TEST_CASE("splitting the horizon composes") {
  Rng rng(9916, 2);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform_int(8));
    const auto sched = test_support::random_schedule(rng, n, 0.1, 6.0);
    const double s = 0.2 + rng.uniform();
    const double t = 0.2 + rng.uniform();
    const TransitionDistribution full = transition_distribution(sched, 0, s + t);
    const TransitionDistribution first = transition_distribution(sched, 0, s);
    for (int r = 0; r <= n; ++r) {
      double via = 0.0;
      for (int k = 0; k <= r; ++k) {
        if (first.prob(k) == 0.0) continue;
        const TransitionDistribution second = transition_distribution(sched, k, t);
        via += first.prob(k) * second.prob(r);
      }
      CHECK(std::fabs(via - full.prob(r)) < 1e-9);
    }
  }
}

TEST_CASE("rows satisfy the forward equations") {
  const RateSchedule s = make_schedule({1.3, 2.9, 0.8, 0.0});
  const double t = 1.0;
  const double h = 1e-4;
  const TransitionDistribution at = transition_distribution(s, 0, t);
  const TransitionDistribution up = transition_distribution(s, 0, t + h);
  const TransitionDistribution dn = transition_distribution(s, 0, t - h);
  for (int r = 0; r <= 3; ++r) {
    const double lhs = (up.prob(r) - dn.prob(r)) / (2.0 * h);
    const double inflow = (r > 0) ? s.rates[r - 1] * at.prob(r - 1) : 0.0;
    const double rhs = inflow - s.rates[r] * at.prob(r);
    CHECK(std::fabs(lhs - rhs) < 1e-5);
  }
}

TEST_CASE("log transition") {
  const RateSchedule s = rate_vector(RateModelSpec::susceptible1(std::log(2.0)), 2);
  CHECK(log_transition(s, 0, 1) == doctest::Approx(std::log(0.5)).epsilon(1e-10));

  const RateSchedule inf = rate_vector(RateModelSpec::infectivity1(1.0), 3);
  CHECK(log_transition(inf, 0, 2) == -std::numeric_limits<double>::infinity());
  CHECK(log_transition(inf, 0, 0) == 0.0);
  CHECK(log_transition(s, 2, 2) == 0.0);
  CHECK(log_transition(s, 1, 0) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("large rate loads stay normalized and correct") {
  // Far beyond the direct series cap, so this exercises the split path.
  const RateSchedule s = make_schedule({1e3, 1.0, 0.0});
  const TransitionDistribution row = transition_distribution(s, 0);
  double sum = 0.0;
  for (int r = 0; r <= 2; ++r) sum += row.prob(r);
  CHECK(std::fabs(sum - 1.0) < 1e-10);
  for (int r = 0; r <= 2; ++r) {
    CHECK(std::fabs(row.prob(r) - transition_closed_form(s, 0, r, 1.0)) < 1e-8);
  }

  const RateSchedule huge = make_schedule({2e6, 3e6, 1e6, 0.0});
  const TransitionDistribution top = transition_distribution(huge, 0);
  CHECK(top.prob(3) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("identical inputs give identical rows") {
  const RateSchedule s = make_schedule({0.9, 4.2, 1.1, 0.0});
  const TransitionDistribution a = transition_distribution(s, 0, 0.8);
  const TransitionDistribution b = transition_distribution(s, 0, 0.8);
  REQUIRE(a.probs.size() == b.probs.size());
  for (std::size_t i = 0; i < a.probs.size(); ++i) CHECK(a.probs[i] == b.probs[i]);
}

TEST_CASE("transition input validation") {
  const RateSchedule s = make_schedule({1.0, 1.0, 0.0});
  CHECK_THROWS_AS(transition_distribution(s, 0, 0.0), std::domain_error);
  CHECK_THROWS_AS(transition_distribution(s, 0, -1.0), std::domain_error);
  CHECK_THROWS_AS(transition_distribution(s, 3, 1.0), std::domain_error);
  CHECK_THROWS_AS(transition_distribution(s, -1, 1.0), std::domain_error);
  CHECK_THROWS_AS(transition_closed_form(s, 2, 1, 1.0), std::domain_error);

  RateSchedule bad = s;
  bad.rates.pop_back();
  CHECK_THROWS_AS(transition_distribution(bad, 0, 1.0), std::invalid_argument);
}
