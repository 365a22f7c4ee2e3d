#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "markovcount/exchangeable.hpp"
#include "markovcount/rate_model.hpp"
#include "markovcount/rng.hpp"
#include "markovcount/transition.hpp"
#include "support/stats.hpp"

using namespace markovcount;

namespace {

// Polya urn form of the beta-binomial pmf, evaluated in long double. This
// never touches the alternating-sum path under test.
std::vector<double> beta_binomial_pmf(int n, double p, double a) {
  std::vector<double> pmf(static_cast<std::size_t>(n) + 1, 0.0);
  for (int r = 0; r <= n; ++r) {
    long double c = 1.0L;
    for (int j = 0; j < r; ++j) {
      c *= static_cast<long double>(n - j) / static_cast<long double>(j + 1);
    }
    long double num = 1.0L;
    for (int j = 0; j < r; ++j) num *= static_cast<long double>(p) + j * static_cast<long double>(a);
    for (int j = 0; j < n - r; ++j) {
      num *= (1.0L - static_cast<long double>(p)) + j * static_cast<long double>(a);
    }
    long double den = 1.0L;
    for (int j = 0; j < n; ++j) den *= 1.0L + j * static_cast<long double>(a);
    pmf[static_cast<std::size_t>(r)] = static_cast<double>(c * num / den);
  }
  return pmf;
}

// Probability that a fixed pattern (given as a bitmask of affected units)
// is realized, from the inclusion-exclusion over supersets.
long double pattern_probability(std::uint32_t mask, int n,
                                const std::vector<double>& lambda) {
  const std::uint32_t comp = (~mask) & ((1u << n) - 1u);
  long double total = 0.0L;
  std::uint32_t sub = comp;
  for (;;) {
    const int extra = std::popcount(sub);
    const int size = std::popcount(mask) + extra;
    const long double term = static_cast<long double>(lambda[static_cast<std::size_t>(size)]);
    total += (extra % 2 == 0) ? term : -term;
    if (sub == 0) break;
    sub = (sub - 1) & comp;
  }
  return total;
}

std::vector<double> pmf_by_enumeration(const LambdaVector& lv) {
  const int n = lv.n;
  std::vector<long double> marginal(static_cast<std::size_t>(n) + 1, 0.0L);
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    marginal[static_cast<std::size_t>(std::popcount(mask))] +=
        pattern_probability(mask, n, lv.lambda);
  }
  std::vector<double> pmf(marginal.size());
  for (std::size_t i = 0; i < marginal.size(); ++i) {
    pmf[i] = static_cast<double>(marginal[i]);
  }
  return pmf;
}

}  // namespace

TEST_CASE("binomial moments reproduce the binomial pmf") {
  // The inclusion-exclusion sum has an alternating-series condition number
  // that grows with n; with lambda_j = p^j stored in doubles the reachable
  // floor at n = 15 is ~1e-11, so the tight bound applies through n = 10.
  for (int n : {1, 2, 5, 8, 10}) {
    for (double p : {0.05, 0.37, 0.5, 0.93}) {
      const auto pmf = pmf_from_lambda(lambda_binomial(p, n));
      const auto oracle = test_support::binomial_pmf(n, p);
      REQUIRE(pmf.size() == oracle.size());
      for (std::size_t r = 0; r < pmf.size(); ++r) {
        CHECK(std::fabs(pmf[r] - oracle[r]) < 1e-12);
      }
    }
  }
  for (double p : {0.05, 0.37, 0.5, 0.93}) {
    const auto pmf = pmf_from_lambda(lambda_binomial(p, 15));
    const auto oracle = test_support::binomial_pmf(15, p);
    for (std::size_t r = 0; r < pmf.size(); ++r) {
      CHECK(std::fabs(pmf[r] - oracle[r]) < 1e-10);
    }
  }
}

TEST_CASE("beta-binomial moments reproduce the urn pmf") {
  for (int n : {2, 3, 5, 8, 10}) {
    for (double p : {0.2, 0.5, 0.8}) {
      const double bound = -std::min(p, 1.0 - p) / (n - 1);
      for (double a : {bound * 0.9, -0.02, 0.05, 0.2, 1.0}) {
        const auto pmf = pmf_from_lambda(lambda_beta_binomial(p, a, n));
        const auto oracle = beta_binomial_pmf(n, p, a);
        for (std::size_t r = 0; r < pmf.size(); ++r) {
          CHECK(std::fabs(pmf[r] - oracle[r]) < 1e-12);
        }
      }
    }
  }
}

TEST_CASE("zero overdispersion collapses to the binomial") {
  for (int n : {1, 2, 6}) {
    const auto a = lambda_beta_binomial(0.3, 0.0, n);
    const auto b = lambda_binomial(0.3, n);
    for (std::size_t j = 0; j < a.lambda.size(); ++j) {
      CHECK(a.lambda[j] == doctest::Approx(b.lambda[j]).epsilon(1e-15));
    }
  }
}

TEST_CASE("unit power exponent collapses to the binomial") {
  for (int n : {1, 3, 8}) {
    const auto a = lambda_qpower(0.42, 1.0, n);
    const auto b = lambda_binomial(0.42, n);
    for (std::size_t j = 0; j < a.lambda.size(); ++j) {
      CHECK(std::fabs(a.lambda[j] - b.lambda[j]) < 1e-14);
    }
  }
}

TEST_CASE("power family is admissible across its domain") {
  for (int n : {1, 2, 5, 12}) {
    for (double p : {0.1, 0.3, 0.5, 0.7, 0.9}) {
      for (double gamma : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        const auto pmf = pmf_from_lambda(lambda_qpower(p, gamma, n));
        double sum = 0.0;
        for (double v : pmf) {
          CHECK(v >= 0.0);
          sum += v;
        }
        CHECK(std::fabs(sum - 1.0) < 1e-10);
      }
    }
  }
}

TEST_CASE("marginals match a full enumeration of the joint") {
  for (int n : {2, 4, 6}) {
    std::vector<LambdaVector> cases;
    cases.push_back(lambda_binomial(0.35, n));
    cases.push_back(lambda_beta_binomial(0.5, 0.15, n));
    cases.push_back(lambda_beta_binomial(0.4, -0.05, n));
    cases.push_back(lambda_qpower(0.6, 0.5, n));
    for (const auto& lv : cases) {
      const auto direct = pmf_from_lambda(lv);
      const auto enumerated = pmf_by_enumeration(lv);
      for (std::size_t r = 0; r < direct.size(); ++r) {
        CHECK(std::fabs(direct[r] - enumerated[r]) < 1e-12);
      }
    }
  }
}

TEST_CASE("moment recursion inverts the count distribution") {
  Rng rng(5512, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform_int(10));
    const auto sched = test_support::random_schedule(rng, n, 0.05, 5.0);
    const TransitionDistribution row = transition_distribution(sched, 0);
    const LambdaVector lv = lambda_from_transition(row);

    CHECK(lv.lambda[0] == 1.0);
    for (int j = 0; j < n; ++j) {
      CHECK(lv.lambda[j + 1] <= lv.lambda[j] + 1e-10);
      CHECK(lv.lambda[j + 1] >= -1e-10);
    }

    const auto pmf = pmf_from_lambda(lv);
    for (int r = 0; r <= n; ++r) {
      CHECK(std::fabs(pmf[static_cast<std::size_t>(r)] - row.prob(r)) < 1e-9);
    }
  }
}

TEST_CASE("a point mass at n has all-ones moments") {
  for (int n : {1, 3, 7}) {
    TransitionDistribution row;
    row.n = n;
    row.m = 0;
    row.probs.assign(static_cast<std::size_t>(n) + 1, 0.0);
    row.probs.back() = 1.0;
    const LambdaVector lv = lambda_from_transition(row);
    for (double v : lv.lambda) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("independent-unit rows yield geometric moments") {
  for (double alpha : {0.4, std::log(2.0), 1.7}) {
    const int n = 7;
    const RateSchedule s = rate_vector(RateModelSpec::susceptible1(alpha), n);
    const LambdaVector lv = lambda_from_transition(transition_distribution(s, 0));
    const double p = 1.0 - std::exp(-alpha);
    for (int j = 0; j <= n; ++j) {
      CHECK(std::fabs(lv.lambda[static_cast<std::size_t>(j)] - std::pow(p, j)) < 1e-10);
    }
  }
}

TEST_CASE("inadmissible moment sequences are rejected") {
  LambdaVector negative_cell;
  negative_cell.n = 2;
  negative_cell.lambda = {1.0, 0.2, 0.9};
  CHECK_THROWS_AS(pmf_from_lambda(negative_cell), std::domain_error);

  LambdaVector bad_head;
  bad_head.n = 2;
  bad_head.lambda = {0.9, 0.5, 0.2};
  CHECK_THROWS_AS(pmf_from_lambda(bad_head), std::domain_error);

  LambdaVector too_short;
  too_short.n = 3;
  too_short.lambda = {1.0, 0.5};
  CHECK_THROWS_AS(pmf_from_lambda(too_short), std::invalid_argument);
}

TEST_CASE("family parameter domains") {
  CHECK_THROWS_AS(lambda_binomial(-0.1, 3), std::domain_error);
  CHECK_THROWS_AS(lambda_binomial(1.1, 3), std::domain_error);
  CHECK_THROWS_AS(lambda_beta_binomial(0.0, 0.1, 3), std::domain_error);
  CHECK_THROWS_AS(lambda_beta_binomial(0.3, -0.2, 3), std::domain_error);
  CHECK_NOTHROW(lambda_beta_binomial(0.3, -0.14, 3));
  CHECK_THROWS_AS(lambda_qpower(0.5, 1.5, 3), std::domain_error);
  CHECK_THROWS_AS(lambda_qpower(0.5, -0.1, 3), std::domain_error);
  CHECK_THROWS_AS(lambda_qpower(0.0, 0.5, 3), std::domain_error);
  CHECK_THROWS_AS(lambda_binomial(0.5, 0), std::invalid_argument);
}

TEST_CASE("moment recursion rejects rows that are not distributions") {
  TransitionDistribution row;
  row.n = 2;
  row.m = 0;
  row.probs = {0.2, 0.2, 0.2};
  CHECK_THROWS_AS(lambda_from_transition(row), std::domain_error);

  TransitionDistribution shifted;
  shifted.n = 2;
  shifted.m = 1;
  shifted.probs = {0.5, 0.5};
  CHECK_THROWS_AS(lambda_from_transition(shifted), std::invalid_argument);
}
