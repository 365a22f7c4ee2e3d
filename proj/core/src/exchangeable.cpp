#include "markovcount/exchangeable.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "markovcount/numeric.hpp"

namespace markovcount {
namespace {

void check_lambda(const LambdaVector& lv) {
  if (lv.n < 1) throw std::invalid_argument("lambda: n must be >= 1");
  if (lv.lambda.size() != static_cast<std::size_t>(lv.n) + 1) {
    throw std::invalid_argument("lambda: need n + 1 entries");
  }
  for (double v : lv.lambda) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("lambda: entries must be finite");
    }
  }
  if (std::abs(lv.lambda[0] - 1.0) > 1e-9) {
    throw std::domain_error("lambda: lambda_0 must be 1");
  }
}

}  // namespace

std::vector<double> pmf_from_lambda(const LambdaVector& lv) {
  check_lambda(lv);
  const int n = lv.n;

  std::vector<double> pmf(static_cast<std::size_t>(n) + 1, 0.0);
  for (int r = 0; r <= n; ++r) {
    KahanSum<long double> sum;
    for (int j = 0; j <= n - r; ++j) {
      const long double term =
          static_cast<long double>(binomial_coefficient(n - r, j)) *
          static_cast<long double>(lv.lambda[static_cast<std::size_t>(r + j)]);
      sum.add((j % 2 == 0) ? term : -term);
    }
    pmf[static_cast<std::size_t>(r)] = static_cast<double>(
        static_cast<long double>(binomial_coefficient(n, r)) * sum.value());
  }

  KahanSum<double> total;
  for (double& p : pmf) {
    if (p < 0) {
      if (p < -1e-9) {
        throw std::domain_error(
            "lambda sequence inadmissible for this n: Pr(Y = r) < 0");
      }
      p = 0;
    }
    total.add(p);
  }
  const double t = total.value();
  if (std::abs(t - 1.0) > 1e-9) {
    throw std::domain_error(
        "lambda sequence inadmissible for this n: total mass " +
        std::to_string(t));
  }
  for (double& p : pmf) p /= t;
  return pmf;
}

LambdaVector lambda_binomial(double p, int n) {
  if (n < 1) throw std::invalid_argument("lambda: n must be >= 1");
  if (!(p >= 0 && p <= 1)) {
    throw std::domain_error("binomial: p must lie in [0, 1]");
  }
  LambdaVector lv;
  lv.n = n;
  lv.lambda.resize(static_cast<std::size_t>(n) + 1);
  long double running = 1.0L;
  for (int j = 0; j <= n; ++j) {
    lv.lambda[static_cast<std::size_t>(j)] = static_cast<double>(running);
    running *= p;
  }
  return lv;
}

LambdaVector lambda_beta_binomial(double p, double a, int n) {
  if (n < 1) throw std::invalid_argument("lambda: n must be >= 1");
  if (!(p > 0 && p < 1)) {
    throw std::domain_error("beta-binomial: p must lie in (0, 1)");
  }
  if (n >= 2 && !(a > -std::min(p, 1 - p) / (n - 1))) {
    throw std::domain_error(
        "beta-binomial: a must exceed -min(p, 1-p)/(n-1)");
  }
  LambdaVector lv;
  lv.n = n;
  lv.lambda.resize(static_cast<std::size_t>(n) + 1);
  long double running = 1.0L;
  lv.lambda[0] = 1.0;
  for (int k = 1; k <= n; ++k) {
    const long double step = k == 1
        ? static_cast<long double>(p)
        : (static_cast<long double>(p) + (k - 1) * static_cast<long double>(a)) /
              (1.0L + (k - 1) * static_cast<long double>(a));
    running *= step;
    lv.lambda[static_cast<std::size_t>(k)] = static_cast<double>(running);
  }
  return lv;
}

LambdaVector lambda_qpower(double p, double gamma, int n) {
  if (n < 1) throw std::invalid_argument("lambda: n must be >= 1");
  if (!(p > 0 && p <= 1)) {
    throw std::domain_error("q-power: p must lie in (0, 1]");
  }
  if (!(gamma >= 0 && gamma <= 1)) {
    throw std::domain_error("q-power: gamma must lie in [0, 1]");
  }
  LambdaVector lv;
  lv.n = n;
  lv.lambda.resize(static_cast<std::size_t>(n) + 1);
  lv.lambda[0] = 1.0;
  const double logp = std::log(p);
  for (int j = 1; j <= n; ++j) {
    lv.lambda[static_cast<std::size_t>(j)] =
        std::exp(std::pow(static_cast<double>(j), gamma) * logp);
  }
  return lv;
}

LambdaVector lambda_from_transition(const TransitionDistribution& row) {
  if (row.m != 0) {
    throw std::invalid_argument(
        "lambda_from_transition: need a start-at-zero row");
  }
  const int n = row.n;
  if (n < 1 || row.probs.size() != static_cast<std::size_t>(n) + 1) {
    throw std::invalid_argument("lambda_from_transition: malformed row");
  }

  std::vector<long double> lam(static_cast<std::size_t>(n) + 1, 0.0L);
  lam[static_cast<std::size_t>(n)] = row.probs[static_cast<std::size_t>(n)];
  for (int r = n - 1; r >= 0; --r) {
    KahanSum<long double> sum;
    sum.add(static_cast<long double>(row.probs[static_cast<std::size_t>(r)]) /
            static_cast<long double>(binomial_coefficient(n, r)));
    for (int j = 1; j <= n - r; ++j) {
      const long double term =
          static_cast<long double>(binomial_coefficient(n - r, j)) *
          lam[static_cast<std::size_t>(r + j)];
      // Moving -sum_j (-1)^j ... to the left flips the sign of odd j.
      sum.add((j % 2 == 0) ? -term : term);
    }
    lam[static_cast<std::size_t>(r)] = sum.value();
  }

  if (std::abs(static_cast<double>(lam[0]) - 1.0) > 1e-8) {
    throw std::domain_error(
        "lambda_from_transition: recursion did not return to lambda_0 = 1 "
        "(input is not a probability row)");
  }

  LambdaVector lv;
  lv.n = n;
  lv.lambda.resize(static_cast<std::size_t>(n) + 1);
  lv.lambda[0] = 1.0;
  for (int j = 1; j <= n; ++j) {
    lv.lambda[static_cast<std::size_t>(j)] =
        static_cast<double>(lam[static_cast<std::size_t>(j)]);
  }
  return lv;
}

}  // namespace markovcount
