#include "markovcount/transition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "markovcount/numeric.hpp"

namespace markovcount {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Largest uniformized mean handled by a single Poisson sum; above this the
// row is computed at a halved horizon and squared up, which keeps the term
// count and the Poisson weights well-scaled no matter how large the rates
// get (optimizer line searches do probe extreme ones).
constexpr double kDirectMeanCap = 64.0;

// One sweep of v <- v K on the truncated birth chain, where K is the
// uniformized one-step kernel over the active states: K[i][i] = 1 - q[i],
// K[i][i+1] = q[i], q[i] = mu_i / Lambda. Right-to-left keeps it in place.
void apply_kernel(std::vector<double>& v, const std::vector<double>& q) {
  for (std::size_t i = v.size() - 1; i > 0; --i) {
    v[i] = v[i] * (1.0 - q[i]) + v[i - 1] * q[i - 1];
  }
  v[0] *= 1.0 - q[0];
}

// Row of the uniformization sum started from `start` (an index into the
// active-state range), run until the neglected Poisson tail is below `tail`.
std::vector<double> uniformized_row(const std::vector<double>& q,
                                    double mean, std::size_t start,
                                    double tail) {
  const std::size_t s = q.size();
  std::vector<double> v(s, 0.0);
  v[start] = 1.0;

  double w = std::exp(-mean);
  KahanSum<double> weight_seen;
  weight_seen.add(w);
  std::vector<KahanSum<double>> acc(s);
  for (std::size_t i = 0; i < s; ++i) acc[i].add(w * v[i]);

  // Poisson(mean) mass beyond j decays fast once j > mean; the cap is a
  // safety net, never the stopping rule for mean <= kDirectMeanCap.
  const int max_terms = 2000;
  for (int j = 1; j <= max_terms && 1.0 - weight_seen.value() > tail; ++j) {
    apply_kernel(v, q);
    w *= mean / j;
    for (std::size_t i = 0; i < s; ++i) acc[i].add(w * v[i]);
    weight_seen.add(w);
  }

  std::vector<double> out(s);
  for (std::size_t i = 0; i < s; ++i) out[i] = acc[i].value();
  return out;
}

void normalize_row(std::vector<double>& row) {
  KahanSum<double> total;
  for (double p : row) total.add(p);
  const double t = total.value();
  if (t > 0) {
    for (double& p : row) p /= t;
  }
}

}  // namespace

TransitionDistribution transition_distribution(const RateSchedule& schedule,
                                               int m, double t) {
  validate_schedule(schedule);
  const int n = schedule.n;
  if (m < 0 || m > n) throw std::domain_error("start state m out of range");
  if (!(t > 0) || !std::isfinite(t)) {
    throw std::domain_error("time t must be positive and finite");
  }

  TransitionDistribution out;
  out.n = n;
  out.m = m;
  out.probs.assign(static_cast<std::size_t>(n - m) + 1, 0.0);

  // First absorbing state at or past m; everything beyond it has exactly
  // zero probability and is never touched.
  int a = m;
  while (a < n && schedule.rates[static_cast<std::size_t>(a)] > 0) ++a;
  if (a == m) {
    out.probs[0] = 1.0;
    return out;
  }

  const std::size_t s = static_cast<std::size_t>(a - m) + 1;
  double lambda = 0;
  for (int k = m; k < a; ++k) {
    lambda = std::max(lambda, schedule.rates[static_cast<std::size_t>(k)]);
  }

  const double mean = lambda * t;
  if (mean <= kDirectMeanCap) {
    std::vector<double> q(s, 0.0);
    for (int k = m; k < a; ++k) {
      q[static_cast<std::size_t>(k - m)] =
          schedule.rates[static_cast<std::size_t>(k)] / lambda;
    }
    auto row = uniformized_row(q, mean, 0, 1e-13);
    std::copy(row.begin(), row.end(), out.probs.begin());
    return out;
  }

  // Scale-and-square: halve the horizon until the uniformized mean fits the
  // direct path, build the full kernel there, and square back up. Rows are
  // renormalized after each step; the true rows sum to exactly 1, so the
  // projection removes the one-sided truncation bias instead of letting it
  // double per squaring.
  int doublings = 0;
  double tau = t;
  while (lambda * tau > kDirectMeanCap) {
    tau *= 0.5;
    ++doublings;
  }
  std::vector<double> q(s, 0.0);
  for (int k = m; k < a; ++k) {
    q[static_cast<std::size_t>(k - m)] =
        schedule.rates[static_cast<std::size_t>(k)] / lambda;
  }
  std::vector<std::vector<double>> matrix(s);
  for (std::size_t i = 0; i < s; ++i) {
    matrix[i] = uniformized_row(q, lambda * tau, i, 1e-15);
    normalize_row(matrix[i]);
  }
  std::vector<std::vector<double>> next(s, std::vector<double>(s, 0.0));
  for (int d = 0; d < doublings; ++d) {
    for (std::size_t i = 0; i < s; ++i) {
      // The chain never steps down, so matrix is upper triangular.
      for (std::size_t k = i; k < s; ++k) {
        const double mik = matrix[i][k];
        if (mik == 0) continue;
        for (std::size_t j = k; j < s; ++j) {
          next[i][j] += mik * matrix[k][j];
        }
      }
    }
    for (std::size_t i = 0; i < s; ++i) {
      normalize_row(next[i]);
      matrix[i].swap(next[i]);
      std::fill(next[i].begin(), next[i].end(), 0.0);
    }
  }
  std::copy(matrix[0].begin(), matrix[0].end(), out.probs.begin());
  return out;
}

double transition_closed_form(const RateSchedule& schedule, int m, int r,
                              double t) {
  validate_schedule(schedule);
  const int n = schedule.n;
  if (m < 0 || m > n || r < m || r > n) {
    throw std::domain_error("states must satisfy 0 <= m <= r <= n");
  }
  if (!(t > 0) || !std::isfinite(t)) {
    throw std::domain_error("time t must be positive and finite");
  }
  const auto& mu = schedule.rates;
  for (int i = m; i <= r; ++i) {
    for (int j = i + 1; j <= r; ++j) {
      const double gap = std::abs(mu[i] - mu[j]);
      const double scale = std::max(std::abs(mu[i]), std::abs(mu[j]));
      if (gap < 1e-6 * std::max(scale, 1e-300)) {
        throw std::domain_error(
            "rates tie within tolerance; use transition_distribution");
      }
    }
  }

  if (r == m) return std::exp(-mu[m] * t);

  long double prefactor = 1.0L;
  for (int k = m; k < r; ++k) prefactor *= static_cast<long double>(mu[k]);
  if (prefactor == 0.0L) return 0.0;

  long double sum = 0.0L;
  for (int k = m; k <= r; ++k) {
    long double denom = 1.0L;
    for (int l = m; l <= r; ++l) {
      if (l == k) continue;
      denom *= static_cast<long double>(mu[l]) - static_cast<long double>(mu[k]);
    }
    sum += std::exp(-static_cast<long double>(mu[k]) * t) / denom;
  }
  return static_cast<double>(prefactor * sum);
}

double log_transition(const RateSchedule& schedule, int m, int r) {
  validate_schedule(schedule);
  if (r < 0 || r > schedule.n) {
    throw std::domain_error("target state r out of range");
  }
  if (m < 0 || m > schedule.n) {
    throw std::domain_error("start state m out of range");
  }
  if (r < m) return -kInf;
  const double p = transition_distribution(schedule, m, 1.0).prob(r);
  return p > 0 ? std::log(p) : -kInf;
}

}  // namespace markovcount
