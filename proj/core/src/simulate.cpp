#include "markovcount/simulate.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "markovcount/rng.hpp"

namespace markovcount {
namespace {

constexpr long kRejectionCap = 1000000;

// State at time 1, starting from m, consuming draws from rng.
int run_count(const RateSchedule& schedule, int m, Rng& rng) {
  int state = m;
  double time = 0;
  while (state < schedule.n) {
    const double mu = schedule.rates[static_cast<std::size_t>(state)];
    if (mu <= 0) break;
    time += rng.exponential(mu);
    if (time >= 1.0) break;
    ++state;
  }
  return state;
}

std::vector<ClusterObservation> generate(
    const std::vector<int>& sizes,
    const std::function<RateSchedule(std::size_t)>& schedule_for,
    std::uint64_t seed, int min_count) {
  if (sizes.empty()) throw std::invalid_argument("sizes must be nonempty");
  if (min_count < 0) {
    throw std::invalid_argument("ascertainment floor must be >= 0");
  }
  std::vector<ClusterObservation> out;
  out.reserve(sizes.size());
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (min_count > sizes[i]) {
      throw std::invalid_argument(
          "ascertainment floor exceeds cluster size at row " +
          std::to_string(i));
    }
    const RateSchedule schedule = schedule_for(i);
    // An ascertained cluster is drawn from the same conditional law the
    // likelihood assigns it: the process started at the floor. (Rejection
    // from state 0 would both disagree with that law and dead-lock on
    // families whose state 0 is absorbing.) The re-draw loop only guards
    // the floor itself, so it cannot spin unless the contract changes.
    Rng rng(seed, i);
    int r = 0;
    long attempts = 0;
    for (;;) {
      ++attempts;
      r = run_count(schedule, min_count, rng);
      if (r >= min_count) break;
      if (attempts >= kRejectionCap) {
        throw std::runtime_error(
            "ascertainment floor unreachable for cluster " +
            std::to_string(i) + " after 1000000 draws");
      }
    }
    ClusterObservation obs;
    obs.n = sizes[i];
    obs.r = r;
    obs.m = min_count;
    out.push_back(std::move(obs));
  }
  return out;
}

}  // namespace

SimulatedCluster simulate_cluster(const RateSchedule& schedule,
                                  std::uint64_t seed, std::uint64_t stream,
                                  UnitSelection selection) {
  validate_schedule(schedule);
  const int n = schedule.n;
  Rng rng(seed, stream);

  SimulatedCluster out;
  out.n = n;
  out.assignments.assign(static_cast<std::size_t>(n), 0);
  std::vector<int> remaining(static_cast<std::size_t>(n));
  std::iota(remaining.begin(), remaining.end(), 0);

  double time = 0;
  for (int k = 1; k <= n; ++k) {
    const double mu = schedule.rates[static_cast<std::size_t>(k - 1)];
    if (mu <= 0) break;  // infinite dwell: everyone still unpicked stays 0

    const int c = n - k + 1;
    double dwell;
    std::size_t pick;
    if (selection == UnitSelection::CompetingRisks) {
      dwell = rng.exponential(mu);
      pick = rng.uniform_int(static_cast<std::uint64_t>(c));
    } else {
      dwell = std::numeric_limits<double>::infinity();
      pick = 0;
      for (int i = 0; i < c; ++i) {
        const double clock = rng.exponential(mu / c);
        if (clock < dwell) {
          dwell = clock;
          pick = static_cast<std::size_t>(i);
        }
      }
    }

    time += dwell;
    const int unit = remaining[pick];
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
    out.arrival_times.push_back(time);
    out.selection_order.push_back(unit);
    if (time < 1.0) {
      out.assignments[static_cast<std::size_t>(unit)] = 1;
      ++out.count;
    }
  }
  return out;
}

int simulate_count(const RateSchedule& schedule, int m, std::uint64_t seed,
                   std::uint64_t stream) {
  validate_schedule(schedule);
  if (m < 0 || m > schedule.n) {
    throw std::domain_error("start state m out of range");
  }
  Rng rng(seed, stream);
  return run_count(schedule, m, rng);
}

std::vector<ClusterObservation> simulate_dataset(
    const RateModelSpec& spec, const std::vector<int>& sizes,
    std::uint64_t seed, int min_count) {
  return generate(
      sizes, [&](std::size_t i) { return rate_vector(spec, sizes[i]); }, seed,
      min_count);
}

std::vector<ClusterObservation> simulate_dataset_regression(
    const std::vector<double>& phi, const std::vector<double>& psi,
    const std::vector<int>& sizes,
    const std::vector<std::vector<double>>& covariates, std::uint64_t seed,
    int min_count) {
  if (covariates.size() != sizes.size()) {
    throw std::invalid_argument("need one covariate row per cluster size");
  }
  const std::size_t dim = phi.size();
  if (dim < 1 || psi.size() != dim) {
    throw std::invalid_argument(
        "phi and psi must both hold an intercept plus one slope per "
        "covariate");
  }
  auto linear = [dim](const std::vector<double>& coef,
                      const std::vector<double>& z) {
    double lp = coef[0];
    for (std::size_t j = 1; j < dim; ++j) lp += coef[j] * z[j - 1];
    return lp;
  };
  auto observations = generate(
      sizes,
      [&](std::size_t i) {
        if (covariates[i].size() + 1 != dim) {
          throw std::invalid_argument("covariate row " + std::to_string(i) +
                                      " has the wrong width");
        }
        const double alpha = std::exp(linear(phi, covariates[i]));
        const double beta = std::exp(linear(psi, covariates[i]));
        return rate_vector(RateModelSpec::combined(alpha, beta), sizes[i]);
      },
      seed, min_count);
  for (std::size_t i = 0; i < observations.size(); ++i) {
    observations[i].covariates = covariates[i];
  }
  return observations;
}

}  // namespace markovcount
