#ifndef MARKOVCOUNT_SIMULATE_HPP
#define MARKOVCOUNT_SIMULATE_HPP

#include <cstdint>
#include <vector>

#include "markovcount/observation.hpp"
#include "markovcount/rate_model.hpp"

namespace markovcount {

/// One realization of the stepwise embedding on a cluster of size n:
/// units are picked one per jump of the counting process, and a unit's
/// outcome is 1 iff its cumulative jump time lands before 1.
struct SimulatedCluster {
  int n = 0;
  std::vector<int> assignments;     // Z_1..Z_n, one 0/1 per unit
  int count = 0;                    // sum of assignments
  std::vector<double> arrival_times;  // cumulative jump times, increasing;
                                      // stops early if a zero rate is hit
  std::vector<int> selection_order;   // unit picked at each jump, same
                                      // length as arrival_times
};

/// How the per-jump unit is chosen. The two samplers realize the same law:
/// the minimum of c independent Exp(mu/c) clocks is an Exp(mu) holding time
/// together with a uniformly chosen index. CompetingRisks draws the holding
/// time and the index separately (one exponential per jump) and is the
/// production path; PerUnitClocks draws every remaining unit's clock and
/// takes the argmin, kept only so tests can check the two agree in law.
enum class UnitSelection { CompetingRisks, PerUnitClocks };

/// Simulates one cluster from the given schedule, starting at state 0.
/// At the k-th jump the process moves at rate mu_{k-1}; a rate of zero
/// freezes the process and leaves all remaining assignments 0.
/// Deterministic in (seed, stream).
SimulatedCluster simulate_cluster(const RateSchedule& schedule,
                                  std::uint64_t seed, std::uint64_t stream,
                                  UnitSelection selection =
                                      UnitSelection::CompetingRisks);

/// Count-only fast path started from state m: draws successive dwell times
/// at rates mu_m, mu_{m+1}, ... and returns the state at time 1. Matches
/// simulate_cluster(...).count in law when m = 0.
int simulate_count(const RateSchedule& schedule, int m, std::uint64_t seed,
                   std::uint64_t stream);

/// Simulates a dataset of clusters under one rate family. sizes[i] is the
/// cluster size of observation i. min_count is an ascertainment policy:
/// each cluster is drawn from the process started at the floor, which is
/// the conditional law the fitted likelihood assumes, and the floor is
/// recorded on the observation. Each observation owns stream i, so output
/// is reproducible independently of evaluation order. Throws
/// std::runtime_error if an observation rejects 1,000,000 draws in a row.
std::vector<ClusterObservation> simulate_dataset(const RateModelSpec& spec,
                                                 const std::vector<int>& sizes,
                                                 std::uint64_t seed,
                                                 int min_count = 0);

///// Regression variant: cluster i uses rates
/// mu_k = alpha_i (n_i - k) + beta_i k (n_i - k) with
/// log alpha_i = phi . (1, covariates_i) and log beta_i = psi . (1, covariates_i).
/// Covariates are copied onto the emitted observations.
std::vector<ClusterObservation> simulate_dataset_regression(
    const std::vector<double>& phi, const std::vector<double>& psi,
    const std::vector<int>& sizes,
    const std::vector<std::vector<double>>& covariates, std::uint64_t seed,
    int min_count = 0);

}  // namespace markovcount

#endif
