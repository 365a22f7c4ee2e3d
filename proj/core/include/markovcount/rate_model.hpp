#ifndef MARKOVCOUNT_RATE_MODEL_HPP
#define MARKOVCOUNT_RATE_MODEL_HPP

#include <string>
#include <vector>

namespace markovcount {

/// Parametric families for the arrival rate mu_k of a counting process on a
/// cluster of size n with k units already affected:
///
///   Susceptible1   mu_k = alpha * (n - k)
///   Susceptible2   mu_k = alpha * (n - k)^gamma
///   Infectivity1   mu_k = beta * k * (n - k)
///   Infectivity2   mu_k = beta * k^eta * (n - k)^gamma
///   Combined       mu_k = alpha * (n - k) + beta * k * (n - k)
///   Custom         explicit rate table, one value per state
///
/// alpha is the exogenous per-susceptible risk, beta the per-contact risk
/// between an affected and an unaffected unit.
enum class RateFamily {
  Susceptible1,
  Susceptible2,
  Infectivity1,
  Infectivity2,
  Combined,
  Custom,
};

const char* family_name(RateFamily family);

/// A rate family plus its parameter vector on the natural scale.
///
/// Domains: alpha, beta strictly positive; Susceptible2's gamma and
/// Infectivity2's eta, gamma nonnegative; Custom tables nonnegative with a
/// trailing zero. Power laws use the convention 0^0 = 1 so that a zero
/// exponent degrades gracefully, but the k = 0 state of the infectivity
/// families is pinned to rate 0 regardless (no affected unit, no contact).
struct RateModelSpec {
  RateFamily family = RateFamily::Susceptible1;
  std::vector<double> params;

  static RateModelSpec susceptible1(double alpha);
  static RateModelSpec susceptible2(double alpha, double gamma);
  static RateModelSpec infectivity1(double beta);
  static RateModelSpec infectivity2(double beta, double eta, double gamma);
  static RateModelSpec combined(double alpha, double beta);
  static RateModelSpec custom(std::vector<double> rates);
};

/// Rates mu_0..mu_n for one cluster size. Always length n + 1 with
/// rates[n] == 0 exactly, so the process cannot leave the state space.
struct RateSchedule {
  int n = 0;
  std::vector<double> rates;
};

/// Instantiates a family at cluster size n. Throws std::domain_error naming
/// the offending parameter when the spec is outside its domain, and
/// std::invalid_argument for n < 1 or a malformed Custom table.
RateSchedule rate_vector(const RateModelSpec& spec, int n);

/// Throws std::invalid_argument unless the schedule has n >= 1, exactly
/// n + 1 finite nonnegative rates, and a trailing zero.
void validate_schedule(const RateSchedule& schedule);

}  // namespace markovcount

#endif
