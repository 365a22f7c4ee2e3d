#ifndef MARKOVCOUNT_OBSERVATION_HPP
#define MARKOVCOUNT_OBSERVATION_HPP

#include <string>
#include <vector>

namespace markovcount {

/// One observed cluster: n units of which r are affected. m is the number
/// of units already affected when the cluster entered observation (0 for an
/// unconditionally sampled cluster); the likelihood of the row is evaluated
/// as a transition from state m. weight counts identical rows so frequency
/// tables do not need to be expanded.
struct ClusterObservation {
  int n = 0;
  int r = 0;
  int m = 0;
  double weight = 1.0;
  std::vector<double> covariates;
};

struct ValidationReport {
  std::vector<std::string> violations;

  bool ok() const noexcept { return violations.empty(); }
  std::string to_string() const;
};

/// Checks 1 <= n, 0 <= m <= r <= n, weight > 0 and finite covariates.
/// Report-style: never throws, names each violated invariant.
ValidationReport validate_observation(const ClusterObservation& obs);

}  // namespace markovcount

#endif
