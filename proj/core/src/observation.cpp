#include "markovcount/observation.hpp"

#include <cmath>
#include <sstream>

namespace markovcount {

std::string ValidationReport::to_string() const {
  if (violations.empty()) return "ok";
  std::ostringstream out;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) out << "; ";
    out << violations[i];
  }
  return out.str();
}

ValidationReport validate_observation(const ClusterObservation& obs) {
  ValidationReport report;
  auto fail = [&report](const std::string& message) {
    report.violations.push_back(message);
  };
  if (obs.n < 1) fail("n >= 1 violated");
  if (obs.m < 0) fail("m >= 0 violated");
  if (obs.m > obs.r) fail("m <= r violated");
  if (obs.r > obs.n) fail("r <= n violated");
  if (!(obs.weight > 0) || !std::isfinite(obs.weight)) {
    fail("weight > 0 violated");
  }
  for (std::size_t j = 0; j < obs.covariates.size(); ++j) {
    if (!std::isfinite(obs.covariates[j])) {
      fail("covariate " + std::to_string(j) + " not finite");
      break;
    }
  }
  return report;
}

}  // namespace markovcount
