#ifndef MARKOVCOUNT_TRANSITION_HPP
#define MARKOVCOUNT_TRANSITION_HPP

#include <vector>

#include "markovcount/rate_model.hpp"

namespace markovcount {

/// One row of the transition kernel of the pure-birth process: the
/// probability of sitting at each state r = m..n at time t, given state m
/// at time 0. probs is indexed by r - m. Entries past an interior absorbing
/// state (mu_k == 0 for some k >= m, k < n) are exactly zero.
struct TransitionDistribution {
  int n = 0;
  int m = 0;
  std::vector<double> probs;  // length n - m + 1, probs[r - m] = P_{m r}

  double prob(int r) const {
    return (r < m || r > n) ? 0.0 : probs[static_cast<std::size_t>(r - m)];
  }
};

/// P_{m .}(t) by uniformization: a Poisson-weighted sum of powers of the
/// one-step kernel scaled by the largest rate, truncated once the neglected
/// tail drops below 1e-13 so each entry carries error under 1e-12. Handles
/// tied and zero rates uniformly. Throws std::invalid_argument on a
/// malformed schedule, std::domain_error for m outside 0..n or t <= 0.
TransitionDistribution transition_distribution(const RateSchedule& schedule,
                                               int m, double t = 1.0);

/// Closed-form P_{m r}(t) via the spectral expansion
///
///   (prod_{k=m}^{r-1} mu_k) * sum_{k=m}^{r} exp(-mu_k t)
///                             / prod_{l in {m..r}, l != k} (mu_l - mu_k),
///
/// valid only when mu_m..mu_r are pairwise distinct. Kept as an independent
/// cross-check for the uniformization path; the sum cancels catastrophically
/// for near-ties, so any pair of rates in the active range with relative gap
/// below 1e-6 is rejected with std::domain_error directing the caller to
/// transition_distribution.
double transition_closed_form(const RateSchedule& schedule, int m, int r,
                              double t);

/// log P_{m r}(1); -infinity when r is unreachable from m.
double log_transition(const RateSchedule& schedule, int m, int r);

}  // namespace markovcount

#endif
