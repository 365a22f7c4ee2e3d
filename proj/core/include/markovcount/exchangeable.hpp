#ifndef MARKOVCOUNT_EXCHANGEABLE_HPP
#define MARKOVCOUNT_EXCHANGEABLE_HPP

#include <vector>

#include "markovcount/transition.hpp"

namespace markovcount {

/// Joint success probabilities of n exchangeable Bernoulli indicators:
/// lambda_j = Pr(any fixed j of them are all 1), with lambda_0 = 1 by
/// convention. A sequence is admissible for a given n iff the implied count
/// distribution is a probability vector.
struct LambdaVector {
  int n = 0;
  std::vector<double> lambda;  // length n + 1, lambda[0] == 1
};

/// Count distribution Pr(Y = r), r = 0..n, for Y the sum of the indicators,
/// by inclusion-exclusion:
///
///   Pr(Y = r) = C(n, r) * sum_{j=0}^{n-r} (-1)^j C(n-r, j) lambda_{r+j}
///
/// The alternating sums run in extended precision with compensation.
/// Entries within 1e-9 of zero from below are clamped to 0 and the vector
/// renormalized; anything more negative, or a total off 1 by more than
/// 1e-9, throws std::domain_error (the sequence is inadmissible for this n).
std::vector<double> pmf_from_lambda(const LambdaVector& lv);

/// Independent indicators: lambda_j = p^j. Requires p in [0, 1].
LambdaVector lambda_binomial(double p, int n);

/// Beta-binomial mixture: lambda_k = prod_{j=0}^{k-1} (p + j a)
///                                   / prod_{j=1}^{k-1} (1 + j a).
/// Requires p in (0, 1) and, for n >= 2, a > -min(p, 1-p) / (n - 1);
/// negative a gives underdispersion relative to the binomial, a = 0 is the
/// binomial exactly.
LambdaVector lambda_beta_binomial(double p, double a, int n);

/// Power-of-power family: lambda_j = p^(j^gamma) for j >= 1, lambda_0
/// pinned at 1. Requires p in (0, 1] and gamma in [0, 1]; gamma = 1
/// recovers the binomial. The complementary form (modeling the count of
/// zero outcomes with parameter q = 1 - p) is a reindexing of this pmf and
/// lives in `fit`.
LambdaVector lambda_qpower(double p, double gamma, int n);

/// Joint probabilities recovered from a start-at-zero transition row by
/// inverting the inclusion-exclusion formula backward from r = n:
///
///   lambda_r = P_{0 r} / C(n, r)
///              - sum_{j=1}^{n-r} (-1)^j C(n-r, j) lambda_{r+j}
///
/// The recursion must land on lambda_0 = 1; deviation beyond 1e-8 means the
/// input was not a probability row and throws std::domain_error.
LambdaVector lambda_from_transition(const TransitionDistribution& row);

}  // namespace markovcount

#endif
