#include "markovcount/numeric.hpp"

namespace markovcount {

double binomial_coefficient(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  if (k > n - k) k = n - k;
  // Multiplicative form; every intermediate is an integer, so the result is
  // exact as long as it fits in 53 bits.
  double c = 1.0;
  for (int i = 1; i <= k; ++i) {
    c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  // Round off the accumulated half-ulps from the divisions.
  return (c < 9.007199254740992e15) ? static_cast<double>(
             static_cast<long long>(c + 0.5))
                                    : c;
}

}  // namespace markovcount
