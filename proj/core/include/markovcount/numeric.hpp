#ifndef MARKOVCOUNT_NUMERIC_HPP
#define MARKOVCOUNT_NUMERIC_HPP

#include <cmath>
#include <cstddef>

namespace markovcount {

/// Neumaier-compensated accumulator. Alternating sums of near-cancelling
/// terms (inclusion-exclusion, weighted log-likelihoods) lose digits under
/// naive accumulation; this keeps the running error at O(eps) independent
/// of the number of terms.
template <typename Real = double>
class KahanSum {
 public:
  void add(Real value) {
    const Real t = sum_ + value;
    if (std::abs(sum_) >= std::abs(value)) {
      comp_ += (sum_ - t) + value;
    } else {
      comp_ += (value - t) + sum_;
    }
    sum_ = t;
  }

  Real value() const { return sum_ + comp_; }

 private:
  Real sum_ = 0;
  Real comp_ = 0;
};

/// C(n, k) as a double. Exact for every value that fits in 53 bits, which
/// covers the cluster sizes this library is meant for.
double binomial_coefficient(int n, int k);

}  // namespace markovcount

#endif
