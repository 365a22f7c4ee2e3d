#ifndef MARKOVCOUNT_OPTIM_HPP
#define MARKOVCOUNT_OPTIM_HPP

#include <functional>
#include <vector>

namespace markovcount {

struct OptimOptions {
  int max_iterations = 400;
  double gradient_tol = 1e-6;  // 2-norm of the projected gradient
  double box_bound = 20.0;     // coordinates are confined to [-b, b]
};

struct OptimResult {
  std::vector<double> x;
  double value = 0;
  double gradient_norm = 0;
  bool converged = false;
  int iterations = 0;
  std::vector<bool> at_lower;  // per coordinate, pinned at -box_bound
  std::vector<bool> at_upper;
};

/// Maximizes f over the box [-b, b]^d from x0: BFGS with backtracking line
/// search, gradients by central finite differences (step cbrt(eps) scaled by
/// coordinate magnitude), iterates projected onto the box. f may return
/// -infinity anywhere; the line search backs away from such points, and the
/// start itself must be finite. The sufficient-decrease test tolerates
/// changes within the rounding noise of f, so progress does not stall when
/// per-step improvements fall below eps * |f|. Convergence means the
/// projected gradient 2-norm fell below gradient_tol. Deterministic: no
/// randomness, no dependence on thread count.
OptimResult maximize_box(const std::function<double(const std::vector<double>&)>& f,
                         const std::vector<double>& x0,
                         const OptimOptions& options = {});

}  // namespace markovcount

#endif
