#include "markovcount/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace markovcount {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

}  // namespace

// Internally minimizes F = -f with BFGS; one sign flip at the boundary of
// the routine keeps the update formulas in their textbook orientation.
OptimResult maximize_box(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& x0, const OptimOptions& options) {
  const std::size_t d = x0.size();
  const double b = options.box_bound;
  const double fd_step = std::cbrt(std::numeric_limits<double>::epsilon());

  auto clamp = [b](std::vector<double>& x) {
    for (double& v : x) v = std::clamp(v, -b, b);
  };
  auto F = [&f](const std::vector<double>& x) {
    const double v = f(x);
    return std::isnan(v) ? kInf : -v;
  };
  auto grad = [&](const std::vector<double>& x) {
    std::vector<double> g(d, 0.0);
    std::vector<double> probe = x;
    for (std::size_t i = 0; i < d; ++i) {
      const double h = fd_step * std::max(1.0, std::abs(x[i]));
      probe[i] = x[i] + h;
      const double fp = F(probe);
      probe[i] = x[i] - h;
      const double fm = F(probe);
      probe[i] = x[i];
      if (std::isfinite(fp) && std::isfinite(fm)) {
        g[i] = (fp - fm) / (2 * h);
      } else if (std::isfinite(fp)) {
        g[i] = (fp - F(x)) / h;
      } else if (std::isfinite(fm)) {
        g[i] = (F(x) - fm) / h;
      } else {
        g[i] = 0;
      }
    }
    return g;
  };
  // Gradient components that push an already-pinned coordinate further out
  // of the box carry no usable descent; mask them.
  auto project = [&](const std::vector<double>& g, const std::vector<double>& x) {
    std::vector<double> pg = g;
    for (std::size_t i = 0; i < d; ++i) {
      if (x[i] <= -b + 1e-12 && g[i] > 0) pg[i] = 0;
      if (x[i] >= b - 1e-12 && g[i] < 0) pg[i] = 0;
    }
    return pg;
  };

  OptimResult result;
  result.x = x0;
  clamp(result.x);
  result.at_lower.assign(d, false);
  result.at_upper.assign(d, false);

  std::vector<double> x = result.x;
  double Fx = F(x);
  if (!std::isfinite(Fx)) {
    result.value = -kInf;
    result.gradient_norm = kInf;
    return result;
  }

  std::vector<std::vector<double>> H(d, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < d; ++i) H[i][i] = 1.0;

  std::vector<double> g = grad(x);
  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    const std::vector<double> pg = project(g, x);
    result.gradient_norm = norm2(pg);
    if (result.gradient_norm < options.gradient_tol) {
      result.converged = true;
      break;
    }

    // p = -H g, masked at active bounds; fall back to steepest descent if
    // the quasi-Newton direction has lost descent.
    std::vector<double> p(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) p[i] -= H[i][j] * g[j];
    }
    for (std::size_t i = 0; i < d; ++i) {
      if (x[i] <= -b + 1e-12 && p[i] < 0) p[i] = 0;
      if (x[i] >= b - 1e-12 && p[i] > 0) p[i] = 0;
    }
    if (dot(g, p) > -1e-14 * std::max(1.0, norm2(g) * norm2(p))) {
      for (std::size_t i = 0; i < d; ++i) {
        p[i] = -pg[i];
        H[i].assign(d, 0.0);
        H[i][i] = 1.0;
      }
    }
    const double slope = dot(g, p);
    if (!(slope < 0)) break;  // nothing usable; stay at x

    // Near the optimum the true per-step decrease falls below the rounding
    // noise of F itself (roughly eps * |F|); a strict Armijo test then
    // rejects every step and the iteration stalls with the gradient still
    // measurable. Relaxing the test by that noise lets the quasi-Newton step
    // land, after which the finite-difference gradient resolves convergence.
    const double noise =
        4 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(Fx));
    double step = 1.0;
    std::vector<double> xn;
    double Fn = kInf;
    bool accepted = false;
    for (int ls = 0; ls < 80; ++ls) {
      xn = x;
      for (std::size_t i = 0; i < d; ++i) xn[i] += step * p[i];
      clamp(xn);
      Fn = F(xn);
      if (std::isfinite(Fn) && Fn <= Fx + 1e-4 * step * slope + noise) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    std::vector<double> gn = grad(xn);
    std::vector<double> sk(d), yk(d);
    for (std::size_t i = 0; i < d; ++i) {
      sk[i] = xn[i] - x[i];
      yk[i] = gn[i] - g[i];
    }
    const double sy = dot(sk, yk);
    if (sy > 1e-12 * std::max(1e-30, norm2(sk) * norm2(yk))) {
      // BFGS inverse update: H <- (I - s y'/sy) H (I - y s'/sy) + s s'/sy
      std::vector<double> Hy(d, 0.0);
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) Hy[i] += H[i][j] * yk[j];
      }
      const double yHy = dot(yk, Hy);
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
          H[i][j] += ((sy + yHy) * sk[i] * sk[j]) / (sy * sy) -
                     (Hy[i] * sk[j] + sk[i] * Hy[j]) / sy;
        }
      }
    }

    x.swap(xn);
    Fx = Fn;
    g.swap(gn);
  }

  result.x = x;
  result.value = -Fx;
  result.iterations = iter;
  for (std::size_t i = 0; i < d; ++i) {
    result.at_lower[i] = x[i] <= -b + 1e-9;
    result.at_upper[i] = x[i] >= b - 1e-9;
  }
  // Recheck at the final point so the reported norm matches the reported x
  // even when the loop exited through the line search.
  if (!result.converged) {
    result.gradient_norm = norm2(project(grad(x), x));
    result.converged = result.gradient_norm < options.gradient_tol;
  }
  return result;
}

}  // namespace markovcount
