#include "markovcount/fit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>

#include "markovcount/exchangeable.hpp"
#include "markovcount/numeric.hpp"
#include "markovcount/optim.hpp"
#include "markovcount/transition.hpp"

namespace markovcount {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

enum class Scale { Log, Logit, Identity };

struct FamilyInfo {
  std::vector<Scale> scales;
  std::vector<std::string> names;
  bool rates = false;
};

const FamilyInfo& family_info(FitFamily family) {
  static const FamilyInfo s1{{Scale::Log}, {"alpha"}, true};
  static const FamilyInfo s2{{Scale::Log, Scale::Log}, {"alpha", "gamma"}, true};
  static const FamilyInfo i1{{Scale::Log}, {"beta"}, true};
  static const FamilyInfo i2{
      {Scale::Log, Scale::Log, Scale::Log}, {"beta", "eta", "gamma"}, true};
  static const FamilyInfo co{{Scale::Log, Scale::Log}, {"alpha", "beta"}, true};
  static const FamilyInfo bi{{Scale::Logit}, {"p"}, false};
  static const FamilyInfo bb{{Scale::Logit, Scale::Identity}, {"p", "a"}, false};
  static const FamilyInfo qp{{Scale::Logit, Scale::Logit}, {"q", "gamma"}, false};
  switch (family) {
    case FitFamily::Susceptible1: return s1;
    case FitFamily::Susceptible2: return s2;
    case FitFamily::Infectivity1: return i1;
    case FitFamily::Infectivity2: return i2;
    case FitFamily::Combined: return co;
    case FitFamily::Binomial: return bi;
    case FitFamily::BetaBinomial: return bb;
    case FitFamily::QPower: return qp;
  }
  return s1;
}

double to_natural(Scale scale, double w) {
  switch (scale) {
    case Scale::Log: return std::exp(w);
    case Scale::Logit: return 1.0 / (1.0 + std::exp(-w));
    case Scale::Identity: return w;
  }
  return w;
}

std::vector<double> natural_params(const FamilyInfo& info,
                                   const std::vector<double>& working) {
  std::vector<double> out(working.size());
  for (std::size_t i = 0; i < working.size(); ++i) {
    out[i] = to_natural(info.scales[i], working[i]);
  }
  return out;
}

RateFamily rate_family_of(FitFamily family) {
  switch (family) {
    case FitFamily::Susceptible1: return RateFamily::Susceptible1;
    case FitFamily::Susceptible2: return RateFamily::Susceptible2;
    case FitFamily::Infectivity1: return RateFamily::Infectivity1;
    case FitFamily::Infectivity2: return RateFamily::Infectivity2;
    case FitFamily::Combined: return RateFamily::Combined;
    default: throw std::logic_error("not a rate family");
  }
}

int threads_from_env() {
  static const int cached = [] {
    const char* raw = std::getenv("MARKOVCOUNT_THREADS");
    if (!raw) return 1;
    const int v = std::atoi(raw);
    return std::clamp(v, 1, 64);
  }();
  return cached;
}

// Rows aggregated by (n, m[, covariates]); values are total weight per count.
struct Group {
  int n = 0;
  int m = 0;
  std::vector<double> covariates;
  std::vector<std::pair<int, double>> counts;  // (r, weight), r ascending
  double weight = 0;
};

std::vector<Group> group_data(const std::vector<ClusterObservation>& data,
                              bool with_covariates) {
  using Key = std::tuple<int, int, std::vector<double>>;
  std::map<Key, std::map<int, double>> acc;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto report = validate_observation(data[i]);
    if (!report.ok()) {
      throw std::invalid_argument("observation " + std::to_string(i) +
                                  " invalid: " + report.to_string());
    }
    Key key{data[i].n, data[i].m,
            with_covariates ? data[i].covariates : std::vector<double>{}};
    acc[std::move(key)][data[i].r] += data[i].weight;
  }
  std::vector<Group> groups;
  groups.reserve(acc.size());
  for (const auto& [key, counts] : acc) {
    Group g;
    g.n = std::get<0>(key);
    g.m = std::get<1>(key);
    g.covariates = std::get<2>(key);
    for (const auto& [r, w] : counts) {
      g.counts.emplace_back(r, w);
      g.weight += w;
    }
    groups.push_back(std::move(g));
  }
  return groups;
}

double group_loglik(const std::vector<double>& dist, const Group& group) {
  KahanSum<double> acc;
  for (const auto& [r, w] : group.counts) {
    const double p = dist[static_cast<std::size_t>(r)];
    if (!(p > 0)) return -kInf;
    acc.add(w * std::log(p));
  }
  return acc.value();
}

// Evaluates all groups (optionally in parallel) and reduces in group order,
// so the result does not depend on the thread count.
double reduce_loglik(const std::vector<Group>& groups,
                     const std::function<double(const Group&)>& per_group) {
  const int threads = threads_from_env();
  std::vector<double> values(groups.size());
  if (threads <= 1 || groups.size() < 2 * static_cast<std::size_t>(threads)) {
    for (std::size_t i = 0; i < groups.size(); ++i) {
      values[i] = per_group(groups[i]);
    }
  } else {
    std::vector<std::exception_ptr> errors(groups.size());
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t i = static_cast<std::size_t>(t); i < groups.size();
             i += static_cast<std::size_t>(threads)) {
          try {
            values[i] = per_group(groups[i]);
          } catch (...) {
            errors[i] = std::current_exception();
            values[i] = -kInf;
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    for (const auto& err : errors) {
      if (err) std::rethrow_exception(err);
    }
  }
  KahanSum<double> total;
  for (double v : values) {
    if (!std::isfinite(v)) return -kInf;
    total.add(v);
  }
  return total.value();
}

double loglik_over_groups(FitFamily family, const std::vector<double>& params,
                          const std::vector<Group>& groups) {
  return reduce_loglik(groups, [&](const Group& g) {
    return group_loglik(count_distribution(family, params, g.n, g.m), g);
  });
}

// ---- small dense linear algebra for the SE machinery ----

using Matrix = std::vector<std::vector<double>>;

// In-place lower Cholesky; returns the first non-positive-definite column,
// or -1 on success.
int cholesky(Matrix& a) {
  const std::size_t d = a.size();
  for (std::size_t j = 0; j < d; ++j) {
    double diag = a[j][j];
    for (std::size_t k = 0; k < j; ++k) diag -= a[j][k] * a[j][k];
    if (!(diag > 0) || !std::isfinite(diag)) return static_cast<int>(j);
    a[j][j] = std::sqrt(diag);
    for (std::size_t i = j + 1; i < d; ++i) {
      double v = a[i][j];
      for (std::size_t k = 0; k < j; ++k) v -= a[i][k] * a[j][k];
      a[i][j] = v / a[j][j];
    }
    for (std::size_t k = j + 1; k < d; ++k) a[j][k] = 0;
  }
  return -1;
}

// Inverse of an SPD matrix via its Cholesky factor; ok = false if not SPD.
Matrix invert_spd(Matrix a, bool& ok) {
  const std::size_t d = a.size();
  ok = cholesky(a) < 0;
  if (!ok) return {};
  Matrix inv(d, std::vector<double>(d, 0.0));
  std::vector<double> col(d);
  for (std::size_t c = 0; c < d; ++c) {
    std::fill(col.begin(), col.end(), 0.0);
    col[c] = 1.0;
    for (std::size_t i = 0; i < d; ++i) {  // forward solve L y = e_c
      double v = col[i];
      for (std::size_t k = 0; k < i; ++k) v -= a[i][k] * col[k];
      col[i] = v / a[i][i];
    }
    for (std::size_t i = d; i-- > 0;) {  // back solve L' x = y
      double v = col[i];
      for (std::size_t k = i + 1; k < d; ++k) v -= a[k][i] * col[k];
      col[i] = v / a[i][i];
    }
    for (std::size_t i = 0; i < d; ++i) inv[i][c] = col[i];
  }
  for (std::size_t i = 0; i < d; ++i) {  // enforce exact symmetry
    for (std::size_t j = 0; j < i; ++j) {
      const double v = 0.5 * (inv[i][j] + inv[j][i]);
      inv[i][j] = inv[j][i] = v;
    }
  }
  return inv;
}

// Central-difference Hessian with per-coordinate step cbrt(eps)*max(1,|x|).
// ok = false if any stencil point failed to evaluate finitely.
Matrix fd_hessian(const std::function<double(const std::vector<double>&)>& f,
                  const std::vector<double>& x, bool& ok) {
  const std::size_t d = x.size();
  const double base = std::cbrt(std::numeric_limits<double>::epsilon());
  std::vector<double> h(d);
  for (std::size_t i = 0; i < d; ++i) h[i] = base * std::max(1.0, std::abs(x[i]));

  ok = true;
  auto eval = [&](std::vector<double> p) {
    const double v = f(p);
    if (!std::isfinite(v)) ok = false;
    return v;
  };

  Matrix hess(d, std::vector<double>(d, 0.0));
  const double f0 = eval(x);
  std::vector<double> p = x;
  for (std::size_t i = 0; i < d && ok; ++i) {
    p[i] = x[i] + h[i];
    const double fp = eval(p);
    p[i] = x[i] - h[i];
    const double fm = eval(p);
    p[i] = x[i];
    hess[i][i] = (fp - 2 * f0 + fm) / (h[i] * h[i]);
    for (std::size_t j = i + 1; j < d && ok; ++j) {
      p[i] = x[i] + h[i]; p[j] = x[j] + h[j];
      const double fpp = eval(p);
      p[j] = x[j] - h[j];
      const double fpm = eval(p);
      p[i] = x[i] - h[i]; p[j] = x[j] + h[j];
      const double fmp = eval(p);
      p[j] = x[j] - h[j];
      const double fmm = eval(p);
      p[i] = x[i]; p[j] = x[j];
      hess[i][j] = hess[j][i] = (fpp - fpm - fmp + fmm) / (4 * h[i] * h[j]);
    }
  }
  return hess;
}

// Covariance = (-Hessian)^{-1} at the optimum; empty and ok = false when the
// Hessian is not negative definite there.
Matrix observed_covariance(
    const std::function<double(const std::vector<double>&)>& loglik,
    const std::vector<double>& estimates, bool& ok) {
  Matrix hess = fd_hessian(loglik, estimates, ok);
  if (!ok) return {};
  for (auto& row : hess) {
    for (double& v : row) v = -v;
  }
  return invert_spd(std::move(hess), ok);
}

struct BestRun {
  OptimResult run;
  bool found = false;
};

// 5 deterministic restarts from the documented working-scale grid; identity
// coordinates always start at 0. Best final value wins, first on ties.
BestRun optimize_restarts(
    const std::function<double(const std::vector<double>&)>& objective,
    const std::vector<Scale>& scales, const FitOptions& options) {
  static const double grid[] = {-3.0, -1.5, 0.0, 1.5, 3.0};
  OptimOptions opt;
  opt.max_iterations = options.max_iterations;
  opt.gradient_tol = options.gradient_tol;
  opt.box_bound = options.boundary_clamp;

  BestRun best;
  for (double g : grid) {
    std::vector<double> x0(scales.size());
    for (std::size_t i = 0; i < scales.size(); ++i) {
      x0[i] = scales[i] == Scale::Identity ? 0.0 : g;
    }
    OptimResult run = maximize_box(objective, x0, opt);
    if (!std::isfinite(run.value)) continue;
    if (!best.found || run.value > best.run.value) {
      best.run = std::move(run);
      best.found = true;
    }
  }
  return best;
}

GofResult gof_impl(
    const std::vector<Group>& groups,
    const std::function<std::vector<double>(const Group&)>& dist_for,
    double loglik, int k_params, double weight_total) {
  GofResult out;
  out.loglik = loglik;
  out.aic = -2 * loglik + 2 * k_params;
  out.bic = -2 * loglik + k_params * std::log(weight_total);

  KahanSum<double> chi2;
  for (const auto& g : groups) {
    const std::vector<double> dist = dist_for(g);
    std::size_t next = 0;
    for (int r = g.m; r <= g.n; ++r) {
      double observed = 0;
      if (next < g.counts.size() && g.counts[next].first == r) {
        observed = g.counts[next].second;
        ++next;
      }
      const double expected = g.weight * dist[static_cast<std::size_t>(r)];
      if (expected < 1e-8 && observed == 0) continue;
      GofCell cell;
      cell.n = g.n;
      cell.m = g.m;
      cell.covariates = g.covariates;
      cell.r = r;
      cell.observed = observed;
      cell.expected = expected;
      out.cells.push_back(std::move(cell));
      const double diff = observed - expected;
      chi2.add(diff * diff / expected);
    }
  }
  out.chi2 = chi2.value();
  return out;
}

std::vector<double> regression_distribution(const std::vector<double>& phi,
                                            const std::vector<double>& psi,
                                            const Group& g) {
  const std::size_t dim = phi.size();
  if (g.covariates.size() + 1 != dim) {
    throw std::invalid_argument(
        "observation covariate width does not match the coefficient vector");
  }
  double lp_a = phi[0];
  double lp_b = psi[0];
  for (std::size_t j = 1; j < dim; ++j) {
    lp_a += phi[j] * g.covariates[j - 1];
    lp_b += psi[j] * g.covariates[j - 1];
  }
  // exp overflow here means a line-search probe, not a usable model.
  if (std::abs(lp_a) > 200 || std::abs(lp_b) > 200) {
    throw std::domain_error("linear predictor out of range");
  }
  const RateSchedule schedule = rate_vector(
      RateModelSpec::combined(std::exp(lp_a), std::exp(lp_b)), g.n);
  const TransitionDistribution row = transition_distribution(schedule, g.m);
  std::vector<double> dist(static_cast<std::size_t>(g.n) + 1, 0.0);
  for (int r = g.m; r <= g.n; ++r) {
    dist[static_cast<std::size_t>(r)] = row.prob(r);
  }
  return dist;
}

double regression_loglik(const std::vector<double>& phi,
                         const std::vector<double>& psi,
                         const std::vector<Group>& groups) {
  return reduce_loglik(groups, [&](const Group& g) {
    return group_loglik(regression_distribution(phi, psi, g), g);
  });
}

}  // namespace

const char* family_name(FitFamily family) {
  switch (family) {
    case FitFamily::Susceptible1: return "susceptible1";
    case FitFamily::Susceptible2: return "susceptible2";
    case FitFamily::Infectivity1: return "infectivity1";
    case FitFamily::Infectivity2: return "infectivity2";
    case FitFamily::Combined: return "combined";
    case FitFamily::Binomial: return "binomial";
    case FitFamily::BetaBinomial: return "betabinomial";
    case FitFamily::QPower: return "qpower";
  }
  return "unknown";
}

FitFamily family_from_name(std::string_view name) {
  if (name == "susceptible1") return FitFamily::Susceptible1;
  if (name == "susceptible2") return FitFamily::Susceptible2;
  if (name == "infectivity1") return FitFamily::Infectivity1;
  if (name == "infectivity2") return FitFamily::Infectivity2;
  if (name == "combined") return FitFamily::Combined;
  if (name == "binomial") return FitFamily::Binomial;
  if (name == "betabinomial" || name == "beta-binomial") {
    return FitFamily::BetaBinomial;
  }
  if (name == "qpower" || name == "q-power") return FitFamily::QPower;
  throw std::invalid_argument("unknown model family: " + std::string(name));
}

std::vector<std::string> family_param_names(FitFamily family) {
  return family_info(family).names;
}

bool family_uses_rates(FitFamily family) { return family_info(family).rates; }

std::vector<double> count_distribution(FitFamily family,
                                       const std::vector<double>& params,
                                       int n, int m) {
  if (n < 1) throw std::invalid_argument("cluster size n must be >= 1");
  if (m < 0 || m > n) throw std::domain_error("ascertainment floor out of range");
  const FamilyInfo& info = family_info(family);
  if (params.size() != info.scales.size()) {
    throw std::invalid_argument(std::string(family_name(family)) +
                                ": wrong parameter count");
  }

  if (info.rates) {
    const RateSchedule schedule =
        rate_vector(RateModelSpec{rate_family_of(family), params}, n);
    const TransitionDistribution row = transition_distribution(schedule, m);
    std::vector<double> dist(static_cast<std::size_t>(n) + 1, 0.0);
    for (int r = m; r <= n; ++r) {
      dist[static_cast<std::size_t>(r)] = row.prob(r);
    }
    return dist;
  }

  std::vector<double> dist;
  switch (family) {
    case FitFamily::Binomial:
      dist = pmf_from_lambda(lambda_binomial(params[0], n));
      break;
    case FitFamily::BetaBinomial:
      dist = pmf_from_lambda(lambda_beta_binomial(params[0], params[1], n));
      break;
    case FitFamily::QPower: {
      // (q, gamma) with q the zero-outcome probability: the moment family
      // describes the complemented indicators, so the count law reverses.
      const std::vector<double> zeros =
          pmf_from_lambda(lambda_qpower(params[0], params[1], n));
      dist.resize(zeros.size());
      for (int r = 0; r <= n; ++r) {
        dist[static_cast<std::size_t>(r)] =
            zeros[static_cast<std::size_t>(n - r)];
      }
      break;
    }
    default:
      throw std::logic_error("unhandled family");
  }

  if (m > 0) {
    // No process to restart mid-way here; condition by truncation.
    KahanSum<double> mass;
    for (int r = m; r <= n; ++r) mass.add(dist[static_cast<std::size_t>(r)]);
    const double total = mass.value();
    for (int r = 0; r < m; ++r) dist[static_cast<std::size_t>(r)] = 0;
    if (total > 0) {
      for (int r = m; r <= n; ++r) dist[static_cast<std::size_t>(r)] /= total;
    }
  }
  return dist;
}

double log_likelihood(FitFamily family, const std::vector<double>& params,
                      const std::vector<ClusterObservation>& data) {
  if (data.empty()) return 0.0;
  return loglik_over_groups(family, params, group_data(data, false));
}

FitResult fit_mle(FitFamily family, const std::vector<ClusterObservation>& data,
                  const FitOptions& options) {
  if (data.empty()) throw std::invalid_argument("fit_mle: data is empty");
  const std::vector<Group> groups = group_data(data, false);
  if (std::none_of(groups.begin(), groups.end(),
                   [](const Group& g) { return g.m < g.n; })) {
    throw std::invalid_argument(
        "fit_mle: every observation has m = n; the likelihood carries no "
        "information");
  }

  const FamilyInfo& info = family_info(family);
  auto objective = [&](const std::vector<double>& working) {
    try {
      return loglik_over_groups(family, natural_params(info, working), groups);
    } catch (const std::domain_error&) {
      return -kInf;
    }
  };

  const BestRun best = optimize_restarts(objective, info.scales, options);
  if (!best.found) {
    throw std::runtime_error(
        "fit_mle: no restart reached a finite likelihood; the family cannot "
        "explain this data");
  }
  const OptimResult& run = best.run;

  FitResult result;
  result.family = family;
  result.param_names = info.names;
  result.estimates = natural_params(info, run.x);
  result.loglik = run.value;
  result.converged = run.converged;
  result.gradient_norm = run.gradient_norm;
  result.n_clusters = static_cast<int>(data.size());
  for (const Group& g : groups) result.weight_total += g.weight;
  result.at_boundary.resize(run.x.size());
  for (std::size_t i = 0; i < run.x.size(); ++i) {
    result.at_boundary[i] = run.at_lower[i] || run.at_upper[i];
  }

  const int k = static_cast<int>(info.scales.size());
  result.aic = -2 * result.loglik + 2 * k;
  result.bic = -2 * result.loglik + k * std::log(result.weight_total);

  auto natural_loglik = [&](const std::vector<double>& params) {
    try {
      return loglik_over_groups(family, params, groups);
    } catch (const std::domain_error&) {
      return -kInf;
    }
  };
  bool se_ok = false;
  const Matrix cov = observed_covariance(natural_loglik, result.estimates, se_ok);
  result.se_available = se_ok;
  result.se.assign(static_cast<std::size_t>(k), kNan);
  if (se_ok) {
    for (int i = 0; i < k; ++i) {
      result.se[static_cast<std::size_t>(i)] =
          std::sqrt(cov[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)]);
    }
  }

  if (options.compute_gof) {
    result.chi2 = goodness_of_fit(result, data).chi2;
  }
  return result;
}

RegressionFit fit_regression_combined(const std::vector<ClusterObservation>& data,
                                      const FitOptions& options) {
  if (data.empty()) {
    throw std::invalid_argument("fit_regression_combined: data is empty");
  }
  const std::size_t cov_dim = data.front().covariates.size();
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i].covariates.size() != cov_dim) {
      throw std::invalid_argument("observation " + std::to_string(i) +
                                  " has a different covariate width");
    }
  }
  const std::vector<Group> groups = group_data(data, true);

  // Rank check on the weighted design Gram matrix; a failure pinpoints the
  // first column that is a combination of the earlier ones. The matrix is
  // scaled to unit diagonal first so the pivot test is a relative one: an
  // exactly collinear column otherwise leaves a pivot of roundoff size with
  // arbitrary sign and can slip through a strict factorization.
  const std::size_t q = cov_dim + 1;
  Matrix gram(q, std::vector<double>(q, 0.0));
  for (const Group& g : groups) {
    std::vector<double> z(q, 1.0);
    for (std::size_t j = 1; j < q; ++j) z[j] = g.covariates[j - 1];
    for (std::size_t i = 0; i < q; ++i) {
      for (std::size_t j = 0; j < q; ++j) gram[i][j] += g.weight * z[i] * z[j];
    }
  }
  int deficient = -1;
  std::vector<double> scale(q, 0.0);
  for (std::size_t j = 0; j < q && deficient < 0; ++j) {
    if (!(gram[j][j] > 0)) deficient = static_cast<int>(j);
    scale[j] = std::sqrt(gram[j][j]);
  }
  if (deficient < 0) {
    for (std::size_t i = 0; i < q; ++i) {
      for (std::size_t j = 0; j < q; ++j) gram[i][j] /= scale[i] * scale[j];
    }
    for (std::size_t j = 0; j < q && deficient < 0; ++j) {
      double diag = gram[j][j];
      for (std::size_t k = 0; k < j; ++k) diag -= gram[j][k] * gram[j][k];
      if (!(diag > 1e-10)) {
        deficient = static_cast<int>(j);
        break;
      }
      gram[j][j] = std::sqrt(diag);
      for (std::size_t i = j + 1; i < q; ++i) {
        double v = gram[i][j];
        for (std::size_t k = 0; k < j; ++k) v -= gram[i][k] * gram[j][k];
        gram[i][j] = v / gram[j][j];
      }
    }
  }
  if (deficient >= 0) {
    throw std::invalid_argument(
        deficient == 0 ? "design is rank-deficient at the intercept column"
                       : "design is rank-deficient at covariate column " +
                             std::to_string(deficient - 1));
  }

  const std::size_t d = 2 * q;
  auto split = [q](const std::vector<double>& x) {
    return std::pair<std::vector<double>, std::vector<double>>(
        std::vector<double>(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(q)),
        std::vector<double>(x.begin() + static_cast<std::ptrdiff_t>(q), x.end()));
  };

  // The optimizer sees centered and scaled covariates; raw dose-like columns
  // (values in the tens) make the Hessian condition number grow with the
  // square of the column scale and stall the quasi-Newton iteration before
  // the gradient tolerance is met. The reparameterization is affine, so the
  // reported coefficients and their covariance are mapped back exactly.
  std::vector<double> cov_mean(cov_dim, 0.0);
  std::vector<double> cov_scale(cov_dim, 1.0);
  {
    double wsum = 0.0;
    for (const Group& g : groups) wsum += g.weight;
    for (std::size_t j = 0; j < cov_dim; ++j) {
      double m = 0.0;
      for (const Group& g : groups) m += g.weight * g.covariates[j];
      cov_mean[j] = m / wsum;
      double s = 0.0;
      for (const Group& g : groups) {
        s = std::max(s, std::abs(g.covariates[j] - cov_mean[j]));
      }
      cov_scale[j] = s > 0 ? s : 1.0;
    }
  }
  std::vector<Group> scaled_groups = groups;
  for (Group& g : scaled_groups) {
    for (std::size_t j = 0; j < cov_dim; ++j) {
      g.covariates[j] = (g.covariates[j] - cov_mean[j]) / cov_scale[j];
    }
  }
  // Working coefficients w relate to natural ones by coef_j = w_j / s_j and
  // intercept = w_0 - sum_j coef_j * m_j.
  auto to_natural_block = [&](std::vector<double> w) {
    for (std::size_t j = 1; j < q; ++j) {
      w[j] /= cov_scale[j - 1];
      w[0] -= w[j] * cov_mean[j - 1];
    }
    return w;
  };

  auto objective = [&](const std::vector<double>& x) {
    try {
      const auto [phi, psi] = split(x);
      return regression_loglik(phi, psi, scaled_groups);
    } catch (const std::domain_error&) {
      return -kInf;
    }
  };

  // Coefficients live on the identity scale; seed the intercepts from the
  // restart grid so the rate magnitudes still get swept.
  static const double grid[] = {-3.0, -1.5, 0.0, 1.5, 3.0};
  OptimOptions opt;
  opt.max_iterations = options.max_iterations;
  opt.gradient_tol = options.gradient_tol;
  opt.box_bound = options.boundary_clamp;
  BestRun best;
  for (double g : grid) {
    std::vector<double> x0(d, 0.0);
    x0[0] = g;
    x0[q] = g;
    OptimResult run = maximize_box(objective, x0, opt);
    if (!std::isfinite(run.value)) continue;
    if (!best.found || run.value > best.run.value) {
      best.run = std::move(run);
      best.found = true;
    }
  }
  if (!best.found) {
    throw std::runtime_error(
        "fit_regression_combined: no restart reached a finite likelihood");
  }
  const OptimResult& run = best.run;

  RegressionFit fit;
  {
    const auto [wphi, wpsi] = split(run.x);
    fit.phi = to_natural_block(wphi);
    fit.psi = to_natural_block(wpsi);
  }
  fit.loglik = run.value;
  fit.converged = run.converged;
  fit.gradient_norm = run.gradient_norm;
  fit.n_clusters = static_cast<int>(data.size());
  for (const Group& g : groups) fit.weight_total += g.weight;
  const int k = static_cast<int>(d);
  fit.aic = -2 * fit.loglik + 2 * k;
  fit.bic = -2 * fit.loglik + k * std::log(fit.weight_total);

  // Covariance on the natural coefficient scale, so the curvature is taken
  // over the original covariates at the mapped-back optimum.
  auto natural_loglik = [&](const std::vector<double>& x) {
    try {
      const auto [phi, psi] = split(x);
      return regression_loglik(phi, psi, groups);
    } catch (const std::domain_error&) {
      return -kInf;
    }
  };
  std::vector<double> natural_x = fit.phi;
  natural_x.insert(natural_x.end(), fit.psi.begin(), fit.psi.end());
  bool se_ok = false;
  fit.covariance = observed_covariance(natural_loglik, natural_x, se_ok);
  fit.se_available = se_ok;
  if (!se_ok) fit.covariance.clear();

  if (options.compute_gof) {
    fit.chi2 = goodness_of_fit(fit, data).chi2;
  }
  return fit;
}

double RegressionFit::phi_se(int j) const {
  const std::size_t i = static_cast<std::size_t>(j);
  if (!se_available || i >= phi.size()) return kNan;
  return std::sqrt(covariance[i][i]);
}

double RegressionFit::psi_se(int j) const {
  const std::size_t i = phi.size() + static_cast<std::size_t>(j);
  if (!se_available || static_cast<std::size_t>(j) >= psi.size()) return kNan;
  return std::sqrt(covariance[i][i]);
}

RelativeRisk relative_risk(const RegressionFit& fit, double dose) {
  if (fit.phi.size() < 2) {
    throw std::invalid_argument(
        "relative_risk: fit has no dose coefficient (need >= 2 phi entries)");
  }
  if (dose == 0) return {1.0, 0.0};
  RelativeRisk out;
  out.rr = std::exp(fit.phi[1] * dose);
  out.se = std::abs(dose) * out.rr * fit.phi_se(1);
  return out;
}

RateSummary rates_at(const RegressionFit& fit,
                     const std::vector<double>& covariates) {
  const std::size_t q = fit.phi.size();
  if (covariates.size() + 1 != q) {
    throw std::invalid_argument("rates_at: covariate width mismatch");
  }
  std::vector<double> z(q, 1.0);
  for (std::size_t j = 1; j < q; ++j) z[j] = covariates[j - 1];

  RateSummary out;
  double lp_a = 0, lp_b = 0;
  for (std::size_t j = 0; j < q; ++j) {
    lp_a += fit.phi[j] * z[j];
    lp_b += fit.psi[j] * z[j];
  }
  out.alpha = std::exp(lp_a);
  out.beta = std::exp(lp_b);

  if (fit.se_available) {
    double qa = 0, qb = 0;
    for (std::size_t i = 0; i < q; ++i) {
      for (std::size_t j = 0; j < q; ++j) {
        qa += z[i] * fit.covariance[i][j] * z[j];
        qb += z[i] * fit.covariance[q + i][q + j] * z[j];
      }
    }
    out.alpha_se = out.alpha * std::sqrt(std::max(0.0, qa));
    out.beta_se = out.beta * std::sqrt(std::max(0.0, qb));
  } else {
    out.alpha_se = kNan;
    out.beta_se = kNan;
  }
  return out;
}

GofResult goodness_of_fit(const FitResult& fit,
                          const std::vector<ClusterObservation>& data) {
  const std::vector<Group> groups = group_data(data, false);
  const double loglik = loglik_over_groups(fit.family, fit.estimates, groups);
  double weight_total = 0;
  for (const Group& g : groups) weight_total += g.weight;
  return gof_impl(
      groups,
      [&](const Group& g) {
        return count_distribution(fit.family, fit.estimates, g.n, g.m);
      },
      loglik, static_cast<int>(fit.estimates.size()), weight_total);
}

GofResult goodness_of_fit(const RegressionFit& fit,
                          const std::vector<ClusterObservation>& data) {
  const std::vector<Group> groups = group_data(data, true);
  const double loglik = regression_loglik(fit.phi, fit.psi, groups);
  double weight_total = 0;
  for (const Group& g : groups) weight_total += g.weight;
  return gof_impl(
      groups,
      [&](const Group& g) { return regression_distribution(fit.phi, fit.psi, g); },
      loglik, static_cast<int>(fit.phi.size() + fit.psi.size()), weight_total);
}

}  // namespace markovcount
