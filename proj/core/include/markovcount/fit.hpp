#ifndef MARKOVCOUNT_FIT_HPP
#define MARKOVCOUNT_FIT_HPP

#include <string>
#include <string_view>
#include <vector>

#include "markovcount/observation.hpp"
#include "markovcount/rate_model.hpp"

namespace markovcount {

/// Everything fit_mle can estimate: the five parametric rate families plus
/// the three count-distribution families expressed through the exchangeable
/// moment sequence. The two groups share one likelihood interface; they
/// differ only in how the per-cluster count distribution is produced.
enum class FitFamily {
  Susceptible1,
  Susceptible2,
  Infectivity1,
  Infectivity2,
  Combined,
  Binomial,
  BetaBinomial,
  QPower,
};

const char* family_name(FitFamily family);
FitFamily family_from_name(std::string_view name);  // throws invalid_argument
std::vector<std::string> family_param_names(FitFamily family);
bool family_uses_rates(FitFamily family);

/// Count distribution Pr(Y = r | Y >= m), r = 0..n, for one cluster.
/// Rate families start the process in state m (their native ascertainment
/// handling); moment-sequence families are conditioned by truncating and
/// renormalizing the unconditional pmf over r >= m. Entries below m are 0.
/// QPower is parameterized by (q, gamma) where q is the marginal probability
/// of a zero outcome: the moment family is applied to the complemented
/// indicators, so Pr(Y = r) is the q-power zero-count law.
std::vector<double> count_distribution(FitFamily family,
                                       const std::vector<double>& params,
                                       int n, int m);

/// Sum over clusters of weight * log Pr(r | start m) under the family at the
/// given natural-scale parameters. -infinity if any observation is
/// impossible under the model. Summation is deterministic: observations are
/// processed in a canonical sorted order with compensated accumulation, so
/// the value is bit-stable across runs and thread counts.
double log_likelihood(FitFamily family, const std::vector<double>& params,
                      const std::vector<ClusterObservation>& data);

struct FitOptions {
  int max_iterations = 400;
  double gradient_tol = 1e-6;
  double boundary_clamp = 20.0;  // working-scale box half-width
  bool compute_gof = true;       // fill chi2 (needs a pass over the data)
};

struct FitResult {
  FitFamily family = FitFamily::Susceptible1;
  std::vector<std::string> param_names;
  std::vector<double> estimates;  // natural scale
  std::vector<double> se;         // NaN when unavailable
  bool se_available = false;
  std::vector<bool> at_boundary;  // estimate pinned at the working-scale box
  double loglik = 0;
  double aic = 0;
  double bic = 0;
  double chi2 = 0;
  int n_clusters = 0;         // number of observation rows
  double weight_total = 0;    // sum of weights; the BIC sample size
  bool converged = false;
  double gradient_norm = 0;   // working scale, at the reported estimate
};

/// Maximum-likelihood fit of one family. Optimization runs on a working
/// scale (log for positive parameters, logit for probabilities and for
/// exponents confined to [0, 1], identity for the beta-binomial correlation)
/// with BFGS and 5 deterministic restarts from the documented grid
/// {-3, -1.5, 0, 1.5, 3}; identity-scale coordinates start at 0. Working
/// coordinates are clamped at +-boundary_clamp; a clamped coordinate is
/// reported at its natural value with at_boundary set (its SE is not
/// trustworthy). SEs come from the inverse observed information: central-
/// difference Hessian on the natural scale with step cbrt(eps)*max(1,|x|),
/// inverted by Cholesky; if that Hessian is not negative definite,
/// se_available is false and the SEs are NaN. aic = -2L + 2k and
/// bic = -2L + k ln(weight_total). Non-convergence is reported, never
/// hidden. Throws std::invalid_argument on empty data and
/// std::runtime_error if no restart yields a finite likelihood.
FitResult fit_mle(FitFamily family, const std::vector<ClusterObservation>& data,
                  const FitOptions& options = {});

struct RegressionFit {
  std::vector<double> phi;  // log-alpha coefficients, intercept first
  std::vector<double> psi;  // log-beta coefficients, intercept first
  std::vector<std::vector<double>> covariance;  // over (phi, psi) jointly
  bool se_available = false;
  double loglik = 0;
  double aic = 0;
  double bic = 0;
  double chi2 = 0;
  int n_clusters = 0;
  double weight_total = 0;
  bool converged = false;
  double gradient_norm = 0;

  double phi_se(int j) const;
  double psi_se(int j) const;
};

/// Combined-model regression: cluster i gets rates
/// mu_k = alpha_i (n_i - k) + beta_i k (n_i - k) with
/// log alpha_i = z_i . phi, log beta_i = z_i . psi, z_i = (1, covariates_i).
/// Same optimizer, restart, and SE machinery as fit_mle; coefficients are
/// unconstrained, restarts seed both intercepts from the grid with slopes 0.
/// Requires a full-rank design: a collinear column is reported by index in
/// the thrown std::invalid_argument.
RegressionFit fit_regression_combined(const std::vector<ClusterObservation>& data,
                                      const FitOptions& options = {});

struct RelativeRisk {
  double rr = 1;
  double se = 0;
};

/// RR(d) = exp(phi_1 * d): the multiplier on the exogenous rate at dose d
/// relative to dose 0. SE by the delta method, |d| * RR * se(phi_1); exactly
/// 0 at d = 0.
RelativeRisk relative_risk(const RegressionFit& fit, double dose);

struct RateSummary {
  double alpha = 0;
  double alpha_se = 0;
  double beta = 0;
  double beta_se = 0;
};

/// alpha and beta implied at one covariate vector, with delta-method SEs
/// from the coefficient covariance.
RateSummary rates_at(const RegressionFit& fit,
                     const std::vector<double>& covariates);

struct GofCell {
  int n = 0;
  int m = 0;
  std::vector<double> covariates;
  int r = 0;
  double observed = 0;  // weighted count
  double expected = 0;
};

struct GofResult {
  double loglik = 0;
  double aic = 0;
  double bic = 0;
  double chi2 = 0;
  std::vector<GofCell> cells;
};

/// Pearson chi-square against the fitted model. Observations are stratified
/// by (n, m, covariates); each stratum contributes cells r = m..n with
/// expected count N_stratum * Pr(r), N_stratum the stratum's total weight.
/// Cells with expected < 1e-8 and observed = 0 are skipped. No pooling.
GofResult goodness_of_fit(const FitResult& fit,
                          const std::vector<ClusterObservation>& data);
GofResult goodness_of_fit(const RegressionFit& fit,
                          const std::vector<ClusterObservation>& data);

}  // namespace markovcount

#endif
