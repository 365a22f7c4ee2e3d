#ifndef MARKOVCOUNT_REPORT_HPP
#define MARKOVCOUNT_REPORT_HPP

#include <string>
#include <vector>

#include "markovcount/fit.hpp"
#include "markovcount/observation.hpp"

namespace markovcount {

/// JSON report text for a single-family fit: model id, estimates with SEs,
/// loglik/aic/bic/chi2, convergence diagnostics, observed-vs-expected cell
/// table. Every number is rounded to 12 significant digits before
/// serialization, which makes the text a fixed point: parsing and
/// re-serializing reproduces it byte for byte.
std::string render_report(const FitResult& fit, const GofResult& gof);

/// Same for the combined-model regression, with coefficient tables keyed by
/// covariate name, per-dose rate summaries, and a relative-risk table at the
/// given doses.
std::string render_report(const RegressionFit& fit, const GofResult& gof,
                          const std::vector<std::string>& covariate_names,
                          const std::vector<double>& rr_doses);

/// Re-reads a report, recomputes the cell table and chi2 against the given
/// data, and re-renders. Running it twice is a no-op on the second pass.
/// Throws ParseError on malformed report text and std::domain_error when
/// the report's model does not apply to the data (e.g., a regression report
/// against covariate-free rows).
std::string augment_report(const std::string& report_json,
                           const std::vector<ClusterObservation>& data);

}  // namespace markovcount

#endif
