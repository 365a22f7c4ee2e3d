#include "markovcount/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <string>

#include "json.hpp"

#include "markovcount/dataset_io.hpp"

namespace markovcount {
namespace {

using json = nlohmann::ordered_json;

// Round through 12 significant decimal digits. The shortest representation
// of the result is at most those 12 digits, so serialize-parse-serialize is
// a fixed point and reports are byte-stable.
double round12(double v) {
  if (!std::isfinite(v)) return v;
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.12g", v);
  return std::strtod(buffer, nullptr);
}

json number(double v) {
  if (!std::isfinite(v)) return nullptr;  // NaN/inf have no JSON spelling
  return round12(v);
}

json cells_json(const std::vector<GofCell>& cells) {
  json out = json::array();
  for (const auto& cell : cells) {
    json c;
    c["n"] = cell.n;
    c["m"] = cell.m;
    if (!cell.covariates.empty()) {
      json z = json::array();
      for (double v : cell.covariates) z.push_back(number(v));
      c["covariates"] = std::move(z);
    }
    c["r"] = cell.r;
    c["observed"] = number(cell.observed);
    c["expected"] = number(cell.expected);
    out.push_back(std::move(c));
  }
  return out;
}

json fit_block(double loglik, double aic, double bic, double chi2,
               int n_clusters, double weight_total, bool converged,
               double gradient_norm) {
  json f;
  f["loglik"] = number(loglik);
  f["aic"] = number(aic);
  f["bic"] = number(bic);
  f["chi2"] = number(chi2);
  f["n_clusters"] = n_clusters;
  f["weight_total"] = number(weight_total);
  f["converged"] = converged;
  f["gradient_norm"] = number(gradient_norm);
  return f;
}

std::string dump(const json& report) { return report.dump(2) + "\n"; }

double as_double(const json& v) {
  return v.is_null() ? std::numeric_limits<double>::quiet_NaN()
                     : v.get<double>();
}

}  // namespace

std::string render_report(const FitResult& fit, const GofResult& gof) {
  json report;
  json model;
  model["family"] = family_name(fit.family);
  json params = json::array();
  for (std::size_t i = 0; i < fit.estimates.size(); ++i) {
    json p;
    p["name"] = fit.param_names[i];
    p["estimate"] = number(fit.estimates[i]);
    p["se"] = fit.se_available ? number(fit.se[i]) : json(nullptr);
    p["at_boundary"] = static_cast<bool>(fit.at_boundary[i]);
    params.push_back(std::move(p));
  }
  model["parameters"] = std::move(params);
  model["se_available"] = fit.se_available;
  if (fit.family == FitFamily::Susceptible1) {
    // The success probability this exogenous rate induces per unit.
    model["p_equivalent"] = number(1.0 - std::exp(-fit.estimates[0]));
  }
  report["model"] = std::move(model);
  report["fit"] = fit_block(fit.loglik, fit.aic, fit.bic, gof.chi2,
                            fit.n_clusters, fit.weight_total, fit.converged,
                            fit.gradient_norm);
  report["cells"] = cells_json(gof.cells);
  return dump(report);
}

std::string render_report(const RegressionFit& fit, const GofResult& gof,
                          const std::vector<std::string>& covariate_names,
                          const std::vector<double>& rr_doses) {
  json report;
  json model;
  model["family"] = "combined_regression";
  json names = json::array();
  for (const auto& name : covariate_names) names.push_back(name);
  model["covariates"] = std::move(names);

  auto coef_table = [&](const std::vector<double>& coef, bool is_phi) {
    json table = json::array();
    for (std::size_t j = 0; j < coef.size(); ++j) {
      json c;
      c["name"] = j == 0 ? std::string("intercept")
                         : (j - 1 < covariate_names.size()
                                ? covariate_names[j - 1]
                                : "covariate" + std::to_string(j - 1));
      c["estimate"] = number(coef[j]);
      const double se = is_phi ? fit.phi_se(static_cast<int>(j))
                               : fit.psi_se(static_cast<int>(j));
      c["se"] = number(se);
      table.push_back(std::move(c));
    }
    return table;
  };
  model["phi"] = coef_table(fit.phi, true);
  model["psi"] = coef_table(fit.psi, false);
  model["se_available"] = fit.se_available;
  if (fit.se_available) {
    json cov = json::array();
    for (const auto& row : fit.covariance) {
      json r = json::array();
      for (double v : row) r.push_back(number(v));
      cov.push_back(std::move(r));
    }
    model["covariance"] = std::move(cov);
  }
  report["model"] = std::move(model);
  report["fit"] = fit_block(fit.loglik, fit.aic, fit.bic, gof.chi2,
                            fit.n_clusters, fit.weight_total, fit.converged,
                            fit.gradient_norm);

  json rr_table = json::array();
  for (double d : rr_doses) {
    const RelativeRisk rr = relative_risk(fit, d);
    json row;
    row["dose"] = number(d);
    row["rr"] = number(rr.rr);
    row["se"] = number(rr.se);
    rr_table.push_back(std::move(row));
  }
  report["relative_risk"] = std::move(rr_table);
  report["cells"] = cells_json(gof.cells);
  return dump(report);
}

std::string augment_report(const std::string& report_json,
                           const std::vector<ClusterObservation>& data) {
  json report;
  try {
    report = json::parse(report_json);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("report is not valid JSON: ") + e.what());
  }

  try {
    if (!report.contains("model") || !report["model"].contains("family")) {
      throw ParseError("report has no model.family entry");
    }
    const std::string family = report["model"]["family"].get<std::string>();

    GofResult gof;
    if (family == "combined_regression") {
      RegressionFit fit;
      for (const auto& c : report["model"]["phi"]) {
        fit.phi.push_back(as_double(c["estimate"]));
      }
      for (const auto& c : report["model"]["psi"]) {
        fit.psi.push_back(as_double(c["estimate"]));
      }
      gof = goodness_of_fit(fit, data);
    } else {
      FitResult fit;
      fit.family = family_from_name(family);
      for (const auto& p : report["model"]["parameters"]) {
        fit.estimates.push_back(as_double(p["estimate"]));
      }
      gof = goodness_of_fit(fit, data);
    }
    report["fit"]["chi2"] = number(gof.chi2);
    report["cells"] = cells_json(gof.cells);
  } catch (const json::exception& e) {
    throw ParseError(std::string("report is malformed: ") + e.what());
  } catch (const std::invalid_argument& e) {
    // Family/covariate mismatches between report and data land here.
    throw std::domain_error(e.what());
  }
  return dump(report);
}

}  // namespace markovcount
