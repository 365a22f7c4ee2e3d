#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "markovcount/dataset_io.hpp"
#include "markovcount/fit.hpp"
#include "markovcount/report.hpp"
#include "markovcount/simulate.hpp"

namespace {

using namespace markovcount;

// Exit taxonomy, fixed for scripting:
//   0 success, 2 parse/validation, 3 domain, 4 computation did not complete
//   (non-convergence, simulation rejection cap), 5 I/O.
constexpr int kOk = 0;
constexpr int kParseExit = 2;
constexpr int kDomainExit = 3;
constexpr int kIncompleteExit = 4;
constexpr int kIoExit = 5;

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open output file: " + path);
  out << content;
  if (!out) throw IoError("failed writing file: " + path);
}

std::string fmt3(double v) {
  if (!std::isfinite(v)) return "n/a";
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.3f", v);
  return buffer;
}

std::string fmt_grad(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.1e", v);
  return buffer;
}

void print_fit_stats(double loglik, double aic, double bic, double chi2,
                     int n_clusters, double weight_total, bool converged,
                     double gradient_norm) {
  std::cout << "loglik " << fmt3(loglik) << "   aic " << fmt3(aic) << "   bic "
            << fmt3(bic) << "   chi2 " << fmt3(chi2) << "\n";
  std::cout << "clusters " << n_clusters << " (weight " << fmt3(weight_total)
            << ")   converged " << (converged ? "yes" : "no") << "   gradient "
            << fmt_grad(gradient_norm) << "\n";
}

void print_fit_table(const FitResult& fit) {
  std::cout << "model: " << family_name(fit.family) << "\n";
  for (std::size_t i = 0; i < fit.estimates.size(); ++i) {
    std::cout << "  " << fit.param_names[i] << "  " << fmt3(fit.estimates[i])
              << "  (se " << fmt3(fit.se[i]) << ")"
              << (fit.at_boundary[i] ? "  [boundary]" : "") << "\n";
  }
  if (fit.family == FitFamily::Susceptible1) {
    std::cout << "  p-equivalent  " << fmt3(1.0 - std::exp(-fit.estimates[0]))
              << "\n";
  }
  print_fit_stats(fit.loglik, fit.aic, fit.bic, fit.chi2, fit.n_clusters,
                  fit.weight_total, fit.converged, fit.gradient_norm);
}

void print_regression_table(const RegressionFit& fit,
                            const std::vector<std::string>& covariate_names,
                            const std::vector<double>& rr_doses) {
  std::cout << "model: combined regression\n";
  auto coef_name = [&](std::size_t j) {
    return j == 0 ? std::string("intercept") : covariate_names[j - 1];
  };
  for (std::size_t j = 0; j < fit.phi.size(); ++j) {
    std::cout << "  log-alpha " << coef_name(j) << "  " << fmt3(fit.phi[j])
              << "  (se " << fmt3(fit.phi_se(static_cast<int>(j))) << ")\n";
  }
  for (std::size_t j = 0; j < fit.psi.size(); ++j) {
    std::cout << "  log-beta  " << coef_name(j) << "  " << fmt3(fit.psi[j])
              << "  (se " << fmt3(fit.psi_se(static_cast<int>(j))) << ")\n";
  }
  if (fit.phi.size() >= 2 && !rr_doses.empty()) {
    std::cout << "relative risk (" << covariate_names[0] << "):\n";
    for (double d : rr_doses) {
      const RelativeRisk rr = relative_risk(fit, d);
      std::cout << "  " << fmt3(d) << ": " << fmt3(rr.rr) << "  (se "
                << fmt3(rr.se) << ")\n";
    }
  }
  print_fit_stats(fit.loglik, fit.aic, fit.bic, fit.chi2, fit.n_clusters,
                  fit.weight_total, fit.converged, fit.gradient_norm);
}

RateFamily rate_family_from_name(const std::string& name) {
  if (name == "susceptible1") return RateFamily::Susceptible1;
  if (name == "susceptible2") return RateFamily::Susceptible2;
  if (name == "infectivity1") return RateFamily::Infectivity1;
  if (name == "infectivity2") return RateFamily::Infectivity2;
  if (name == "combined") return RateFamily::Combined;
  if (name == "custom") return RateFamily::Custom;
  throw std::invalid_argument("unknown rate model: " + name);
}

// Restrict/reorder covariates to the requested design columns.
std::vector<ClusterObservation> select_covariates(
    const Dataset& dataset, const std::vector<std::string>& wanted) {
  std::vector<std::size_t> index;
  for (const auto& name : wanted) {
    const auto it = std::find(dataset.covariate_names.begin(),
                              dataset.covariate_names.end(), name);
    if (it == dataset.covariate_names.end()) {
      throw std::invalid_argument("dataset has no covariate column '" + name +
                                  "'");
    }
    index.push_back(static_cast<std::size_t>(
        it - dataset.covariate_names.begin()));
  }
  std::vector<ClusterObservation> out = dataset.observations;
  for (auto& obs : out) {
    std::vector<double> z;
    z.reserve(index.size());
    for (std::size_t i : index) z.push_back(obs.covariates[i]);
    obs.covariates = std::move(z);
  }
  return out;
}

struct FitArgs {
  std::string data_path;
  std::string model;
  std::vector<std::string> regress;
  std::vector<double> rr_doses;
  std::string out_path;
};

int run_fit(const FitArgs& args) {
  const Dataset dataset = read_dataset_file(args.data_path);

  if (!args.regress.empty()) {
    if (!args.model.empty() && args.model != "combined") {
      throw std::invalid_argument(
          "--regress applies only to the combined model");
    }
    const auto data = select_covariates(dataset, args.regress);
    const FitOptions options{.compute_gof = false};
    RegressionFit fit = fit_regression_combined(data, options);
    const GofResult gof = goodness_of_fit(fit, data);
    fit.chi2 = gof.chi2;

    std::vector<double> doses = args.rr_doses;
    if (doses.empty()) {
      std::set<double> seen;
      for (const auto& obs : data) seen.insert(obs.covariates[0]);
      doses.assign(seen.begin(), seen.end());
    }
    print_regression_table(fit, args.regress, doses);
    if (!args.out_path.empty()) {
      write_text_file(args.out_path,
                      render_report(fit, gof, args.regress, doses));
      std::cout << "report: " << args.out_path << "\n";
    }
    return fit.converged ? kOk : kIncompleteExit;
  }

  if (args.model.empty()) {
    throw std::invalid_argument("--model is required without --regress");
  }
  const FitFamily family = family_from_name(args.model);
  const FitOptions options{.compute_gof = false};
  FitResult fit = fit_mle(family, dataset.observations, options);
  const GofResult gof = goodness_of_fit(fit, dataset.observations);
  fit.chi2 = gof.chi2;

  print_fit_table(fit);
  if (!args.out_path.empty()) {
    write_text_file(args.out_path, render_report(fit, gof));
    std::cout << "report: " << args.out_path << "\n";
  }
  return fit.converged ? kOk : kIncompleteExit;
}

struct SimulateArgs {
  std::string model;
  std::vector<double> params;
  std::vector<int> sizes;
  int reps = 1;
  std::uint64_t seed = 1;
  int ascertain = 0;
  std::string out_path;
};

int run_simulate(const SimulateArgs& args) {
  const RateFamily family = rate_family_from_name(args.model);
  if (args.sizes.empty()) {
    throw std::invalid_argument("--sizes must list at least one cluster size");
  }
  if (args.reps < 1) throw std::invalid_argument("--reps must be >= 1");

  std::vector<int> sizes;
  sizes.reserve(args.sizes.size() * static_cast<std::size_t>(args.reps));
  for (int rep = 0; rep < args.reps; ++rep) {
    sizes.insert(sizes.end(), args.sizes.begin(), args.sizes.end());
  }

  const RateModelSpec spec{family, args.params};
  if (family == RateFamily::Custom) {
    for (int n : sizes) {
      if (n != sizes.front()) {
        throw std::invalid_argument(
            "custom rate tables require all cluster sizes equal");
      }
    }
  }

  Dataset dataset;
  dataset.observations =
      simulate_dataset(spec, sizes, args.seed, args.ascertain);
  write_dataset_file(args.out_path, dataset);
  std::cout << "wrote " << dataset.observations.size() << " clusters to "
            << args.out_path << "\n";
  return kOk;
}

struct GofArgs {
  std::string data_path;
  std::string report_path;
  std::string out_path;
};

int run_gof(const GofArgs& args) {
  const Dataset dataset = read_dataset_file(args.data_path);
  const std::string report = read_text_file(args.report_path);
  const std::string augmented = augment_report(report, dataset.observations);
  const std::string target =
      args.out_path.empty() ? args.report_path : args.out_path;
  write_text_file(target, augmented);
  std::cout << "report: " << target << "\n";
  return kOk;
}

template <typename Body>
int guarded(const Body& body) {
  try {
    return body();
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kParseExit;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kIoExit;
  } catch (const std::domain_error& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kDomainExit;
  } catch (const std::invalid_argument& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kDomainExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIncompleteExit;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "markovcount: clustered binary counts via Markov counting processes"};
  app.require_subcommand(1);

  FitArgs fit_args;
  CLI::App* fit_cmd =
      app.add_subcommand("fit", "fit a model to a dataset by maximum likelihood");
  fit_cmd->add_option("data", fit_args.data_path, "dataset CSV path")
      ->required();
  fit_cmd->add_option("--model", fit_args.model,
                      "model family: susceptible1, susceptible2, infectivity1, "
                      "infectivity2, combined, binomial, betabinomial, qpower");
  fit_cmd->add_option("--regress", fit_args.regress,
                      "covariate columns for the combined-model regression")
      ->delimiter(',');
  fit_cmd->add_option("--rr-doses", fit_args.rr_doses,
                      "doses for the relative-risk table (regression only)")
      ->delimiter(',');
  fit_cmd->add_option("--out", fit_args.out_path, "write a JSON report here");

  SimulateArgs sim_args;
  CLI::App* sim_cmd =
      app.add_subcommand("simulate", "generate a dataset from a rate model");
  sim_cmd->add_option("--model", sim_args.model, "rate family name")
      ->required();
  sim_cmd->add_option("--params", sim_args.params,
                      "model parameters (comma separated)")
      ->delimiter(',');
  sim_cmd->add_option("--sizes", sim_args.sizes,
                      "cluster sizes (comma separated)")
      ->delimiter(',')
      ->required();
  sim_cmd->add_option("--reps", sim_args.reps,
                      "replicate the size list this many times");
  sim_cmd->add_option("--seed", sim_args.seed, "RNG seed");
  sim_cmd->add_option("--ascertain", sim_args.ascertain,
                      "draw each cluster conditional on at least this many "
                      "affected (recorded as the cluster's floor)");
  sim_cmd->add_option("--out", sim_args.out_path, "output CSV path")
      ->required();

  GofArgs gof_args;
  CLI::App* gof_cmd = app.add_subcommand(
      "gof", "recompute goodness-of-fit cells for an existing report");
  gof_cmd->add_option("data", gof_args.data_path, "dataset CSV path")
      ->required();
  gof_cmd->add_option("report", gof_args.report_path, "report JSON path")
      ->required();
  gof_cmd->add_option("--out", gof_args.out_path,
                      "write here instead of updating the report in place");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kParseExit;
  }

  if (fit_cmd->parsed()) return guarded([&] { return run_fit(fit_args); });
  if (sim_cmd->parsed()) return guarded([&] { return run_simulate(sim_args); });
  if (gof_cmd->parsed()) return guarded([&] { return run_gof(gof_args); });
  return kParseExit;
}
