#include "markovcount/rate_model.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace markovcount {
namespace {

// 0^0 = 1 so a zero exponent degrades to a constant factor instead of
// poisoning the rate. Unit exponents return the base bit-for-bit so the
// nested families collapse onto their parents exactly.
double power(double base, double exponent) {
  if (exponent == 0.0) return 1.0;
  if (exponent == 1.0) return base;
  return std::pow(base, exponent);
}

void require(bool ok, const char* message) {
  if (!ok) throw std::domain_error(message);
}

}  // namespace

const char* family_name(RateFamily family) {
  switch (family) {
    case RateFamily::Susceptible1: return "susceptible1";
    case RateFamily::Susceptible2: return "susceptible2";
    case RateFamily::Infectivity1: return "infectivity1";
    case RateFamily::Infectivity2: return "infectivity2";
    case RateFamily::Combined: return "combined";
    case RateFamily::Custom: return "custom";
  }
  return "unknown";
}

RateModelSpec RateModelSpec::susceptible1(double alpha) {
  return {RateFamily::Susceptible1, {alpha}};
}

RateModelSpec RateModelSpec::susceptible2(double alpha, double gamma) {
  return {RateFamily::Susceptible2, {alpha, gamma}};
}

RateModelSpec RateModelSpec::infectivity1(double beta) {
  return {RateFamily::Infectivity1, {beta}};
}

RateModelSpec RateModelSpec::infectivity2(double beta, double eta,
                                          double gamma) {
  return {RateFamily::Infectivity2, {beta, eta, gamma}};
}

RateModelSpec RateModelSpec::combined(double alpha, double beta) {
  return {RateFamily::Combined, {alpha, beta}};
}

RateModelSpec RateModelSpec::custom(std::vector<double> rates) {
  return {RateFamily::Custom, std::move(rates)};
}

RateSchedule rate_vector(const RateModelSpec& spec, int n) {
  if (n < 1) throw std::invalid_argument("cluster size n must be >= 1");

  const auto& p = spec.params;
  auto want = [&p](std::size_t count, const char* family) {
    if (p.size() != count) {
      throw std::invalid_argument(std::string(family) +
                                  ": wrong parameter count");
    }
  };
  for (double v : p) {
    require(std::isfinite(v), "rate parameter not finite");
  }

  RateSchedule out;
  out.n = n;
  out.rates.assign(static_cast<std::size_t>(n) + 1, 0.0);

  switch (spec.family) {
    case RateFamily::Susceptible1: {
      want(1, "susceptible1");
      require(p[0] > 0, "susceptible1: alpha must be > 0");
      for (int k = 0; k < n; ++k) out.rates[k] = p[0] * (n - k);
      break;
    }
    case RateFamily::Susceptible2: {
      want(2, "susceptible2");
      require(p[0] > 0, "susceptible2: alpha must be > 0");
      require(p[1] >= 0, "susceptible2: gamma must be >= 0");
      for (int k = 0; k < n; ++k) out.rates[k] = p[0] * power(n - k, p[1]);
      break;
    }
    case RateFamily::Infectivity1: {
      want(1, "infectivity1");
      require(p[0] > 0, "infectivity1: beta must be > 0");
      for (int k = 1; k < n; ++k) {
        out.rates[k] = p[0] * k * (n - k);
      }
      break;
    }
    case RateFamily::Infectivity2: {
      want(3, "infectivity2");
      require(p[0] > 0, "infectivity2: beta must be > 0");
      require(p[1] >= 0, "infectivity2: eta must be >= 0");
      require(p[2] >= 0, "infectivity2: gamma must be >= 0");
      for (int k = 1; k < n; ++k) {
        out.rates[k] = p[0] * power(k, p[1]) * power(n - k, p[2]);
      }
      break;
    }
    case RateFamily::Combined: {
      want(2, "combined");
      require(p[0] > 0, "combined: alpha must be > 0");
      require(p[1] > 0, "combined: beta must be > 0");
      for (int k = 0; k < n; ++k) {
        out.rates[k] = p[0] * (n - k) + p[1] * k * (n - k);
      }
      break;
    }
    case RateFamily::Custom: {
      if (p.size() != static_cast<std::size_t>(n) + 1) {
        throw std::invalid_argument(
            "custom: rate table must have n + 1 entries");
      }
      for (double v : p) require(v >= 0, "custom: rates must be >= 0");
      require(p.back() == 0, "custom: last rate must be 0");
      out.rates = p;
      break;
    }
  }

  out.rates[static_cast<std::size_t>(n)] = 0.0;
  // Valid parameters can still overflow the rate arithmetic (for example a
  // huge exponent); that is a parameter-domain failure, not malformed input.
  for (double v : out.rates) {
    require(std::isfinite(v), "rate overflow for these parameters");
  }
  return out;
}

void validate_schedule(const RateSchedule& schedule) {
  if (schedule.n < 1) {
    throw std::invalid_argument("schedule: n must be >= 1");
  }
  if (schedule.rates.size() != static_cast<std::size_t>(schedule.n) + 1) {
    throw std::invalid_argument("schedule: rates must have n + 1 entries");
  }
  for (double r : schedule.rates) {
    if (!std::isfinite(r) || r < 0) {
      throw std::invalid_argument("schedule: rates must be finite and >= 0");
    }
  }
  if (schedule.rates.back() != 0) {
    throw std::invalid_argument("schedule: last rate must be 0");
  }
}

}  // namespace markovcount
