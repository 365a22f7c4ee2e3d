#include <benchmark/benchmark.h>

#include <vector>

#include "markovcount/fit.hpp"
#include "markovcount/simulate.hpp"

namespace {

using namespace markovcount;

std::vector<ClusterObservation> fixture(int clusters) {
  std::vector<int> sizes;
  sizes.reserve(static_cast<std::size_t>(clusters));
  for (int i = 0; i < clusters; ++i) sizes.push_back(4 + i % 5);
  return simulate_dataset(RateModelSpec::combined(0.275, 0.300), sizes, 7);
}

void BM_LogLikelihood(benchmark::State& state) {
  const auto data = fixture(static_cast<int>(state.range(0)));
  const std::vector<double> params{0.275, 0.300};
  for (auto _ : state) {
    benchmark::DoNotOptimize(log_likelihood(FitFamily::Combined, params, data));
  }
}
BENCHMARK(BM_LogLikelihood)->Arg(200)->Arg(2000);

void BM_FitCombined(benchmark::State& state) {
  const auto data = fixture(static_cast<int>(state.range(0)));
  FitOptions options;
  options.compute_gof = false;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_mle(FitFamily::Combined, data, options));
  }
}
BENCHMARK(BM_FitCombined)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
