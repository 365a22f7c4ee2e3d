#include <benchmark/benchmark.h>

#include "markovcount/rng.hpp"
#include "markovcount/transition.hpp"

namespace {

using namespace markovcount;

RateSchedule random_schedule(int n, std::uint64_t stream) {
  Rng rng(20240901, stream);
  RateSchedule s;
  s.n = n;
  s.rates.resize(static_cast<std::size_t>(n) + 1, 0.0);
  for (int k = 0; k < n; ++k) s.rates[k] = 0.05 + 49.95 * rng.uniform();
  return s;
}

void BM_TransitionRow(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const RateSchedule s = random_schedule(n, static_cast<std::uint64_t>(n));
  for (auto _ : state) {
    benchmark::DoNotOptimize(transition_distribution(s, 0, 1.0));
  }
}
BENCHMARK(BM_TransitionRow)->Arg(4)->Arg(8)->Arg(12);

void BM_TransitionRowLargeRates(benchmark::State& state) {
  RateSchedule s = random_schedule(8, 99);
  for (double& r : s.rates) r *= 1e4;
  s.rates.back() = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(transition_distribution(s, 0, 1.0));
  }
}
BENCHMARK(BM_TransitionRowLargeRates);

void BM_ClosedForm(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  RateSchedule s;
  s.n = n;
  s.rates.resize(static_cast<std::size_t>(n) + 1, 0.0);
  for (int k = 0; k < n; ++k) s.rates[k] = 1.0 + 1.37 * k;
  for (auto _ : state) {
    benchmark::DoNotOptimize(transition_closed_form(s, 0, n, 1.0));
  }
}
BENCHMARK(BM_ClosedForm)->Arg(4)->Arg(8);

}  // namespace

BENCHMARK_MAIN();
