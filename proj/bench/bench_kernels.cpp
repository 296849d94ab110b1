// SPDX-License-Identifier: Apache-2.0
// Serial reference against the OpenMP version of each simulator kernel.
#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "qoct/kernels.hpp"

using namespace qoct;
using namespace qoct::kernels;

namespace {

CountRateTerms random_terms(std::size_t n_fringe) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  CountRateTerms t;
  t.constant = 1.0;
  t.carrier = 1.385;  // rad/fs at 1360 nm
  for (std::size_t k = 0; k < n_fringe; ++k) {
    t.detuning.push_back(0.02 * u(rng));
    t.fringe.emplace_back(u(rng), u(rng));
  }
  return t;
}

std::vector<double> stage_delays(std::size_t n) {
  std::vector<double> tau(n);
  for (std::size_t m = 0; m < n; ++m) tau[m] = -2000.0 + 1.334 * static_cast<double>(m);
  return tau;
}

// Scan of n_steps positions against a 2048-term spectral decomposition.
template <Execution E>
void BM_CountRate(benchmark::State& state) {
  const auto terms = random_terms(2048);
  const auto tau = stage_delays(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(count_rate(terms, tau, E));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 2048);
}

// Pixel binning of a fine spectrum: n_pixels bins over 8 samples each.
template <Execution E>
void BM_BinAverage(benchmark::State& state) {
  const auto pixels = static_cast<std::size_t>(state.range(0));
  const std::size_t n = 8 * pixels + 1;
  std::vector<double> x(n);
  std::vector<double> y(n);
  for (std::size_t k = 0; k < n; ++k) {
    x[k] = static_cast<double>(k);
    y[k] = 1.0 + std::cos(0.01 * static_cast<double>(k));
  }
  std::vector<double> lo(pixels);
  std::vector<double> hi(pixels);
  for (std::size_t j = 0; j < pixels; ++j) {
    lo[j] = 8.0 * static_cast<double>(j) + 0.3;
    hi[j] = lo[j] + 7.4;
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(E == Execution::Serial ? bin_average_serial(x, y, lo, hi)
                                                    : bin_average_parallel(x, y, lo, hi));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_CountRate<Execution::Serial>)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CountRate<Execution::Parallel>)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BinAverage<Execution::Serial>)->Arg(670)->Arg(4096)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_BinAverage<Execution::Parallel>)->Arg(670)->Arg(4096)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
