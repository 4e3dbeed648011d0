// Parallel kernels against their serial references. Sizes follow a typical
// song: a few thousand voiced frames, twelve coefficients, K around ten.

#include <random>

#include <benchmark/benchmark.h>

#include "lyricalign/kernels.hpp"

namespace {

using namespace lyricalign;

Eigen::MatrixXd uniform(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = dist(rng);
  return m;
}

template <Eigen::MatrixXd (*F)(const Eigen::MatrixXd&)>
void pairwise(benchmark::State& state) {
  const auto x = uniform(state.range(0), 12, 1, -1.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(F(x));
  state.SetComplexityN(state.range(0));
}

template <Eigen::MatrixXd (*F)(const Eigen::MatrixXd&)>
void dtw(benchmark::State& state) {
  const auto cost = uniform(state.range(0) / 8, state.range(0), 2);
  for (auto _ : state) benchmark::DoNotOptimize(F(cost));
}

template <Eigen::MatrixXd (*F)(const Eigen::MatrixXd&, double, kernels::RowProjectionStats*, std::vector<double>*)>
void entropic(benchmark::State& state) {
  const auto b = uniform(state.range(0), 10, 3, 1e-4, 1.0);
  std::vector<double> multipliers;
  for (auto _ : state) benchmark::DoNotOptimize(F(b, 3e-3, nullptr, &multipliers));
}

}  // namespace

BENCHMARK(pairwise<kernels::pairwise_sq_distances>)->Name("pairwise/parallel")->RangeMultiplier(2)->Range(512, 4096);
BENCHMARK(pairwise<kernels::serial::pairwise_sq_distances>)->Name("pairwise/serial")->RangeMultiplier(2)->Range(512, 4096);
BENCHMARK(dtw<kernels::dtw_accumulate>)->Name("dtw_accumulate/parallel")->RangeMultiplier(2)->Range(512, 4096);
BENCHMARK(dtw<kernels::serial::dtw_accumulate>)->Name("dtw_accumulate/serial")->RangeMultiplier(2)->Range(512, 4096);
BENCHMARK(entropic<kernels::entropic_rows>)->Name("entropic_rows/parallel")->RangeMultiplier(2)->Range(512, 4096);
BENCHMARK(entropic<kernels::serial::entropic_rows>)->Name("entropic_rows/serial")->RangeMultiplier(2)->Range(512, 4096);

BENCHMARK_MAIN();
