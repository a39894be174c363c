// Serial reference vs OpenMP kernels. Run with --benchmark_filter to pick one.

#include <benchmark/benchmark.h>

#include <random>

#include "aggreg/core.hpp"
#include "aggreg/harness.hpp"
#include "aggreg/subset_search.hpp"

namespace {

using aggreg::Exec;

aggreg::DesignMatrix random_design(std::size_t n, std::size_t m) {
  std::mt19937_64 eng(42);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n * m);
  for (auto& x : v) x = u(eng);
  return aggreg::DesignMatrix(n, m, std::move(v), 1.0);
}

Exec exec_of(const benchmark::State& st) { return st.range(0) == 0 ? Exec::serial : Exec::parallel; }

void BM_Gram(benchmark::State& st) {
  const auto d = random_design(2000, static_cast<std::size_t>(st.range(1)));
  for (auto _ : st) benchmark::DoNotOptimize(aggreg::gram_matrix(d, exec_of(st)));
}
BENCHMARK(BM_Gram)->ArgsProduct({{0, 1}, {32, 128}})->ArgNames({"parallel", "M"});

void BM_SubsetSearch(benchmark::State& st) {
  const auto m = static_cast<std::size_t>(st.range(1));
  const auto d = random_design(200, m);
  const auto psi = aggreg::gram_matrix(d, Exec::serial);
  std::vector<double> y(d.n());
  std::mt19937_64 eng(7);
  std::normal_distribution<double> z;
  for (auto& v : y) v = z(eng);
  const auto c = aggreg::cross_moments(d, y);
  for (auto _ : st) benchmark::DoNotOptimize(aggreg::kernels::best_subsets_by_size(psi, c, m, exec_of(st)));
  st.counters["subsets/s"] = benchmark::Counter(aggreg::kernels::enumeration_count(m), benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_SubsetSearch)->ArgsProduct({{0, 1}, {14, 18}})->ArgNames({"parallel", "M"})->Unit(benchmark::kMillisecond);

void BM_Replications(benchmark::State& st) {
  aggreg::ExperimentConfig cfg;
  cfg.n_grid = {200};
  cfg.m_dict = 12;
  cfg.reps = 64;
  cfg.penalty = aggreg::PenaltySpec::hard(2.0);
  cfg.hard_options.orthonormal_shortcut = false;
  for (auto _ : st) benchmark::DoNotOptimize(aggreg::run_experiment(cfg, exec_of(st)));
}
BENCHMARK(BM_Replications)->ArgsProduct({{0, 1}})->ArgNames({"parallel"})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
