// Serial reference kernels against their OpenMP counterparts. Set
// OMP_NUM_THREADS to choose the thread count of the parallel variants.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "bepo/assembly.hpp"
#include "bepo/parallel.hpp"
#include "bepo/sde_sim.hpp"
#include "bepo/sparse.hpp"

namespace {

bepo::Grid cube(int n) { return bepo::Grid(bepo::GridSpec{3.5, 3.5, 1.0, 1e-3, n, n, n}); }

std::vector<double> random_vector(std::size_t n) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> d(0, 1);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

template <bool Parallel>
void BM_Assembly(benchmark::State& state) {
  const bepo::Grid g = cube(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    bepo::CsrMatrix m = Parallel ? bepo::assemble_matrix(g, bepo::ModelParams{}, g.lambda())
                                 : bepo::assemble_matrix_serial(g, bepo::ModelParams{}, g.lambda());
    benchmark::DoNotOptimize(m.val.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(g.size()));
}

template <bool Parallel>
void BM_Spmv(benchmark::State& state) {
  const bepo::Grid g = cube(static_cast<int>(state.range(0)));
  const bepo::CsrMatrix m = bepo::assemble_matrix(g, bepo::ModelParams{}, g.lambda());
  const std::vector<double> x = random_vector(m.n);
  std::vector<double> y(m.n);
  for (auto _ : state) {
    if constexpr (Parallel)
      bepo::spmv(m, x, y);
    else
      bepo::spmv_serial(m, x, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetBytesProcessed(state.iterations() * static_cast<int64_t>(m.nnz() * (sizeof(double) + sizeof(std::size_t))));
}

template <bool Parallel>
void BM_Dot(benchmark::State& state) {
  const std::vector<double> a = random_vector(static_cast<std::size_t>(state.range(0)));
  const std::vector<double> b = random_vector(a.size());
  for (auto _ : state) benchmark::DoNotOptimize(Parallel ? bepo::dot(a, b) : bepo::dot_serial(a, b));
  state.SetBytesProcessed(state.iterations() * static_cast<int64_t>(2 * a.size() * sizeof(double)));
}

template <bool Parallel>
void BM_MonteCarlo(benchmark::State& state) {
  bepo::SimConfig cfg;
  cfg.n_paths = static_cast<std::size_t>(state.range(0));
  cfg.n_steps = 100'000;
  cfg.burn_in = 1'000;
  const std::vector<double> levels{-1, 0, 1}, radii{0.5, 1.5, 2.5};
  for (auto _ : state) {
    bepo::MonteCarloSummary s =
        Parallel ? bepo::run_monte_carlo(cfg, bepo::ModelParams{}, levels, radii)
                 : bepo::run_monte_carlo_serial(cfg, bepo::ModelParams{}, levels, radii);
    benchmark::DoNotOptimize(s.samples);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(cfg.n_paths * cfg.n_steps));
}

}  // namespace

BENCHMARK(BM_Assembly<false>)->Name("assembly/serial")->Arg(33)->Arg(65)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Assembly<true>)->Name("assembly/openmp")->Arg(33)->Arg(65)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Spmv<false>)->Name("spmv/serial")->Arg(33)->Arg(65)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Spmv<true>)->Name("spmv/openmp")->Arg(33)->Arg(65)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Dot<false>)->Name("dot/serial")->Arg(1 << 16)->Arg(1 << 20)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Dot<true>)->Name("dot/openmp")->Arg(1 << 16)->Arg(1 << 20)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_MonteCarlo<false>)->Name("monte_carlo/serial")->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MonteCarlo<true>)->Name("monte_carlo/openmp")->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
