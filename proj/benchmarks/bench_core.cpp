#include <benchmark/benchmark.h>

#include <random>

#include "stableid/experiments.hpp"
#include "stableid/lyapunov.hpp"
#include "stableid/matrix.hpp"
#include "stableid/projection.hpp"
#include "stableid/riccati.hpp"
#include "stableid/spectrum.hpp"
#include "stableid/sysid.hpp"

namespace {

using namespace stableid;

Matrix randn_matrix(std::size_t n, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = scale * g(rng);
  return m;
}

Matrix with_radius(std::size_t n, std::uint64_t seed, double rho) {
  Matrix m = randn_matrix(n, seed);
  return (rho / spectral_radius(m)) * m;
}

void BM_Eigenvalues(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const Matrix a = randn_matrix(n, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(eigenvalues(a));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Eigenvalues)->Arg(4)->Arg(16)->Arg(48)->Arg(96)->Complexity();

void BM_DlyapKron(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const Matrix theta = with_radius(n, 2, 0.9);
  const Matrix s_w = Matrix::identity(n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_dlyap(theta, s_w, DlyapMethod::kron));
  }
}
BENCHMARK(BM_DlyapKron)->Arg(4)->Arg(12)->Arg(24);

void BM_DlyapDoubling(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const Matrix theta = with_radius(n, 2, 0.9);
  const Matrix s_w = Matrix::identity(n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_dlyap(theta, s_w, DlyapMethod::doubling));
  }
}
BENCHMARK(BM_DlyapDoubling)->Arg(4)->Arg(24)->Arg(96);

void BM_SolveDare(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const Matrix a = with_radius(n, 3, 1.2);
  const Matrix b = Matrix::identity(n);
  const Matrix q = Matrix::identity(n);
  const Matrix r = Matrix::identity(n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_dare(a, b, q, r));
  }
}
BENCHMARK(BM_SolveDare)->Arg(4)->Arg(16)->Arg(48);

void BM_ProjectToStable(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const Matrix theta_prime = with_radius(n, 4, 1.5);
  const Matrix s_w = Matrix::identity(n);
  const Matrix q = Matrix::identity(n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(project_to_stable(theta_prime, s_w, q, 1e-9));
  }
}
BENCHMARK(BM_ProjectToStable)->Arg(3)->Arg(9)->Arg(27);

void BM_ClipEigenvalues(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const Matrix theta_prime = with_radius(n, 5, 1.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(clip_eigenvalues(theta_prime, 0.99));
  }
}
BENCHMARK(BM_ClipEigenvalues)->Arg(3)->Arg(9)->Arg(27);

void BM_Simulate(benchmark::State& state) {
  const long T = state.range(0);
  const LinearSystem system(with_radius(4, 6, 0.9), Matrix::identity(4));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate(system, T, ++seed));
  }
  state.SetItemsProcessed(state.iterations() * T);
}
BENCHMARK(BM_Simulate)->Arg(1000)->Arg(10000);

void BM_LeastSquares(benchmark::State& state) {
  const long T = state.range(0);
  const LinearSystem system(with_radius(4, 7, 0.9), Matrix::identity(4));
  const Trajectory traj = simulate(system, T, 11);
  for (auto _ : state) {
    benchmark::DoNotOptimize(least_squares(traj));
  }
}
BENCHMARK(BM_LeastSquares)->Arg(1000)->Arg(10000);

void BM_SpectralTrial(benchmark::State& state) {
  ExperimentConfig cfg;
  cfg.experiment = ExperimentKind::spectral;
  cfg.m = static_cast<int>(state.range(0));
  cfg.trials = 2;
  cfg.workers = 1;
  for (auto _ : state) {
    cfg.master_seed++;
    benchmark::DoNotOptimize(run_spectral(cfg));
  }
}
BENCHMARK(BM_SpectralTrial)->Arg(1)->Arg(3);

}  // namespace

BENCHMARK_MAIN();
