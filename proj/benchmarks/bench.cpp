#include <benchmark/benchmark.h>

#include "smlab/chaos.hpp"
#include "smlab/fbm.hpp"
#include "smlab/laws.hpp"
#include "smlab/malliavin.hpp"
#include "smlab/stein.hpp"
#include "smlab/wiener_poisson.hpp"

using namespace smlab;

static void BM_gstar_quadrature(benchmark::State& state) {
  auto law = catalog("lognormal", {});
  auto grid = interior_grid(law, 64);
  for (auto _ : state) {
    double acc = 0.0;
    for (double z : grid)
      acc += gstar_from_density(law.density, law.support, z);
    benchmark::DoNotOptimize(acc);
  }
}
BENCHMARK(BM_gstar_quadrature);

static void BM_stein_solve(benchmark::State& state) {
  auto law = catalog("chi2_centered", {{"v", 1.0}});
  auto range = interior_range(law);
  Rng rng(5, 1, 0);
  auto h = random_test_function(rng, range.first, range.second, 8,
                                TestFamily::wasserstein, "h");
  for (auto _ : state) {
    auto sol = stein_solve(law, h, static_cast<int>(state.range(0)));
    benchmark::DoNotOptimize(sol.sup_residual);
  }
}
BENCHMARK(BM_stein_solve)->Arg(200)->Arg(400)->Arg(800);

static void BM_chaos_sample(benchmark::State& state) {
  auto f = diagonal_clt_kernel(static_cast<int>(state.range(0)));
  std::size_t n = 10000;
  for (auto _ : state) {
    auto xs = sample(f, n, 7, 1);
    benchmark::DoNotOptimize(xs.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n));
}
BENCHMARK(BM_chaos_sample)->Arg(8)->Arg(32)->Arg(64);

static void BM_gamma_draw_fast(benchmark::State& state) {
  SmoothFunctional sq;
  sq.dim = 1;
  sq.chaos_order = 2;
  sq.eval = [](const std::vector<double>& z) { return z[0] * z[0] - 1.0; };
  sq.grad = [](const std::vector<double>& z) {
    return std::vector<double>{2.0 * z[0]};
  };
  for (auto _ : state) {
    auto g = gamma_draw(sq, 10000, 3, {}, 1);
    benchmark::DoNotOptimize(g.y.data());
  }
}
BENCHMARK(BM_gamma_draw_fast);

static void BM_wp_sample(benchmark::State& state) {
  LevyGrid g;
  g.sigma = 1.0;
  g.dt = {0.25, 0.25, 0.25, 0.25};
  g.atoms = {{1.0, 1.0}, {-0.5, 2.0}};
  WPKernel f(2, g);
  for (std::size_t i = 0; i < f.coeffs.size(); ++i)
    f.coeffs[i] = 1.0 / static_cast<double>(i + 1);
  std::size_t n = 10000;
  for (auto _ : state) {
    auto xs = sample_wp(f, n, 7, 1);
    benchmark::DoNotOptimize(xs.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n));
}
BENCHMARK(BM_wp_sample);

static void BM_fgn_simulate(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto paths = simulate_fgn(0.7, n, 256, 11, 1);
    benchmark::DoNotOptimize(paths.data());
  }
  state.SetItemsProcessed(state.iterations() * 256 * n);
}
BENCHMARK(BM_fgn_simulate)->Arg(256)->Arg(1024)->Arg(4096);

BENCHMARK_MAIN();
