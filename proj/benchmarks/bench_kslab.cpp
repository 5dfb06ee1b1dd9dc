#include <benchmark/benchmark.h>

#include <random>

#include "kslab/hartree.hpp"
#include "kslab/initial_data.hpp"
#include "kslab/numeric.hpp"
#include "kslab/transport.hpp"
#include "kslab/vlasov.hpp"

using namespace kslab;

namespace {

constexpr double L = 16.0;

PhaseGrid paired(int n, double hbar) { return PhaseGrid::make(n, n, L, pi * hbar * n / L); }

Measure cloud(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> pos(-4.0, 4.0), w(0.1, 1.0);
  Measure m;
  double tot = 0.0;
  for (int a = 0; a < n; ++a) {
    m.points.push_back({pos(rng), pos(rng)});
    m.weights.push_back(w(rng));
    tot += m.weights.back();
  }
  for (double& x : m.weights) x /= tot;
  return m;
}

void BM_VlasovStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const PhaseGrid g = PhaseGrid::make(n, n, L, 6.0);
  VlasovState s(perturbed(maxwellian(g, 1.0, 1.0), 1, 0.05), InteractionKernel::regularized_coulomb(g, 0.2), 0.01);
  for (auto _ : state) {
    s = vlasov_step(s);
    benchmark::DoNotOptimize(s.f.values().data());
  }
}
BENCHMARK(BM_VlasovStep)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_HartreeStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const PhaseGrid g = paired(n, 0.1);
  const PlanckScale s{0.1};
  HartreeState h(wick_quantize(gaussian_bump(g, 1.0, 0.0, 0.0, 1.0, 0.5), s), InteractionKernel::regularized_coulomb(g, 0.2), 0.01);
  for (auto _ : state) {
    h = hartree_step(h);
    benchmark::DoNotOptimize(h.op.matrix().data());
  }
}
BENCHMARK(BM_HartreeStep)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_WickQuantize(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const PhaseGrid g = paired(n, 0.1);
  const KineticDensity f = gaussian_bump(g, 1.0, 0.0, 0.0, 1.0, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(wick_quantize(f, {0.1}).matrix().data());
}
BENCHMARK(BM_WickQuantize)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_TraceNorm(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const PhaseGrid g = paired(n, 0.1);
  const PlanckScale s{0.1};
  const KineticDensity f = gaussian_bump(g, 1.0, 0.0, 0.0, 1.0, 0.5);
  const Eigen::MatrixXcd d = wick_quantize(f, s).matrix() - weyl_quantize(f, s).matrix();
  for (auto _ : state) benchmark::DoNotOptimize(schatten_norm(d, s.h(), 1.0));
}
BENCHMARK(BM_TraceNorm)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_NetworkSimplex(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const int n = static_cast<int>(state.range(0));
  const Measure a = cloud(rng, n), b = cloud(rng, n);
  for (auto _ : state) benchmark::DoNotOptimize(wasserstein(a, b, 2.0, TransportMethod::exact).cost);
}
BENCHMARK(BM_NetworkSimplex)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_Sinkhorn(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const int n = static_cast<int>(state.range(0));
  const Measure a = cloud(rng, n), b = cloud(rng, n);
  for (auto _ : state) benchmark::DoNotOptimize(wasserstein(a, b, 2.0, TransportMethod::entropic).cost);
}
BENCHMARK(BM_Sinkhorn)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
