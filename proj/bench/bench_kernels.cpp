// Serial reference paths against the OpenMP kernels, plus the fast Zd paths
// against their direct scans. Arg 0 = serial, 1 = parallel.

#include <benchmark/benchmark.h>

#include <random>

#include "amen/ergodic.hpp"
#include "amen/group.hpp"
#include "amen/process.hpp"
#include "amen/spectral.hpp"
#include "amen/tiling.hpp"

namespace amen {
namespace {

Exec exec_of(const benchmark::State& s) { return s.range(0) ? Exec::kParallel : Exec::kSerial; }

FiniteGroupSet disc(const Group& g, int r) {
  std::vector<Element> v;
  for (int64_t x = -r; x <= r; ++x)
    for (int64_t y = -r; y <= r; ++y)
      if (x * x + y * y <= r * r) v.push_back(g.point({x, y}));
  return FiniteGroupSet(std::move(v));
}

void BM_KBoundaryZ2(benchmark::State& s) {
  const Group g = Group::zd(2);
  const auto k = metric_ball(g, 2, default_metric(g));
  const auto t = disc(g, 200);
  for (auto _ : s) benchmark::DoNotOptimize(k_boundary(g, k, t, exec_of(s)));
}
BENCHMARK(BM_KBoundaryZ2)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_KBoundaryScanZ2(benchmark::State& s) {
  const Group g = Group::zd(2);
  const auto k = metric_ball(g, 2, default_metric(g));
  const auto t = disc(g, 200);
  for (auto _ : s) benchmark::DoNotOptimize(k_boundary_scan(g, k, t, exec_of(s)));
}
BENCHMARK(BM_KBoundaryScanZ2)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_KBoundaryHeisenberg(benchmark::State& s) {
  const Group g = Group::heisenberg();
  const auto seq = folner_generator(g);
  const auto k = seq(1);
  const auto t = seq(8);
  for (auto _ : s) benchmark::DoNotOptimize(k_boundary(g, k, t, exec_of(s)));
}
BENCHMARK(BM_KBoundaryHeisenberg)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

HullTiling small_hull(const Group& g) {
  const auto seq = folner_generator(g);
  const auto p = tiling_params(0.3, 0.05, 0.05);
  const std::vector<FiniteGroupSet> small(static_cast<size_t>(p.N), FiniteGroupSet{g.identity()});
  const auto bgp = tiling_params(0.2, 0.05, 0.05);
  const std::vector<FiniteGroupSet> bg(static_cast<size_t>(bgp.N), seq(8));
  return tile_hull(g, seq(120), bg, bgp, small, p);
}

void BM_IndexScanPrefixSum(benchmark::State& s) {
  const Group g = Group::zd(2);
  const auto hull = small_hull(g);
  const auto shape = folner_generator(g)(6);
  for (auto _ : s) benchmark::DoNotOptimize(scan_index_family(g, shape, hull, 0.2, exec_of(s)));
}
BENCHMARK(BM_IndexScanPrefixSum)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_IndexScanDirect(benchmark::State& s) {
  const Group g = Group::zd(2);
  const auto hull = small_hull(g);
  const auto shape = folner_generator(g)(6);
  for (auto _ : s) benchmark::DoNotOptimize(scan_index_family_direct(g, shape, hull, 0.2, exec_of(s)));
}
BENCHMARK(BM_IndexScanDirect)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_OrbitAverageAnderson(benchmark::State& s) {
  const auto ens = anderson_ensemble(2, 0, 1);
  const auto f = counting_set_function(ens, ens.omega(3));
  const auto seq = folner_generator(ens.group);
  const auto q = seq(10);
  const auto u = seq(4);
  for (auto _ : s) benchmark::DoNotOptimize(orbit_average(f, q, u, exec_of(s)));
}
BENCHMARK(BM_OrbitAverageAnderson)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_MaximalTail(benchmark::State& s) {
  const Group z = Group::zd(1);
  ProcessParams pp;
  pp.p = 0.5;
  const auto f = make_process("bernoulli-point-count", pp, z);
  const auto seq = folner_generator(z);
  for (auto _ : s) benchmark::DoNotOptimize(maximal_tail_estimate(f, seq, 0.75, 1, 64, 2000, exec_of(s)));
}
BENCHMARK(BM_MaximalTail)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

// The two independent counting routes at one energy.
SymMatrix random_symmetric(int n) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  SymMatrix h(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) h(i, j) = h(j, i) = u(rng);
  return h;
}

void BM_CountByEigenvalues(benchmark::State& s) {
  const auto h = random_symmetric(static_cast<int>(s.range(0)));
  for (auto _ : s) benchmark::DoNotOptimize(eigen_counting_function(h)(0.1));
}
BENCHMARK(BM_CountByEigenvalues)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_CountByInertia(benchmark::State& s) {
  const auto h = random_symmetric(static_cast<int>(s.range(0)));
  for (auto _ : s) benchmark::DoNotOptimize(inertia_count(h, 0.1));
}
BENCHMARK(BM_CountByInertia)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace amen

BENCHMARK_MAIN();
