#include <benchmark/benchmark.h>

#include "hitchin/entropy.hpp"
#include "hitchin/geodesic.hpp"
#include "hitchin/saddle.hpp"
#include "hitchin/solver.hpp"

using namespace hitchin;

static void BM_TorusSolve(benchmark::State& state) {
  const auto bg = build_torus_background(1, 1, int(state.range(0)), 1);
  const auto q = QuarticInput::constant(16.0, bg.lattice());
  for (auto _ : state) benchmark::DoNotOptimize(solve_hitchin(bg, q).residual_inf);
}
BENCHMARK(BM_TorusSolve)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_DiskSolve(benchmark::State& state) {
  const auto bg = build_disk_background(0.9, int(state.range(0)));
  const auto q = QuarticInput::polynomial({0, 0, 0, 0, 1}, bg.lattice());
  for (auto _ : state) benchmark::DoNotOptimize(solve_hitchin(bg, q).residual_inf);
}
BENCHMARK(BM_DiskSolve)->Arg(65)->Arg(97)->Unit(benchmark::kMillisecond);

static void BM_Jacobian(benchmark::State& state) {
  const auto bg = build_disk_background(0.9, 97);
  const auto q = QuarticInput::polynomial({0, 0, 0, 0, 1}, bg.lattice());
  const auto s = solve_hitchin(bg, q);
  for (auto _ : state) benchmark::DoNotOptimize(hitchin_jacobian(bg, q, s.psi1, s.psi2).nonZeros());
}
BENCHMARK(BM_Jacobian)->Unit(benchmark::kMillisecond);

static void BM_OctagonSaddles(benchmark::State& state) {
  const auto o = FlatSurface::octagon();
  for (auto _ : state) benchmark::DoNotOptimize(saddle_connections(o, double(state.range(0))).size());
}
BENCHMARK(BM_OctagonSaddles)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

static void BM_OctagonCount(benchmark::State& state) {
  const auto o = FlatSurface::octagon();
  for (auto _ : state) benchmark::DoNotOptimize(count_closed_geodesics(o, double(state.range(0))));
}
BENCHMARK(BM_OctagonCount)->Arg(5)->Arg(7)->Unit(benchmark::kMillisecond);

static void BM_TorusClassLength(benchmark::State& state) {
  const auto t = FlatSurface::square_torus(1);
  for (auto _ : state) benchmark::DoNotOptimize(geodesic_length(t, TorusClass{int(state.range(0)), 7}).length);
}
BENCHMARK(BM_TorusClassLength)->Arg(5)->Arg(40);

static void BM_ChainCorridorLength(benchmark::State& state) {
  const auto o = FlatSurface::octagon();
  const auto search = closed_geodesics(o, 3.0);
  const auto c = chain_corridor(o, search, search.closed.back());
  for (auto _ : state) benchmark::DoNotOptimize(geodesic_length(o, c).length);
}
BENCHMARK(BM_ChainCorridorLength);

BENCHMARK_MAIN();
