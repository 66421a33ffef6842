#include "relpos/measurement_sim.hpp"
#include "relpos/solver.hpp"
#include "relpos/tdoa.hpp"
#include "relpos/trilat.hpp"

#include <benchmark/benchmark.h>

#include <vector>

using namespace relpos;

namespace {

const trilat::TrilaterationProblem kSpheres{
    {Point(0, 0, 0), Point(500, 0, 0), Point(0, 500, 0)}, {300, 400, 500}, Dim::three};

tdoa::RangeDifferenceSet deltas(const std::vector<Point>& receivers, const Point& emitter) {
  sim::Scenario s;
  s.receivers = receivers;
  s.emitters = {emitter};
  return tdoa::arrival_deltas(sim::simulate_arrivals(s), 0, 0, s.c);
}

void BM_LocateEmitter2d(benchmark::State& state) {
  const std::vector<Point> r{Point(0, 0), Point(1000, 0), Point(400, 900)};
  const auto rd = deltas(r, Point(450, 350));
  SolverOptions opts;
  opts.multistart_count = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(tdoa::locate_emitter_2d(r, rd, opts));
}
BENCHMARK(BM_LocateEmitter2d)->Arg(1)->Arg(9)->Arg(25);

void BM_LocateEmitter3dPlane(benchmark::State& state) {
  const std::vector<Point> r{Point(0, 0, 100), Point(400, 0, 120), Point(0, 400, 140)};
  const auto rd = deltas(r, Point(200, 150, 0));
  for (auto _ : state) benchmark::DoNotOptimize(tdoa::locate_emitter_3d(r, rd, 0.0));
}
BENCHMARK(BM_LocateEmitter3dPlane);

void BM_Trilaterate3d(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(trilat::trilaterate_3d(kSpheres));
}
BENCHMARK(BM_Trilaterate3d);

void BM_TrilaterateLsq(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(trilat::trilaterate_lsq(kSpheres, Point(168, 168, 1)));
}
BENCHMARK(BM_TrilaterateLsq);

void BM_GridSearch2d(benchmark::State& state) {
  const trilat::TrilaterationProblem circles{{Point(0, 0), Point(10, 0), Point(5, 10)}, {5, 5, 5}, Dim::two};
  const double resolution = 1.0 / static_cast<double>(state.range(0));
  auto f = [&](const Point& q) { return trilat::trilateration_residuals(circles, q).squaredNorm(); };
  for (auto _ : state) benchmark::DoNotOptimize(grid_search(f, {Point(-10, -10), Point(20, 20)}, resolution));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>((30 * state.range(0) + 1) * (30 * state.range(0) + 1)));
}
BENCHMARK(BM_GridSearch2d)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_SimulateAndPerturb(benchmark::State& state) {
  sim::Scenario s;
  s.receivers = {Point(0, 0, 100), Point(400, 0, 120), Point(0, 400, 140)};
  s.emitters = {Point(200, 150, 0), Point(-300, 500, 0), Point(600, 450, 0)};
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sim::perturb_arrivals(sim::simulate_arrivals(s), 1e-8, ++seed));
}
BENCHMARK(BM_SimulateAndPerturb);

}  // namespace

BENCHMARK_MAIN();
