#include <invertlab/fiber.hpp>
#include <invertlab/harmonic.hpp>
#include <invertlab/mesh_builders.hpp>
#include <invertlab/tracer.hpp>

#include <benchmark/benchmark.h>

#include <cmath>

using namespace invertlab;

namespace {

Point braun_seed() { return Eigen::Vector3d(0.5 * std::log(5.0), std::atan2(1.0, 2.0), 0.0); }

void BM_BraunFiber(benchmark::State& state) {
  const MapSpec f = MapSpec::builtin("braun3d");
  FiberOptions o;
  o.n_starts = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(enumerate_fiber(f, Eigen::Vector3d(2, 1, 0), Box::centered(3, 10.0), o));
  }
}
BENCHMARK(BM_BraunFiber)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_TraceBraunPlane(benchmark::State& state) {
  const MapSpec f = MapSpec::builtin("braun3d");
  const Plane plane = Plane::coordinate(Eigen::Vector3d(2, 1, 0), 0, 1);
  const double R = static_cast<double>(state.range(0));
  for (auto _ : state) {
    const SurfaceMesh m = trace_preimage(f, plane, {braun_seed()}, R);
    state.counters["vertices"] = static_cast<double>(m.vertex_count());
  }
}
BENCHMARK(BM_TraceBraunPlane)->Arg(3)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_AnnulusCondenser(benchmark::State& state) {
  const SurfaceMesh m = flat_annulus_uniform(0.25, 1.0, 1.0 / static_cast<double>(state.range(0)));
  const auto loops = loops_by_radius(m, Point::Zero(2));
  for (auto _ : state) benchmark::DoNotOptimize(solve_condenser(m, loops[0], loops[1]));
  state.counters["vertices"] = static_cast<double>(m.vertex_count());
}
BENCHMARK(BM_AnnulusCondenser)->Arg(20)->Arg(40)->Arg(80)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
