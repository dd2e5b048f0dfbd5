#include <benchmark/benchmark.h>

#include <cmath>

#include "thinhom/fem2d.hpp"
#include "thinhom/harness.hpp"
#include "thinhom/meshgen.hpp"
#include "thinhom/qmean.hpp"

using namespace thinhom;

namespace {

// example domain at eps = 0.1, nx from the argument
struct Setup {
    StudyConfig config = example_config();
    TriMesh mesh;
    explicit Setup(int nx)
        : mesh(generate_mesh(config.spec, 0.1, MeshParams{nx, 16, 4, 1.0}, MeshTarget::physical))
    {
    }
};

}  // namespace

static void BM_GenerateMesh(benchmark::State& state)
{
    const StudyConfig c = example_config();
    const MeshParams p{static_cast<int>(state.range(0)), 16, 4, 1.0};
    for (auto _ : state) benchmark::DoNotOptimize(generate_mesh(c.spec, 0.1, p, MeshTarget::physical));
}
BENCHMARK(BM_GenerateMesh)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

static void BM_Assemble(benchmark::State& state)
{
    const Setup s(static_cast<int>(state.range(0)));
    const CoefficientField coeff(CoefficientVariant::physical, s.config.spec, 0.1);
    const Forcing f = s.config.make_forcing();
    const AssemblyOptions opt{static_cast<int>(state.range(1))};
    for (auto _ : state) benchmark::DoNotOptimize(assemble(s.mesh, coeff, f, opt));
    state.counters["triangles"] = static_cast<double>(s.mesh.triangle_count());
}
BENCHMARK(BM_Assemble)->Args({1024, 1})->Args({1024, 4})->Unit(benchmark::kMillisecond);

static void BM_SolveCG(benchmark::State& state)
{
    const Setup s(static_cast<int>(state.range(0)));
    const CoefficientField coeff(CoefficientVariant::physical, s.config.spec, 0.1);
    const SparseSystem sys = assemble(s.mesh, coeff, s.config.make_forcing());
    SolveStats stats;
    for (auto _ : state) benchmark::DoNotOptimize(solve_cg(sys, 1e-10, 200000, &stats));
    state.counters["iterations"] = stats.iterations;
}
BENCHMARK(BM_SolveCG)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

static void BM_MeanTorus(benchmark::State& state)
{
    const TorusCell cell{{2 * M_PI, 2 * M_PI * std::sqrt(2.0)}};
    const auto F = [](std::span<const double> t) { return 1.0 / (4.0 + std::sin(t[0]) + std::sin(t[1])); };
    for (auto _ : state) benchmark::DoNotOptimize(mean_torus(F, cell, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_MeanTorus)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
