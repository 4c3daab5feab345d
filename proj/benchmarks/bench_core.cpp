#include "tactskin/contact.hpp"
#include "tactskin/primitives.hpp"
#include "tactskin/sampler.hpp"
#include "tactskin/shell.hpp"

#include <benchmark/benchmark.h>

#include <memory>
#include <random>

using namespace tactskin;

namespace {

SkinShell plate_shell(const std::shared_ptr<const TriMesh>& mesh) {
    CutoutParams c;
    c.thickness = 0.004;
    return build_shells(mesh, HeatMap::uniform(*mesh, MapRole::skin, 1.0), c).shells.at(0);
}

void BM_SampleNodules(benchmark::State& state) {
    const auto mesh = std::make_shared<const TriMesh>(primitives::grid_plate(1.0, 1.0, 40, 40));
    const SkinShell shell = plate_shell(mesh);
    const HeatMap density = HeatMap::uniform(*mesh, MapRole::density, 1.0);
    SamplingParams s;
    s.d_min = 1.0 / double(state.range(0));
    s.max_samples = 100000;
    std::size_t n = 0;
    for (auto _ : state) {
        const auto layout = sample_nodules(shell, density, s);
        n = layout.size();
        benchmark::DoNotOptimize(n);
    }
    state.counters["nodules"] = double(n);
}
BENCHMARK(BM_SampleNodules)->Arg(5)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_SelfIntersections(benchmark::State& state) {
    const int n = int(state.range(0));
    const auto mesh = std::make_shared<const TriMesh>(primitives::icosphere(0.1, n));
    CutoutParams c;
    c.thickness = 0.003;
    c.cutoff_tolerance = 0.5;
    std::vector<double> w(mesh->vertex_count());
    for (std::uint32_t v = 0; v < w.size(); ++v) w[v] = mesh->vertex(v).z() > 0.0 ? 1.0 : 0.0;
    const auto shells = build_shells(mesh, HeatMap(mesh->sha256(), MapRole::skin, w), c).shells;
    for (auto _ : state) benchmark::DoNotOptimize(detect_self_intersections(shells.at(0)));
    state.counters["faces"] = double(shells.at(0).solid.face_count());
}
BENCHMARK(BM_SelfIntersections)->Arg(3)->Arg(4)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_OptimizeHeatmap(benchmark::State& state) {
    const TriMesh mesh = primitives::icosphere(0.2, 4);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-0.2, 0.2);
    NoduleLayout layout;
    ContactHistogram hist;
    for (std::uint32_t i = 0; i < std::uint32_t(state.range(0)); ++i) {
        Nodule n;
        n.id = i;
        n.position = Vec3(u(rng), u(rng), u(rng));
        n.local_weight = 1.0;
        layout.nodules.push_back(n);
        hist.counts[i] = i % 5;
    }
    HeuristicParams h;
    h.alpha = 0.05;
    for (auto _ : state) benchmark::DoNotOptimize(optimize_heatmap(mesh, layout, hist, h));
    state.counters["vertices"] = double(mesh.vertex_count());
}
BENCHMARK(BM_OptimizeHeatmap)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
