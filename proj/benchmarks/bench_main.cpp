#include <benchmark/benchmark.h>

#include "bpmap/mobile_map.hpp"
#include "bpmap/sampler.hpp"
#include "bpmap/trees.hpp"
#include "bpmap/weights.hpp"

using namespace bpmap;

namespace {

BranchingLaw quad_law() {
    auto q = WeightSequence::dirac(2, Rational(1, 12));
    return derive_branching(q, classify(q));
}

LabeledMobile sample_fixture(int64_t faces, uint64_t seed) {
    SamplerBudget budget;
    budget.rng_seed = seed;
    budget.max_tree_size = 1 << 22;
    auto res = sample_conditioned(quad_law(), {ConditioningTarget::Kind::FaceCount, faces}, budget);
    return *res.mobile;
}

void BM_unconditioned_tree(benchmark::State& state) {
    auto law = quad_law();
    auto w = white_offspring(law);
    auto b = black_offspring(law);
    Rng rng(7);
    int64_t vertices = 0;
    for (auto _ : state) {
        auto t = sample_two_type_tree(w, b, 1 << 20, rng);
        if (t) vertices += t->size();
        benchmark::DoNotOptimize(t);
    }
    state.SetItemsProcessed(vertices);
}
BENCHMARK(BM_unconditioned_tree);

void BM_conditioned_rejection(benchmark::State& state) {
    const int64_t n = state.range(0);
    auto law = quad_law();
    auto w = white_offspring(law);
    auto b = black_offspring(law);
    uint64_t seed = 0;
    for (auto _ : state) {
        SamplerBudget budget;
        budget.rng_seed = ++seed;
        budget.max_tree_size = 1 << 22;
        auto shape = sample_conditioned_shape(w, b, {ConditioningTarget::Kind::FaceCount, n}, budget,
                                              Rng(budget.rng_seed));
        benchmark::DoNotOptimize(shape);
    }
}
BENCHMARK(BM_conditioned_rejection)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_fair_rejection(benchmark::State& state) {
    const int64_t m = state.range(0);
    auto geom = OffspringDist::geometric(0.5);
    uint64_t seed = 0;
    for (auto _ : state) {
        SamplerBudget budget;
        budget.rng_seed = ++seed;
        budget.max_tree_size = 64 * m;
        auto shape = sample_conditioned_shape(geom, geom, {ConditioningTarget::Kind::VertexCountWhite, m},
                                              budget, Rng(budget.rng_seed));
        benchmark::DoNotOptimize(shape);
    }
}
BENCHMARK(BM_fair_rejection)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_displacement(benchmark::State& state) {
    const int64_t k = state.range(0);
    Rng rng(3);
    for (auto _ : state) {
        auto d = sample_displacement(k, rng);
        benchmark::DoNotOptimize(d);
    }
}
BENCHMARK(BM_displacement)->Arg(1)->Arg(4)->Arg(16);

void BM_build_map(benchmark::State& state) {
    auto m = sample_fixture(state.range(0), 11);
    for (auto _ : state) {
        auto built = build_map(m);
        benchmark::DoNotOptimize(built);
    }
    state.SetItemsProcessed(state.iterations() * m.size());
}
BENCHMARK(BM_build_map)->Arg(200)->Arg(2000)->Unit(benchmark::kMicrosecond);

void BM_contour_process(benchmark::State& state) {
    auto m = sample_fixture(2000, 13);
    for (auto _ : state) {
        auto c = contour_process(m.t.tree);
        benchmark::DoNotOptimize(c);
    }
    state.SetItemsProcessed(state.iterations() * m.size());
}
BENCHMARK(BM_contour_process);

void BM_bfs_distances(benchmark::State& state) {
    auto m = sample_fixture(2000, 17);
    auto map = std::get<PlanarMap>(build_map(m));
    for (auto _ : state) {
        auto d = bfs_distances(map, map.pointed_vertex);
        benchmark::DoNotOptimize(d);
    }
}
BENCHMARK(BM_bfs_distances);

}  // namespace

BENCHMARK_MAIN();
