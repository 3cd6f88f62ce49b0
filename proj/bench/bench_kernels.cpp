// Parallel kernels against their serial references.

#include <benchmark/benchmark.h>

#include <map>

#include "phidbn/coding.hpp"
#include "phidbn/reward.hpp"
#include "phidbn/rng.hpp"
#include "phidbn/structure.hpp"

using namespace phidbn;

namespace {

struct Data {
    std::vector<FeatureVector> xs;
    std::vector<ActionId> as;
    std::vector<double> rs;
    PackedTrajectory packed;
    DbnStructure g;
};

const Data& data(std::size_t m, std::size_t n) {
    static std::map<std::pair<std::size_t, std::size_t>, Data> cache;
    auto [it, fresh] = cache.try_emplace({m, n});
    if (!fresh) return it->second;
    Data& d = it->second;
    Rng rng(42);
    for (std::size_t t = 0; t < n; ++t) {
        FeatureVector x(m);
        for (std::size_t i = 0; i < m; ++i) x.set(i, bernoulli(rng, 0.4));
        d.xs.push_back(x);
        d.as.push_back(static_cast<ActionId>(uniform_index(rng, 3)));
        d.rs.push_back(uniform01(rng));
    }
    d.packed = pack_trajectory(d.xs, d.as);
    d.g = DbnStructure(m);
    for (std::size_t i = 0; i < m; ++i) d.g.set_parents(i, {i, (i + 1) % m, (i + 3) % m});
    return d;
}

void BM_counts(benchmark::State& state) {
    const auto& d = data(state.range(0), state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(accumulate_counts(d.packed, d.g));
}

void BM_counts_serial(benchmark::State& state) {
    const auto& d = data(state.range(0), state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(accumulate_counts_serial(d.packed, d.g));
}

void BM_design(benchmark::State& state) {
    const auto& d = data(state.range(0), state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(build_design(d.xs, d.rs));
}

void BM_design_serial(benchmark::State& state) {
    const auto& d = data(state.range(0), state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(build_design_serial(d.xs, d.rs));
}

void BM_search(benchmark::State& state) {
    const auto& d = data(state.range(0), state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(search_structure(d.packed, StructureOptions{}));
}

void BM_search_serial(benchmark::State& state) {
    const auto& d = data(state.range(0), state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(search_structure_serial(d.packed, StructureOptions{}));
}

}  // namespace

BENCHMARK(BM_counts)->Args({12, 100000})->Args({24, 100000})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_counts_serial)->Args({12, 100000})->Args({24, 100000})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_design)->Args({12, 100000})->Args({24, 100000})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_design_serial)->Args({12, 100000})->Args({24, 100000})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_search)->Args({8, 20000})->Args({12, 20000})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_search_serial)->Args({8, 20000})->Args({12, 20000})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
