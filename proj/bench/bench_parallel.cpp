// Serial reference vs OpenMP kernels: quantile chains and noncrossing adjustment.
#include <benchmark/benchmark.h>

#include "tvpqr/noncrossing.hpp"
#include "tvpqr/sampler.hpp"
#include "tvpqr/simulate.hpp"

using namespace tvpqr;

namespace {

const SeriesData& fixture() {
    static const SeriesData data = [] {
        Rng rng(11);
        return SeriesData::from_values(sim::trend_sv(120, 2.0, 0.1, 0.1, rng));
    }();
    return data;
}

sampler::ModelSpec spec() {
    sampler::ModelSpec s;
    s.mcmc = {100, 300, 3};
    return s;
}

const std::vector<int> kHorizons{1, 4};

void BM_ChainsSerial(benchmark::State& state) {
    const auto grid = QuantileGrid::standard();
    const auto seeds = sampler::sequential_seeds(5, grid.size());
    for (auto _ : state) benchmark::DoNotOptimize(sampler::run_quantile_chains_serial(spec(), grid, fixture(), kHorizons, seeds));
}

void BM_ChainsParallel(benchmark::State& state) {
    const auto grid = QuantileGrid::standard();
    const auto seeds = sampler::sequential_seeds(5, grid.size());
    for (auto _ : state)
        benchmark::DoNotOptimize(sampler::run_quantile_chains(spec(), grid, fixture(), kHorizons, seeds, static_cast<int>(state.range(0))));
}

const noncross::QuantileDrawSet& draw_set() {
    static const noncross::QuantileDrawSet set = [] {
        const auto grid = QuantileGrid::standard();
        const auto chains = sampler::run_quantile_chains_serial(spec(), grid, fixture(), kHorizons,
                                                                sampler::sequential_seeds(9, grid.size()));
        return noncross::QuantileDrawSet::in_sample(chains);
    }();
    return set;
}

void BM_AdjustSerial(benchmark::State& state) {
    const auto grid = QuantileGrid::standard();
    const auto& set = draw_set();
    for (auto _ : state) benchmark::DoNotOptimize(noncross::adjust_serial(set, grid, noncross::Adjustment::GP));
}

void BM_AdjustParallel(benchmark::State& state) {
    const auto grid = QuantileGrid::standard();
    const auto& set = draw_set();
    for (auto _ : state)
        benchmark::DoNotOptimize(noncross::adjust(set, grid, noncross::Adjustment::GP, {}, static_cast<int>(state.range(0))));
}

}  // namespace

BENCHMARK(BM_ChainsSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ChainsParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AdjustSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AdjustParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
