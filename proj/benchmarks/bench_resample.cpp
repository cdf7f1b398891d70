#include <benchmark/benchmark.h>

#include "flowgate/resample.hpp"
#include "flowgate/rng.hpp"

namespace {

flowgate::Matrix cloud(std::size_t n, std::size_t width, std::uint64_t seed) {
    flowgate::Rng rng(seed);
    flowgate::Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(width));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.normal();
    }
    return m;
}

void bm_knn(benchmark::State& state) {
    const auto pts = cloud(static_cast<std::size_t>(state.range(0)), 78, 1);
    for (auto _ : state) benchmark::DoNotOptimize(flowgate::knn_indices(pts, 5));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(bm_knn)->RangeMultiplier(2)->Range(256, 2048)->Complexity(benchmark::oNSquared);

void bm_smote(benchmark::State& state) {
    const auto pts = cloud(500, 78, 2);
    const auto target = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(flowgate::smote_oversample(pts, target, 5, 3));
}
BENCHMARK(bm_smote)->Arg(1000)->Arg(10000)->Arg(50000);

void bm_undersample(benchmark::State& state) {
    const auto pts = cloud(100000, 20, 4);
    for (auto _ : state) benchmark::DoNotOptimize(flowgate::random_undersample(pts, 10000, 5));
}
BENCHMARK(bm_undersample);

} // namespace
