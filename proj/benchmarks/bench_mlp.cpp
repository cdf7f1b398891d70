#include <array>

#include <benchmark/benchmark.h>

#include "flowgate/mlp.hpp"
#include "flowgate/rng.hpp"

namespace {

using flowgate::Matrix;

Matrix random_batch(std::size_t n, std::size_t width) {
    flowgate::Rng rng(11);
    Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(width));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.normal();
    }
    return m;
}

void bm_forward(benchmark::State& state) {
    const std::array<std::size_t, 2> hidden{64, 32};
    const auto model = flowgate::init_model(78, hidden, 15, flowgate::Head::softmax, 0.2, 1);
    const auto batch = random_batch(static_cast<std::size_t>(state.range(0)), 78);
    for (auto _ : state) benchmark::DoNotOptimize(model.forward(batch));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_forward)->Arg(1)->Arg(512)->Arg(8192);

void bm_train_epoch(benchmark::State& state) {
    const std::array<std::size_t, 2> hidden{64, 32};
    const auto model = flowgate::init_model(78, hidden, 15, flowgate::Head::softmax, 0.2, 1);
    const auto x = random_batch(10000, 78);
    std::vector<std::size_t> labels(10000);
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = i % 15;
    const auto y = flowgate::targets_for(model, labels);
    flowgate::TrainConfig cfg;
    cfg.epochs = 1;
    for (auto _ : state) benchmark::DoNotOptimize(flowgate::train(model, x, y, cfg));
    state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(bm_train_epoch)->Unit(benchmark::kMillisecond);

} // namespace
