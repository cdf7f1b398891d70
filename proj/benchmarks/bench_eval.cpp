#include <benchmark/benchmark.h>

#include "flowgate/eval.hpp"
#include "flowgate/rng.hpp"

namespace {

void bm_confusion_metrics(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    flowgate::Rng rng(5);
    std::vector<std::size_t> truth(n), pred(n);
    for (std::size_t i = 0; i < n; ++i) {
        truth[i] = rng.below(15);
        pred[i] = rng.uniform() < 0.9 ? truth[i] : rng.below(15);
    }
    std::vector<std::string> names;
    for (int c = 0; c < 15; ++c) names.push_back("c" + std::to_string(c));
    for (auto _ : state) {
        auto cm = flowgate::confusion(truth, pred, names);
        benchmark::DoNotOptimize(flowgate::metrics(cm));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_confusion_metrics)->Arg(1000)->Arg(1000000);

} // namespace
