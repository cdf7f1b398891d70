#include <sstream>

#include <benchmark/benchmark.h>

#include "flowgate/dataset.hpp"
#include "flowgate/rng.hpp"

namespace {

std::string make_csv(std::size_t rows, std::size_t width) {
    flowgate::Rng rng(9);
    std::ostringstream out;
    for (std::size_t j = 0; j < width; ++j) out << " f" << j << ',';
    out << " Label\n";
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < width; ++j) out << rng.uniform(0, 1e6) << ',';
        out << (i % 5 == 0 ? "DDoS" : "BENIGN") << '\n';
    }
    return out.str();
}

void bm_parse_csv(benchmark::State& state) {
    const auto text = make_csv(static_cast<std::size_t>(state.range(0)), 78);
    for (auto _ : state) {
        std::istringstream in(text);
        benchmark::DoNotOptimize(flowgate::parse_csv(in));
    }
    state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(bm_parse_csv)->Arg(1000)->Arg(20000)->Unit(benchmark::kMillisecond);

void bm_scaler(benchmark::State& state) {
    std::istringstream in(make_csv(20000, 78));
    const auto d = flowgate::parse_csv(in);
    for (auto _ : state) {
        const auto p = flowgate::fit_scaler(d);
        benchmark::DoNotOptimize(flowgate::apply_scaler(d, p));
    }
}
BENCHMARK(bm_scaler)->Unit(benchmark::kMillisecond);

} // namespace
