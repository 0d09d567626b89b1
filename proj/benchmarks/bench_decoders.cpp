#include <benchmark/benchmark.h>

#include "heatcoord/bench.hpp"
#include "heatcoord/decoder.hpp"
#include "heatcoord/encoder.hpp"
#include "heatcoord/rng.hpp"

using namespace heatcoord;

namespace {

Heatmap noisy_channel(std::size_t side) {
    const auto clean = encode({side * 0.43, side * 0.57}, {}, {side, side});
    Rng rng(1);
    std::vector<double> d(clean.data().begin(), clean.data().end());
    for (auto& x : d) x = std::max(0.0, x + rng.normal(0.0, 0.02));
    return Heatmap(1, {side, side}, std::move(d));
}

void BM_Encode(benchmark::State& state) {
    const auto side = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(encode({side * 0.43, side * 0.57}, {}, {side, side}));
    state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}
BENCHMARK(BM_Encode)->Arg(64)->Arg(128);

void BM_Smooth(benchmark::State& state) {
    const auto h = noisy_channel(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(gaussian_smooth(h, 0, SmoothSpec{}));
    state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}
BENCHMARK(BM_Smooth)->Arg(64)->Arg(128);

template <DecodeVariant V>
void BM_Decode(benchmark::State& state) {
    const auto h = noisy_channel(static_cast<std::size_t>(state.range(0)));
    const DecodeMethod m = V == DecodeVariant::Dark ? DecodeMethod::dark() : DecodeMethod{V, std::nullopt};
    for (auto _ : state) benchmark::DoNotOptimize(decode(h, 0, m));
}
BENCHMARK_TEMPLATE(BM_Decode, DecodeVariant::ArgMax)->Arg(64);
BENCHMARK_TEMPLATE(BM_Decode, DecodeVariant::Standard)->Arg(64);
BENCHMARK_TEMPLATE(BM_Decode, DecodeVariant::Dark)->Arg(64);
BENCHMARK_TEMPLATE(BM_Decode, DecodeVariant::CoM)->Arg(64);

void BM_DarkNoSmooth(benchmark::State& state) {
    const auto h = noisy_channel(64);
    for (auto _ : state) benchmark::DoNotOptimize(dark_decode(h, 0, std::nullopt));
}
BENCHMARK(BM_DarkNoSmooth);

void BM_Claim1(benchmark::State& state) {
    BenchConfig c;
    c.n_samples = static_cast<std::size_t>(state.range(0));
    c.noise_grid = {NoiseSpec{0.02, 0.0, 0.0}};
    for (auto _ : state) benchmark::DoNotOptimize(run_claim1(c));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Claim1)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
