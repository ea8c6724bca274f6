// Microbenchmarks for the per-decode-step pipeline stages. The questkv CLI's
// `bench` subcommand reports the same phases as CSV with bytes-touched
// columns; these benchmarks are for interactive profiling.

#include <benchmark/benchmark.h>

#include <numeric>
#include <vector>

#include "questkv/attention.hpp"
#include "questkv/criticality.hpp"
#include "questkv/kv_store.hpp"
#include "questkv/workloads.hpp"

namespace {

using namespace questkv;

constexpr uint32_t kDim = 64;
constexpr uint32_t kPage = 16;

struct Fixture {
    KvCache cache;
    std::vector<float> probe;

    explicit Fixture(uint32_t length)
        : cache({.head_dim = kDim, .page_size = kPage}) {
        const DecodeTrace trace = gen_gaussian_trace(42, length, kDim);
        for (const TraceStep& step : trace.steps) cache.append(step.key, step.value);
        probe = trace.steps.back().query;
    }
};

void BM_AppendToken(benchmark::State& state) {
    const DecodeTrace trace = gen_gaussian_trace(7, 4096, kDim);
    for (auto _ : state) {
        KvCache cache({.head_dim = kDim, .page_size = kPage});
        for (const TraceStep& step : trace.steps)
            benchmark::DoNotOptimize(cache.append(step.key, step.value));
    }
    state.SetItemsProcessed(state.iterations() * 4096);
}
BENCHMARK(BM_AppendToken)->Unit(benchmark::kMillisecond);

void BM_FullAttention(benchmark::State& state) {
    const Fixture fx(static_cast<uint32_t>(state.range(0)));
    for (auto _ : state) {
        const auto out = full_attention(fx.probe, fx.cache);
        benchmark::DoNotOptimize(out.output.data());
    }
    state.SetBytesProcessed(state.iterations() * int64_t(fx.cache.token_count()) * 2 *
                            kDim * sizeof(float));
}
BENCHMARK(BM_FullAttention)->Arg(4096)->Arg(16384)->Arg(65536)->Unit(benchmark::kMicrosecond);

void BM_EstimateAll(benchmark::State& state) {
    const Fixture fx(static_cast<uint32_t>(state.range(0)));
    for (auto _ : state) {
        const auto scores = estimate_all(fx.probe, fx.cache);
        benchmark::DoNotOptimize(scores.data());
    }
    state.SetBytesProcessed(state.iterations() * int64_t(fx.cache.page_count()) * 2 *
                            kDim * sizeof(float));
}
BENCHMARK(BM_EstimateAll)->Arg(4096)->Arg(16384)->Arg(65536)->Unit(benchmark::kMicrosecond);

void BM_SelectTopK(benchmark::State& state) {
    const Fixture fx(65536);
    const auto scores = estimate_all(fx.probe, fx.cache);
    const SelectionConfig selection{.token_budget = static_cast<uint32_t>(state.range(0))};
    for (auto _ : state) {
        const auto pages = select_top_k(scores, selection, fx.cache);
        benchmark::DoNotOptimize(pages.data());
    }
}
BENCHMARK(BM_SelectTopK)->Arg(1024)->Arg(4096)->Unit(benchmark::kMicrosecond);

void BM_SparseAttention(benchmark::State& state) {
    const Fixture fx(65536);
    const auto scores = estimate_all(fx.probe, fx.cache);
    const auto pages = select_top_k(
        scores, {.token_budget = static_cast<uint32_t>(state.range(0))}, fx.cache);
    for (auto _ : state) {
        const auto out = sparse_attention(fx.probe, fx.cache, pages);
        benchmark::DoNotOptimize(out.output.data());
    }
    state.SetBytesProcessed(state.iterations() * state.range(0) * 2 * kDim *
                            sizeof(float));
}
BENCHMARK(BM_SparseAttention)->Arg(1024)->Arg(2048)->Arg(4096)->Unit(benchmark::kMicrosecond);

// The whole query-aware step: estimate, select, attend.
void BM_QuestDecodeStep(benchmark::State& state) {
    const Fixture fx(65536);
    const SelectionConfig selection{.token_budget = static_cast<uint32_t>(state.range(0))};
    for (auto _ : state) {
        const auto scores = estimate_all(fx.probe, fx.cache);
        const auto pages = select_top_k(scores, selection, fx.cache);
        const auto out = sparse_attention(fx.probe, fx.cache, pages);
        benchmark::DoNotOptimize(out.output.data());
    }
}
BENCHMARK(BM_QuestDecodeStep)->Arg(2048)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
