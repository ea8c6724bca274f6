#include "questkv/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "questkv/attention.hpp"

namespace questkv {

double recall_at_n(std::span<const uint32_t> selected_tokens,
                   std::span<const float> query, const KvCache& cache, uint32_t n) {
    if (n == 0) throw std::invalid_argument("recall_at_n: n must be >= 1");
    if (n > cache.token_count())
        throw std::invalid_argument("recall_at_n: n exceeds token count");

    const LogitVector logits = attention_logits(query, cache);

    std::vector<uint32_t> order(cache.token_count());
    std::iota(order.begin(), order.end(), 0u);
    std::partial_sort(order.begin(), order.begin() + n, order.end(),
                      [&](uint32_t a, uint32_t b) {
                          if (logits[a] != logits[b]) return logits[a] > logits[b];
                          return a < b;  // ties go to the older token
                      });

    std::vector<char> selected(cache.token_count(), 0);
    for (uint32_t token : selected_tokens) {
        if (token >= cache.token_count())
            throw std::out_of_range("recall_at_n: selected token out of range");
        selected[token] = 1;
    }

    uint32_t hits = 0;
    for (uint32_t i = 0; i < n; ++i) hits += selected[order[i]];
    return static_cast<double>(hits) / static_cast<double>(n);
}

RecallReport make_recall_report(std::vector<double> per_step_recall,
                                uint32_t n, uint32_t budget) {
    RecallReport report;
    report.n = n;
    report.budget = budget;
    report.per_step_recall = std::move(per_step_recall);
    if (!report.per_step_recall.empty()) {
        double total = 0.0;
        for (double r : report.per_step_recall) total += r;
        report.mean_recall = total / static_cast<double>(report.per_step_recall.size());
    }
    return report;
}

double traffic_fraction(uint32_t page_size, uint64_t token_count, uint64_t token_budget) {
    if (page_size == 0) throw std::invalid_argument("traffic_fraction: zero page_size");
    if (token_count == 0 || token_budget == 0)
        throw std::invalid_argument("traffic_fraction: counts must be positive");
    if (token_budget > token_count)
        throw std::invalid_argument("traffic_fraction: budget exceeds token count");

    // Estimation term: one key-sized min and max vector per page, the cost
    // of one token pair per page. Attention term: the K selected pages.
    const uint64_t k = token_budget / page_size;
    return 1.0 / static_cast<double>(page_size) +
           static_cast<double>(k * page_size) / static_cast<double>(token_count);
}

namespace {

uint64_t vector_bytes(const KvCache& cache) {
    return static_cast<uint64_t>(cache.config().head_dim) * cache.config().bytes_per_element;
}

}  // namespace

StepInstrumentation run_instrumented_full_step(std::span<const float> query,
                                               const KvCache& cache) {
    (void)full_attention(query, cache);

    StepInstrumentation run;
    run.enabled = true;
    run.page_size = cache.config().page_size;
    run.token_count = cache.token_count();
    run.token_budget = cache.token_count();
    run.kv_bytes = 2 * vector_bytes(cache) * cache.token_count();
    run.bytes_full = run.kv_bytes;
    return run;
}

StepInstrumentation run_instrumented_quest_step(std::span<const float> query,
                                                const KvCache& cache,
                                                const SelectionConfig& selection) {
    const auto scores = estimate_all(query, cache);
    const auto pages = select_top_k(scores, selection, cache);
    (void)sparse_attention(query, cache, pages);

    uint64_t attended = 0;
    for (uint32_t p : pages) attended += cache.page(p).length;

    StepInstrumentation run;
    run.enabled = true;
    run.page_size = cache.config().page_size;
    run.token_count = cache.token_count();
    run.token_budget = selection.token_budget;
    run.metadata_bytes = 2 * vector_bytes(cache) * cache.page_count();
    run.kv_bytes = 2 * vector_bytes(cache) * attended;
    run.bytes_full = 2 * vector_bytes(cache) * cache.token_count();
    return run;
}

TrafficReport counted_bytes(const StepInstrumentation& run) {
    if (!run.enabled)
        throw std::invalid_argument("counted_bytes: instrumentation disabled");

    TrafficReport report;
    report.page_size = run.page_size;
    report.token_budget = run.token_budget;
    report.token_count = run.token_count;
    report.bytes_loaded_counted = run.metadata_bytes + run.kv_bytes;
    report.bytes_full = run.bytes_full;
    const uint64_t effective_budget = std::min(run.token_budget, run.token_count);
    report.fraction_model =
        run.metadata_bytes == 0
            ? 1.0  // dense step, no estimation pass
            : traffic_fraction(run.page_size, run.token_count, effective_budget);
    return report;
}

uint64_t oracle_sparsity(std::span<const float> query, const KvCache& cache,
                         double mass_threshold) {
    if (!(mass_threshold > 0.0 && mass_threshold < 1.0))
        throw std::invalid_argument("oracle_sparsity: threshold must be in (0, 1)");

    const auto weights = softmax_weights(attention_logits(query, cache));

    std::vector<uint32_t> order(weights.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
        if (weights[a] != weights[b]) return weights[a] > weights[b];
        return a < b;
    });

    double total = 0.0;
    for (double w : weights) total += w;
    const double target = mass_threshold * total - 1e-12;  // absorb rounding

    double mass = 0.0;
    for (size_t i = 0; i < order.size(); ++i) {
        mass += weights[order[i]];
        if (mass >= target) return i + 1;
    }
    return order.size();
}

double output_error(std::span<const double> sparse_output,
                    std::span<const double> full_output) {
    if (sparse_output.size() != full_output.size())
        throw std::invalid_argument("output_error: dimension mismatch");

    double difference_sq = 0.0;
    double full_sq = 0.0;
    for (size_t i = 0; i < full_output.size(); ++i) {
        const double d = sparse_output[i] - full_output[i];
        difference_sq += d * d;
        full_sq += full_output[i] * full_output[i];
    }
    return std::sqrt(difference_sq) / (std::sqrt(full_sq) + 1e-12);
}

}  // namespace questkv
