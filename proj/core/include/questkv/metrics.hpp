#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "questkv/criticality.hpp"
#include "questkv/kv_store.hpp"

namespace questkv {

// Fraction of the full-attention top-n tokens present in `selected_tokens`,
// with top-n taken by logit and ties resolved toward the lower token index.
// Requires n >= 1 and n <= token_count.
double recall_at_n(std::span<const uint32_t> selected_tokens,
                   std::span<const float> query, const KvCache& cache, uint32_t n);

struct RecallReport {
    std::vector<double> per_step_recall;  // each in [0,1]
    double mean_recall = 0.0;
    uint32_t n = 10;
    uint32_t budget = 0;
};

RecallReport make_recall_report(std::vector<double> per_step_recall,
                                uint32_t n, uint32_t budget);

// Modeled share of full KV bytes loaded per decode step:
//   1/page_size  (one metadata token-pair per page)
// + floor(budget/page_size)*page_size / token_count  (attended pages).
// Exceeds 1 when the budget covers the cache; the estimation term is pure
// overhead in that regime. Requires 1 <= token_budget <= token_count.
double traffic_fraction(uint32_t page_size, uint64_t token_count, uint64_t token_budget);

// Byte tally of one executed decode step; produced by the
// run_instrumented_* helpers below.
struct StepInstrumentation {
    bool enabled = false;
    uint64_t metadata_bytes = 0;  // min/max key vectors touched
    uint64_t kv_bytes = 0;        // key+value bytes of attended tokens
    uint32_t page_size = 0;
    uint64_t token_budget = 0;
    uint64_t token_count = 0;
    uint64_t bytes_full = 0;      // dense-step bytes for the same cache
};

// Executes full attention / the estimate-select-attend pipeline and tallies
// the bytes each stage reads.
StepInstrumentation run_instrumented_full_step(std::span<const float> query,
                                               const KvCache& cache);
StepInstrumentation run_instrumented_quest_step(std::span<const float> query,
                                                const KvCache& cache,
                                                const SelectionConfig& selection);

struct TrafficReport {
    double fraction_model = 0.0;
    uint64_t bytes_loaded_counted = 0;
    uint64_t bytes_full = 0;
    uint32_t page_size = 0;
    uint64_t token_budget = 0;
    uint64_t token_count = 0;
};

// Throws std::invalid_argument if the instrumentation was never enabled.
TrafficReport counted_bytes(const StepInstrumentation& run);

// Minimal number of tokens, greedy by descending softmax weight, whose
// weights reach mass_threshold of the total attention mass. The comparison
// carries a 1e-12 absolute slack to absorb accumulation rounding.
// Requires 0 < mass_threshold < 1.
uint64_t oracle_sparsity(std::span<const float> query, const KvCache& cache,
                         double mass_threshold);

// ||sparse - full||_2 / (||full||_2 + 1e-12).
double output_error(std::span<const double> sparse_output,
                    std::span<const double> full_output);

}  // namespace questkv
