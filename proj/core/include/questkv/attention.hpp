#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "questkv/kv_store.hpp"

namespace questkv {

// Pre-softmax attention weights, one per attended token in ascending token
// order.
using LogitVector = std::vector<double>;

struct AttentionOutput {
    std::vector<double> output;      // sum_i a_i * value_i
    double weights_sum_check = 0.0;  // post-softmax mass, ~1, diagnostic
};

// logit_t = q.k_t / sqrt(head_dim), in ascending token order.
LogitVector attention_logits(std::span<const float> query, const KvCache& cache);

// Same, restricted to token_subset (strictly ascending, valid indices).
LogitVector attention_logits(std::span<const float> query, const KvCache& cache,
                             std::span<const uint32_t> token_subset);

// Max-subtracted exponentiation, normalized to sum 1. Throws on empty input.
std::vector<double> softmax_weights(const LogitVector& logits);

// Softmax over every cached token; output accumulated in ascending token
// order. Throws std::invalid_argument on an empty cache.
AttentionOutput full_attention(std::span<const float> query, const KvCache& cache);

// Identical computation restricted to the tokens of selected_pages, softmax
// renormalized over that subset. Selecting every page reproduces
// full_attention bit for bit (same iteration and accumulation order).
// Pages must be distinct and valid; any order is accepted.
AttentionOutput sparse_attention(std::span<const float> query, const KvCache& cache,
                                 std::span<const uint32_t> selected_pages);

// Shared core of the two entry points above: attention over an explicit,
// strictly ascending token set. Exposed for policies that select at token
// granularity. Evaluation is sequential and deterministic; parallelize
// across queries, not within a call.
AttentionOutput attend_tokens(std::span<const float> query, const KvCache& cache,
                              std::span<const uint32_t> tokens);

}  // namespace questkv
