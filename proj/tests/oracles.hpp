#pragma once

// Test-side oracles, written independently of the library internals they
// check: full rescans, brute-force sorts, closed-form softmax. Anything
// asserted against a frozen value in the suites was computed with these.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "questkv/kv_store.hpp"

namespace oracle {

// Channel-wise min/max by full scan of row-major keys.
inline std::pair<std::vector<float>, std::vector<float>> scan_min_max(
    const std::vector<float>& keys, uint32_t dim) {
    const size_t rows = keys.size() / dim;
    std::vector<float> lo(keys.begin(), keys.begin() + dim);
    std::vector<float> hi(keys.begin(), keys.begin() + dim);
    for (size_t r = 1; r < rows; ++r) {
        for (uint32_t c = 0; c < dim; ++c) {
            lo[c] = std::min(lo[c], keys[r * dim + c]);
            hi[c] = std::max(hi[c], keys[r * dim + c]);
        }
    }
    return {lo, hi};
}

inline double raw_dot(std::span<const float> a, std::span<const float> b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i)
        acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    return acc;
}

// Exact per-token logits of a cache against a query, unscaled.
inline std::vector<double> raw_logits(std::span<const float> query,
                                      const questkv::KvCache& cache) {
    std::vector<double> out(cache.token_count());
    for (uint32_t t = 0; t < cache.token_count(); ++t)
        out[t] = raw_dot(query, cache.key(t));
    return out;
}

// Top-k page selection by full sort: score descending, lower page index on
// ties; optional forced inclusion of the final page replacing the weakest
// pick. Output ascending.
inline std::vector<uint32_t> sorted_top_k_pages(const std::vector<double>& scores,
                                                uint32_t k, bool force_last) {
    const uint32_t pages = static_cast<uint32_t>(scores.size());
    std::vector<uint32_t> order(pages);
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    if (k >= pages) {
        std::vector<uint32_t> everything(pages);
        std::iota(everything.begin(), everything.end(), 0u);
        return everything;
    }
    std::vector<uint32_t> picked(order.begin(), order.begin() + k);
    if (force_last &&
        std::find(picked.begin(), picked.end(), pages - 1) == picked.end())
        picked.back() = pages - 1;
    std::sort(picked.begin(), picked.end());
    return picked;
}

// Stable softmax recomputed from scratch.
inline std::vector<double> softmax(const std::vector<double>& logits) {
    const double peak = *std::max_element(logits.begin(), logits.end());
    std::vector<double> w(logits.size());
    double total = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) {
        w[i] = std::exp(logits[i] - peak);
        total += w[i];
    }
    for (double& x : w) x /= total;
    return w;
}

}  // namespace oracle
