#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "questkv/kv_store.hpp"

namespace questkv {

// Criticality estimate for one page: an upper bound on q.k over every key
// stored in the page, derived from the page's min/max metadata.
struct PageScore {
    uint32_t page_index = 0;
    double score = 0.0;
};

struct SelectionConfig {
    uint32_t token_budget = 0;        // tokens across selected pages
    bool force_include_recent = true; // always keep the newest page
    bool per_layer_enabled = true;    // false: selection off, every page kept
};

// score = sum_i max(q[i]*max_key[i], q[i]*min_key[i]), ascending channel
// order. Unnormalized: no softmax, no 1/sqrt(d); ranking only.
double estimate_page_score(std::span<const float> query, const PageMetadata& metadata);

// One score per page, in page order. Throws std::invalid_argument on an
// empty cache.
std::vector<PageScore> estimate_all(std::span<const float> query, const KvCache& cache);

// Picks K = token_budget / page_size pages with the largest scores; ties go
// to the lower (older) page index. The result is in ascending page order.
// With force_include_recent the newest page is always present and counts
// against K. When selection is disabled or K covers the cache, every page
// is returned.
std::vector<uint32_t> select_top_k(const std::vector<PageScore>& scores,
                                   const SelectionConfig& config,
                                   const KvCache& cache);

}  // namespace questkv
