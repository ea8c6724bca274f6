#include "questkv/criticality.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace questkv {

double estimate_page_score(std::span<const float> query, const PageMetadata& metadata) {
    if (query.size() != metadata.min_key.size() || metadata.min_key.empty())
        throw std::invalid_argument("estimate_page_score: dimension mismatch");

    // Per channel, q*max and q*min bracket q*k for every key in the page
    // regardless of the sign of q. Fixed ascending summation keeps results
    // bit-reproducible.
    double score = 0.0;
    for (size_t i = 0; i < query.size(); ++i) {
        const double q = query[i];
        score += std::max(q * static_cast<double>(metadata.max_key[i]),
                          q * static_cast<double>(metadata.min_key[i]));
    }
    return score;
}

std::vector<PageScore> estimate_all(std::span<const float> query, const KvCache& cache) {
    if (cache.page_count() == 0)
        throw std::invalid_argument("estimate_all: empty cache");

    std::vector<PageScore> scores;
    scores.reserve(cache.page_count());
    for (uint32_t p = 0; p < cache.page_count(); ++p)
        scores.push_back({p, estimate_page_score(query, cache.page_metadata(p))});
    return scores;
}

std::vector<uint32_t> select_top_k(const std::vector<PageScore>& scores,
                                   const SelectionConfig& config,
                                   const KvCache& cache) {
    const uint32_t page_count = cache.page_count();

    auto all_pages = [&] {
        std::vector<uint32_t> everything(page_count);
        std::iota(everything.begin(), everything.end(), 0u);
        return everything;
    };

    if (!config.per_layer_enabled) return all_pages();

    const uint32_t page_size = cache.config().page_size;
    if (config.token_budget < page_size)
        throw std::invalid_argument("select_top_k: token_budget below page_size");
    if (scores.empty())
        throw std::invalid_argument("select_top_k: no scores");
    for (const PageScore& candidate : scores)
        if (candidate.page_index >= page_count)
            throw std::out_of_range("select_top_k: score for nonexistent page");

    const uint32_t k = config.token_budget / page_size;
    if (k >= scores.size()) return all_pages();

    // Highest score first, older page wins ties.
    std::vector<uint32_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
        if (scores[a].score != scores[b].score) return scores[a].score > scores[b].score;
        return scores[a].page_index < scores[b].page_index;
    });

    std::vector<uint32_t> selected;
    selected.reserve(k);
    for (uint32_t i = 0; i < k; ++i) selected.push_back(scores[order[i]].page_index);

    if (config.force_include_recent) {
        const uint32_t last_page = page_count - 1;
        if (std::find(selected.begin(), selected.end(), last_page) == selected.end())
            selected.back() = last_page;  // drop the weakest pick, keep the budget
    }

    std::sort(selected.begin(), selected.end());
    return selected;
}

}  // namespace questkv
