#include "questkv/attention.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace questkv {

namespace {

double dot(std::span<const float> a, std::span<const float> b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i)
        acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    return acc;
}

void check_token_set(const KvCache& cache, std::span<const uint32_t> tokens) {
    if (tokens.empty())
        throw std::invalid_argument("attention: empty token set");
    uint32_t previous = 0;
    for (size_t i = 0; i < tokens.size(); ++i) {
        if (tokens[i] >= cache.token_count())
            throw std::out_of_range("attention: token index out of range");
        if (i > 0 && tokens[i] <= previous)
            throw std::invalid_argument("attention: token set must be strictly ascending");
        previous = tokens[i];
    }
}

}  // namespace

LogitVector attention_logits(std::span<const float> query, const KvCache& cache,
                             std::span<const uint32_t> token_subset) {
    check_token_set(cache, token_subset);
    if (query.size() != cache.config().head_dim)
        throw std::invalid_argument("attention_logits: query dimension mismatch");

    const double scale = std::sqrt(static_cast<double>(cache.config().head_dim));
    LogitVector logits;
    logits.reserve(token_subset.size());
    for (uint32_t token : token_subset)
        logits.push_back(dot(query, cache.key(token)) / scale);
    return logits;
}

LogitVector attention_logits(std::span<const float> query, const KvCache& cache) {
    std::vector<uint32_t> everything(cache.token_count());
    std::iota(everything.begin(), everything.end(), 0u);
    return attention_logits(query, cache, everything);
}

std::vector<double> softmax_weights(const LogitVector& logits) {
    if (logits.empty())
        throw std::invalid_argument("softmax_weights: empty logits");

    const double peak = *std::max_element(logits.begin(), logits.end());
    std::vector<double> weights(logits.size());
    double total = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) {
        weights[i] = std::exp(logits[i] - peak);
        total += weights[i];
    }
    for (double& w : weights) w /= total;
    return weights;
}

AttentionOutput attend_tokens(std::span<const float> query, const KvCache& cache,
                              std::span<const uint32_t> tokens) {
    const LogitVector logits = attention_logits(query, cache, tokens);
    const std::vector<double> weights = softmax_weights(logits);

    AttentionOutput result;
    result.output.assign(cache.config().head_dim, 0.0);
    for (size_t i = 0; i < tokens.size(); ++i) {
        const std::span<const float> v = cache.value(tokens[i]);
        const double w = weights[i];
        for (size_t c = 0; c < v.size(); ++c)
            result.output[c] += w * static_cast<double>(v[c]);
        result.weights_sum_check += w;
    }
    return result;
}

AttentionOutput full_attention(std::span<const float> query, const KvCache& cache) {
    if (cache.token_count() == 0)
        throw std::invalid_argument("full_attention: empty cache");
    std::vector<uint32_t> everything(cache.token_count());
    std::iota(everything.begin(), everything.end(), 0u);
    return attend_tokens(query, cache, everything);
}

AttentionOutput sparse_attention(std::span<const float> query, const KvCache& cache,
                                 std::span<const uint32_t> selected_pages) {
    if (selected_pages.empty())
        throw std::invalid_argument("sparse_attention: empty page selection");

    std::vector<uint32_t> pages(selected_pages.begin(), selected_pages.end());
    std::sort(pages.begin(), pages.end());
    for (size_t i = 0; i < pages.size(); ++i) {
        if (pages[i] >= cache.page_count())
            throw std::out_of_range("sparse_attention: page index out of range");
        if (i > 0 && pages[i] == pages[i - 1])
            throw std::invalid_argument("sparse_attention: duplicate page index");
    }

    const uint32_t page_size = cache.config().page_size;
    std::vector<uint32_t> tokens;
    for (uint32_t p : pages) {
        const uint32_t first = p * page_size;
        for (uint32_t row = 0; row < cache.page(p).length; ++row)
            tokens.push_back(first + row);
    }
    return attend_tokens(query, cache, tokens);
}

}  // namespace questkv
