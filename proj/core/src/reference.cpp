#include "questkv/reference.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace questkv::reference {

std::vector<double> naive_attention(std::span<const float> query, const KvCache& cache,
                                    std::span<const uint32_t> tokens) {
    if (tokens.empty())
        throw std::invalid_argument("naive_attention: empty token set");
    const uint32_t dim = cache.config().head_dim;
    if (query.size() != dim)
        throw std::invalid_argument("naive_attention: query dimension mismatch");

    const long double scale = std::sqrt(static_cast<long double>(dim));

    std::vector<long double> exponentials(tokens.size());
    long double normalizer = 0.0L;
    for (size_t i = 0; i < tokens.size(); ++i) {
        const std::span<const float> k = cache.key(tokens[i]);
        long double logit = 0.0L;
        for (uint32_t c = 0; c < dim; ++c)
            logit += static_cast<long double>(query[c]) * static_cast<long double>(k[c]);
        exponentials[i] = std::exp(logit / scale);
        normalizer += exponentials[i];
    }

    std::vector<long double> accumulator(dim, 0.0L);
    for (size_t i = 0; i < tokens.size(); ++i) {
        const long double weight = exponentials[i] / normalizer;
        const std::span<const float> v = cache.value(tokens[i]);
        for (uint32_t c = 0; c < dim; ++c)
            accumulator[c] += weight * static_cast<long double>(v[c]);
    }

    std::vector<double> out(dim);
    for (uint32_t c = 0; c < dim; ++c) out[c] = static_cast<double>(accumulator[c]);
    return out;
}

std::vector<double> naive_attention(std::span<const float> query, const KvCache& cache) {
    if (cache.token_count() == 0)
        throw std::invalid_argument("naive_attention: empty cache");
    std::vector<uint32_t> everything(cache.token_count());
    std::iota(everything.begin(), everything.end(), 0u);
    return naive_attention(query, cache, everything);
}

}  // namespace questkv::reference
