#include "questkv/kv_store.hpp"

#include <stdexcept>
#include <string>

namespace questkv {

void CacheConfig::validate() const {
    if (head_dim == 0) throw std::invalid_argument("CacheConfig: head_dim must be >= 1");
    if (page_size == 0) throw std::invalid_argument("CacheConfig: page_size must be >= 1");
    if (bytes_per_element == 0)
        throw std::invalid_argument("CacheConfig: bytes_per_element must be >= 1");
}

KvCache::KvCache(CacheConfig config) : config_(config) {
    config_.validate();
}

uint32_t KvCache::append(std::span<const float> key, std::span<const float> value) {
    const uint32_t dim = config_.head_dim;
    if (key.size() != dim || value.size() != dim)
        throw std::invalid_argument("KvCache::append: vector dimension mismatch");

    if (pages_.empty() || pages_.back().length == config_.page_size) {
        Page page;
        page.keys.reserve(static_cast<size_t>(config_.page_size) * dim);
        page.values.reserve(static_cast<size_t>(config_.page_size) * dim);
        pages_.push_back(std::move(page));
    }

    Page& page = pages_.back();
    page.keys.insert(page.keys.end(), key.begin(), key.end());
    page.values.insert(page.values.end(), value.begin(), value.end());

    if (page.length == 0) {
        // First key of the page seeds the metadata exactly.
        page.metadata.min_key.assign(key.begin(), key.end());
        page.metadata.max_key.assign(key.begin(), key.end());
    } else {
        for (uint32_t i = 0; i < dim; ++i) {
            if (key[i] < page.metadata.min_key[i]) page.metadata.min_key[i] = key[i];
            if (key[i] > page.metadata.max_key[i]) page.metadata.max_key[i] = key[i];
        }
    }
    ++page.length;
    return token_count_++;
}

const PageMetadata& KvCache::page_metadata(uint32_t page_index) const {
    if (page_index >= pages_.size())
        throw std::out_of_range("KvCache::page_metadata: page index " +
                                std::to_string(page_index) + " out of range");
    return pages_[page_index].metadata;
}

const Page& KvCache::page(uint32_t page_index) const {
    if (page_index >= pages_.size())
        throw std::out_of_range("KvCache::page: page index " +
                                std::to_string(page_index) + " out of range");
    return pages_[page_index];
}

std::span<const float> KvCache::key(uint32_t token) const {
    if (token >= token_count_)
        throw std::out_of_range("KvCache::key: token " + std::to_string(token) +
                                " out of range");
    const Page& page = pages_[token / config_.page_size];
    const size_t row = token % config_.page_size;
    return {page.keys.data() + row * config_.head_dim, config_.head_dim};
}

std::span<const float> KvCache::value(uint32_t token) const {
    if (token >= token_count_)
        throw std::out_of_range("KvCache::value: token " + std::to_string(token) +
                                " out of range");
    const Page& page = pages_[token / config_.page_size];
    const size_t row = token % config_.page_size;
    return {page.values.data() + row * config_.head_dim, config_.head_dim};
}

}  // namespace questkv
