#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace questkv {

// Geometry and accounting parameters for one cache instance.
struct CacheConfig {
    uint32_t head_dim = 0;           // channels per key/value vector
    uint32_t page_size = 0;          // tokens per page
    uint32_t bytes_per_element = 2;  // element width assumed by traffic accounting

    // Throws std::invalid_argument if any field is zero.
    void validate() const;
};

// Channel-wise extremes over all keys stored in one page. Updated on every
// append; always equal to a full rescan of the page's keys.
struct PageMetadata {
    std::vector<float> min_key;
    std::vector<float> max_key;
};

struct Page {
    std::vector<float> keys;    // row-major, length * head_dim
    std::vector<float> values;  // same layout
    PageMetadata metadata;
    uint32_t length = 0;
};

// Append-only paged store of key/value vectors for a single attention head.
//
// Invariants: all pages except possibly the last are full; token t lives in
// page t / page_size at row t % page_size; page metadata holds the exact
// channel-wise min/max of the page's keys after every append.
//
// Thread model: single writer, any number of readers between appends; no
// internal locking.
class KvCache {
public:
    explicit KvCache(CacheConfig config);

    // Stores one key/value pair and returns its token index.
    // Throws std::invalid_argument on dimension mismatch.
    uint32_t append(std::span<const float> key, std::span<const float> value);

    // Throws std::out_of_range for an invalid page index.
    const PageMetadata& page_metadata(uint32_t page_index) const;
    const Page& page(uint32_t page_index) const;

    std::span<const float> key(uint32_t token) const;
    std::span<const float> value(uint32_t token) const;

    const CacheConfig& config() const noexcept { return config_; }
    uint32_t token_count() const noexcept { return token_count_; }
    uint32_t page_count() const noexcept { return static_cast<uint32_t>(pages_.size()); }
    const std::vector<Page>& pages() const noexcept { return pages_; }

private:
    CacheConfig config_;
    std::vector<Page> pages_;
    uint32_t token_count_ = 0;
};

}  // namespace questkv
