#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "questkv/kv_store.hpp"

namespace questkv::reference {

// Textbook attention kept as an independent cross-check for the production
// path: plain exponentiation with no max subtraction, long double
// accumulation throughout. Shares no code with attention.cpp; only the
// cache accessors are common. Used by `questkv verify` and the test suites.
std::vector<double> naive_attention(std::span<const float> query, const KvCache& cache);

std::vector<double> naive_attention(std::span<const float> query, const KvCache& cache,
                                    std::span<const uint32_t> tokens);

}  // namespace questkv::reference
