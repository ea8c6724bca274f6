#pragma once

#include <iostream>
#include <string>

#include "questkv/kv_store.hpp"
#include "questkv/workloads.hpp"

namespace questkv::cli {

// Trace from --trace when given, otherwise a seeded gaussian one.
inline DecodeTrace load_or_generate(const std::string& trace_path, uint64_t seed,
                                    uint32_t length, uint32_t head_dim) {
    if (!trace_path.empty()) return read_trace(trace_path);
    return gen_gaussian_trace(seed, length, head_dim);
}

inline KvCache build_cache(const DecodeTrace& trace, uint32_t page_size,
                           uint32_t bytes_per_element = 2) {
    KvCache cache({.head_dim = trace.head_dim,
                   .page_size = page_size,
                   .bytes_per_element = bytes_per_element});
    for (const TraceStep& step : trace.steps) cache.append(step.key, step.value);
    return cache;
}

}  // namespace questkv::cli
