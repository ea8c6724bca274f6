#pragma once

#include <cstdint>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace questkv {

// Worker count: hardware concurrency capped by the QUESTKV_THREADS
// environment variable, at least 1.
inline unsigned effective_threads() {
    unsigned n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("QUESTKV_THREADS")) {
        char* end = nullptr;
        const unsigned long cap = std::strtoul(env, &end, 10);
        if (end != env && cap >= 1) n = static_cast<unsigned>(cap < n ? cap : n);
    }
    return n;
}

// Static contiguous partition of [0, count) across worker threads. Work for
// a given index never depends on the thread running it, so results are
// independent of the thread count. The first worker exception, in index
// order of the chunks, is rethrown.
template <typename Fn>
void parallel_for(uint64_t count, Fn&& fn) {
    const unsigned workers0 = effective_threads();
    const uint64_t workers = workers0 < count ? workers0 : (count == 0 ? 1 : count);
    if (count == 0) return;
    if (workers <= 1) {
        for (uint64_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(workers);
    const uint64_t chunk = (count + workers - 1) / workers;
    for (uint64_t w = 0; w < workers; ++w) {
        const uint64_t lo = w * chunk;
        const uint64_t hi = lo + chunk < count ? lo + chunk : count;
        if (lo >= hi) break;
        threads.emplace_back([&, w, lo, hi] {
            try {
                for (uint64_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (auto& err : errors)
        if (err) std::rethrow_exception(err);
}

}  // namespace questkv
