#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include "commands.hpp"
#include "questkv/attention.hpp"
#include "questkv/criticality.hpp"
#include "questkv/kv_store.hpp"
#include "questkv/metrics.hpp"
#include "questkv/parallel.hpp"
#include "questkv/reference.hpp"
#include "questkv/rng.hpp"

namespace questkv::cli {

namespace {

struct SuiteResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

constexpr uint32_t kDims[] = {16, 64, 128};
constexpr uint32_t kPageSizes[] = {8, 16, 32};

KvCache random_cache(GaussianStream& gauss, uint32_t dim, uint32_t page_size,
                     uint32_t length, bool random_values) {
    KvCache cache({.head_dim = dim, .page_size = page_size});
    std::vector<float> key(dim), value(dim, 0.0f);
    for (uint32_t t = 0; t < length; ++t) {
        for (auto& x : key) x = static_cast<float>(gauss.next());
        if (random_values)
            for (auto& x : value) x = static_cast<float>(gauss.next());
        cache.append(key, value);
    }
    return cache;
}

std::vector<float> random_query(GaussianStream& gauss, uint32_t dim) {
    std::vector<float> q(dim);
    for (auto& x : q) x = static_cast<float>(gauss.next());
    return q;
}

double raw_dot(std::span<const float> a, std::span<const float> b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i)
        acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    return acc;
}

// Criticality scores must dominate every exact logit of their page.
SuiteResult run_upper_bound(uint64_t seed, bool inject_fault) {
    constexpr uint64_t kPairs = 20000;
    std::atomic<uint64_t> violations{0};
    parallel_for(kPairs, [&](uint64_t trial) {
        GaussianStream gauss(seed ^ (trial * 0x9E3779B97F4A7C15ULL + 1));
        const uint32_t dim = kDims[trial % 3];
        const uint32_t page_size = kPageSizes[(trial / 3) % 3];
        KvCache cache = random_cache(gauss, dim, page_size, page_size, false);
        const auto q = random_query(gauss, dim);

        PageMetadata metadata = cache.page_metadata(0);
        if (inject_fault && trial % 100 == 0) {
            // Collapse the envelope to zero; the score underestimates and
            // the dominance check must notice.
            metadata.min_key.assign(dim, 0.0f);
            metadata.max_key.assign(dim, 0.0f);
        }

        const double score = estimate_page_score(q, metadata);
        const double slack = 1e-6 * (1.0 + std::fabs(score));
        for (uint32_t t = 0; t < cache.token_count(); ++t)
            if (raw_dot(q, cache.key(t)) > score + slack) ++violations;
    });
    char detail[96];
    std::snprintf(detail, sizeof(detail), "%llu pairs, %llu violations",
                  static_cast<unsigned long long>(kPairs),
                  static_cast<unsigned long long>(violations.load()));
    return {"upper_bound", violations == 0, detail};
}

// Stored page metadata must equal a full rescan, channel for channel.
SuiteResult run_metadata_scan(uint64_t seed, bool inject_fault) {
    constexpr uint64_t kSequences = 2000;
    std::atomic<uint64_t> mismatches{0};
    parallel_for(kSequences, [&](uint64_t trial) {
        Xoshiro256PlusPlus rng(seed ^ (trial * 0x9E3779B97F4A7C15ULL + 2));
        GaussianStream gauss(rng.next());
        const uint32_t dim = 1 + rng.next() % 16;
        const uint32_t page_size = 1 + rng.next() % 16;
        const uint32_t length = 1 + rng.next() % 96;
        KvCache cache = random_cache(gauss, dim, page_size, length, false);

        for (uint32_t p = 0; p < cache.page_count(); ++p) {
            PageMetadata observed = cache.page_metadata(p);
            if (inject_fault && trial % 100 == 0 && p == 0)
                observed.min_key[0] += 1.0f;  // simulated maintenance bug

            const Page& page = cache.page(p);
            std::vector<float> lo(page.keys.begin(), page.keys.begin() + dim);
            std::vector<float> hi = lo;
            for (uint32_t row = 1; row < page.length; ++row) {
                for (uint32_t c = 0; c < dim; ++c) {
                    lo[c] = std::min(lo[c], page.keys[row * dim + c]);
                    hi[c] = std::max(hi[c], page.keys[row * dim + c]);
                }
            }
            if (observed.min_key != lo || observed.max_key != hi) ++mismatches;
        }
    });
    char detail[96];
    std::snprintf(detail, sizeof(detail), "%llu sequences, %llu mismatched pages",
                  static_cast<unsigned long long>(kSequences),
                  static_cast<unsigned long long>(mismatches.load()));
    return {"metadata_scan", mismatches == 0, detail};
}

// Selecting every page must reproduce dense attention bit for bit.
SuiteResult run_full_budget_identity(uint64_t seed) {
    constexpr uint64_t kInstances = 300;
    std::atomic<uint64_t> mismatches{0};
    parallel_for(kInstances, [&](uint64_t trial) {
        Xoshiro256PlusPlus rng(seed ^ (trial * 0x9E3779B97F4A7C15ULL + 3));
        GaussianStream gauss(rng.next());
        const uint32_t dim = 1 + rng.next() % 64;
        const uint32_t page_size = 1 + rng.next() % 32;
        const uint32_t length = 1 + rng.next() % 2048;
        KvCache cache = random_cache(gauss, dim, page_size, length, true);
        const auto q = random_query(gauss, dim);

        std::vector<uint32_t> pages(cache.page_count());
        std::iota(pages.begin(), pages.end(), 0u);
        const auto dense = full_attention(q, cache);
        const auto sparse = sparse_attention(q, cache, pages);
        if (dense.output != sparse.output ||
            dense.weights_sum_check != sparse.weights_sum_check)
            ++mismatches;
    });
    char detail[96];
    std::snprintf(detail, sizeof(detail), "%llu instances, %llu not bit-identical",
                  static_cast<unsigned long long>(kInstances),
                  static_cast<unsigned long long>(mismatches.load()));
    return {"full_budget_identity", mismatches == 0, detail};
}

// Production attention against the independent naive reference.
SuiteResult run_oracle_equivalence(uint64_t seed) {
    constexpr uint64_t kInstances = 300;
    std::atomic<uint64_t> failures{0};
    parallel_for(kInstances, [&](uint64_t trial) {
        Xoshiro256PlusPlus rng(seed ^ (trial * 0x9E3779B97F4A7C15ULL + 4));
        GaussianStream gauss(rng.next());
        const uint32_t dim = 1 + rng.next() % 128;
        const uint32_t length = 1 + rng.next() % 4096;
        const double sd = 1.0 / std::sqrt(static_cast<double>(dim));

        KvCache cache({.head_dim = dim, .page_size = 16});
        std::vector<float> key(dim), value(dim);
        for (uint32_t t = 0; t < length; ++t) {
            for (auto& x : key) x = static_cast<float>(gauss.next() * sd);
            for (auto& x : value) x = static_cast<float>(gauss.next() * sd);
            cache.append(key, value);
        }
        std::vector<float> q(dim);
        for (auto& x : q) x = static_cast<float>(gauss.next() * sd);

        const auto got = full_attention(q, cache);
        const auto want = reference::naive_attention(q, cache);
        double diff_sq = 0.0, want_sq = 0.0;
        for (uint32_t c = 0; c < dim; ++c) {
            diff_sq += (got.output[c] - want[c]) * (got.output[c] - want[c]);
            want_sq += want[c] * want[c];
        }
        if (std::sqrt(diff_sq) > 1e-5 * std::sqrt(want_sq) + 1e-12) ++failures;
    });
    char detail[96];
    std::snprintf(detail, sizeof(detail), "%llu instances, %llu beyond 1e-5 relative",
                  static_cast<unsigned long long>(kInstances),
                  static_cast<unsigned long long>(failures.load()));
    return {"oracle_equivalence", failures == 0, detail};
}

// Closed-form fractions plus counted bytes against the model.
SuiteResult run_traffic_accounting(uint64_t seed) {
    uint64_t failures = 0;

    if (traffic_fraction(16, 65536, 4096) != 0.125) ++failures;
    if (traffic_fraction(16, 65536, 65536) != 1.0 + 1.0 / 16.0) ++failures;
    if (traffic_fraction(1, 64, 32) != 1.5) ++failures;

    Xoshiro256PlusPlus rng(seed + 5);
    GaussianStream gauss(rng.next());
    for (int trial = 0; trial < 20; ++trial) {
        const uint32_t page_size = 2 + rng.next() % 15;
        const uint32_t length = page_size + rng.next() % 2000;
        const uint32_t budget =
            page_size * (1 + static_cast<uint32_t>(rng.next() % (length / page_size)));
        KvCache cache = random_cache(gauss, 8, page_size, length, true);
        const auto q = random_query(gauss, 8);

        const auto report =
            counted_bytes(run_instrumented_quest_step(q, cache, {.token_budget = budget}));
        const double counted = static_cast<double>(report.bytes_loaded_counted) /
                               static_cast<double>(report.bytes_full);
        const double page_slack =
            static_cast<double>(page_size) / static_cast<double>(length);
        if (std::fabs(counted - report.fraction_model) > page_slack + 1e-12) ++failures;

        const auto dense = counted_bytes(run_instrumented_full_step(q, cache));
        if (dense.bytes_loaded_counted != dense.bytes_full) ++failures;
    }
    char detail[96];
    std::snprintf(detail, sizeof(detail), "%llu failures",
                  static_cast<unsigned long long>(failures));
    return {"traffic_accounting", failures == 0, detail};
}

}  // namespace

int cmd_verify(const VerifyOptions& opt) {
    const std::vector<std::string> known = {"upper_bound", "metadata_scan",
                                            "full_budget_identity", "oracle_equivalence",
                                            "traffic_accounting"};
    std::vector<std::string> wanted = opt.suites.empty() ? known : opt.suites;
    for (const std::string& name : wanted) {
        if (std::find(known.begin(), known.end(), name) == known.end()) {
            std::cerr << "error: unknown suite: " << name << "\n";
            return exit_config_error;
        }
    }

    auto enabled = [&](const char* name) {
        return std::find(wanted.begin(), wanted.end(), name) != wanted.end();
    };

    std::vector<SuiteResult> results;
    if (enabled("upper_bound")) results.push_back(run_upper_bound(opt.seed, opt.inject_fault));
    if (enabled("metadata_scan"))
        results.push_back(run_metadata_scan(opt.seed, opt.inject_fault));
    if (enabled("full_budget_identity"))
        results.push_back(run_full_budget_identity(opt.seed));
    if (enabled("oracle_equivalence")) results.push_back(run_oracle_equivalence(opt.seed));
    if (enabled("traffic_accounting")) results.push_back(run_traffic_accounting(opt.seed));

    bool all_pass = true;
    std::printf("%-22s %-6s %s\n", "suite", "result", "detail");
    for (const SuiteResult& result : results) {
        std::printf("%-22s %-6s %s\n", result.name.c_str(),
                    result.pass ? "PASS" : "FAIL", result.detail.c_str());
        all_pass = all_pass && result.pass;
    }
    std::printf("RESULT: %s (%zu/%zu suites)\n", all_pass ? "PASS" : "FAIL",
                static_cast<size_t>(std::count_if(results.begin(), results.end(),
                                                  [](const auto& r) { return r.pass; })),
                results.size());
    return all_pass ? exit_ok : exit_verification_failure;
}

}  // namespace questkv::cli
