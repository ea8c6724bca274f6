#include <doctest.h>

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "questkv/attention.hpp"
#include "questkv/criticality.hpp"
#include "questkv/kv_store.hpp"
#include "questkv/metrics.hpp"
#include "questkv/policies.hpp"
#include "questkv/rng.hpp"

using questkv::counted_bytes;
using questkv::KvCache;
using questkv::make_recall_report;
using questkv::oracle_sparsity;
using questkv::output_error;
using questkv::recall_at_n;
using questkv::run_instrumented_full_step;
using questkv::run_instrumented_quest_step;
using questkv::StepInstrumentation;
using questkv::traffic_fraction;

namespace {

KvCache random_cache(questkv::GaussianStream& gauss, uint32_t dim, uint32_t page_size,
                     uint32_t length) {
    KvCache cache({.head_dim = dim, .page_size = page_size});
    std::vector<float> key(dim), value(dim);
    for (uint32_t t = 0; t < length; ++t) {
        for (auto& x : key) x = static_cast<float>(gauss.next());
        for (auto& x : value) x = static_cast<float>(gauss.next());
        cache.append(key, value);
    }
    return cache;
}

std::vector<float> random_query(questkv::GaussianStream& gauss, uint32_t dim) {
    std::vector<float> q(dim);
    for (auto& x : q) x = static_cast<float>(gauss.next());
    return q;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("recall worked examples") {
    questkv::GaussianStream gauss(3);
    KvCache cache = random_cache(gauss, 4, 4, 32);
    const auto q = random_query(gauss, 4);

    std::vector<uint32_t> everything(32);
    std::iota(everything.begin(), everything.end(), 0u);
    CHECK(recall_at_n(everything, q, cache, 10) == 1.0);

    // Selected set disjoint from the top-n.
    const auto logits = oracle::raw_logits(q, cache);
    std::vector<uint32_t> order(32);
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(),
              [&](uint32_t a, uint32_t b) { return logits[a] > logits[b]; });
    std::vector<uint32_t> worst(order.end() - 8, order.end());
    std::sort(worst.begin(), worst.end());
    CHECK(recall_at_n(worst, q, cache, 10) == 0.0);

    CHECK_THROWS_AS(recall_at_n(everything, q, cache, 33), std::invalid_argument);
    CHECK_THROWS_AS(recall_at_n(everything, q, cache, 0), std::invalid_argument);
}

TEST_CASE("quest at full budget recalls everything") {
    questkv::GaussianStream gauss(5);
    KvCache cache = random_cache(gauss, 8, 4, 64);
    const auto q = random_query(gauss, 8);
    auto policy = questkv::make_quest_policy({.token_budget = 64});
    const auto selected = questkv::policy_step(policy, q, cache, 63);
    CHECK(recall_at_n(selected, q, cache, 10) == 1.0);
}

TEST_CASE("property: recall is monotone in set growth") {
    questkv::GaussianStream gauss(7);
    questkv::Xoshiro256PlusPlus rng(8);
    KvCache cache = random_cache(gauss, 4, 4, 50);
    const auto q = random_query(gauss, 4);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<uint32_t> smaller, larger;
        for (uint32_t t = 0; t < 50; ++t) {
            const bool in_small = rng.next() % 4 == 0;
            if (in_small) smaller.push_back(t);
            if (in_small || rng.next() % 4 == 0) larger.push_back(t);
        }
        if (smaller.empty()) continue;
        CHECK(recall_at_n(smaller, q, cache, 10) <= recall_at_n(larger, q, cache, 10));
    }
}

TEST_CASE("recall report aggregates the mean") {
    const auto report = make_recall_report({1.0, 0.5, 0.0, 0.5}, 10, 64);
    CHECK(report.mean_recall == 0.5);
    CHECK(report.n == 10);
    CHECK(report.budget == 64);
    CHECK(report.per_step_recall.size() == 4);
}

TEST_CASE("traffic fraction worked examples") {
    CHECK(traffic_fraction(16, 65536, 4096) == 0.125);
    CHECK(traffic_fraction(16, 65536, 65536) == 1.0 + 1.0 / 16.0);
    CHECK(traffic_fraction(1, 64, 32) == 1.5);  // degenerate single-token pages

    CHECK_THROWS_AS(traffic_fraction(0, 64, 32), std::invalid_argument);
    CHECK_THROWS_AS(traffic_fraction(16, 64, 128), std::invalid_argument);
    CHECK_THROWS_AS(traffic_fraction(16, 0, 0), std::invalid_argument);
}

TEST_CASE("property: traffic fraction monotonicity") {
    // Page-multiple budgets keep the attention term fixed, so the fraction
    // strictly falls as pages grow.
    double previous = 2.0;
    for (uint32_t page_size : {8u, 16u, 32u, 64u, 128u}) {
        const double fraction = traffic_fraction(page_size, 65536, 1024);
        CHECK(fraction < previous);
        previous = fraction;
    }
    // Longer caches amortize the same budget.
    CHECK(traffic_fraction(16, 32768, 2048) > traffic_fraction(16, 65536, 2048));
}

TEST_CASE("counted bytes for a dense step equal the full cache") {
    questkv::GaussianStream gauss(9);
    KvCache cache = random_cache(gauss, 8, 4, 21);
    const auto q = random_query(gauss, 8);
    const auto run = run_instrumented_full_step(q, cache);
    const auto report = counted_bytes(run);
    CHECK(report.bytes_loaded_counted == report.bytes_full);
    CHECK(report.bytes_full == 21ull * 2 * 8 * 2);
    CHECK(report.fraction_model == 1.0);
}

TEST_CASE("counted bytes for one selected page") {
    questkv::GaussianStream gauss(10);
    KvCache cache = random_cache(gauss, 4, 4, 4);  // exactly one full page
    const auto q = random_query(gauss, 4);
    const auto run = run_instrumented_quest_step(q, cache, {.token_budget = 4});
    const auto report = counted_bytes(run);
    // metadata: min+max vectors for 1 page; kv: key+value for 4 tokens.
    const uint64_t vector_bytes = 4 * 2;
    CHECK(run.metadata_bytes == 2 * vector_bytes);
    CHECK(run.kv_bytes == 2 * vector_bytes * 4);
    CHECK(report.bytes_loaded_counted == 2 * vector_bytes + 2 * vector_bytes * 4);
}

TEST_CASE("counted bytes track the model within one page of slack") {
    questkv::GaussianStream gauss(11);
    questkv::Xoshiro256PlusPlus rng(12);
    for (int trial = 0; trial < 25; ++trial) {
        const uint32_t page_size = 2 + rng.next() % 15;
        const uint32_t length = page_size + rng.next() % 3000;
        const uint32_t budget = page_size * (1 + rng.next() % (length / page_size));
        KvCache cache = random_cache(gauss, 8, page_size, length);
        const auto q = random_query(gauss, 8);

        const auto report =
            counted_bytes(run_instrumented_quest_step(q, cache, {.token_budget = budget}));
        const double counted_fraction = static_cast<double>(report.bytes_loaded_counted) /
                                        static_cast<double>(report.bytes_full);
        const double page_slack =
            static_cast<double>(page_size) / static_cast<double>(length);
        CHECK(std::fabs(counted_fraction - report.fraction_model) <= page_slack + 1e-12);
    }
}

TEST_CASE("paper worked example: an eighth of the cache") {
    questkv::GaussianStream gauss(13);
    KvCache cache = random_cache(gauss, 16, 16, 65536);
    const auto q = random_query(gauss, 16);
    const auto report =
        counted_bytes(run_instrumented_quest_step(q, cache, {.token_budget = 4096}));
    CHECK(report.fraction_model == 0.125);
    const double counted_fraction = static_cast<double>(report.bytes_loaded_counted) /
                                    static_cast<double>(report.bytes_full);
    CHECK(counted_fraction == doctest::Approx(0.125).epsilon(1e-9));
}

TEST_CASE("disabled instrumentation rejected") {
    CHECK_THROWS_AS(counted_bytes(StepInstrumentation{}), std::invalid_argument);
}

TEST_CASE("oracle sparsity worked examples") {
    SUBCASE("dominant token carries the mass") {
        KvCache cache({.head_dim = 1, .page_size = 8});
        cache.append(std::vector<float>{30.0f}, std::vector<float>{0.0f});
        for (int i = 0; i < 7; ++i)
            cache.append(std::vector<float>{0.5f}, std::vector<float>{0.0f});
        CHECK(oracle_sparsity(std::vector<float>{1.0f}, cache, 0.99) == 1);
    }
    SUBCASE("uniform weights need a ceiling fraction") {
        for (uint32_t n : {7u, 10u, 16u}) {
            KvCache cache({.head_dim = 1, .page_size = 8});
            for (uint32_t i = 0; i < n; ++i)
                cache.append(std::vector<float>{1.0f}, std::vector<float>{0.0f});
            CHECK(oracle_sparsity(std::vector<float>{1.0f}, cache, 0.9) ==
                  static_cast<uint64_t>(std::ceil(0.9 * n)));
        }
    }
    SUBCASE("threshold near one needs every token") {
        KvCache cache({.head_dim = 1, .page_size = 8});
        for (int i = 0; i < 16; ++i)
            cache.append(std::vector<float>{float(i % 3)}, std::vector<float>{0.0f});
        CHECK(oracle_sparsity(std::vector<float>{1.0f}, cache, 1.0 - 1e-9) == 16);
    }
    SUBCASE("threshold validation") {
        KvCache cache({.head_dim = 1, .page_size = 8});
        cache.append(std::vector<float>{1.0f}, std::vector<float>{0.0f});
        CHECK_THROWS_AS(oracle_sparsity(std::vector<float>{1.0f}, cache, 0.0),
                        std::invalid_argument);
        CHECK_THROWS_AS(oracle_sparsity(std::vector<float>{1.0f}, cache, 1.0),
                        std::invalid_argument);
    }
}

TEST_CASE("property: oracle sparsity is monotone in the threshold") {
    questkv::GaussianStream gauss(14);
    KvCache cache = random_cache(gauss, 8, 8, 96);
    const auto q = random_query(gauss, 8);
    uint64_t previous = 0;
    for (double threshold : {0.1, 0.3, 0.5, 0.7, 0.9, 0.99}) {
        const uint64_t count = oracle_sparsity(q, cache, threshold);
        CHECK(count >= previous);
        previous = count;
    }
    CHECK(previous <= cache.token_count());
}

TEST_CASE("output error worked examples") {
    CHECK(output_error(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}) == 0.0);
    CHECK(output_error(std::vector<double>{0, 0}, std::vector<double>{3, 4}) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(output_error(std::vector<double>{1}, std::vector<double>{1, 2}),
                    std::invalid_argument);

    questkv::GaussianStream gauss(15);
    KvCache cache = random_cache(gauss, 4, 4, 17);
    const auto q = random_query(gauss, 4);
    std::vector<uint32_t> pages(cache.page_count());
    std::iota(pages.begin(), pages.end(), 0u);
    const auto dense = questkv::full_attention(q, cache);
    const auto sparse = questkv::sparse_attention(q, cache, pages);
    CHECK(output_error(sparse.output, dense.output) == 0.0);
}

}  // TEST_SUITE
