#include <doctest.h>

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "questkv/attention.hpp"
#include "questkv/kv_store.hpp"
#include "questkv/reference.hpp"
#include "questkv/rng.hpp"

using questkv::attend_tokens;
using questkv::attention_logits;
using questkv::full_attention;
using questkv::KvCache;
using questkv::softmax_weights;
using questkv::sparse_attention;

namespace {

KvCache random_cache(questkv::GaussianStream& gauss, uint32_t dim, uint32_t page_size,
                     uint32_t length, double sd) {
    KvCache cache({.head_dim = dim, .page_size = page_size});
    std::vector<float> key(dim), value(dim);
    for (uint32_t t = 0; t < length; ++t) {
        for (auto& x : key) x = static_cast<float>(gauss.next() * sd);
        for (auto& x : value) x = static_cast<float>(gauss.next() * sd);
        cache.append(key, value);
    }
    return cache;
}

std::vector<float> random_query(questkv::GaussianStream& gauss, uint32_t dim, double sd) {
    std::vector<float> q(dim);
    for (auto& x : q) x = static_cast<float>(gauss.next() * sd);
    return q;
}

std::vector<uint32_t> all_pages(const KvCache& cache) {
    std::vector<uint32_t> pages(cache.page_count());
    std::iota(pages.begin(), pages.end(), 0u);
    return pages;
}

}  // namespace

TEST_SUITE("attention") {

TEST_CASE("logit worked examples") {
    KvCache cache({.head_dim = 4, .page_size = 4});
    cache.append(std::vector<float>{1, 1, 1, 1}, std::vector<float>(4, 0.0f));
    const auto logits = attention_logits(std::vector<float>{1, 1, 1, 1}, cache);
    REQUIRE(logits.size() == 1);
    CHECK(logits[0] == 2.0);  // 4 / sqrt(4)

    KvCache ortho({.head_dim = 2, .page_size = 2});
    ortho.append(std::vector<float>{1, 0}, std::vector<float>(2, 0.0f));
    CHECK(attention_logits(std::vector<float>{0, 1}, ortho)[0] == 0.0);
}

TEST_CASE("logits cover the whole cache in token order") {
    questkv::GaussianStream gauss(5);
    KvCache cache = random_cache(gauss, 3, 2, 5, 1.0);
    const auto q = random_query(gauss, 3, 1.0);
    const auto logits = attention_logits(q, cache);
    REQUIRE(logits.size() == 5);
    const double scale = std::sqrt(3.0);
    for (uint32_t t = 0; t < 5; ++t)
        CHECK(logits[t] == doctest::Approx(oracle::raw_dot(q, cache.key(t)) / scale)
                               .epsilon(1e-12));
}

TEST_CASE("logit subset validation") {
    questkv::GaussianStream gauss(6);
    KvCache cache = random_cache(gauss, 2, 2, 4, 1.0);
    const auto q = random_query(gauss, 2, 1.0);
    CHECK_THROWS_AS(attention_logits(q, cache, std::vector<uint32_t>{0, 4}),
                    std::out_of_range);
    CHECK_THROWS_AS(attention_logits(q, cache, std::vector<uint32_t>{2, 1}),
                    std::invalid_argument);
    CHECK_THROWS_AS(attention_logits(q, cache, std::vector<uint32_t>{1, 1}),
                    std::invalid_argument);
}

TEST_CASE("softmax worked examples") {
    CHECK(softmax_weights({0.0, 0.0}) == std::vector<double>{0.5, 0.5});
    CHECK(softmax_weights({1000.0, 1000.0}) == std::vector<double>{0.5, 0.5});

    const auto w = softmax_weights({0.0, std::log(3.0)});
    CHECK(w[0] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(w[1] == doctest::Approx(0.75).epsilon(1e-12));

    CHECK_THROWS_AS(softmax_weights({}), std::invalid_argument);
}

TEST_CASE("softmax stays normalized under extreme logits") {
    questkv::Xoshiro256PlusPlus rng(17);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> logits(1 + rng.next() % 64);
        for (auto& l : logits) l = (rng.next_unit() * 2.0 - 1.0) * 1e4;
        const auto w = softmax_weights(logits);
        double total = 0.0;
        for (double x : w) total += x;
        CHECK(std::fabs(total - 1.0) <= 1e-6);

        // Shift invariance.
        std::vector<double> shifted(logits);
        const double delta = (rng.next_unit() - 0.5) * 100.0;
        for (auto& l : shifted) l += delta;
        const auto w2 = softmax_weights(shifted);
        for (size_t i = 0; i < w.size(); ++i)
            CHECK(std::fabs(w2[i] - w[i]) <= 1e-6);
    }
}

TEST_CASE("softmax is monotone in logits") {
    const auto w = softmax_weights({-1.0, 0.5, 0.4, 2.0});
    CHECK(w[3] > w[1]);
    CHECK(w[1] > w[2]);
    CHECK(w[2] > w[0]);
}

TEST_CASE("full attention worked examples") {
    SUBCASE("single token returns its value") {
        KvCache cache({.head_dim = 2, .page_size = 2});
        cache.append(std::vector<float>{1, 2}, std::vector<float>{5.5f, -3.25f});
        const auto out = full_attention(std::vector<float>{1, 0}, cache);
        CHECK(out.output == std::vector<double>{5.5, -3.25});
        CHECK(out.weights_sum_check == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("equal keys average the values") {
        KvCache cache({.head_dim = 2, .page_size = 2});
        cache.append(std::vector<float>{1, 1}, std::vector<float>{2, 0});
        cache.append(std::vector<float>{1, 1}, std::vector<float>{4, 6});
        const auto out = full_attention(std::vector<float>{3, -1}, cache);
        CHECK(out.output[0] == doctest::Approx(3.0).epsilon(1e-12));
        CHECK(out.output[1] == doctest::Approx(3.0).epsilon(1e-12));
    }
    SUBCASE("empty cache rejected") {
        KvCache cache({.head_dim = 2, .page_size = 2});
        CHECK_THROWS_AS(full_attention(std::vector<float>{1, 0}, cache),
                        std::invalid_argument);
    }
}

TEST_CASE("sparse attention worked examples") {
    questkv::GaussianStream gauss(8);

    SUBCASE("all pages reproduce full attention bit for bit") {
        KvCache cache = random_cache(gauss, 8, 4, 37, 0.5);
        const auto q = random_query(gauss, 8, 0.5);
        const auto dense = full_attention(q, cache);
        const auto sparse = sparse_attention(q, cache, all_pages(cache));
        CHECK(sparse.output == dense.output);
        CHECK(sparse.weights_sum_check == dense.weights_sum_check);
    }
    SUBCASE("one singleton page returns that token's value") {
        KvCache cache({.head_dim = 2, .page_size = 1});
        cache.append(std::vector<float>{1, 0}, std::vector<float>{9, 9});
        cache.append(std::vector<float>{0, 1}, std::vector<float>{-1.5f, 4});
        const auto out = sparse_attention(std::vector<float>{1, 1}, cache,
                                          std::vector<uint32_t>{1});
        CHECK(out.output == std::vector<double>{-1.5, 4.0});
    }
    SUBCASE("page set validation") {
        KvCache cache = random_cache(gauss, 2, 2, 6, 1.0);
        const auto q = random_query(gauss, 2, 1.0);
        CHECK_THROWS_AS(sparse_attention(q, cache, std::vector<uint32_t>{}),
                        std::invalid_argument);
        CHECK_THROWS_AS(sparse_attention(q, cache, std::vector<uint32_t>{0, 0}),
                        std::invalid_argument);
        CHECK_THROWS_AS(sparse_attention(q, cache, std::vector<uint32_t>{3}),
                        std::out_of_range);
    }
    SUBCASE("subset matches the naive oracle on the same tokens") {
        for (int trial = 0; trial < 50; ++trial) {
            KvCache cache = random_cache(gauss, 16, 4, 64, 0.25);
            const auto q = random_query(gauss, 16, 0.25);
            const std::vector<uint32_t> pages = {1, 5, 15};
            const auto sparse = sparse_attention(q, cache, pages);

            std::vector<uint32_t> tokens;
            for (uint32_t p : pages)
                for (uint32_t row = 0; row < 4; ++row) tokens.push_back(p * 4 + row);
            const auto naive = questkv::reference::naive_attention(q, cache, tokens);
            for (uint32_t c = 0; c < 16; ++c)
                CHECK(sparse.output[c] == doctest::Approx(naive[c]).epsilon(1e-6));
        }
    }
}

TEST_CASE("property: full-budget degeneracy is exact across geometries") {
    questkv::GaussianStream gauss(444);
    questkv::Xoshiro256PlusPlus rng(445);
    for (int trial = 0; trial < 100; ++trial) {
        const uint32_t dim = 1 + rng.next() % 16;
        const uint32_t page_size = 1 + rng.next() % 8;
        const uint32_t length = 1 + rng.next() % 200;
        KvCache cache = random_cache(gauss, dim, page_size, length, 0.5);
        const auto q = random_query(gauss, dim, 0.5);
        const auto dense = full_attention(q, cache);
        const auto sparse = sparse_attention(q, cache, all_pages(cache));
        REQUIRE(sparse.output == dense.output);
    }
}

TEST_CASE("property: output is a convex combination of attended values") {
    questkv::GaussianStream gauss(555);
    for (int trial = 0; trial < 100; ++trial) {
        KvCache cache = random_cache(gauss, 8, 4, 50, 1.0);
        const auto q = random_query(gauss, 8, 1.0);
        const auto out = full_attention(q, cache);
        for (uint32_t c = 0; c < 8; ++c) {
            float lo = cache.value(0)[c], hi = cache.value(0)[c];
            for (uint32_t t = 1; t < cache.token_count(); ++t) {
                lo = std::min(lo, cache.value(t)[c]);
                hi = std::max(hi, cache.value(t)[c]);
            }
            CHECK(out.output[c] >= static_cast<double>(lo) - 1e-6);
            CHECK(out.output[c] <= static_cast<double>(hi) + 1e-6);
        }
    }
}

TEST_CASE("property: agreement with the independent naive oracle") {
    questkv::GaussianStream gauss(666);
    questkv::Xoshiro256PlusPlus rng(667);
    for (int trial = 0; trial < 200; ++trial) {
        const uint32_t dim = 1 + rng.next() % 64;
        const uint32_t length = 1 + rng.next() % 512;
        const double sd = 1.0 / std::sqrt(static_cast<double>(dim));
        KvCache cache = random_cache(gauss, dim, 16, length, sd);
        const auto q = random_query(gauss, dim, sd);

        const auto got = full_attention(q, cache);
        const auto want = questkv::reference::naive_attention(q, cache);
        double diff_sq = 0.0, want_sq = 0.0;
        for (uint32_t c = 0; c < dim; ++c) {
            diff_sq += (got.output[c] - want[c]) * (got.output[c] - want[c]);
            want_sq += want[c] * want[c];
        }
        CHECK(std::sqrt(diff_sq) <= 1e-5 * std::sqrt(want_sq) + 1e-12);
    }
}

TEST_CASE("attend_tokens rejects malformed sets") {
    questkv::GaussianStream gauss(777);
    KvCache cache = random_cache(gauss, 2, 2, 4, 1.0);
    const auto q = random_query(gauss, 2, 1.0);
    CHECK_THROWS_AS(attend_tokens(q, cache, std::vector<uint32_t>{}),
                    std::invalid_argument);
    CHECK_THROWS_AS(attend_tokens(q, cache, std::vector<uint32_t>{3, 2}),
                    std::invalid_argument);
    CHECK_THROWS_AS(attend_tokens(q, cache, std::vector<uint32_t>{9}),
                    std::out_of_range);
}

}  // TEST_SUITE
