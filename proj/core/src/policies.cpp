#include "questkv/policies.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

#include "questkv/attention.hpp"

namespace questkv {

const char* policy_name(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::full: return "full";
        case PolicyKind::quest: return "quest";
        case PolicyKind::h2o: return "h2o";
        case PolicyKind::tova: return "tova";
        case PolicyKind::streaming: return "streaming";
    }
    throw std::invalid_argument("policy_name: unknown policy kind");
}

PolicyKind policy_from_name(std::string_view name) {
    if (name == "full") return PolicyKind::full;
    if (name == "quest") return PolicyKind::quest;
    if (name == "h2o") return PolicyKind::h2o;
    if (name == "tova") return PolicyKind::tova;
    if (name == "streaming") return PolicyKind::streaming;
    throw std::invalid_argument("unknown policy: " + std::string(name));
}

PolicyState make_full_policy() {
    PolicyState state;
    state.kind = PolicyKind::full;
    return state;
}

PolicyState make_quest_policy(SelectionConfig selection) {
    PolicyState state;
    state.kind = PolicyKind::quest;
    state.selection = selection;
    return state;
}

PolicyState make_h2o_policy(uint32_t budget, uint32_t recent_window) {
    if (budget == 0) throw std::invalid_argument("h2o: budget must be >= 1");
    PolicyState state;
    state.kind = PolicyKind::h2o;
    state.budget = budget;
    state.recent_window = recent_window;
    return state;
}

PolicyState make_tova_policy(uint32_t budget) {
    if (budget == 0) throw std::invalid_argument("tova: budget must be >= 1");
    PolicyState state;
    state.kind = PolicyKind::tova;
    state.budget = budget;
    return state;
}

PolicyState make_streaming_policy(uint32_t sink_count, uint32_t window_count) {
    if (window_count == 0)
        throw std::invalid_argument("streaming: window_count must be >= 1");
    PolicyState state;
    state.kind = PolicyKind::streaming;
    state.sink_count = sink_count;
    state.window_count = window_count;
    return state;
}

bool eviction_is_permanent(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::full:
        case PolicyKind::quest:
            return false;
        case PolicyKind::h2o:
        case PolicyKind::tova:
        case PolicyKind::streaming:
            return true;
    }
    throw std::invalid_argument("eviction_is_permanent: unknown policy kind");
}

namespace {

std::vector<uint32_t> all_tokens(const KvCache& cache) {
    std::vector<uint32_t> tokens(cache.token_count());
    std::iota(tokens.begin(), tokens.end(), 0u);
    return tokens;
}

std::vector<uint32_t> quest_step(const PolicyState& state, std::span<const float> query,
                                 const KvCache& cache) {
    const auto scores = estimate_all(query, cache);
    const auto pages = select_top_k(scores, state.selection, cache);
    std::vector<uint32_t> tokens;
    for (uint32_t p : pages) {
        const uint32_t first = p * cache.config().page_size;
        for (uint32_t row = 0; row < cache.page(p).length; ++row)
            tokens.push_back(first + row);
    }
    return tokens;
}

std::vector<uint32_t> h2o_step(PolicyState& state, std::span<const float> query,
                               const KvCache& cache, uint32_t new_token) {
    std::vector<uint32_t> attended = state.retained;
    attended.push_back(new_token);

    const auto weights = softmax_weights(attention_logits(query, cache, attended));
    if (state.accumulated_scores.size() < cache.token_count())
        state.accumulated_scores.resize(cache.token_count(), 0.0);
    for (size_t i = 0; i < attended.size(); ++i)
        state.accumulated_scores[attended[i]] += weights[i];

    if (attended.size() > state.budget) {
        const uint32_t protect_from =
            cache.token_count() > state.recent_window
                ? cache.token_count() - state.recent_window
                : 0;
        size_t evict = attended.size();  // sentinel
        for (size_t i = 0; i < attended.size(); ++i) {
            if (attended[i] >= protect_from) continue;
            if (evict == attended.size() ||
                state.accumulated_scores[attended[i]] <
                    state.accumulated_scores[attended[evict]])
                evict = i;
        }
        if (evict == attended.size()) {
            // Everything sits inside the protected window; fall back to the
            // lowest-accumulated token that is not the newest.
            for (size_t i = 0; i + 1 < attended.size(); ++i) {
                if (evict == attended.size() ||
                    state.accumulated_scores[attended[i]] <
                        state.accumulated_scores[attended[evict]])
                    evict = i;
            }
        }
        attended.erase(attended.begin() + static_cast<ptrdiff_t>(evict));
    }

    state.retained = attended;
    return attended;
}

std::vector<uint32_t> tova_step(PolicyState& state, std::span<const float> query,
                                const KvCache& cache, uint32_t new_token) {
    std::vector<uint32_t> attended = state.retained;
    attended.push_back(new_token);

    if (attended.size() > state.budget) {
        const auto weights = softmax_weights(attention_logits(query, cache, attended));
        size_t evict = 0;
        for (size_t i = 1; i < attended.size(); ++i)
            if (weights[i] < weights[evict]) evict = i;
        attended.erase(attended.begin() + static_cast<ptrdiff_t>(evict));
    }

    state.retained = attended;
    return attended;
}

std::vector<uint32_t> streaming_step(const PolicyState& state, const KvCache& cache) {
    const uint32_t count = cache.token_count();
    const uint32_t sinks = std::min(state.sink_count, count);
    const uint32_t window_start =
        count > state.window_count ? count - state.window_count : 0;

    std::vector<uint32_t> tokens;
    for (uint32_t t = 0; t < sinks; ++t) tokens.push_back(t);
    for (uint32_t t = std::max(window_start, sinks); t < count; ++t) tokens.push_back(t);
    return tokens;
}

}  // namespace

std::vector<uint32_t> policy_step(PolicyState& state, std::span<const float> query,
                                  const KvCache& cache, uint32_t new_token_index) {
    if (new_token_index >= cache.token_count())
        throw std::out_of_range("policy_step: new token not in cache");

    switch (state.kind) {
        case PolicyKind::full: return all_tokens(cache);
        case PolicyKind::quest: return quest_step(state, query, cache);
        case PolicyKind::h2o: return h2o_step(state, query, cache, new_token_index);
        case PolicyKind::tova: return tova_step(state, query, cache, new_token_index);
        case PolicyKind::streaming: return streaming_step(state, cache);
    }
    throw std::invalid_argument("policy_step: unknown policy kind");
}

}  // namespace questkv
