#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "questkv/criticality.hpp"
#include "questkv/kv_store.hpp"

namespace questkv {

enum class PolicyKind { full, quest, h2o, tova, streaming };

const char* policy_name(PolicyKind kind);
PolicyKind policy_from_name(std::string_view name);  // throws std::invalid_argument

// One KV selection policy plus the state it carries across decode steps.
//
// full      attends to everything.
// quest     ranks pages against the current query, no eviction.
// h2o       evicts the token with the lowest accumulated attention mass
//           once over budget; the newest recent_window tokens are protected.
// tova      evicts the token with the lowest current-query weight.
// streaming keeps the first sink_count and the last window_count tokens.
struct PolicyState {
    PolicyKind kind = PolicyKind::full;
    uint32_t budget = 0;         // tokens, h2o/tova
    uint32_t recent_window = 0;  // h2o eviction protection
    uint32_t sink_count = 0;     // streaming
    uint32_t window_count = 0;   // streaming
    SelectionConfig selection;   // quest

    std::vector<uint32_t> retained;          // h2o/tova, ascending
    std::vector<double> accumulated_scores;  // h2o, indexed by token
};

PolicyState make_full_policy();
PolicyState make_quest_policy(SelectionConfig selection);
PolicyState make_h2o_policy(uint32_t budget, uint32_t recent_window);
PolicyState make_tova_policy(uint32_t budget);
PolicyState make_streaming_policy(uint32_t sink_count, uint32_t window_count);

// Runs one decode step after the caller appended token new_token_index:
// returns the token set this policy attends to for the given query, in
// ascending order, and applies any eviction to the internal state. Eviction
// ties go to the lower token index.
std::vector<uint32_t> policy_step(PolicyState& state, std::span<const float> query,
                                  const KvCache& cache, uint32_t new_token_index);

// True when a token dropped by the policy can never be attended again.
bool eviction_is_permanent(PolicyKind kind);

}  // namespace questkv
