#include <algorithm>
#include <iostream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "csv.hpp"
#include "questkv/attention.hpp"
#include "questkv/kv_store.hpp"
#include "questkv/metrics.hpp"
#include "questkv/parallel.hpp"
#include "questkv/policies.hpp"
#include "questkv/workloads.hpp"
#include "trace_input.hpp"

namespace questkv::cli {

namespace {

PolicyState build_policy(PolicyKind kind, uint32_t budget, uint32_t page_size,
                         bool force_include_recent) {
    switch (kind) {
        case PolicyKind::full:
            return make_full_policy();
        case PolicyKind::quest:
            return make_quest_policy(
                {.token_budget = budget, .force_include_recent = force_include_recent});
        case PolicyKind::h2o:
            return make_h2o_policy(budget, page_size);
        case PolicyKind::tova:
            return make_tova_policy(budget);
        case PolicyKind::streaming: {
            const uint32_t sinks = budget > 4 ? 4 : budget - 1;
            return make_streaming_policy(sinks, budget - sinks);
        }
    }
    throw std::invalid_argument("unknown policy kind");
}

struct StepRow {
    uint32_t step = 0;
    double recall = 0.0;
    double traffic = 0.0;
    double error = 0.0;
};

struct ComboResult {
    std::vector<StepRow> rows;
    double mean_recall = 0.0;
    double mean_traffic = 0.0;
    double mean_error = 0.0;
};

ComboResult run_combo(const DecodeTrace& trace, PolicyKind kind, uint32_t budget,
                      const RecallOptions& opt) {
    KvCache cache({.head_dim = trace.head_dim, .page_size = opt.page_size});
    PolicyState state = build_policy(kind, budget, opt.page_size, opt.force_include_recent);

    ComboResult result;
    const uint32_t length = static_cast<uint32_t>(trace.steps.size());
    for (uint32_t t = 0; t < length; ++t) {
        const TraceStep& step = trace.steps[t];
        cache.append(step.key, step.value);
        const auto selected = policy_step(state, step.query, cache, t);
        if (t + 1 < opt.top_n) continue;  // recall undefined below n tokens

        StepRow row;
        row.step = t;
        row.recall = recall_at_n(selected, step.query, cache, opt.top_n);
        const uint32_t count = t + 1;
        switch (kind) {
            case PolicyKind::full:
                row.traffic = 1.0;
                break;
            case PolicyKind::quest:
                // Counted ratio: one metadata token-pair per page plus the
                // attended tokens. Matches the closed-form model once the
                // cache outgrows the budget.
                row.traffic =
                    static_cast<double>(cache.page_count() + selected.size()) / count;
                break;
            default:
                row.traffic = static_cast<double>(selected.size()) / count;
        }
        const auto dense = full_attention(step.query, cache);
        const auto restricted = attend_tokens(step.query, cache, selected);
        row.error = output_error(restricted.output, dense.output);
        result.rows.push_back(row);
    }

    for (const StepRow& row : result.rows) {
        result.mean_recall += row.recall;
        result.mean_traffic += row.traffic;
        result.mean_error += row.error;
    }
    if (!result.rows.empty()) {
        const double count = static_cast<double>(result.rows.size());
        result.mean_recall /= count;
        result.mean_traffic /= count;
        result.mean_error /= count;
    }
    return result;
}

}  // namespace

int cmd_recall(const RecallOptions& opt) {
    DecodeTrace trace;
    try {
        trace = load_or_generate(opt.trace_path, opt.seed, opt.length, opt.head_dim);
    } catch (const std::exception& error) {
        std::cerr << "error: " << error.what() << "\n";
        return exit_config_error;
    }
    const uint32_t length = static_cast<uint32_t>(trace.steps.size());

    std::vector<PolicyKind> kinds;
    try {
        for (const std::string& name : opt.policies)
            kinds.push_back(policy_from_name(name));
    } catch (const std::exception& error) {
        std::cerr << "error: " << error.what() << "\n";
        return exit_config_error;
    }

    for (uint32_t budget : opt.budgets) {
        if (budget > length) {
            std::cerr << "error: budget " << budget << " exceeds trace length " << length
                      << "\n";
            return exit_config_error;
        }
        if (budget < opt.page_size &&
            std::find(kinds.begin(), kinds.end(), PolicyKind::quest) != kinds.end()) {
            std::cerr << "error: quest needs budget >= page size (" << budget << " < "
                      << opt.page_size << ")\n";
            return exit_config_error;
        }
        if (budget == 0) {
            std::cerr << "error: budget must be positive\n";
            return exit_config_error;
        }
    }
    if (length < opt.top_n) {
        std::cerr << "error: trace shorter than the recall cutoff n=" << opt.top_n << "\n";
        return exit_config_error;
    }

    struct Combo {
        PolicyKind kind;
        uint32_t budget;
    };
    std::vector<Combo> combos;
    for (PolicyKind kind : kinds)
        for (uint32_t budget : opt.budgets) combos.push_back({kind, budget});

    std::vector<ComboResult> results(combos.size());
    parallel_for(combos.size(), [&](uint64_t i) {
        results[i] = run_combo(trace, combos[i].kind, combos[i].budget, opt);
    });

    const bool ok = with_output(opt.out_path, [&](std::ostream& out) {
        out << "step,policy,budget,recall,traffic_fraction,output_error\n";
        for (size_t i = 0; i < combos.size(); ++i) {
            const char* name = policy_name(combos[i].kind);
            for (const StepRow& row : results[i].rows)
                out << row.step << ',' << name << ',' << combos[i].budget << ','
                    << fmt_double(row.recall) << ',' << fmt_double(row.traffic) << ','
                    << fmt_double(row.error) << '\n';
            out << "mean," << name << ',' << combos[i].budget << ','
                << fmt_double(results[i].mean_recall) << ','
                << fmt_double(results[i].mean_traffic) << ','
                << fmt_double(results[i].mean_error) << '\n';
        }
    });
    return ok ? exit_ok : exit_config_error;
}

}  // namespace questkv::cli
