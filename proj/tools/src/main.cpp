#include <CLI11.hpp>

#include <iostream>

#include "commands.hpp"

namespace cli = questkv::cli;

int main(int argc, char** argv) {
    CLI::App app{"questkv: paged KV cache with query-aware sparse attention"};
    app.require_subcommand(1);

    cli::VerifyOptions verify_opt;
    auto* verify = app.add_subcommand("verify", "Run the library invariant suites");
    verify->add_option("--suite", verify_opt.suites,
                       "Suites to run (default all): upper_bound, metadata_scan, "
                       "full_budget_identity, oracle_equivalence, traffic_accounting")
        ->delimiter(',');
    verify->add_option("--seed", verify_opt.seed, "Base seed for the randomized suites");
    verify->add_flag("--inject-fault", verify_opt.inject_fault)->group("");

    cli::RecallOptions recall_opt;
    auto* recall = app.add_subcommand(
        "recall", "Simulate decode over a trace and report per-policy recall@10");
    recall->add_option("--policy", recall_opt.policies,
                       "Policies: full, quest, h2o, tova, streaming")
        ->delimiter(',');
    recall->add_option("--budget", recall_opt.budgets, "Token budgets")->delimiter(',');
    recall->add_option("--page-size", recall_opt.page_size, "Tokens per page");
    recall->add_option("--head-dim", recall_opt.head_dim, "Channels per vector");
    recall->add_option("--length", recall_opt.length, "Generated trace length");
    recall->add_option("--seed", recall_opt.seed, "Trace seed");
    recall->add_option("--trace", recall_opt.trace_path,
                       "Read the trace from a file instead of generating one");
    recall->add_option("--out", recall_opt.out_path, "CSV output path (default stdout)");
    recall->add_flag("--force-include-recent,!--no-force-include-recent",
                     recall_opt.force_include_recent,
                     "Always select the newest page (default on)");

    cli::TrafficOptions traffic_opt;
    auto* traffic = app.add_subcommand(
        "traffic", "Report modeled and counted memory traffic for a config grid");
    traffic->add_option("--page-size", traffic_opt.page_sizes, "Page sizes")->delimiter(',');
    traffic->add_option("--budget", traffic_opt.budgets, "Token budgets")->delimiter(',');
    traffic->add_option("--head-dim", traffic_opt.head_dim, "Channels per vector");
    traffic->add_option("--length", traffic_opt.length, "Generated trace length");
    traffic->add_option("--seed", traffic_opt.seed, "Trace seed");
    traffic->add_option("--trace", traffic_opt.trace_path, "Trace file");
    traffic->add_option("--out", traffic_opt.out_path, "CSV output path (default stdout)");

    cli::BenchOptions bench_opt;
    auto* bench = app.add_subcommand(
        "bench", "Time one decode step per pipeline phase with bytes-touched columns");
    bench->add_option("--budget", bench_opt.budget, "Token budget");
    bench->add_option("--page-size", bench_opt.page_size, "Tokens per page");
    bench->add_option("--head-dim", bench_opt.head_dim, "Channels per vector");
    bench->add_option("--length", bench_opt.length, "Generated trace length");
    bench->add_option("--seed", bench_opt.seed, "Trace seed");
    bench->add_option("--trace", bench_opt.trace_path, "Trace file");
    bench->add_option("--out", bench_opt.out_path, "CSV output path (default stdout)");
    bench->add_option("--reps", bench_opt.reps, "Timed repetitions per phase");
    bench->add_flag("--force-include-recent,!--no-force-include-recent",
                    bench_opt.force_include_recent,
                    "Always select the newest page (default on)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return cli::exit_config_error;
    }

    try {
        if (verify->parsed()) return cli::cmd_verify(verify_opt);
        if (recall->parsed()) return cli::cmd_recall(recall_opt);
        if (traffic->parsed()) return cli::cmd_traffic(traffic_opt);
        if (bench->parsed()) return cli::cmd_bench(bench_opt);
    } catch (const std::exception& error) {
        std::cerr << "error: " << error.what() << "\n";
        return cli::exit_config_error;
    }
    return cli::exit_config_error;
}
