#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace questkv::cli {

// Exit codes shared by every subcommand: 0 success, 1 verification failure,
// 2 configuration error. CLI11 parse failures also map to 2 in main().
inline constexpr int exit_ok = 0;
inline constexpr int exit_verification_failure = 1;
inline constexpr int exit_config_error = 2;

struct VerifyOptions {
    std::vector<std::string> suites;  // empty: run everything
    uint64_t seed = 20240601;
    bool inject_fault = false;  // hidden: corrupt metadata to prove detectors fire
};
int cmd_verify(const VerifyOptions& options);

struct RecallOptions {
    std::vector<std::string> policies = {"full", "quest", "h2o", "tova", "streaming"};
    std::vector<uint32_t> budgets = {32, 64, 128, 256, 512};
    uint32_t page_size = 16;
    uint32_t head_dim = 16;
    uint32_t length = 4096;
    uint32_t top_n = 10;
    uint64_t seed = 1;
    std::string trace_path;
    std::string out_path;
    bool force_include_recent = true;
};
int cmd_recall(const RecallOptions& options);

struct TrafficOptions {
    std::vector<uint32_t> page_sizes = {16};
    std::vector<uint32_t> budgets = {4096};
    uint32_t head_dim = 64;
    uint32_t length = 65536;
    uint64_t seed = 1;
    std::string trace_path;
    std::string out_path;
};
int cmd_traffic(const TrafficOptions& options);

struct BenchOptions {
    uint32_t page_size = 16;
    uint32_t head_dim = 64;
    uint32_t length = 32768;
    uint32_t budget = 2048;
    uint32_t reps = 10;
    uint32_t warmup = 3;
    uint64_t seed = 1;
    std::string trace_path;
    std::string out_path;
    bool force_include_recent = true;
};
int cmd_bench(const BenchOptions& options);

}  // namespace questkv::cli
