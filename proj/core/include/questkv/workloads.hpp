#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace questkv {

struct TraceStep {
    std::vector<float> key;
    std::vector<float> value;
    std::vector<float> query;

    bool operator==(const TraceStep&) const = default;
};

// Provenance annotations. Not part of the serialized payload and excluded
// from trace equality; export with write_trace_info_csv when a record is
// needed.
struct TraceInfo {
    std::string generator;  // "gaussian", "needle", "file"
    uint64_t seed = 0;
    int64_t needle_position = -1;
    double alignment = 0.0;
    double noise_scale = 0.0;
    double planted_margin = 0.0;  // needle logit minus best distractor logit
    uint32_t regen_attempts = 0;
};

// One (key, value, query) record per decode step; step t's query attends
// tokens 0..t.
struct DecodeTrace {
    uint32_t head_dim = 0;
    std::vector<TraceStep> steps;
    TraceInfo info;

    friend bool operator==(const DecodeTrace& a, const DecodeTrace& b) {
        return a.head_dim == b.head_dim && a.steps == b.steps;
    }
};

// All entries i.i.d. N(0, 1/head_dim), drawn from xoshiro256++ (see
// rng.hpp) in (key, value, query) step order, channels ascending. The same
// seed reproduces the trace bit for bit.
DecodeTrace gen_gaussian_trace(uint64_t seed, uint32_t length, uint32_t head_dim);

struct NeedleSpec {
    uint32_t needle_position = 0;
    double alignment = 0.0;    // dot-product pull of the planted key toward the probe
    double noise_scale = 1.0;  // weight of the original key kept as noise
};

// Gaussian trace whose key at needle_position is replaced by
// alignment * qhat + noise_scale * original_key, where qhat is the unit
// direction of the final step's query (the probe). With alignment > 0 the
// needle is checked to be the strict argmax logit for the probe; on the
// rare failure the whole trace regenerates under a derived sub-seed.
// alignment = 0 with noise_scale = 1 reproduces the plain gaussian trace
// and skips the dominance check. The achieved logit margin is recorded in
// the trace info.
DecodeTrace gen_needle_trace(uint64_t seed, uint32_t length, uint32_t head_dim,
                             const NeedleSpec& spec);

struct trace_format_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct trace_truncated_error : trace_format_error {
    using trace_format_error::trace_format_error;
};

// Binary trace format, little-endian throughout:
//   magic "QKVTRACE" (8 bytes), version byte 0x01,
//   head_dim u32, length u32,
//   then per step: key, value, query as packed 32-bit floats.
// read(write(t)) == t bit-exactly. Reads reject wrong magic or version
// (trace_format_error), short files (trace_truncated_error), zero
// head_dim, and trailing bytes.
void write_trace(const std::filesystem::path& path, const DecodeTrace& trace);
DecodeTrace read_trace(const std::filesystem::path& path);

// One-row CSV with the trace's provenance metadata.
void write_trace_info_csv(const std::filesystem::path& path, const DecodeTrace& trace);

}  // namespace questkv
