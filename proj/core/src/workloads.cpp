#include "questkv/workloads.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>

#include "questkv/rng.hpp"

namespace questkv {

namespace {

constexpr std::array<char, 8> kMagic = {'Q', 'K', 'V', 'T', 'R', 'A', 'C', 'E'};
constexpr uint8_t kVersion = 0x01;
constexpr int kMaxNeedleAttempts = 64;

DecodeTrace gaussian_body(uint64_t seed, uint32_t length, uint32_t head_dim) {
    if (length == 0) throw std::invalid_argument("trace length must be >= 1");
    if (head_dim == 0) throw std::invalid_argument("trace head_dim must be >= 1");

    const double sd = 1.0 / std::sqrt(static_cast<double>(head_dim));
    GaussianStream gauss(seed);

    DecodeTrace trace;
    trace.head_dim = head_dim;
    trace.steps.resize(length);
    for (TraceStep& step : trace.steps) {
        step.key.resize(head_dim);
        step.value.resize(head_dim);
        step.query.resize(head_dim);
        for (float& x : step.key) x = static_cast<float>(gauss.next() * sd);
        for (float& x : step.value) x = static_cast<float>(gauss.next() * sd);
        for (float& x : step.query) x = static_cast<float>(gauss.next() * sd);
    }
    return trace;
}

// Raw (unscaled) probe logits against every key; scaling never changes the
// argmax.
void probe_logits(const DecodeTrace& trace, std::vector<double>& out) {
    const std::vector<float>& probe = trace.steps.back().query;
    out.resize(trace.steps.size());
    for (size_t t = 0; t < trace.steps.size(); ++t) {
        double acc = 0.0;
        const std::vector<float>& key = trace.steps[t].key;
        for (uint32_t c = 0; c < trace.head_dim; ++c)
            acc += static_cast<double>(probe[c]) * static_cast<double>(key[c]);
        out[t] = acc;
    }
}

}  // namespace

DecodeTrace gen_gaussian_trace(uint64_t seed, uint32_t length, uint32_t head_dim) {
    DecodeTrace trace = gaussian_body(seed, length, head_dim);
    trace.info.generator = "gaussian";
    trace.info.seed = seed;
    return trace;
}

DecodeTrace gen_needle_trace(uint64_t seed, uint32_t length, uint32_t head_dim,
                             const NeedleSpec& spec) {
    if (spec.needle_position >= length)
        throw std::invalid_argument("gen_needle_trace: needle_position out of range");

    std::vector<double> logits;
    for (int attempt = 0; attempt < kMaxNeedleAttempts; ++attempt) {
        const uint64_t sub_seed =
            seed + static_cast<uint64_t>(attempt) * 0x9E3779B97F4A7C15ULL;
        DecodeTrace trace = gaussian_body(sub_seed, length, head_dim);

        const std::vector<float>& probe = trace.steps.back().query;
        double norm_sq = 0.0;
        for (float q : probe) norm_sq += static_cast<double>(q) * q;
        const double norm = std::sqrt(norm_sq);
        if (norm == 0.0) continue;  // degenerate probe, retry

        std::vector<float>& needle_key = trace.steps[spec.needle_position].key;
        for (uint32_t c = 0; c < head_dim; ++c) {
            const double planted = spec.alignment * (probe[c] / norm) +
                                   spec.noise_scale * static_cast<double>(needle_key[c]);
            needle_key[c] = static_cast<float>(planted);
        }

        probe_logits(trace, logits);
        double best_other = -std::numeric_limits<double>::infinity();
        for (size_t t = 0; t < logits.size(); ++t)
            if (t != spec.needle_position && logits[t] > best_other) best_other = logits[t];
        const double margin =
            length == 1 ? logits[spec.needle_position] : logits[spec.needle_position] - best_other;

        trace.info.generator = "needle";
        trace.info.seed = seed;
        trace.info.needle_position = spec.needle_position;
        trace.info.alignment = spec.alignment;
        trace.info.noise_scale = spec.noise_scale;
        trace.info.planted_margin = margin;
        trace.info.regen_attempts = static_cast<uint32_t>(attempt);

        if (spec.alignment == 0.0) return trace;  // nothing planted, no dominance check
        if (length == 1 || margin > 0.0) return trace;
    }
    throw std::runtime_error("gen_needle_trace: dominance unreachable with this spec");
}

namespace {

void put_u32(std::ofstream& out, uint32_t v) {
    const std::array<char, 4> bytes = {
        static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
        static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
    out.write(bytes.data(), bytes.size());
}

void put_f32(std::ofstream& out, float v) { put_u32(out, std::bit_cast<uint32_t>(v)); }

class Reader {
public:
    explicit Reader(const std::filesystem::path& path) : in_(path, std::ios::binary) {
        if (!in_) throw trace_format_error("cannot open trace file: " + path.string());
    }

    void bytes(char* dst, size_t count) {
        in_.read(dst, static_cast<std::streamsize>(count));
        if (static_cast<size_t>(in_.gcount()) != count)
            throw trace_truncated_error("trace file truncated");
    }

    uint32_t u32() {
        std::array<char, 4> b{};
        bytes(b.data(), b.size());
        return static_cast<uint32_t>(static_cast<unsigned char>(b[0])) |
               static_cast<uint32_t>(static_cast<unsigned char>(b[1])) << 8 |
               static_cast<uint32_t>(static_cast<unsigned char>(b[2])) << 16 |
               static_cast<uint32_t>(static_cast<unsigned char>(b[3])) << 24;
    }

    float f32() { return std::bit_cast<float>(u32()); }

    bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

private:
    std::ifstream in_;
};

}  // namespace

void write_trace(const std::filesystem::path& path, const DecodeTrace& trace) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw trace_format_error("cannot open trace file for writing: " + path.string());

    out.write(kMagic.data(), kMagic.size());
    out.put(static_cast<char>(kVersion));
    put_u32(out, trace.head_dim);
    put_u32(out, static_cast<uint32_t>(trace.steps.size()));
    for (const TraceStep& step : trace.steps) {
        for (float x : step.key) put_f32(out, x);
        for (float x : step.value) put_f32(out, x);
        for (float x : step.query) put_f32(out, x);
    }
    if (!out) throw trace_format_error("trace write failed: " + path.string());
}

DecodeTrace read_trace(const std::filesystem::path& path) {
    Reader reader(path);

    std::array<char, 8> magic{};
    reader.bytes(magic.data(), magic.size());
    if (magic != kMagic) throw trace_format_error("bad trace magic");

    char version = 0;
    reader.bytes(&version, 1);
    if (static_cast<uint8_t>(version) != kVersion)
        throw trace_format_error("unsupported trace version");

    DecodeTrace trace;
    trace.head_dim = reader.u32();
    if (trace.head_dim == 0) throw trace_format_error("trace head_dim is zero");
    const uint32_t length = reader.u32();

    trace.steps.resize(length);
    for (TraceStep& step : trace.steps) {
        step.key.resize(trace.head_dim);
        step.value.resize(trace.head_dim);
        step.query.resize(trace.head_dim);
        for (float& x : step.key) x = reader.f32();
        for (float& x : step.value) x = reader.f32();
        for (float& x : step.query) x = reader.f32();
    }
    if (!reader.at_end()) throw trace_format_error("trailing bytes after trace payload");

    trace.info.generator = "file";
    return trace;
}

void write_trace_info_csv(const std::filesystem::path& path, const DecodeTrace& trace) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw trace_format_error("cannot open csv for writing: " + path.string());

    out << "generator,seed,head_dim,length,needle_position,alignment,noise_scale,"
           "planted_margin,regen_attempts\n";
    char line[256];
    std::snprintf(line, sizeof(line), "%s,%llu,%u,%zu,%lld,%.10g,%.10g,%.10g,%u\n",
                  trace.info.generator.c_str(),
                  static_cast<unsigned long long>(trace.info.seed), trace.head_dim,
                  trace.steps.size(), static_cast<long long>(trace.info.needle_position),
                  trace.info.alignment, trace.info.noise_scale, trace.info.planted_margin,
                  trace.info.regen_attempts);
    out << line;
}

}  // namespace questkv
