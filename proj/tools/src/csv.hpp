#pragma once

#include <cstdio>
#include <fstream>
#include <iostream>
#include <ostream>
#include <string>

namespace questkv::cli {

inline std::string fmt_double(double v) {
    char buffer[48];
    std::snprintf(buffer, sizeof(buffer), "%.10g", v);
    return buffer;
}

// Wide format for checksum columns, sensitive to single-ulp drift.
inline std::string fmt_exact(double v) {
    char buffer[48];
    std::snprintf(buffer, sizeof(buffer), "%.17g", v);
    return buffer;
}

// Runs `body` against --out (or stdout when empty). Returns false when the
// file cannot be opened.
template <typename Body>
bool with_output(const std::string& out_path, Body&& body) {
    if (out_path.empty()) {
        body(std::cout);
        return true;
    }
    std::ofstream out(out_path, std::ios::trunc);
    if (!out) {
        std::cerr << "error: cannot open output file: " << out_path << "\n";
        return false;
    }
    body(out);
    return true;
}

}  // namespace questkv::cli
