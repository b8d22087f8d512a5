#pragma once

#include <charconv>
#include <cstdint>
#include <string>

namespace herdlab::detail {

// Shortest round-trip decimal form: reruns produce byte-identical files and
// parsing back recovers the exact double.
inline std::string fmt(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string fmt(std::uint64_t v) {
    char buf[24];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace herdlab::detail
