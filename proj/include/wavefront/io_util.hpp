#pragma once

#include <charconv>
#include <string>

namespace wavefront {

/// Shortest round-trip decimal form; locale independent, so CSV bytes are reproducible.
inline std::string num(double v) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

}  // namespace wavefront
