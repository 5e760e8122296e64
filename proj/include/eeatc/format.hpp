// format.hpp — deterministic number <-> text conversion.
//
// All persisted numbers use shortest round-trip formatting, so re-reading a
// file reproduces the exact bit pattern and repeated runs produce
// byte-identical output on any conforming implementation.

#pragma once

#include <charconv>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>

#include "eeatc/error.hpp"

namespace eeatc {

inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Parses a full cell as a finite double; rejects trailing garbage, empty
// input, and non-finite values.
inline std::optional<double> parse_double(std::string_view text) {
    const char* begin = text.data();
    const char* end = text.data() + text.size();
    double v = 0.0;
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc{} || res.ptr != end || !std::isfinite(v))
        return std::nullopt;
    return v;
}

inline double require_double(std::string_view text, std::string_view what) {
    if (auto v = parse_double(text))
        return *v;
    throw BadConfig(std::string(what) + ": cannot parse number '" +
                    std::string(text) + "'");
}

} // namespace eeatc
