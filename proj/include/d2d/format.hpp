#pragma once

#include <array>
#include <charconv>
#include <string>

namespace d2d {

/// Shortest round-trip decimal form, independent of the C locale.
inline std::string format_number(double x) {
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), res.ptr);
}

}  // namespace d2d
