#pragma once

#include <array>
#include <charconv>
#include <string>

namespace uavcov {

/// Shortest representation that parses back to the same value.
template <typename T>
std::string to_shortest(T value) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    (void)ec;
    return std::string(buf.data(), ptr);
}

} // namespace uavcov
