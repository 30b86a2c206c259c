#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace cfmusic {

/// Shortest-round-trip is not enough for byte-exact reruns across builds; always emit 17 digits.
[[nodiscard]] inline std::string format_real(double value) {
    if (std::isnan(value)) {
        return "nan";
    }
    if (std::isinf(value)) {
        return value > 0 ? "inf" : "-inf";
    }
    char buffer[40];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value, std::chars_format::general, 17);
    return {buffer, result.ptr};
}

} // namespace cfmusic
