#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cfmusic {

/// Failure categories raised by the library. The CLI maps them onto exit codes.
enum class ErrorCode {
    invalid_argument,
    degenerate_component, // sigma_k == 0 where a density is needed, or an EM column collapsed
    degenerate_range,     // max == min, the sampling period is undefined
    order,                // matrix order does not exceed the signal dimension
    non_convergence,
    insufficient_roots,
    ambiguity,
    length_mismatch,
    parse,
};

[[nodiscard]] constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::invalid_argument: return "invalid argument";
    case ErrorCode::degenerate_component: return "degenerate component";
    case ErrorCode::degenerate_range: return "degenerate range";
    case ErrorCode::order: return "order error";
    case ErrorCode::non_convergence: return "non-convergence";
    case ErrorCode::insufficient_roots: return "insufficient roots";
    case ErrorCode::ambiguity: return "ambiguity";
    case ErrorCode::length_mismatch: return "length mismatch";
    case ErrorCode::parse: return "parse error";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message) : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

namespace detail {
inline void require(bool condition, ErrorCode code, const char* message) {
    if (!condition) {
        throw Error(code, message);
    }
}
} // namespace detail

} // namespace cfmusic
