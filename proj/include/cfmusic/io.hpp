#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "format.hpp"
#include "mixture.hpp"

// Text formats: mixture definitions ("weight mean std" per line) and observations (one real per line).
// '#' starts a comment; blank lines are ignored.

namespace cfmusic {

namespace detail {

inline std::string_view strip_comment(std::string_view line) {
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
        line = line.substr(0, hash);
    }
    return line;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    constexpr std::string_view    blanks = " \t\r\f\v,";
    std::size_t                   pos    = line.find_first_not_of(blanks);
    while (pos != std::string_view::npos) {
        const std::size_t end = line.find_first_of(blanks, pos);
        fields.push_back(line.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos));
        pos = end == std::string_view::npos ? end : line.find_first_not_of(blanks, end);
    }
    return fields;
}

inline double parse_real(std::string_view field, std::size_t line_number) {
    if (!field.empty() && field.front() == '+') {
        field.remove_prefix(1);
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(value)) {
        throw Error(ErrorCode::parse, "line " + std::to_string(line_number) + ": not a finite decimal number: '" + std::string(field) + "'");
    }
    return value;
}

} // namespace detail

[[nodiscard]] inline GaussianMixture read_mixture(std::istream& in) {
    std::vector<Component> components;
    std::string            line;
    std::size_t            line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        const auto fields = detail::split_fields(detail::strip_comment(line));
        if (fields.empty()) {
            continue;
        }
        if (fields.size() != 3) {
            throw Error(ErrorCode::parse, "line " + std::to_string(line_number) + ": expected 'weight mean std'");
        }
        components.push_back({detail::parse_real(fields[0], line_number), detail::parse_real(fields[1], line_number), detail::parse_real(fields[2], line_number)});
    }
    if (components.empty()) {
        throw Error(ErrorCode::parse, "mixture file has no components");
    }
    try {
        return GaussianMixture(std::move(components));
    } catch (const Error& e) {
        throw Error(ErrorCode::parse, e.what());
    }
}

[[nodiscard]] inline ObservationSet read_observations(std::istream& in) {
    std::vector<double> values;
    std::string         line;
    std::size_t         line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        const auto fields = detail::split_fields(detail::strip_comment(line));
        if (fields.empty()) {
            continue;
        }
        if (fields.size() != 1) {
            throw Error(ErrorCode::parse, "line " + std::to_string(line_number) + ": expected one value per line");
        }
        values.push_back(detail::parse_real(fields[0], line_number));
    }
    if (values.empty()) {
        throw Error(ErrorCode::parse, "no observations");
    }
    return ObservationSet(std::move(values));
}

namespace detail {
inline std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::parse, "cannot open '" + path.string() + "'");
    }
    return in;
}
} // namespace detail

[[nodiscard]] inline GaussianMixture load_mixture(const std::filesystem::path& path) {
    auto in = detail::open_input(path);
    return read_mixture(in);
}

[[nodiscard]] inline ObservationSet load_observations(const std::filesystem::path& path) {
    auto in = detail::open_input(path);
    return read_observations(in);
}

inline void write_observations(std::ostream& os, const ObservationSet& obs) {
    for (const double z : obs.values()) {
        os << format_real(z) << '\n';
    }
}

} // namespace cfmusic
