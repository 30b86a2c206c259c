#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <ostream>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "error.hpp"
#include "format.hpp"
#include "linalg.hpp"
#include "mixture.hpp"

namespace cfmusic {

enum class Provenance { empirical, analytic };

[[nodiscard]] constexpr std::string_view to_string(Provenance p) noexcept { return p == Provenance::empirical ? "empirical" : "analytic"; }

/**
 * Characteristic-function samples phi_0 .. phi_{M-1} taken with period T_e.
 *
 * Negative lags are never stored: at(-m) returns conj(phi_m).
 */
class CfSamples {
public:
    CfSamples(double period, std::vector<Complex> values, Provenance provenance) : period_(period), values_(std::move(values)), provenance_(provenance) {
        detail::require(period_ > 0.0 && std::isfinite(period_), ErrorCode::invalid_argument, "sampling period must be positive");
        detail::require(!values_.empty(), ErrorCode::invalid_argument, "CF needs at least one sample");
        for (const Complex& v : values_) {
            detail::require(std::abs(v) <= 1.0 + 1e-12, ErrorCode::invalid_argument, "CF sample modulus exceeds one");
        }
    }

    [[nodiscard]] double                   period() const noexcept { return period_; }
    [[nodiscard]] std::size_t              size() const noexcept { return values_.size(); }
    [[nodiscard]] std::span<const Complex> values() const noexcept { return values_; }
    [[nodiscard]] Provenance               provenance() const noexcept { return provenance_; }

    [[nodiscard]] Complex at(std::ptrdiff_t lag) const {
        const auto index = static_cast<std::size_t>(lag < 0 ? -lag : lag);
        detail::require(index < values_.size(), ErrorCode::invalid_argument, "CF lag out of range");
        return lag < 0 ? std::conj(values_[index]) : values_[index];
    }

private:
    double               period_;
    std::vector<Complex> values_;
    Provenance           provenance_;
};

/// T_e = 2 pi / (2 (max - min)), half the largest period that keeps phase unwrapping unique.
[[nodiscard]] inline double sampling_period(double z_min, double z_max) {
    detail::require(z_max > z_min, ErrorCode::degenerate_range, "observations span a zero-width range");
    return 2.0 * std::numbers::pi / (2.0 * (z_max - z_min));
}

[[nodiscard]] inline double sampling_period(const ObservationSet& obs) { return sampling_period(obs.min(), obs.max()); }

/// phi_hat_m = (1/N) sum_n exp(i z_n m T_e), m = 0 .. M-1.
[[nodiscard]] inline CfSamples empirical_cf(const ObservationSet& obs, double period, std::size_t order) {
    detail::require(order >= 1, ErrorCode::invalid_argument, "CF order must be >= 1");
    detail::require(period > 0.0, ErrorCode::invalid_argument, "sampling period must be positive");
    const auto           n = static_cast<double>(obs.size());
    std::vector<Complex> values(order);
    for (std::size_t m = 0; m < order; ++m) {
        const double t   = static_cast<double>(m) * period;
        Complex      sum = 0.0;
        for (const double z : obs.values()) {
            sum += std::polar(1.0, z * t);
        }
        values[m] = sum / n;
    }
    return {period, std::move(values), Provenance::empirical};
}

/// phi_m = sum_k p_k alpha_{k,m} w_k^m with w_k = exp(i a_k T_e), alpha_{k,m} = exp(-sigma_k^2 (m T_e)^2 / 2).
[[nodiscard]] inline CfSamples analytic_cf(const GaussianMixture& model, double period, std::size_t order) {
    detail::require(order >= 1, ErrorCode::invalid_argument, "CF order must be >= 1");
    detail::require(period > 0.0, ErrorCode::invalid_argument, "sampling period must be positive");
    std::vector<Complex> values(order);
    for (std::size_t m = 0; m < order; ++m) {
        const auto md  = static_cast<double>(m);
        Complex    sum = 0.0;
        for (const Component& c : model.components()) {
            const double  lag   = md * period;
            const double  alpha = std::exp(-0.5 * c.stddev * c.stddev * lag * lag);
            const Complex w     = std::polar(1.0, c.mean * period);
            sum += c.weight * alpha * std::pow(w, md);
        }
        values[m] = sum;
    }
    return {period, std::move(values), Provenance::analytic};
}

/// CSV with a comment header: "# period=<T_e>,provenance=<p>" then rows "m,re,im".
inline void write_csv(std::ostream& os, const CfSamples& cf) {
    os << "# period=" << format_real(cf.period()) << ",provenance=" << to_string(cf.provenance()) << '\n';
    os << "m,re,im\n";
    for (std::size_t m = 0; m < cf.size(); ++m) {
        os << m << ',' << format_real(cf.values()[m].real()) << ',' << format_real(cf.values()[m].imag()) << '\n';
    }
}

} // namespace cfmusic
