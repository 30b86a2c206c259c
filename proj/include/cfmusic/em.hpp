#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "error.hpp"
#include "format.hpp"
#include "mixture.hpp"
#include "random.hpp"

// Expectation-Maximization baselines for univariate Gaussian mixtures.

namespace cfmusic {

enum class EmVariant {
    standard,    // per-component weights and variances
    constrained, // weights fixed at 1/K, one pooled variance
};

[[nodiscard]] constexpr std::string_view to_string(EmVariant v) noexcept { return v == EmVariant::standard ? "standard" : "constrained"; }

enum class EmInitialization {
    random_observations, // K distinct observations drawn uniformly without replacement
    uniform_range,       // K means i.i.d. uniform on [min z, max z]
};

struct EmConfig {
    std::size_t      components               = 1;
    std::size_t      max_iterations           = 100;
    double           log_likelihood_tolerance = 1e-8;
    EmVariant        variant                  = EmVariant::standard;
    std::uint64_t    seed                     = 0;
    EmInitialization initialization           = EmInitialization::random_observations;
};

struct EmFit {
    std::vector<double> means;
    std::vector<double> variances;
    std::vector<double> weights;
    std::vector<double> log_likelihood_trace; // entry 0 is the initial model, one entry per iteration after it
    std::size_t         iterations_used = 0;

    [[nodiscard]] double final_log_likelihood() const { return log_likelihood_trace.back(); }
};

namespace detail {

inline constexpr double variance_floor    = 1e-12;
inline constexpr double column_mass_floor = 1e-12;

struct EmState {
    std::vector<double> means;
    std::vector<double> variances;
    std::vector<double> weights;
};

/// Log-likelihood of the state; fills responsibilities (row-major N x K).
inline double expectation(std::span<const double> z, const EmState& state, std::vector<double>& responsibilities) {
    const std::size_t k_count = state.means.size();
    responsibilities.resize(z.size() * k_count);
    std::vector<double> log_prefix(k_count);
    for (std::size_t k = 0; k < k_count; ++k) {
        log_prefix[k] = std::log(state.weights[k]) - 0.5 * std::log(2.0 * std::numbers::pi * state.variances[k]);
    }
    double total = 0.0;
    for (std::size_t n = 0; n < z.size(); ++n) {
        double* row     = &responsibilities[n * k_count];
        double  largest = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < k_count; ++k) {
            const double diff = z[n] - state.means[k];
            row[k]            = log_prefix[k] - 0.5 * diff * diff / state.variances[k];
            largest           = std::max(largest, row[k]);
        }
        double sum = 0.0;
        for (std::size_t k = 0; k < k_count; ++k) {
            row[k] = std::exp(row[k] - largest);
            sum += row[k];
        }
        for (std::size_t k = 0; k < k_count; ++k) {
            row[k] /= sum;
        }
        total += largest + std::log(sum);
    }
    return total;
}

inline void maximization(std::span<const double> z, const std::vector<double>& responsibilities, EmVariant variant, EmState& state) {
    const std::size_t   k_count = state.means.size();
    const auto          n_total = static_cast<double>(z.size());
    std::vector<double> mass(k_count, 0.0);
    std::vector<double> weighted(k_count, 0.0);
    for (std::size_t n = 0; n < z.size(); ++n) {
        for (std::size_t k = 0; k < k_count; ++k) {
            mass[k] += responsibilities[n * k_count + k];
            weighted[k] += responsibilities[n * k_count + k] * z[n];
        }
    }
    for (std::size_t k = 0; k < k_count; ++k) {
        if (mass[k] < column_mass_floor) {
            throw Error(ErrorCode::degenerate_component, "EM responsibility column collapsed");
        }
        state.means[k] = weighted[k] / mass[k];
    }

    std::vector<double> scatter(k_count, 0.0);
    for (std::size_t n = 0; n < z.size(); ++n) {
        for (std::size_t k = 0; k < k_count; ++k) {
            const double diff = z[n] - state.means[k];
            scatter[k] += responsibilities[n * k_count + k] * diff * diff;
        }
    }

    if (variant == EmVariant::constrained) {
        double pooled = 0.0;
        for (const double s : scatter) {
            pooled += s;
        }
        pooled /= n_total;
        if (pooled < variance_floor) {
            throw Error(ErrorCode::degenerate_component, "EM pooled variance collapsed");
        }
        std::ranges::fill(state.variances, pooled);
        return;
    }
    for (std::size_t k = 0; k < k_count; ++k) {
        const double variance = scatter[k] / mass[k];
        if (variance < variance_floor) {
            throw Error(ErrorCode::degenerate_component, "EM component variance collapsed");
        }
        state.variances[k] = variance;
        state.weights[k]   = mass[k] / n_total;
    }
}

} // namespace detail

/// EM from explicit initial means; variances start at the sample variance, weights at 1/K.
[[nodiscard]] inline EmFit em_fit(const ObservationSet& obs, const EmConfig& config, std::span<const double> initial_means) {
    const std::size_t k_count = config.components;
    detail::require(k_count >= 1, ErrorCode::invalid_argument, "K must be >= 1");
    detail::require(initial_means.size() == k_count, ErrorCode::length_mismatch, "initial means must have K entries");
    detail::require(config.max_iterations >= 1, ErrorCode::invalid_argument, "max_iterations must be >= 1");
    detail::require(config.log_likelihood_tolerance > 0.0, ErrorCode::invalid_argument, "tolerance must be positive");
    detail::require(obs.size() > k_count, ErrorCode::invalid_argument, "EM needs N > K");

    const auto z = obs.values();
    double     mean = 0.0;
    for (const double x : z) {
        mean += x;
    }
    mean /= static_cast<double>(z.size());
    double variance = 0.0;
    for (const double x : z) {
        variance += (x - mean) * (x - mean);
    }
    variance /= static_cast<double>(z.size());
    if (variance < detail::variance_floor) {
        throw Error(ErrorCode::degenerate_component, "observations have zero variance");
    }

    detail::EmState state{std::vector<double>(initial_means.begin(), initial_means.end()), std::vector<double>(k_count, variance),
                          std::vector<double>(k_count, 1.0 / static_cast<double>(k_count))};

    EmFit               fit;
    std::vector<double> responsibilities;
    double              log_likelihood = detail::expectation(z, state, responsibilities);
    fit.log_likelihood_trace.push_back(log_likelihood);
    for (std::size_t iteration = 1; iteration <= config.max_iterations; ++iteration) {
        detail::maximization(z, responsibilities, config.variant, state);
        const double next = detail::expectation(z, state, responsibilities);
        fit.log_likelihood_trace.push_back(next);
        fit.iterations_used = iteration;
        const double improvement = next - log_likelihood;
        log_likelihood           = next;
        if (improvement < config.log_likelihood_tolerance) {
            break;
        }
    }
    fit.means     = std::move(state.means);
    fit.variances = std::move(state.variances);
    fit.weights   = std::move(state.weights);
    return fit;
}

/// Seeded initial means per config.initialization.
[[nodiscard]] inline std::vector<double> em_initial_means(const ObservationSet& obs, const EmConfig& config) {
    detail::require(obs.size() >= config.components, ErrorCode::invalid_argument, "EM needs at least K observations");
    Rng                 rng(config.seed);
    std::vector<double> initial(config.components);
    if (config.initialization == EmInitialization::uniform_range) {
        for (double& m : initial) {
            m = rng.uniform(obs.min(), obs.max());
        }
        return initial;
    }
    // partial Fisher-Yates over the indices
    std::vector<std::size_t> index(obs.size());
    std::iota(index.begin(), index.end(), std::size_t{0});
    for (std::size_t k = 0; k < config.components; ++k) {
        const auto pick = k + static_cast<std::size_t>(rng.uniform() * static_cast<double>(index.size() - k));
        std::swap(index[k], index[std::min(pick, index.size() - 1)]);
        initial[k] = obs.values()[index[k]];
    }
    return initial;
}

[[nodiscard]] inline EmFit em_fit(const ObservationSet& obs, const EmConfig& config) { return em_fit(obs, config, em_initial_means(obs, config)); }

inline void write_csv(std::ostream& os, const EmFit& fit) {
    os << "k,mean,variance,weight\n";
    for (std::size_t k = 0; k < fit.means.size(); ++k) {
        os << k << ',' << format_real(fit.means[k]) << ',' << format_real(fit.variances[k]) << ',' << format_real(fit.weights[k]) << '\n';
    }
    os << "\niterations,final_log_likelihood\n";
    os << fit.iterations_used << ',' << format_real(fit.final_log_likelihood()) << '\n';
}

inline void write_report(std::ostream& os, const EmFit& fit) {
    os << "iterations: " << fit.iterations_used << '\n';
    os << "log-likelihood: " << format_real(fit.final_log_likelihood()) << '\n';
    os << "components (mean, variance, weight):\n";
    for (std::size_t k = 0; k < fit.means.size(); ++k) {
        os << "  " << format_real(fit.means[k]) << "  " << format_real(fit.variances[k]) << "  " << format_real(fit.weights[k]) << '\n';
    }
}

} // namespace cfmusic
