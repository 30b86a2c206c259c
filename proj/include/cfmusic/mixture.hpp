#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "error.hpp"
#include "linalg.hpp"
#include "random.hpp"

namespace cfmusic {

struct Component {
    double weight = 1.0;
    double mean   = 0.0;
    double stddev = 0.0; // 0 is a point mass

    friend bool operator==(const Component&, const Component&) = default;
};

/**
 * Univariate K-component Gaussian mixture.
 *
 * Invariants (checked on construction): K >= 1, every weight > 0, weights sum to one
 * within 1e-12, every stddev >= 0, means pairwise distinct. Use renormalized() to
 * build from unnormalized weights.
 */
class GaussianMixture {
public:
    static constexpr double weight_tolerance = 1e-12;

    explicit GaussianMixture(std::vector<Component> components) : components_(std::move(components)) {
        detail::require(!components_.empty(), ErrorCode::invalid_argument, "mixture needs at least one component");
        double total = 0.0;
        for (const Component& c : components_) {
            detail::require(std::isfinite(c.weight) && c.weight > 0.0, ErrorCode::invalid_argument, "mixture weights must be positive");
            detail::require(std::isfinite(c.mean), ErrorCode::invalid_argument, "mixture means must be finite");
            detail::require(std::isfinite(c.stddev) && c.stddev >= 0.0, ErrorCode::invalid_argument, "mixture standard deviations must be >= 0");
            total += c.weight;
        }
        detail::require(std::abs(total - 1.0) <= weight_tolerance, ErrorCode::invalid_argument, "mixture weights must sum to one");
        for (std::size_t i = 0; i < components_.size(); ++i) {
            for (std::size_t j = i + 1; j < components_.size(); ++j) {
                detail::require(components_[i].mean != components_[j].mean, ErrorCode::invalid_argument, "mixture means must be pairwise distinct");
            }
        }
    }

    /// Scales the weights to sum to one, then validates as usual.
    [[nodiscard]] static GaussianMixture renormalized(std::vector<Component> components) {
        double total = 0.0;
        for (const Component& c : components) {
            total += c.weight;
        }
        detail::require(std::isfinite(total) && total > 0.0, ErrorCode::invalid_argument, "weights must have a positive sum");
        for (Component& c : components) {
            c.weight /= total;
        }
        return GaussianMixture(std::move(components));
    }

    [[nodiscard]] std::size_t                size() const noexcept { return components_.size(); }
    [[nodiscard]] std::span<const Component> components() const noexcept { return components_; }
    [[nodiscard]] const Component&           operator[](std::size_t k) const noexcept { return components_[k]; }

    [[nodiscard]] std::vector<double> means() const {
        std::vector<double> out;
        out.reserve(size());
        for (const Component& c : components_) {
            out.push_back(c.mean);
        }
        return out;
    }

private:
    std::vector<Component> components_;
};

/// N >= 1 real observations with cached extremes.
class ObservationSet {
public:
    explicit ObservationSet(std::vector<double> values) : values_(std::move(values)) {
        detail::require(!values_.empty(), ErrorCode::invalid_argument, "observation set is empty");
        for (double v : values_) {
            detail::require(std::isfinite(v), ErrorCode::invalid_argument, "observations must be finite");
        }
        const auto [lo, hi] = std::ranges::minmax_element(values_);
        min_                = *lo;
        max_                = *hi;
    }

    [[nodiscard]] std::size_t             size() const noexcept { return values_.size(); }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] double                  min() const noexcept { return min_; }
    [[nodiscard]] double                  max() const noexcept { return max_; }

    friend bool operator==(const ObservationSet& a, const ObservationSet& b) { return a.values_ == b.values_; }

private:
    std::vector<double> values_;
    double              min_ = 0.0;
    double              max_ = 0.0;
};

[[nodiscard]] inline double gaussian_density(double z, double mean, double stddev) {
    const double u = (z - mean) / stddev;
    return std::exp(-0.5 * u * u) / (std::sqrt(2.0 * std::numbers::pi) * stddev);
}

/// Mixture density. Point-mass components have no density: ErrorCode::degenerate_component.
[[nodiscard]] inline double pdf(const GaussianMixture& model, double z) {
    double sum = 0.0;
    for (const Component& c : model.components()) {
        detail::require(c.stddev > 0.0, ErrorCode::degenerate_component, "pdf undefined for a zero-variance component");
        sum += c.weight * gaussian_density(z, c.mean, c.stddev);
    }
    return sum;
}

/// Draws the component label by inversion on the cumulative weights, then z ~ N(a_k, sigma_k^2).
[[nodiscard]] inline ObservationSet sample(const GaussianMixture& model, std::size_t n, Rng rng) {
    detail::require(n >= 1, ErrorCode::invalid_argument, "sample size must be >= 1");
    std::vector<double> cumulative;
    double              running = 0.0;
    for (const Component& c : model.components()) {
        running += c.weight;
        cumulative.push_back(running);
    }
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.uniform() * cumulative.back();
        auto         k = static_cast<std::size_t>(std::ranges::upper_bound(cumulative, u) - cumulative.begin());
        k              = std::min(k, model.size() - 1);
        const Component& c = model[k];
        out.push_back(c.stddev > 0.0 ? rng.normal(c.mean, c.stddev) : c.mean);
    }
    return ObservationSet(std::move(out));
}

[[nodiscard]] inline ObservationSet sample(const GaussianMixture& model, std::size_t n, std::uint64_t seed) { return sample(model, n, Rng(seed)); }

/// phi_Z(t) = sum_k p_k exp(-sigma_k^2 t^2 / 2) exp(i a_k t).
[[nodiscard]] inline Complex exact_cf(const GaussianMixture& model, double t) {
    Complex sum = 0.0;
    for (const Component& c : model.components()) {
        sum += c.weight * std::exp(-0.5 * c.stddev * c.stddev * t * t) * std::polar(1.0, c.mean * t);
    }
    return sum;
}

/// Steering vector w_k = (1, w, ..., w^{M-1})^H for w = exp(i a T_e).
[[nodiscard]] inline std::vector<Complex> steering_vector(double mean, double period, std::size_t order) {
    std::vector<Complex> out(order);
    for (std::size_t m = 0; m < order; ++m) {
        out[m] = std::polar(1.0, -mean * period * static_cast<double>(m));
    }
    return out;
}

struct SignalPerturbation {
    HermitianMatrix signal;       // S_M = W diag(p) W^H
    HermitianMatrix perturbation; // P_M, zero when every sigma_k = 0
};

/// Closed-form split R_M = S_M + P_M of the analytic Toeplitz CF matrix. Requires M > K.
[[nodiscard]] inline SignalPerturbation exact_signal_and_perturbation(const GaussianMixture& model, std::size_t order, double period) {
    detail::require(order > model.size(), ErrorCode::order, "matrix order must exceed the number of components");
    detail::require(period > 0.0, ErrorCode::invalid_argument, "sampling period must be positive");
    ComplexMatrix signal(order, order);
    ComplexMatrix perturbation(order, order);
    for (const Component& c : model.components()) {
        const auto w = steering_vector(c.mean, period, order);
        for (std::size_t j = 0; j < order; ++j) {
            for (std::size_t l = 0; l < order; ++l) {
                signal(j, l) += c.weight * w[j] * std::conj(w[l]);
                const double lag   = (static_cast<double>(l) - static_cast<double>(j)) * period;
                const double alpha = std::exp(-0.5 * c.stddev * c.stddev * lag * lag);
                perturbation(j, l) += c.weight * (alpha - 1.0) * std::polar(1.0, c.mean * lag);
            }
        }
    }
    return {HermitianMatrix(std::move(signal)), HermitianMatrix(std::move(perturbation))};
}

} // namespace cfmusic
