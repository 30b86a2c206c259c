#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <span>
#include <vector>

#include "cf.hpp"
#include "error.hpp"
#include "format.hpp"
#include "linalg.hpp"
#include "mixture.hpp"

// Mean estimation from the noise subspace of the Toeplitz CF matrix (root-MUSIC on CF samples).

namespace cfmusic {

/// Hermitian Toeplitz matrix with entry (j, l) = phi_{l-j}.
class ToeplitzCfMatrix {
public:
    explicit ToeplitzCfMatrix(CfSamples cf) : cf_(std::move(cf)) { detail::require(cf_.size() >= 2, ErrorCode::invalid_argument, "Toeplitz CF matrix needs M >= 2 samples"); }

    [[nodiscard]] std::size_t      order() const noexcept { return cf_.size(); }
    [[nodiscard]] const CfSamples& samples() const noexcept { return cf_; }

    [[nodiscard]] Complex entry(std::size_t j, std::size_t l) const { return cf_.at(static_cast<std::ptrdiff_t>(l) - static_cast<std::ptrdiff_t>(j)); }

    [[nodiscard]] HermitianMatrix dense() const {
        ComplexMatrix m(order(), order());
        for (std::size_t j = 0; j < order(); ++j) {
            for (std::size_t l = 0; l < order(); ++l) {
                m(j, l) = entry(j, l);
            }
        }
        return HermitianMatrix(std::move(m));
    }

private:
    CfSamples cf_;
};

[[nodiscard]] inline ToeplitzCfMatrix build_rm(const CfSamples& cf) { return ToeplitzCfMatrix(cf); }

struct SubspaceDecomposition {
    std::vector<double> eigenvalues; // descending, all M
    ComplexMatrix       noise_basis; // M x (M - K), eigenvectors of the M - K smallest eigenvalues
    std::size_t         signal_dim = 0;
};

[[nodiscard]] inline SubspaceDecomposition decompose(const ToeplitzCfMatrix& rm, std::size_t signal_dim) {
    const std::size_t order = rm.order();
    detail::require(signal_dim >= 1, ErrorCode::invalid_argument, "signal dimension must be >= 1");
    detail::require(signal_dim < order, ErrorCode::order, "matrix order must exceed the signal dimension");
    EigenDecomposition    eig = eigh(rm.dense());
    SubspaceDecomposition out{std::move(eig.eigenvalues), ComplexMatrix(order, order - signal_dim), signal_dim};
    for (std::size_t r = 0; r < order; ++r) {
        for (std::size_t c = signal_dim; c < order; ++c) {
            out.noise_basis(r, c - signal_dim) = eig.eigenvectors(r, c);
        }
    }
    return out;
}

/**
 * q(y) = sum_{j=-(M-1)}^{M-1} t_{-j} y^j multiplied by y^{M-1}.
 *
 * t_d is the sum of the d-th diagonal of G = V V^H (entries with column - row = d).
 * Coefficient i of the returned polynomial is t_{M-1-i}. Only t_d for d >= 0 is summed;
 * negative diagonals are their conjugates, so the coefficients are exactly conjugate-reciprocal.
 */
[[nodiscard]] inline ComplexPolynomial noise_polynomial(const SubspaceDecomposition& subspace) {
    const ComplexMatrix& v     = subspace.noise_basis;
    const std::size_t    order = v.rows();
    detail::require(order >= 1 && v.cols() >= 1, ErrorCode::invalid_argument, "noise basis is empty");
    const ComplexMatrix g = v * v.adjoint();

    std::vector<Complex> diagonal_sums(order);
    for (std::size_t d = 0; d < order; ++d) {
        Complex sum = 0.0;
        for (std::size_t r = 0; r + d < order; ++r) {
            sum += g(r, r + d);
        }
        diagonal_sums[d] = sum;
    }
    diagonal_sums[0] = diagonal_sums[0].real();

    std::vector<Complex> coefficients(2 * order - 1);
    for (std::size_t d = 0; d < order; ++d) {
        coefficients[order - 1 - d] = diagonal_sums[d];            // t_d
        coefficients[order - 1 + d] = std::conj(diagonal_sums[d]); // t_{-d}
    }
    return ComplexPolynomial(std::move(coefficients));
}

struct RootSelection {
    static constexpr double circle_tolerance = 1e-6;
    // Candidates this close together are one root split by rounding (a double root of q on the circle).
    static constexpr double merge_distance = 1e-3;
};

struct RootCluster {
    Complex     centroid;
    std::size_t multiplicity = 1;
};

namespace detail {

inline Complex horner(std::span<const Complex> c, Complex y) {
    Complex acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) {
        acc = acc * y + *it;
    }
    return acc;
}

/// Roots greedily merged into clusters; clusters with |centroid| <= 1 + tol, sorted by distance to the circle then phase.
inline std::vector<RootCluster> candidate_clusters(std::span<const Complex> all_roots) {
    std::vector<bool>        used(all_roots.size(), false);
    std::vector<RootCluster> clusters;
    for (std::size_t i = 0; i < all_roots.size(); ++i) {
        if (used[i]) {
            continue;
        }
        Complex     sum   = all_roots[i];
        std::size_t count = 1;
        for (std::size_t j = i + 1; j < all_roots.size(); ++j) {
            if (!used[j] && std::abs(all_roots[j] - all_roots[i]) < RootSelection::merge_distance) {
                used[j] = true;
                sum += all_roots[j];
                ++count;
            }
        }
        const Complex centroid = sum / static_cast<double>(count);
        // a merged pair straddles the circle, so its centroid may sit just outside
        const double limit = count > 1 ? RootSelection::merge_distance : RootSelection::circle_tolerance;
        if (std::abs(centroid) <= 1.0 + limit) {
            clusters.push_back({centroid, count});
        }
    }
    std::ranges::stable_sort(clusters, [](const RootCluster& a, const RootCluster& b) {
        const double da = std::abs(1.0 - std::abs(a.centroid));
        const double db = std::abs(1.0 - std::abs(b.centroid));
        if (da != db) {
            return da < db;
        }
        return std::arg(a.centroid) < std::arg(b.centroid);
    });
    return clusters;
}

/// Newton on q' from a cluster centroid: a double root of q is a simple root of q'.
inline Complex polish_double_root(const ComplexPolynomial& q, Complex start) {
    const std::vector<Complex> d1 = q.derivative_coefficients();
    const std::vector<Complex> d2 = ComplexPolynomial(d1.size() > 1 ? d1 : std::vector<Complex>{1.0}).derivative_coefficients();
    Complex                    z  = start;
    for (int iteration = 0; iteration < 50; ++iteration) {
        const Complex slope = horner(d2, z);
        if (slope == 0.0) {
            break;
        }
        const Complex step = horner(d1, z) / slope;
        z -= step;
        if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(z)) {
            break;
        }
    }
    return (std::isfinite(z.real()) && std::isfinite(z.imag()) && std::abs(z - start) < RootSelection::merge_distance) ? z : start;
}

} // namespace detail

/**
 * Keeps roots with |y| <= 1 + 1e-6 and returns the K closest to the unit circle,
 * ordered by distance to the circle with ties broken by ascending phase. Roots closer
 * than RootSelection::merge_distance are first merged into their centroid, which
 * recovers a double root on the circle split by rounding (radially or along the circle);
 * such a centroid is kept when within merge_distance of the circle.
 */
[[nodiscard]] inline std::vector<Complex> select_roots(std::span<const Complex> all_roots, std::size_t count) {
    const auto clusters = detail::candidate_clusters(all_roots);
    if (clusters.size() < count) {
        throw Error(ErrorCode::insufficient_roots, "fewer than K roots inside the unit circle");
    }
    std::vector<Complex> selected;
    for (std::size_t k = 0; k < count; ++k) {
        selected.push_back(clusters[k].centroid);
    }
    return selected;
}

/// select_roots, with merged clusters refined as double roots of q.
[[nodiscard]] inline std::vector<Complex> select_roots(const ComplexPolynomial& q, std::span<const Complex> all_roots, std::size_t count) {
    const auto clusters = detail::candidate_clusters(all_roots);
    if (clusters.size() < count) {
        throw Error(ErrorCode::insufficient_roots, "fewer than K roots inside the unit circle");
    }
    std::vector<Complex> selected;
    for (std::size_t k = 0; k < count; ++k) {
        selected.push_back(clusters[k].multiplicity > 1 ? detail::polish_double_root(q, clusters[k].centroid) : clusters[k].centroid);
    }
    return selected;
}

struct UnwrappedMean {
    double    mean        = 0.0;
    long long integer     = 0; // l in mean = angle / T_e + l 2 pi / T_e
    bool      in_interval = true;
};

/**
 * Maps each root to angle(y) / T_e + l 2 pi / T_e with l the integer placing it in
 * [z_min, z_max]. When no integer does, the value closest to the interval is returned
 * and flagged (never clamped). Two integers inside raises ErrorCode::ambiguity.
 */
[[nodiscard]] inline std::vector<UnwrappedMean> unwrap_means(std::span<const Complex> roots, double period, double z_min, double z_max) {
    detail::require(period > 0.0, ErrorCode::invalid_argument, "sampling period must be positive");
    detail::require(z_max >= z_min, ErrorCode::invalid_argument, "interval bounds are reversed");
    const double span = 2.0 * std::numbers::pi / period;

    std::vector<UnwrappedMean> out;
    out.reserve(roots.size());
    for (const Complex& y : roots) {
        const double base = std::arg(y) / period;
        const auto   low  = static_cast<long long>(std::floor((z_min - base) / span)) - 1;
        const auto   high = static_cast<long long>(std::ceil((z_max - base) / span)) + 1;

        int           strictly_inside = 0;
        UnwrappedMean best{0.0, 0, false};
        double        best_distance = std::numeric_limits<double>::infinity();
        for (long long l = low; l <= high; ++l) {
            const double value = base + static_cast<double>(l) * span;
            if (value > z_min && value < z_max) {
                ++strictly_inside;
            }
            const double distance = value < z_min ? z_min - value : (value > z_max ? value - z_max : 0.0);
            if (distance < best_distance || (distance == best_distance && std::llabs(l) < std::llabs(best.integer))) {
                best_distance = distance;
                best          = {value, l, distance == 0.0};
            }
        }
        if (strictly_inside > 1) {
            throw Error(ErrorCode::ambiguity, "sampling period admits two unwrapped means inside the interval");
        }
        out.push_back(best);
    }
    return out;
}

struct EstimationResult {
    std::vector<double>    means;       // ascending
    std::vector<Complex>   roots;       // paired with means
    std::vector<long long> unwrap_integers;
    std::vector<bool>      in_interval;
    std::vector<double>    eigenvalue_spectrum; // descending, all M
    double                 period = 0.0;
    double                 z_min  = 0.0;
    double                 z_max  = 0.0;

    [[nodiscard]] bool all_in_interval() const noexcept { return std::ranges::all_of(in_interval, [](bool b) { return b; }); }
};

[[nodiscard]] inline std::size_t default_order(std::size_t components) noexcept { return 2 * components; }

/// Means from given CF samples: R_M, noise subspace, q(y), root selection, unwrap into [z_min, z_max].
[[nodiscard]] inline EstimationResult estimate_means(const CfSamples& cf, std::size_t components, double z_min, double z_max) {
    detail::require(components >= 1, ErrorCode::invalid_argument, "K must be >= 1");
    detail::require(cf.size() > components, ErrorCode::order, "M must exceed K");
    const SubspaceDecomposition subspace = decompose(build_rm(cf), components);
    const ComplexPolynomial     q        = noise_polynomial(subspace);
    const std::vector<Complex>  all      = roots(q);
    const std::vector<Complex>  selected = select_roots(q, all, components);
    const auto                  unwrapped = unwrap_means(selected, cf.period(), z_min, z_max);

    std::vector<std::size_t> order(components);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) { return unwrapped[a].mean < unwrapped[b].mean; });

    EstimationResult result;
    result.eigenvalue_spectrum = subspace.eigenvalues;
    result.period              = cf.period();
    result.z_min               = z_min;
    result.z_max               = z_max;
    for (const std::size_t k : order) {
        result.means.push_back(unwrapped[k].mean);
        result.roots.push_back(selected[k]);
        result.unwrap_integers.push_back(unwrapped[k].integer);
        result.in_interval.push_back(unwrapped[k].in_interval);
    }
    return result;
}

/// Full pipeline from observations. M defaults to 2K when zero.
[[nodiscard]] inline EstimationResult estimate_means(const ObservationSet& obs, std::size_t components, std::size_t order = 0) {
    if (order == 0) {
        order = default_order(components);
    }
    detail::require(components >= 1, ErrorCode::invalid_argument, "K must be >= 1");
    detail::require(order > components, ErrorCode::order, "M must exceed K");
    const double period = sampling_period(obs);
    return estimate_means(empirical_cf(obs, period, order), components, obs.min(), obs.max());
}

/// Descending eigenvalues of R_M; a model-order diagnostic that needs no K.
[[nodiscard]] inline std::vector<double> eigenvalue_spectrum(const CfSamples& cf) {
    detail::require(cf.size() >= 2, ErrorCode::invalid_argument, "spectrum needs M >= 2");
    return eigh(build_rm(cf).dense()).eigenvalues;
}

[[nodiscard]] inline std::vector<double> eigenvalue_spectrum(const ObservationSet& obs, std::size_t order) {
    detail::require(order >= 2, ErrorCode::invalid_argument, "spectrum needs M >= 2");
    return eigenvalue_spectrum(empirical_cf(obs, sampling_period(obs), order));
}

inline void write_spectrum_csv(std::ostream& os, std::span<const double> spectrum) {
    os << "m,eigenvalue\n";
    for (std::size_t m = 0; m < spectrum.size(); ++m) {
        os << m << ',' << format_real(spectrum[m]) << '\n';
    }
}

/// Two sections: "k,mean,root_re,root_im,unwrap_integer,in_interval" then the spectrum.
inline void write_csv(std::ostream& os, const EstimationResult& result) {
    os << "k,mean,root_re,root_im,unwrap_integer,in_interval\n";
    for (std::size_t k = 0; k < result.means.size(); ++k) {
        os << k << ',' << format_real(result.means[k]) << ',' << format_real(result.roots[k].real()) << ',' << format_real(result.roots[k].imag()) << ','
           << result.unwrap_integers[k] << ',' << (result.in_interval[k] ? 1 : 0) << '\n';
    }
    os << '\n';
    write_spectrum_csv(os, result.eigenvalue_spectrum);
}

inline void write_report(std::ostream& os, const EstimationResult& result) {
    os << "components: " << result.means.size() << '\n';
    os << "sampling period: " << format_real(result.period) << '\n';
    os << "unwrap interval: [" << format_real(result.z_min) << ", " << format_real(result.z_max) << "]\n";
    os << "means:\n";
    for (std::size_t k = 0; k < result.means.size(); ++k) {
        os << "  " << format_real(result.means[k]) << "  |root| = " << format_real(std::abs(result.roots[k])) << "  l = " << result.unwrap_integers[k]
           << (result.in_interval[k] ? "" : "  (outside interval)") << '\n';
    }
    os << "eigenvalues:\n";
    for (const double lambda : result.eigenvalue_spectrum) {
        os << "  " << format_real(lambda) << '\n';
    }
}

} // namespace cfmusic
