#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "error.hpp"

// Dense kernels sized for orders up to ~64: a cyclic complex Jacobi eigensolver
// and an Aberth-Ehrlich polynomial root finder.

namespace cfmusic {

using Complex = std::complex<double>;

/// Row-major dense complex matrix.
class ComplexMatrix {
public:
    ComplexMatrix() = default;
    ComplexMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

    [[nodiscard]] static ComplexMatrix identity(std::size_t n) {
        ComplexMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            m(i, i) = 1.0;
        }
        return m;
    }

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }

    Complex&       operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    const Complex& operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    [[nodiscard]] std::vector<Complex> column(std::size_t c) const {
        std::vector<Complex> out(rows_);
        for (std::size_t r = 0; r < rows_; ++r) {
            out[r] = (*this)(r, c);
        }
        return out;
    }

    [[nodiscard]] ComplexMatrix adjoint() const {
        ComplexMatrix out(cols_, rows_);
        for (std::size_t r = 0; r < rows_; ++r) {
            for (std::size_t c = 0; c < cols_; ++c) {
                out(c, r) = std::conj((*this)(r, c));
            }
        }
        return out;
    }

    [[nodiscard]] double frobenius_norm() const {
        double sum = 0.0;
        for (const Complex& x : data_) {
            sum += std::norm(x);
        }
        return std::sqrt(sum);
    }

    [[nodiscard]] double max_abs() const {
        double m = 0.0;
        for (const Complex& x : data_) {
            m = std::max(m, std::abs(x));
        }
        return m;
    }

    friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
        detail::require(a.cols_ == b.rows_, ErrorCode::length_mismatch, "matrix product shape mismatch");
        ComplexMatrix out(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i) {
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const Complex aik = a(i, k);
                for (std::size_t j = 0; j < b.cols_; ++j) {
                    out(i, j) += aik * b(k, j);
                }
            }
        }
        return out;
    }

    friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) {
        detail::require(a.rows_ == b.rows_ && a.cols_ == b.cols_, ErrorCode::length_mismatch, "matrix sum shape mismatch");
        for (std::size_t i = 0; i < a.data_.size(); ++i) {
            a.data_[i] += b.data_[i];
        }
        return a;
    }

    friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) {
        detail::require(a.rows_ == b.rows_ && a.cols_ == b.cols_, ErrorCode::length_mismatch, "matrix difference shape mismatch");
        for (std::size_t i = 0; i < a.data_.size(); ++i) {
            a.data_[i] -= b.data_[i];
        }
        return a;
    }

    friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

private:
    std::size_t          rows_ = 0;
    std::size_t          cols_ = 0;
    std::vector<Complex> data_;
};

/// Square matrix validated as Hermitian on construction.
class HermitianMatrix {
public:
    /// Rejects non-square input and any |a_jl - conj(a_lj)| above tolerance * max(1, max|a|).
    explicit HermitianMatrix(ComplexMatrix entries, double tolerance = 1e-12) : entries_(std::move(entries)) {
        detail::require(entries_.rows() == entries_.cols(), ErrorCode::invalid_argument, "Hermitian matrix must be square");
        detail::require(entries_.rows() >= 1, ErrorCode::invalid_argument, "Hermitian matrix must have order >= 1");
        const double bound = tolerance * std::max(1.0, entries_.max_abs());
        for (std::size_t j = 0; j < order(); ++j) {
            for (std::size_t l = j; l < order(); ++l) {
                if (std::abs(entries_(j, l) - std::conj(entries_(l, j))) > bound) {
                    throw Error(ErrorCode::invalid_argument, "matrix is not Hermitian");
                }
            }
        }
    }

    [[nodiscard]] std::size_t          order() const noexcept { return entries_.rows(); }
    [[nodiscard]] const Complex&       operator()(std::size_t j, std::size_t l) const noexcept { return entries_(j, l); }
    [[nodiscard]] const ComplexMatrix& matrix() const noexcept { return entries_; }

private:
    ComplexMatrix entries_;
};

/// Eigenvalues sorted descending; column j of `eigenvectors` pairs with eigenvalue j.
struct EigenDecomposition {
    std::vector<double> eigenvalues;
    ComplexMatrix       eigenvectors;
};

/**
 * Full eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.
 *
 * Each rotation first removes the phase of a_pq with a diagonal unitary, then applies
 * the real symmetric Jacobi rotation. The rotation budget is 30 * M^2; exceeding it
 * raises ErrorCode::non_convergence.
 */
[[nodiscard]] inline EigenDecomposition eigh(const HermitianMatrix& input) {
    const std::size_t n = input.order();
    ComplexMatrix     a = input.matrix();
    // exact Hermitian symmetry inside the iteration
    for (std::size_t j = 0; j < n; ++j) {
        a(j, j) = a(j, j).real();
        for (std::size_t l = j + 1; l < n; ++l) {
            const Complex mean = 0.5 * (a(j, l) + std::conj(a(l, j)));
            a(j, l)            = mean;
            a(l, j)            = std::conj(mean);
        }
    }
    ComplexMatrix v = ComplexMatrix::identity(n);

    const double scale     = a.frobenius_norm();
    const double eps       = std::numeric_limits<double>::epsilon();
    const double stop      = eps * static_cast<double>(n) * scale;
    const double skip      = eps * scale / static_cast<double>(n);
    const auto   budget    = 30 * n * n;
    std::size_t  rotations = 0;

    auto off_diagonal = [&] {
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t l = j + 1; l < n; ++l) {
                sum += 2.0 * std::norm(a(j, l));
            }
        }
        return std::sqrt(sum);
    };

    while (off_diagonal() > stop) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double g = std::abs(a(p, q));
                if (g <= skip) {
                    continue;
                }
                if (++rotations > budget) {
                    throw Error(ErrorCode::non_convergence, "Jacobi eigensolver exceeded its rotation budget");
                }
                const Complex phase = a(p, q) / g;
                const double  tau   = (a(q, q).real() - a(p, p).real()) / (2.0 * g);
                const double  t     = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double  c     = 1.0 / std::sqrt(1.0 + t * t);
                const double  s     = t * c;
                // U restricted to (p, q): [[c, s], [-s conj(phase), c conj(phase)]]
                const Complex upp = c;
                const Complex upq = s;
                const Complex uqp = -s * std::conj(phase);
                const Complex uqq = c * std::conj(phase);

                for (std::size_t k = 0; k < n; ++k) { // A <- A U
                    const Complex akp = a(k, p);
                    const Complex akq = a(k, q);
                    a(k, p)           = akp * upp + akq * uqp;
                    a(k, q)           = akp * upq + akq * uqq;
                }
                for (std::size_t k = 0; k < n; ++k) { // A <- U^H A
                    const Complex apk = a(p, k);
                    const Complex aqk = a(q, k);
                    a(p, k)           = std::conj(upp) * apk + std::conj(uqp) * aqk;
                    a(q, k)           = std::conj(upq) * apk + std::conj(uqq) * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) { // V <- V U
                    const Complex vkp = v(k, p);
                    const Complex vkq = v(k, q);
                    v(k, p)           = vkp * upp + vkq * uqp;
                    v(k, q)           = vkp * upq + vkq * uqq;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) = a(p, p).real();
                a(q, q) = a(q, q).real();
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x).real() > a(y, y).real(); });

    EigenDecomposition result{std::vector<double>(n), ComplexMatrix(n, n)};
    for (std::size_t j = 0; j < n; ++j) {
        result.eigenvalues[j] = a(order[j], order[j]).real();
        for (std::size_t r = 0; r < n; ++r) {
            result.eigenvectors(r, j) = v(r, order[j]);
        }
    }
    return result;
}

/// Polynomial c_0 + c_1 y + ... + c_D y^D with trailing near-zero coefficients trimmed.
class ComplexPolynomial {
public:
    static constexpr double trim_threshold = 1e-14;

    explicit ComplexPolynomial(std::vector<Complex> coefficients) : coefficients_(std::move(coefficients)) {
        double largest = 0.0;
        for (const Complex& c : coefficients_) {
            largest = std::max(largest, std::abs(c));
        }
        detail::require(largest > 0.0, ErrorCode::invalid_argument, "polynomial has no nonzero coefficient");
        while (std::abs(coefficients_.back()) <= trim_threshold * largest) {
            coefficients_.pop_back();
        }
    }

    [[nodiscard]] std::size_t               degree() const noexcept { return coefficients_.size() - 1; }
    [[nodiscard]] std::span<const Complex> coefficients() const noexcept { return coefficients_; }

    [[nodiscard]] double max_abs_coefficient() const noexcept {
        double m = 0.0;
        for (const Complex& c : coefficients_) {
            m = std::max(m, std::abs(c));
        }
        return m;
    }

    /// Derivative; the derivative of a constant is the zero-degree polynomial 0 (kept untrimmed).
    [[nodiscard]] std::vector<Complex> derivative_coefficients() const {
        std::vector<Complex> out;
        for (std::size_t j = 1; j < coefficients_.size(); ++j) {
            out.push_back(static_cast<double>(j) * coefficients_[j]);
        }
        if (out.empty()) {
            out.push_back(0.0);
        }
        return out;
    }

    [[nodiscard]] Complex operator()(Complex y) const noexcept {
        Complex acc = 0.0;
        for (auto it = coefficients_.rbegin(); it != coefficients_.rend(); ++it) {
            acc = acc * y + *it;
        }
        return acc;
    }

private:
    std::vector<Complex> coefficients_;
};

/**
 * All D roots (with multiplicity) by Aberth-Ehrlich simultaneous iteration.
 *
 * Leading coefficients below the trim threshold are split off as roots at zero. The
 * remaining roots start on a circle whose radius is the geometric mean of the Cauchy
 * lower and upper root bounds. Budget: 200 sweeps, else ErrorCode::non_convergence.
 */
[[nodiscard]] inline std::vector<Complex> roots(const ComplexPolynomial& polynomial) {
    detail::require(polynomial.degree() >= 1, ErrorCode::invalid_argument, "root finding needs degree >= 1");

    const auto   all     = polynomial.coefficients();
    const double largest = polynomial.max_abs_coefficient();

    std::size_t zeros = 0;
    while (std::abs(all[zeros]) <= ComplexPolynomial::trim_threshold * largest) {
        ++zeros;
    }
    std::vector<Complex> result(zeros, Complex{0.0, 0.0});

    const std::span<const Complex> c = all.subspan(zeros);
    const std::size_t              d = c.size() - 1;
    if (d == 0) {
        return result;
    }
    if (d == 1) {
        result.push_back(-c[0] / c[1]);
        return result;
    }

    double upper_ratio = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        upper_ratio = std::max(upper_ratio, std::abs(c[j] / c[d]));
    }
    double lower_ratio = 0.0;
    for (std::size_t j = 1; j <= d; ++j) {
        lower_ratio = std::max(lower_ratio, std::abs(c[j] / c[0]));
    }
    const double upper  = 1.0 + upper_ratio;
    const double lower  = 1.0 / (1.0 + lower_ratio);
    const double radius = std::sqrt(lower * upper);

    std::vector<Complex> z(d);
    for (std::size_t k = 0; k < d; ++k) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(d) + 0.4;
        z[k]               = std::polar(radius, angle);
    }

    std::vector<double> abs_c(c.size());
    std::ranges::transform(c, abs_c.begin(), [](const Complex& x) { return std::abs(x); });

    const double      eps = std::numeric_limits<double>::epsilon();
    std::vector<bool> done(d, false);
    constexpr int     max_sweeps = 200;
    bool              converged  = false;
    for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        for (std::size_t k = 0; k < d; ++k) {
            if (done[k]) {
                continue;
            }
            Complex      p     = c[d];
            Complex      dp    = 0.0;
            double       bound = abs_c[d];
            const double r     = std::abs(z[k]);
            for (std::size_t j = d; j-- > 0;) {
                dp    = dp * z[k] + p;
                p     = p * z[k] + c[j];
                bound = bound * r + abs_c[j];
            }
            if (std::abs(p) <= 8.0 * eps * bound) {
                done[k] = true;
                continue;
            }
            Complex repulsion = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                if (j != k) {
                    repulsion += 1.0 / (z[k] - z[j]);
                }
            }
            const Complex step = p / (dp - p * repulsion);
            z[k] -= step;
            if (std::abs(step) <= 2.0 * eps * std::abs(z[k])) {
                done[k] = true;
            }
        }
        converged = std::ranges::all_of(done, [](bool b) { return b; });
    }
    if (!converged) {
        throw Error(ErrorCode::non_convergence, "Aberth iteration exceeded its sweep budget");
    }
    result.insert(result.end(), z.begin(), z.end());
    return result;
}

} // namespace cfmusic
