#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace cfmusic {

/// SplitMix64 finalizer. Used to derive independent stream seeds from structured keys.
[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30U)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27U)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31U);
}

/// Folds a path of keys into a seed: derive_seed(base, {scenario, sigma_bits, run}).
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t state = splitmix64(base);
    for (const std::uint64_t key : path) {
        state = splitmix64(state ^ splitmix64(key + 0x632be59bd9b4e019ULL));
    }
    return state;
}

/**
 * Seeded random source with platform-independent output.
 *
 * std::mt19937_64 is bit-exact by the standard; the standard distributions are not,
 * so uniform and normal variates are produced here (53-bit mantissa uniform and
 * Marsaglia's polar method). Streams are split with split(), never shared.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11U) * 0x1.0p-53; }

    double uniform(double low, double high) { return low + (high - low) * uniform(); }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u = 0.0;
        double v = 0.0;
        double s = 0.0;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double factor = std::sqrt(-2.0 * std::log(s) / s);
        spare_              = v * factor;
        has_spare_          = true;
        return u * factor;
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    /// Independent child stream; advances this stream by one draw.
    [[nodiscard]] Rng split(std::uint64_t stream) { return Rng(derive_seed(engine_(), {stream})); }

private:
    std::mt19937_64 engine_;
    double          spare_     = 0.0;
    bool            has_spare_ = false;
};

} // namespace cfmusic
