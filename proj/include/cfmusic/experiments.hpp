#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>
#include <vector>

#include "cf.hpp"
#include "em.hpp"
#include "error.hpp"
#include "format.hpp"
#include "mixture.hpp"
#include "random.hpp"
#include "spectral.hpp"

// Monte Carlo harness over the four six-component benchmark mixtures.

namespace cfmusic {

/// Six components with means (0, 1, 2, 4, 5, 6); `id` selects the variance/weight pattern.
struct Scenario {
    int    id    = 1;
    double sigma = 0.1;

    [[nodiscard]] GaussianMixture mixture() const {
        detail::require(id >= 1 && id <= 4, ErrorCode::invalid_argument, "scenario id must be 1, 2, 3 or 4");
        detail::require(std::isfinite(sigma) && sigma >= 0.0, ErrorCode::invalid_argument, "sigma must be >= 0");
        static constexpr std::array<double, 6> means{0.0, 1.0, 2.0, 4.0, 5.0, 6.0};
        static constexpr std::array<double, 6> uneven_weights{0.2, 0.2, 0.1, 0.2, 0.2, 0.1};
        const bool                             halved_variances = id == 2 || id == 4;
        const bool                             uneven           = id == 3 || id == 4;
        std::vector<Component>                 components;
        for (std::size_t k = 0; k < means.size(); ++k) {
            const double variance = (halved_variances && k % 2 == 1) ? sigma * sigma / 2.0 : sigma * sigma;
            const double weight   = uneven ? uneven_weights[k] : 1.0 / 6.0;
            components.push_back({weight, means[k], std::sqrt(variance)});
        }
        return GaussianMixture::renormalized(std::move(components));
    }
};

enum class Estimator { spectral, em_standard, em_constrained };

[[nodiscard]] constexpr std::string_view to_string(Estimator e) noexcept {
    switch (e) {
    case Estimator::spectral: return "spectral";
    case Estimator::em_standard: return "em_standard";
    case Estimator::em_constrained: return "em_constrained";
    }
    return "unknown";
}

[[nodiscard]] inline std::optional<Estimator> parse_estimator(std::string_view name) {
    if (name == "spectral") {
        return Estimator::spectral;
    }
    if (name == "em_standard" || name == "em") {
        return Estimator::em_standard;
    }
    if (name == "em_constrained" || name == "em_c") {
        return Estimator::em_constrained;
    }
    return std::nullopt;
}

/// e_r = || sort(a) - sort(a_hat) ||_inf
[[nodiscard]] inline double error_criterion(std::span<const double> truth, std::span<const double> estimate) {
    detail::require(truth.size() == estimate.size(), ErrorCode::length_mismatch, "true and estimated means differ in length");
    std::vector<double> a(truth.begin(), truth.end());
    std::vector<double> b(estimate.begin(), estimate.end());
    std::ranges::sort(a);
    std::ranges::sort(b);
    double worst = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        worst = std::max(worst, std::abs(a[k] - b[k]));
    }
    return worst;
}

struct RunRecord {
    int                       scenario = 1;
    double                    sigma    = 0.0;
    std::size_t               run      = 0;
    std::uint64_t             seed     = 0;
    Estimator                 estimator = Estimator::spectral;
    double                    error     = std::numeric_limits<double>::infinity(); // +inf when failed
    bool                      failed    = true;
    std::chrono::nanoseconds  wall_time{0};

    /// Compares everything except wall time.
    [[nodiscard]] bool same_outcome(const RunRecord& o) const noexcept {
        return std::tie(scenario, sigma, run, seed, estimator, failed) == std::tie(o.scenario, o.sigma, o.run, o.seed, o.estimator, o.failed) &&
               (error == o.error || (std::isinf(error) && std::isinf(o.error)));
    }
};

struct CampaignConfig {
    std::vector<int>       scenarios{1};
    std::vector<double>    sigmas{0.05, 0.10, 0.15, 0.20, 0.25};
    std::size_t            runs_per_cell = 500;
    std::size_t            observations  = 200;
    std::size_t            order         = 12; // M, 2K for the six-component scenarios
    std::vector<Estimator> estimators{Estimator::spectral, Estimator::em_constrained};
    std::uint64_t          base_seed      = 0;
    std::size_t            em_iterations  = 100;
};

[[nodiscard]] inline std::uint64_t run_seed(std::uint64_t base_seed, int scenario, double sigma, std::size_t run) {
    return derive_seed(base_seed, {static_cast<std::uint64_t>(scenario), std::bit_cast<std::uint64_t>(sigma), static_cast<std::uint64_t>(run)});
}

namespace detail {

inline RunRecord run_estimator(const ObservationSet& obs, const GaussianMixture& truth, Estimator estimator, const CampaignConfig& config, std::uint64_t seed) {
    RunRecord  record;
    const auto start      = std::chrono::steady_clock::now();
    const auto true_means = truth.means();
    try {
        std::vector<double> estimate;
        if (estimator == Estimator::spectral) {
            estimate = estimate_means(obs, truth.size(), config.order).means;
        } else {
            EmConfig em;
            em.components     = truth.size();
            em.max_iterations = config.em_iterations;
            em.variant        = estimator == Estimator::em_standard ? EmVariant::standard : EmVariant::constrained;
            em.seed           = derive_seed(seed, {0x454dULL});
            estimate          = em_fit(obs, em).means;
        }
        record.error  = error_criterion(true_means, estimate);
        record.failed = false;
    } catch (const Error&) {
        record.error  = std::numeric_limits<double>::infinity();
        record.failed = true;
    }
    record.wall_time = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start);
    return record;
}

} // namespace detail

/**
 * Runs every (scenario, sigma, run) cell with each requested estimator on the same data.
 *
 * Records are ordered by (scenario, sigma, run, estimator) in the order given in the
 * config. Seeds depend only on (base_seed, scenario, sigma, run), so the output does not
 * depend on `jobs`. jobs == 0 uses the hardware concurrency.
 */
[[nodiscard]] inline std::vector<RunRecord> run_campaign(const CampaignConfig& config, std::size_t jobs = 1) {
    detail::require(config.runs_per_cell >= 1, ErrorCode::invalid_argument, "runs per cell must be >= 1");
    detail::require(config.observations >= 2, ErrorCode::invalid_argument, "N must be >= 2");
    detail::require(!config.estimators.empty(), ErrorCode::invalid_argument, "no estimator requested");

    struct Task {
        Scenario    scenario;
        std::size_t run;
    };
    std::vector<Task>            tasks;
    std::vector<GaussianMixture> models;
    for (const int id : config.scenarios) {
        for (const double sigma : config.sigmas) {
            const Scenario scenario{id, sigma};
            models.push_back(scenario.mixture()); // validates up front
            for (std::size_t run = 0; run < config.runs_per_cell; ++run) {
                tasks.push_back({scenario, run});
            }
        }
    }

    const std::size_t      per_task = config.estimators.size();
    std::vector<RunRecord> records(tasks.size() * per_task);

    auto execute = [&](std::size_t index) {
        const Task&           task  = tasks[index];
        const GaussianMixture model = task.scenario.mixture();
        const std::uint64_t   seed  = run_seed(config.base_seed, task.scenario.id, task.scenario.sigma, task.run);
        const ObservationSet  obs   = sample(model, config.observations, seed);
        for (std::size_t e = 0; e < per_task; ++e) {
            RunRecord record = detail::run_estimator(obs, model, config.estimators[e], config, seed);
            record.scenario  = task.scenario.id;
            record.sigma     = task.scenario.sigma;
            record.run       = task.run;
            record.seed      = seed;
            record.estimator = config.estimators[e];
            records[index * per_task + e] = record;
        }
    };

    if (jobs == 0) {
        jobs = std::max(1U, std::thread::hardware_concurrency());
    }
    jobs = std::min(jobs, tasks.size());
    if (jobs <= 1) {
        for (std::size_t i = 0; i < tasks.size(); ++i) {
            execute(i);
        }
        return records;
    }
    std::atomic<std::size_t> next{0};
    {
        std::vector<std::jthread> workers;
        for (std::size_t w = 0; w < jobs; ++w) {
            workers.emplace_back([&] {
                for (std::size_t i = next++; i < tasks.size(); i = next++) {
                    execute(i);
                }
            });
        }
    }
    return records;
}

struct SummaryRow {
    int         scenario  = 1;
    double      sigma     = 0.0;
    Estimator   estimator = Estimator::spectral;
    double      threshold = 0.1;
    std::size_t runs      = 0;
    std::size_t successes = 0; // e_r < threshold, failed runs never count
    std::size_t failures  = 0;
    double      median_error = 0.0;

    [[nodiscard]] double probability() const noexcept { return runs == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(runs); }
};

[[nodiscard]] inline double median(std::vector<double> values) {
    detail::require(!values.empty(), ErrorCode::invalid_argument, "median of an empty set");
    std::ranges::sort(values);
    const std::size_t mid = values.size() / 2;
    if (values.size() % 2 == 1) {
        return values[mid];
    }
    const double lo = values[mid - 1];
    const double hi = values[mid];
    return std::isinf(hi) ? hi : 0.5 * (lo + hi);
}

/// One row per (scenario, sigma, estimator) cell and threshold, in first-appearance order.
[[nodiscard]] inline std::vector<SummaryRow> summarize(std::span<const RunRecord> records, std::span<const double> thresholds) {
    detail::require(!records.empty(), ErrorCode::invalid_argument, "no records to summarize");
    using Key = std::tuple<int, double, Estimator>;
    std::vector<Key>                         order;
    std::map<Key, std::vector<const RunRecord*>> cells;
    for (const RunRecord& r : records) {
        const Key key{r.scenario, r.sigma, r.estimator};
        auto [it, inserted] = cells.try_emplace(key);
        if (inserted) {
            order.push_back(key);
        }
        it->second.push_back(&r);
    }

    std::vector<SummaryRow> rows;
    for (const Key& key : order) {
        const auto&         cell = cells.at(key);
        std::vector<double> errors;
        std::size_t         failures = 0;
        for (const RunRecord* r : cell) {
            errors.push_back(r->failed ? std::numeric_limits<double>::infinity() : r->error);
            failures += r->failed ? 1 : 0;
        }
        const double med = median(errors);
        for (const double tau : thresholds) {
            SummaryRow row;
            std::tie(row.scenario, row.sigma, row.estimator) = key;
            row.threshold                                     = tau;
            row.runs                                          = cell.size();
            row.failures                                      = failures;
            row.median_error                                  = med;
            row.successes = static_cast<std::size_t>(std::ranges::count_if(errors, [tau](double e) { return e < tau; }));
            rows.push_back(row);
        }
    }
    return rows;
}

inline const std::vector<double> default_thresholds{0.1, 0.2};

/// runs.csv. Wall time is non-deterministic and only written on request.
inline void write_runs_csv(std::ostream& os, std::span<const RunRecord> records, bool include_wall_time = false) {
    os << "scenario,sigma,run,seed,estimator,e_r,failed";
    os << (include_wall_time ? ",wall_time_ns\n" : "\n");
    for (const RunRecord& r : records) {
        os << r.scenario << ',' << format_real(r.sigma) << ',' << r.run << ',' << r.seed << ',' << to_string(r.estimator) << ',' << format_real(r.error) << ','
           << (r.failed ? 1 : 0);
        if (include_wall_time) {
            os << ',' << r.wall_time.count();
        }
        os << '\n';
    }
}

inline void write_summary_csv(std::ostream& os, std::span<const SummaryRow> rows) {
    os << "scenario,sigma,estimator,threshold,runs,successes,probability,failures,median_e_r\n";
    for (const SummaryRow& r : rows) {
        os << r.scenario << ',' << format_real(r.sigma) << ',' << to_string(r.estimator) << ',' << format_real(r.threshold) << ',' << r.runs << ',' << r.successes << ','
           << format_real(r.probability()) << ',' << r.failures << ',' << format_real(r.median_error) << '\n';
    }
}

/// Spectrum of R_M for one sampled dataset.
[[nodiscard]] inline std::vector<double> eigen_study(const Scenario& scenario, std::size_t observations, std::size_t order, std::uint64_t seed) {
    const ObservationSet obs = sample(scenario.mixture(), observations, seed);
    return eigenvalue_spectrum(obs, order);
}

/// Spectrum of R_M built from the analytic CF, T_e taken from the span of the true means.
[[nodiscard]] inline std::vector<double> analytic_eigen_study(const Scenario& scenario, std::size_t order) {
    const GaussianMixture model = scenario.mixture();
    const auto            means = model.means();
    const auto [lo, hi]         = std::ranges::minmax_element(means);
    return eigenvalue_spectrum(analytic_cf(model, sampling_period(*lo, *hi), order));
}

} // namespace cfmusic
