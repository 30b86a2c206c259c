// cfmusic: spectral (root-MUSIC on the empirical CF) and EM estimation of Gaussian mixture means.

#include <CLI11.hpp>

#include <cfmusic/cf.hpp>
#include <cfmusic/em.hpp>
#include <cfmusic/error.hpp>
#include <cfmusic/experiments.hpp>
#include <cfmusic/io.hpp>
#include <cfmusic/mixture.hpp>
#include <cfmusic/spectral.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;
using namespace cfmusic;

constexpr int exit_ok         = 0;
constexpr int exit_usage      = 2;
constexpr int exit_estimation = 3;

int exit_code_for(ErrorCode code) {
    switch (code) {
    case ErrorCode::degenerate_component:
    case ErrorCode::non_convergence:
    case ErrorCode::insufficient_roots:
    case ErrorCode::ambiguity: return exit_estimation;
    default: return exit_usage;
    }
}

std::ofstream open_output(const fs::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorCode::invalid_argument, "cannot write '" + path.string() + "'");
    }
    return out;
}

struct EstimateOptions {
    std::string input;
    std::size_t k = 1;
    std::size_t m = 0;
    std::string output;
};

struct EmOptions {
    std::string   input;
    std::size_t   k       = 1;
    std::string   variant = "standard";
    std::uint64_t seed    = 0;
    std::string   init    = "observations";
    std::size_t   max_iterations = 100;
    double        tolerance      = 1e-8;
    std::string   output;
};

struct SimulateOptions {
    std::vector<int>         scenarios{1};
    std::vector<double>      sigmas{0.05, 0.10, 0.15, 0.20, 0.25};
    std::size_t              runs = 500;
    std::size_t              n    = 200;
    std::size_t              m    = 12;
    std::vector<std::string> estimators{"spectral", "em_constrained"};
    std::uint64_t            seed  = 0;
    std::string              out_dir = ".";
    std::size_t              jobs    = 0;
    std::vector<double>      thresholds{0.1, 0.2};
    std::size_t              em_iterations = 100;
    bool                     wall_time     = false;
};

struct SpectrumOptions {
    int           scenario = 4;
    double        sigma    = 0.15;
    std::size_t   n        = 200;
    std::size_t   m        = 10;
    std::uint64_t seed     = 0;
    bool          analytic = false;
    std::string   output;
};

struct SampleOptions {
    std::string   mixture;
    int           scenario = 1;
    double        sigma    = 0.1;
    std::size_t   n        = 200;
    std::uint64_t seed     = 0;
    std::string   output;
};

int run_estimate(const EstimateOptions& o) {
    const ObservationSet   obs    = load_observations(o.input);
    const EstimationResult result = estimate_means(obs, o.k, o.m);
    write_report(std::cout, result);
    if (!o.output.empty()) {
        auto out = open_output(o.output);
        write_csv(out, result);
    }
    return exit_ok;
}

int run_em(const EmOptions& o) {
    const ObservationSet obs = load_observations(o.input);
    EmConfig             config;
    config.components               = o.k;
    config.max_iterations           = o.max_iterations;
    config.log_likelihood_tolerance = o.tolerance;
    config.variant                  = o.variant == "constrained" ? EmVariant::constrained : EmVariant::standard;
    config.seed                     = o.seed;
    config.initialization           = o.init == "uniform" ? EmInitialization::uniform_range : EmInitialization::random_observations;
    const EmFit fit                 = em_fit(obs, config);
    write_report(std::cout, fit);
    if (!o.output.empty()) {
        auto out = open_output(o.output);
        write_csv(out, fit);
    }
    return exit_ok;
}

int run_simulate(const SimulateOptions& o) {
    CampaignConfig config;
    config.scenarios     = o.scenarios;
    config.sigmas        = o.sigmas;
    config.runs_per_cell = o.runs;
    config.observations  = o.n;
    config.order         = o.m;
    config.base_seed     = o.seed;
    config.em_iterations = o.em_iterations;
    config.estimators.clear();
    for (const std::string& name : o.estimators) {
        const auto e = parse_estimator(name);
        if (!e) {
            throw Error(ErrorCode::invalid_argument, "unknown estimator '" + name + "'");
        }
        config.estimators.push_back(*e);
    }
    for (const int id : o.scenarios) {
        for (const double sigma : o.sigmas) {
            (void)Scenario{id, sigma}.mixture();
        }
    }
    detail::require(config.order > 6, ErrorCode::order, "M must exceed the six scenario components");

    const fs::path dir(o.out_dir);
    auto           runs_out    = open_output(dir / "runs.csv");
    auto           summary_out = open_output(dir / "summary.csv");

    const auto records = run_campaign(config, o.jobs);
    const auto rows    = summarize(records, o.thresholds);
    write_runs_csv(runs_out, records, o.wall_time);
    write_summary_csv(summary_out, rows);
    write_summary_csv(std::cout, rows);
    return exit_ok;
}

int run_spectrum(const SpectrumOptions& o) {
    const Scenario scenario{o.scenario, o.sigma};
    const auto     spectrum = o.analytic ? analytic_eigen_study(scenario, o.m) : eigen_study(scenario, o.n, o.m, o.seed);
    if (o.output.empty()) {
        write_spectrum_csv(std::cout, spectrum);
    } else {
        auto out = open_output(o.output);
        write_spectrum_csv(out, spectrum);
    }
    return exit_ok;
}

int run_sample(const SampleOptions& o) {
    const GaussianMixture model = o.mixture.empty() ? Scenario{o.scenario, o.sigma}.mixture() : load_mixture(o.mixture);
    const ObservationSet  obs   = sample(model, o.n, o.seed);
    if (o.output.empty()) {
        write_observations(std::cout, obs);
    } else {
        auto out = open_output(o.output);
        write_observations(out, obs);
    }
    return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Estimate Gaussian mixture means from the empirical characteristic function", "cfmusic"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();

    EstimateOptions estimate;
    auto*           estimate_cmd = app.add_subcommand("estimate", "Spectral estimate of the K component means of an observation file");
    estimate_cmd->add_option("-i,--input", estimate.input, "Observation file, one real per line")->required();
    estimate_cmd->add_option("-k,--k", estimate.k, "Number of components K")->required()->check(CLI::PositiveNumber);
    estimate_cmd->add_option("-m,--m", estimate.m, "Toeplitz matrix order M (0 means 2K)");
    estimate_cmd->add_option("-o,--output", estimate.output, "CSV output path (report always goes to stdout)");

    EmOptions em;
    auto*     em_cmd = app.add_subcommand("em", "Fit a K-component mixture by Expectation-Maximization");
    em_cmd->add_option("-i,--input", em.input, "Observation file, one real per line")->required();
    em_cmd->add_option("-k,--k", em.k, "Number of components K")->required()->check(CLI::PositiveNumber);
    em_cmd->add_option("--variant", em.variant, "standard or constrained (equal weights, pooled variance)")->check(CLI::IsMember({"standard", "constrained"}));
    em_cmd->add_option("--seed", em.seed, "Seed for the initial means");
    em_cmd->add_option("--init", em.init, "Initial means: observations (K distinct draws) or uniform (on the data range)")
        ->check(CLI::IsMember({"observations", "uniform"}));
    em_cmd->add_option("--max-iter", em.max_iterations, "Iteration cap")->check(CLI::PositiveNumber);
    em_cmd->add_option("--tol", em.tolerance, "Stop when the log-likelihood gain falls below this")->check(CLI::PositiveNumber);
    em_cmd->add_option("-o,--output", em.output, "CSV output path (report always goes to stdout)");

    SimulateOptions simulate;
    auto*           simulate_cmd = app.add_subcommand("simulate", "Monte Carlo campaign over the benchmark scenarios; writes runs.csv and summary.csv");
    simulate_cmd->add_option("--scenario", simulate.scenarios, "Scenario ids (1-4), comma separated")->delimiter(',')->check(CLI::Range(1, 4));
    simulate_cmd->add_option("--sigma", simulate.sigmas, "Component standard deviations, comma separated")->delimiter(',')->check(CLI::NonNegativeNumber);
    simulate_cmd->add_option("--runs", simulate.runs, "Runs per (scenario, sigma) cell")->check(CLI::PositiveNumber);
    simulate_cmd->add_option("--n", simulate.n, "Observations per run")->check(CLI::PositiveNumber);
    simulate_cmd->add_option("--m", simulate.m, "Toeplitz matrix order M for the spectral estimator");
    simulate_cmd->add_option("--estimators", simulate.estimators, "spectral, em_standard (em), em_constrained (em_c); comma separated")->delimiter(',');
    simulate_cmd->add_option("--seed", simulate.seed, "Base seed");
    simulate_cmd->add_option("--out-dir", simulate.out_dir, "Directory for runs.csv and summary.csv");
    simulate_cmd->add_option("--jobs", simulate.jobs, "Worker threads (0 = available parallelism); output does not depend on it");
    simulate_cmd->add_option("--thresholds", simulate.thresholds, "Success thresholds on e_r, comma separated")->delimiter(',')->check(CLI::PositiveNumber);
    simulate_cmd->add_option("--em-iter", simulate.em_iterations, "EM iteration cap")->check(CLI::PositiveNumber);
    simulate_cmd->add_flag("--wall-time", simulate.wall_time, "Add a wall_time_ns column to runs.csv (not reproducible)");

    SpectrumOptions spectrum;
    auto*           spectrum_cmd = app.add_subcommand("spectrum", "Eigenvalues of the Toeplitz CF matrix for one scenario draw");
    spectrum_cmd->add_option("--scenario", spectrum.scenario, "Scenario id (1-4)")->check(CLI::Range(1, 4));
    spectrum_cmd->add_option("--sigma", spectrum.sigma, "Component standard deviation")->check(CLI::NonNegativeNumber);
    spectrum_cmd->add_option("--n", spectrum.n, "Observations")->check(CLI::PositiveNumber);
    spectrum_cmd->add_option("--m", spectrum.m, "Matrix order M (at least 2)");
    spectrum_cmd->add_option("--seed", spectrum.seed, "Sampling seed");
    spectrum_cmd->add_flag("--analytic", spectrum.analytic, "Use the exact CF instead of a sample (--n and --seed ignored)");
    spectrum_cmd->add_option("-o,--output", spectrum.output, "CSV output path (default stdout)");

    SampleOptions sample_opts;
    auto*         sample_cmd = app.add_subcommand("sample", "Draw observations from a mixture file or a scenario");
    auto*         mixture_opt = sample_cmd->add_option("--mixture", sample_opts.mixture, "Mixture file, 'weight mean std' per line");
    sample_cmd->add_option("--scenario", sample_opts.scenario, "Scenario id (1-4), used without --mixture")->check(CLI::Range(1, 4))->excludes(mixture_opt);
    sample_cmd->add_option("--sigma", sample_opts.sigma, "Scenario standard deviation")->check(CLI::NonNegativeNumber)->excludes(mixture_opt);
    sample_cmd->add_option("--n", sample_opts.n, "Number of draws")->check(CLI::PositiveNumber);
    sample_cmd->add_option("--seed", sample_opts.seed, "Sampling seed");
    sample_cmd->add_option("-o,--output", sample_opts.output, "Output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (*estimate_cmd) {
            return run_estimate(estimate);
        }
        if (*em_cmd) {
            return run_em(em);
        }
        if (*simulate_cmd) {
            return run_simulate(simulate);
        }
        if (*spectrum_cmd) {
            return run_spectrum(spectrum);
        }
        return run_sample(sample_opts);
    } catch (const Error& e) {
        std::cerr << "cfmusic: " << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "cfmusic: " << e.what() << '\n';
        return exit_usage;
    }
}
