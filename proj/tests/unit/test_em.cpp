#include <cfmusic/em.hpp>
#include <cfmusic/experiments.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

using namespace cfmusic;

namespace {

bool monotone(std::span<const double> trace) {
    for (std::size_t i = 1; i < trace.size(); ++i) {
        if (trace[i] < trace[i - 1] - 1e-9) {
            return false;
        }
    }
    return true;
}

} // namespace

TEST(EmFit, SingleComponentIsSampleStatistics) {
    const auto obs = sample(GaussianMixture({{1.0, 2.0, 0.01}}), 500, 3);
    double     mean = 0.0;
    for (double z : obs.values()) {
        mean += z;
    }
    mean /= static_cast<double>(obs.size());
    double var = 0.0;
    for (double z : obs.values()) {
        var += (z - mean) * (z - mean);
    }
    var /= static_cast<double>(obs.size());

    for (const EmVariant variant : {EmVariant::standard, EmVariant::constrained}) {
        EmConfig config;
        config.variant   = variant;
        const EmFit fit  = em_fit(obs, config);
        EXPECT_NEAR(fit.means[0], 2.0, 0.01);
        EXPECT_NEAR(fit.means[0], mean, 1e-12);
        EXPECT_NEAR(fit.variances[0], var, 1e-14);
        EXPECT_DOUBLE_EQ(fit.weights[0], 1.0);
        EXPECT_LE(fit.iterations_used, 2U);
    }
}

TEST(EmFit, ConstrainedSeparatesDistantClusters) {
    // starts with both means on one side sit on a slow symmetric saddle, so only straddling starts are scored
    const GaussianMixture model({{0.5, 0.0, 0.1}, {0.5, 10.0, 0.1}});
    std::size_t           scored = 0;
    std::size_t           good   = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto obs = sample(model, 200, seed);
        EmConfig   config;
        config.components = 2;
        config.variant    = EmVariant::constrained;
        config.seed       = seed;
        const auto start  = em_initial_means(obs, config);
        if ((start[0] < 5.0) == (start[1] < 5.0)) {
            continue;
        }
        ++scored;
        auto means = em_fit(obs, config).means;
        std::ranges::sort(means);
        if (std::abs(means[0]) < 0.05 && std::abs(means[1] - 10.0) < 0.05) {
            ++good;
        }
        // per-cluster sample means after thresholding at the midpoint
        double lo_sum = 0.0;
        double hi_sum = 0.0;
        double lo_n   = 0.0;
        double hi_n   = 0.0;
        for (double z : obs.values()) {
            (z < 5.0 ? lo_sum : hi_sum) += z;
            (z < 5.0 ? lo_n : hi_n) += 1.0;
        }
        EXPECT_NEAR(means[0], lo_sum / lo_n, 1e-6);
        EXPECT_NEAR(means[1], hi_sum / hi_n, 1e-6);
    }
    ASSERT_GT(scored, 50U);
    EXPECT_GE(static_cast<double>(good), 0.95 * static_cast<double>(scored));
}

TEST(EmFit, ConstrainedKeepsEqualWeightsAndPooledVariance) {
    const auto obs = sample(Scenario{3, 0.2}.mixture(), 200, 9);
    EmConfig   config;
    config.components = 6;
    config.variant    = EmVariant::constrained;
    const EmFit fit   = em_fit(obs, config);
    for (std::size_t k = 0; k < 6; ++k) {
        EXPECT_EQ(fit.weights[k], 1.0 / 6.0);
        EXPECT_EQ(fit.variances[k], fit.variances[0]);
    }
}

TEST(EmFit, LogLikelihoodNeverDecreases) {
    Rng rng(77);
    for (int rep = 0; rep < 100; ++rep) {
        const int    id    = 1 + rep % 4;
        const double sigma = rng.uniform(0.05, 0.4);
        const auto   obs   = sample(Scenario{id, sigma}.mixture(), 200, derive_seed(77, {static_cast<std::uint64_t>(rep)}));
        for (const EmVariant variant : {EmVariant::standard, EmVariant::constrained}) {
            EmConfig config;
            config.components = 6;
            config.variant    = variant;
            config.seed       = static_cast<std::uint64_t>(rep);
            try {
                const EmFit fit = em_fit(obs, config);
                EXPECT_TRUE(monotone(fit.log_likelihood_trace)) << "rep " << rep;
                EXPECT_EQ(fit.log_likelihood_trace.size(), fit.iterations_used + 1);
            } catch (const Error& e) {
                EXPECT_EQ(e.code(), ErrorCode::degenerate_component);
            }
        }
    }
}

TEST(EmFit, RelabelingInitialMeansPermutesOutput) {
    const auto                obs = sample(Scenario{1, 0.15}.mixture(), 200, 4);
    const std::vector<double> start{0.3, 2.2, 4.1, 5.3, 1.1, 5.9};
    std::vector<double>       reversed(start.rbegin(), start.rend());
    for (const EmVariant variant : {EmVariant::standard, EmVariant::constrained}) {
        EmConfig config;
        config.components = 6;
        config.variant    = variant;
        const EmFit a     = em_fit(obs, config, start);
        const EmFit b     = em_fit(obs, config, reversed);
        for (std::size_t k = 0; k < 6; ++k) {
            EXPECT_NEAR(a.means[k], b.means[5 - k], 1e-9);
            EXPECT_NEAR(a.variances[k], b.variances[5 - k], 1e-9);
            EXPECT_NEAR(a.weights[k], b.weights[5 - k], 1e-9);
        }
    }
}

TEST(EmFit, DeterministicForSeed) {
    const auto obs = sample(Scenario{2, 0.1}.mixture(), 200, 5);
    EmConfig   config;
    config.components = 6;
    config.seed       = 31;
    const EmFit a     = em_fit(obs, config);
    const EmFit b     = em_fit(obs, config);
    EXPECT_EQ(a.means, b.means);
    EXPECT_EQ(a.log_likelihood_trace, b.log_likelihood_trace);
}

TEST(EmFit, IterationCapAndTolerance) {
    const auto obs = sample(Scenario{1, 0.2}.mixture(), 200, 6);
    EmConfig   config;
    config.components     = 6;
    config.max_iterations = 3;
    const EmFit fit       = em_fit(obs, config);
    EXPECT_LE(fit.iterations_used, 3U);
    EXPECT_EQ(fit.log_likelihood_trace.size(), fit.iterations_used + 1);
}

TEST(EmFit, InitialMeansFollowConfiguration) {
    const auto obs = sample(Scenario{1, 0.1}.mixture(), 200, 2);
    EmConfig   config;
    config.components = 6;
    config.seed       = 3;
    auto drawn        = em_initial_means(obs, config);
    for (double m : drawn) {
        EXPECT_NE(std::ranges::find(obs.values(), m), obs.values().end());
    }
    std::ranges::sort(drawn);
    EXPECT_EQ(std::ranges::adjacent_find(drawn), drawn.end());

    config.initialization = EmInitialization::uniform_range;
    for (double m : em_initial_means(obs, config)) {
        EXPECT_GE(m, obs.min());
        EXPECT_LE(m, obs.max());
    }
}

TEST(EmFit, RejectsBadConfiguration) {
    const ObservationSet obs({1.0, 2.0, 3.0});
    EmConfig             config;
    config.components = 3;
    EXPECT_THROW((void)em_fit(obs, config), Error);
    config.components = 0;
    EXPECT_THROW((void)em_fit(obs, config), Error);
    config.components = 1;
    EXPECT_THROW((void)em_fit(obs, config, std::vector<double>{1.0, 2.0}), Error);
    try {
        (void)em_fit(ObservationSet({2.0, 2.0, 2.0}), config);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::degenerate_component);
    }
}

TEST(EmFit, CsvLayout) {
    EmConfig config;
    const EmFit fit = em_fit(ObservationSet({0.0, 2.0}), config);
    std::ostringstream os;
    write_csv(os, fit);
    EXPECT_EQ(os.str().rfind("k,mean,variance,weight\n0,1,1,1\n\niterations,final_log_likelihood\n", 0), 0U);
}
