#include <cfmusic/format.hpp>
#include <cfmusic/random.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace cfmusic;

TEST(Rng, ReproducibleAndSeedSensitive) {
    Rng a(1);
    Rng b(1);
    Rng c(2);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const double x = a.uniform();
        EXPECT_EQ(x, b.uniform());
        differs = differs || x != c.uniform();
    }
    EXPECT_TRUE(differs);
}

TEST(Rng, UniformRangeAndMoments) {
    Rng          rng(3);
    const int    n   = 200'000;
    double       sum = 0.0;
    double       sq  = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
        sq += u * u;
    }
    EXPECT_NEAR(sum / n, 0.5, 5.0 * std::sqrt(1.0 / 12.0 / n));
    EXPECT_NEAR(sq / n - (sum / n) * (sum / n), 1.0 / 12.0, 2e-3);
}

TEST(Rng, NormalMoments) {
    Rng       rng(4);
    const int n   = 200'000;
    double    sum = 0.0;
    double    sq  = 0.0;
    double    fourth = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sq += z * z;
        fourth += z * z * z * z;
    }
    EXPECT_NEAR(sum / n, 0.0, 5.0 / std::sqrt(n));
    EXPECT_NEAR(sq / n, 1.0, 5.0 * std::sqrt(2.0 / n));
    EXPECT_NEAR(fourth / n, 3.0, 5.0 * std::sqrt(96.0 / n));
}

TEST(DeriveSeed, DistinctStreams) {
    EXPECT_EQ(derive_seed(5, {1, 2, 3}), derive_seed(5, {1, 2, 3}));
    EXPECT_NE(derive_seed(5, {1, 2, 3}), derive_seed(5, {1, 3, 2}));
    EXPECT_NE(derive_seed(5, {1}), derive_seed(6, {1}));
    Rng parent(9);
    Rng other(9);
    Rng x = parent.split(1);
    Rng y = other.split(2);
    EXPECT_NE(x.uniform(), y.uniform());
}

TEST(FormatReal, RoundTripsAndSpecialValues) {
    for (const double v : {0.1, -3.0, 1e-300, 6.0221408e23, 1.0 / 3.0}) {
        EXPECT_EQ(std::stod(format_real(v)), v);
    }
    EXPECT_EQ(format_real(0.5), "0.5");
    EXPECT_EQ(format_real(std::numeric_limits<double>::infinity()), "inf");
    EXPECT_EQ(format_real(-std::numeric_limits<double>::infinity()), "-inf");
    EXPECT_EQ(format_real(std::nan("")), "nan");
}
