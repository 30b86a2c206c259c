#include <cfmusic/io.hpp>

#include <gtest/gtest.h>

#include <sstream>

using namespace cfmusic;

TEST(ReadMixture, ParsesCommentsAndSeparators) {
    std::istringstream in("# weight mean std\n0.25 0 0.1\n\n0.75, 3.5, 0.2  # second\n");
    const auto         model = read_mixture(in);
    ASSERT_EQ(model.size(), 2U);
    EXPECT_EQ(model[1], (Component{0.75, 3.5, 0.2}));
}

TEST(ReadMixture, Errors) {
    for (const char* text : {"", "# only a comment\n", "1 2\n", "1 2 x\n", "0.5 0 1\n0.4 1 1\n", "1 0 -1\n"}) {
        std::istringstream in(text);
        try {
            (void)read_mixture(in);
            FAIL() << text;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::parse) << text;
        }
    }
}

TEST(ReadMixture, ReportsLineNumber) {
    std::istringstream in("1 0 0\nabc 1 2\n");
    try {
        (void)read_mixture(in);
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
}

TEST(ReadObservations, ParsesAndRejects) {
    std::istringstream in("1.5\n-2e-3\n\n+4\n");
    const auto         obs = read_observations(in);
    EXPECT_EQ(obs, ObservationSet({1.5, -2e-3, 4.0}));

    for (const char* text : {"", "\n\n", "1 2\n", "nan\n", "1e999\n", "1.0abc\n"}) {
        std::istringstream bad(text);
        try {
            (void)read_observations(bad);
            FAIL() << text;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::parse) << text;
        }
    }
}

TEST(WriteObservations, RoundTrip) {
    const ObservationSet obs({0.1, 1.0 / 3.0, -7.25e10});
    std::stringstream    io;
    write_observations(io, obs);
    EXPECT_EQ(read_observations(io), obs);
}

TEST(LoadFiles, MissingFileIsParseError) {
    try {
        (void)load_observations("/nonexistent/cfmusic/observations.txt");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::parse);
    }
}
