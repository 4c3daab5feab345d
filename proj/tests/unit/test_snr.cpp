#include "tactskin/error.hpp"
#include "tactskin/snr.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace tactskin;

namespace {

// 100 Hz capture of the default 3/3/3 s protocol.
CaptureTrace synthetic(std::uint32_t id, double mu_u, double mu_p, double sigma, std::uint64_t seed) {
    CaptureTrace t;
    t.nodule_id = id;
    t.rate_hz = 100.0;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (int i = 0; i < 900; ++i) {
        const double time = i / 100.0;
        const bool pressed = time >= 3.0 && time < 6.0;
        t.samples.emplace_back(time, (pressed ? mu_p : mu_u) + sigma * noise(rng));
    }
    return t;
}

PhaseStats stats(double u, double p, double s) { return PhaseStats{u, p, s}; }

} // namespace

TEST(SegmentTrace, ConstantSignal) {
    const auto s = segment_trace(synthetic(0, 100, 100, 0, 1));
    EXPECT_EQ(s.mu_unpressed, 100.0);
    EXPECT_EQ(s.mu_pressed, 100.0);
    EXPECT_EQ(s.sigma_unpressed, 0.0);
}

TEST(SegmentTrace, PiecewiseConstant) {
    CaptureTrace t;
    t.rate_hz = 100;
    for (int i = 0; i < 900; ++i) {
        const double time = i / 100.0;
        t.samples.emplace_back(time, time < 3.0 ? 100.0 : time < 6.0 ? 170.0 : 100.0);
    }
    const auto s = segment_trace(t);
    EXPECT_EQ(s.mu_unpressed, 100.0);
    EXPECT_EQ(s.mu_pressed, 170.0);
}

TEST(SegmentTrace, MatchesSampleStatisticsOracle) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const CaptureTrace t = synthetic(0, 100, 170, 10, seed);
        const auto s = segment_trace(t);
        EXPECT_NEAR(s.sigma_unpressed, 10.0, 1.5);
        // Independent split with the same guard.
        std::vector<double> u, p;
        for (const auto& [time, v] : t.samples) {
            if (time < 2.75 || time >= 6.25) u.push_back(v);
            else if (time >= 3.25 && time < 5.75) p.push_back(v);
        }
        EXPECT_NEAR(snr(s), oracle::snr_from_samples(u, p), 1e-9);
    }
}

TEST(SegmentTrace, ShortTraceIsAnalysisError) {
    CaptureTrace t = synthetic(0, 100, 170, 1, 0);
    t.samples.resize(500);
    EXPECT_THROW(segment_trace(t), AnalysisError);
}

TEST(Snr, Arithmetic) {
    EXPECT_EQ(snr(100, 170, 10), 7.0);
    EXPECT_EQ(snr(100, 100, 3), 0.0);
    EXPECT_EQ(snr(100, 170, 0), std::numeric_limits<double>::infinity());
    EXPECT_EQ(snr(stats(100, 170, 10)), 7.0);
}

TEST(Snr, Classification) {
    EXPECT_EQ(classify_snr(6.99), SnrClass::fail);
    EXPECT_EQ(classify_snr(7.0), SnrClass::minimum);
    EXPECT_EQ(classify_snr(14.9), SnrClass::minimum);
    EXPECT_EQ(classify_snr(15.0), SnrClass::robust);
    EXPECT_EQ(to_string(SnrClass::minimum), "minimum");
}

TEST(PairwiseMinSnr, TwoNodules) {
    const std::vector<PhaseStats> s{stats(100, 170, 10), stats(100, 240, 10)};
    const auto r = pairwise_min_snr(s);
    EXPECT_EQ(r.min_snr, 7.0);
    EXPECT_EQ(r.classification, SnrClass::minimum);
    EXPECT_TRUE(std::isnan(r.matrix[0][0]));
    EXPECT_EQ(r.matrix[1][0], 14.0);
}

TEST(PairwiseMinSnr, AllHighIsRobust) {
    const std::vector<PhaseStats> s{stats(100, 300, 10), stats(100, 260, 10), stats(100, 280, 8)};
    EXPECT_EQ(pairwise_min_snr(s).classification, SnrClass::robust);
    EXPECT_THROW(pairwise_min_snr(std::span<const PhaseStats>(s.data(), 1)), AnalysisError);
}

TEST(TrialAggregate, LinkOneRow) {
    const std::vector<double> trials{8, 9, 9};
    const auto a = aggregate_trials(trials);
    EXPECT_NEAR(a.mean, 26.0 / 3.0, 1e-15);
    EXPECT_EQ(a.half_range, 0.5);
    EXPECT_EQ(format_aggregate(a), "8.7 ± 0.5");
    EXPECT_TRUE(matches_printed(a, 8.7, 0.5, 1));
}

TEST(TrialAggregate, InconsistentRowIsFlagged) {
    const std::vector<double> trials{594, 561, 455};
    const auto a = aggregate_trials(trials);
    EXPECT_NEAR(a.mean, 536.6666666666666, 1e-9);
    EXPECT_FALSE(matches_printed(a, 470, 70, 0));
}

TEST(Trace, TextRoundTrip) {
    const CaptureTrace t = synthetic(7, 100, 170, 3, 9);
    const CaptureTrace back = parse_trace(to_trace_text(t));
    EXPECT_EQ(back.nodule_id, 7u);
    EXPECT_EQ(back.rate_hz, 100.0);
    EXPECT_EQ(back.samples, t.samples);
    EXPECT_THROW(parse_trace("0 1\n"), ParseError);
    EXPECT_THROW(parse_trace("# nodule:1 rate_hz:10\n0 1\n0 2\n"), ParseError);
}
