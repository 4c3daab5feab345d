#include "tactskin/chain.hpp"
#include "tactskin/error.hpp"
#include "tactskin/primitives.hpp"
#include "tactskin/shell.hpp"

#include "oracles.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

using namespace tactskin;

namespace {

SkinShell plate_shell(double thickness) {
    const auto m = testutil::share(primitives::grid_plate(0.4, 0.4, 20, 20));
    CutoutParams c;
    c.thickness = thickness;
    return build_shells(m, HeatMap::uniform(*m, MapRole::skin, 1.0), c).shells.at(0);
}

double path_length(const NoduleLayout& l, const std::vector<std::uint32_t>& order) {
    double s = 0;
    for (std::size_t k = 1; k < order.size(); ++k) s += (l.by_id(order[k]).position - l.by_id(order[k - 1]).position).norm();
    return s;
}

} // namespace

TEST(OrderChain, SingleAndCollinear) {
    EXPECT_EQ(order_chain(testutil::layout_at({Vec3(0, 0, 0)}), 0), std::vector<std::uint32_t>{0});
    const auto l = testutil::layout_at({Vec3(2, 0, 0), Vec3(0, 0, 0), Vec3(1, 0, 0)});
    EXPECT_EQ(order_chain(l, 1), (std::vector<std::uint32_t>{1, 2, 0}));
}

TEST(OrderChain, TiesGoToLowerId) {
    const auto l = testutil::layout_at({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(-1, 0, 0)});
    EXPECT_EQ(order_chain(l, 0), (std::vector<std::uint32_t>{0, 1, 2}));
}

TEST(OrderChain, MatchesGreedyOracleAndBeatsWorstPermutation) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Vec3> pts;
        for (int i = 0; i < 6; ++i) pts.emplace_back(u(rng), u(rng), u(rng));
        const auto l = testutil::layout_at(pts);
        const auto greedy = order_chain(l, 0);
        EXPECT_EQ(greedy, oracle::greedy_order(l, 0));
        std::vector<std::uint32_t> perm{1, 2, 3, 4, 5};
        double worst = 0, best = 1e300;
        do {
            std::vector<std::uint32_t> o{0};
            o.insert(o.end(), perm.begin(), perm.end());
            worst = std::max(worst, path_length(l, o));
            best = std::min(best, path_length(l, o));
        } while (std::next_permutation(perm.begin(), perm.end()));
        EXPECT_LE(path_length(l, greedy), worst);
        const std::vector<std::uint32_t> ids{0, 1, 2, 3, 4, 5};
        EXPECT_NEAR(path_length(l, order_chain_exhaustive(l, ids, 0)), best, 1e-12);
    }
}

TEST(AssignResistances, HundredMillimetres) {
    FilamentSpec spec;
    spec.margin = 10.0;
    const auto l = testutil::layout_at({Vec3(0, 0, 0), Vec3(0.1, 0, 0)});
    const std::vector<std::uint32_t> order{0, 1};
    const auto d = assign_resistances(order, l, spec);
    ASSERT_EQ(d.segment_resistances.size(), 1u);
    EXPECT_NEAR(d.segment_resistances[0], 25.6, 1e-12);
    EXPECT_EQ(d.cumulative_resistances, (std::vector<double>{0.0, d.segment_resistances[0]}));
    EXPECT_GE(d.segment_resistances[0], spec.margin);
}

TEST(AssignResistances, EightMillimetreSpacingFails) {
    FilamentSpec spec;
    spec.min_nodule_spacing = 0.009;
    const auto l = testutil::layout_at({Vec3(0, 0, 0), Vec3(0.008, 0, 0)});
    const std::vector<std::uint32_t> order{0, 1};
    EXPECT_THROW(assign_resistances(order, l, spec), ChainError);
    spec.min_nodule_spacing = 0.008;
    EXPECT_THROW(spec.validate(), ConfigError);
}

TEST(AssignResistances, MarginInflates) {
    FilamentSpec spec;
    spec.margin = 30.0;
    const auto l = testutil::layout_at({Vec3(0, 0, 0), Vec3(0.1, 0, 0)});
    const std::vector<std::uint32_t> order{0, 1};
    const auto d = assign_resistances(order, l, spec);
    EXPECT_DOUBLE_EQ(d.segment_resistances[0], 30.0);
    EXPECT_NEAR(required_trace_length(30.0, spec) * 1000.0, 117.1875, 1e-9);
}

TEST(RouteTraces, ExactLengthIsStraight) {
    const SkinShell s = plate_shell(0.004);
    FilamentSpec spec;
    spec.margin = 5.0;
    const auto l = testutil::layout_at({Vec3(0.1, 0.2, 0.004), Vec3(0.3, 0.2, 0.004)});
    const std::vector<std::uint32_t> order{0, 1};
    const auto d = route_traces(s, assign_resistances(order, l, spec), l, spec);
    ASSERT_EQ(d.trace_polylines.size(), 1u);
    EXPECT_EQ(d.trace_polylines[0].size(), 2u);
    EXPECT_NEAR(polyline_length(d.trace_polylines[0]), 0.2, 1e-9);
    EXPECT_NEAR(d.trace_polylines[0][0].z(), 0.002, 1e-9);
}

TEST(RouteTraces, DoubleLengthSerpentine) {
    const SkinShell s = plate_shell(0.004);
    FilamentSpec spec;
    spec.margin = 2.0 * 0.1 * spec.resistivity; // twice the straight run
    const auto l = testutil::layout_at({Vec3(0.15, 0.2, 0.004), Vec3(0.25, 0.2, 0.004)});
    const std::vector<std::uint32_t> order{0, 1};
    const auto d = route_traces(s, assign_resistances(order, l, spec), l, spec);
    const double target = required_trace_length(d.segment_resistances[0], spec);
    EXPECT_NEAR(target, 0.2, 1e-12);
    EXPECT_GT(d.trace_polylines[0].size(), 2u);
    EXPECT_LE(std::abs(polyline_length(d.trace_polylines[0]) - target), 0.005 * target);
    for (const auto& p : d.trace_polylines[0]) {
        EXPECT_GE(p.z(), 0.5 * spec.trace_diameter + spec.surface_clearance - 1e-9);
        EXPECT_LE(p.z(), 0.004 - 0.5 * spec.trace_diameter - spec.surface_clearance + 1e-9);
    }
}

TEST(RouteTraces, ThinShellFails) {
    const SkinShell s = plate_shell(0.001);
    FilamentSpec spec;
    const auto l = testutil::layout_at({Vec3(0.1, 0.2, 0.001), Vec3(0.3, 0.2, 0.001)});
    const std::vector<std::uint32_t> order{0, 1};
    EXPECT_THROW(route_traces(s, assign_resistances(order, l, spec), l, spec), ChainError);
}

TEST(RcTable, MidpointBands) {
    ChainDesign d;
    d.order = {4, 5, 6};
    d.cumulative_resistances = {10, 20, 30};
    const auto t = expected_rc_table(d);
    ASSERT_EQ(t.size(), 3u);
    EXPECT_EQ(t[0].upper, 15.0);
    EXPECT_EQ(t[1].lower, 15.0);
    EXPECT_EQ(t[1].upper, 25.0);
    EXPECT_EQ(t[2].lower, 25.0);
    EXPECT_TRUE(std::isinf(t[0].lower));
    EXPECT_TRUE(std::isinf(t[2].upper));
    EXPECT_EQ(t[1].nodule_id, 5u);

    ChainDesign one;
    one.order = {3};
    one.cumulative_resistances = {0};
    const auto u = expected_rc_table(one);
    ASSERT_EQ(u.size(), 1u);
    EXPECT_TRUE(std::isinf(u[0].lower) && std::isinf(u[0].upper));
}

TEST(RcTable, BandsDisjointWhenMarginPositive) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0, 1);
    FilamentSpec spec;
    spec.min_nodule_spacing = 0.009;
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<Vec3> pts;
        for (int i = 0; i < 6; ++i) pts.emplace_back(0.1 * i + 0.02 * u(rng), 0.02 * u(rng), 0);
        const auto l = testutil::layout_at(pts);
        const auto d = assign_resistances(order_chain(l, 0), l, spec);
        const auto t = expected_rc_table(d);
        for (std::size_t i = 0; i < t.size(); ++i) {
            EXPECT_LT(t[i].lower, t[i].expected_delay);
            EXPECT_GT(t[i].upper, t[i].expected_delay);
            for (std::size_t j = i + 1; j < t.size(); ++j)
                EXPECT_TRUE(t[i].upper <= t[j].lower || t[j].upper <= t[i].lower);
        }
    }
}

TEST(DesignChains, CumulativeStrictlyIncreasing) {
    const SkinShell s = plate_shell(0.004);
    FilamentSpec spec;
    const auto l = testutil::layout_at({Vec3(0.05, 0.05, 0.004), Vec3(0.2, 0.05, 0.004), Vec3(0.35, 0.1, 0.004),
                                        Vec3(0.3, 0.3, 0.004), Vec3(0.1, 0.3, 0.004)});
    const std::vector<SkinShell> shells{s};
    const auto chains = design_chains(shells, l, spec);
    ASSERT_EQ(chains.size(), 1u);
    const auto& c = chains[0];
    EXPECT_EQ(c.order.front(), 0u);
    for (std::size_t k = 1; k < c.cumulative_resistances.size(); ++k)
        EXPECT_GE(c.cumulative_resistances[k] - c.cumulative_resistances[k - 1], spec.margin);
    for (std::size_t k = 0; k < c.trace_polylines.size(); ++k)
        EXPECT_NEAR(polyline_length(c.trace_polylines[k]) * spec.resistivity, c.segment_resistances[k],
                    0.005 * c.segment_resistances[k]);
    EXPECT_NEAR(c.total_resistance, c.cumulative_resistances.back(), 1e-9);
}
