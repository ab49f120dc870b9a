#include <random>

#include <gtest/gtest.h>

#include "flexmarket/analysis.hpp"
#include "flexmarket/csv.hpp"
#include "flexmarket/errors.hpp"
#include "support/uc_oracle.hpp"

using namespace flexmarket;

namespace {

Generator unit(std::string id, double pmin, double pmax, std::vector<CostSegment> curve) {
    Generator g;
    g.id = std::move(id);
    g.p_min = pmin;
    g.p_max = pmax;
    g.ramp_rate = pmax;
    g.cost_curve = std::move(curve);
    return g;
}

SystemModel with_units(std::vector<Generator> gens) {
    SystemModel m;
    m.generators = std::move(gens);
    m.config.mip_gap = 0.0;
    return m;
}

PercentileTable nl_table(std::vector<double> pcts, std::vector<std::vector<double>> by_pct) {
    PercentileTable t;
    t.quantity = "net_load";
    t.percentiles = std::move(pcts);
    t.values = Grid<double>(t.percentiles.size(), by_pct[0].size());
    for (std::size_t s = 0; s < by_pct.size(); ++s) {
        for (std::size_t h = 0; h < by_pct[s].size(); ++h) t.values(s, h) = by_pct[s][h];
    }
    return t;
}

DaSolution awards(std::vector<double> up, std::vector<double> down) {
    DaSolution s;
    s.award_up = Grid<double>(1, up.size());
    s.award_down = Grid<double>(1, down.size());
    for (std::size_t t = 0; t < up.size(); ++t) {
        s.award_up(0, t) = up[t];
        s.award_down(0, t) = down[t];
    }
    return s;
}

DaSolution commitments(std::vector<std::vector<double>> u) {
    DaSolution s;
    s.u = Grid<double>(u.size(), u[0].size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        for (std::size_t t = 0; t < u[i].size(); ++t) s.u(i, t) = u[i][t];
    }
    return s;
}

}  // namespace

TEST(CostCurves, ExactLine) {
    std::vector<double> x{-3, -2, -1, 1, 2, 3}, y;
    for (double v : x) y.push_back(3 * v);
    auto c = rt_cost_curves(x, y);
    EXPECT_NEAR(c.positive.slope, 3, 1e-12);
    EXPECT_NEAR(c.positive.intercept, 0, 1e-12);
    EXPECT_NEAR(c.positive.r2, 1, 1e-12);
    EXPECT_NEAR(c.negative.slope, 3, 1e-12);
    EXPECT_EQ(c.positive.n, 3u);
}

TEST(CostCurves, MirroredDataMirroredSlopes) {
    std::vector<double> x{1, 2, 4, 7}, y{5, 9, 14, 30};
    std::vector<double> xa = x, ya = y;
    for (std::size_t i = 0; i < x.size(); ++i) {
        xa.push_back(-x[i]);
        ya.push_back(y[i]);
    }
    auto c = rt_cost_curves(xa, ya);
    EXPECT_NEAR(c.positive.slope, -c.negative.slope, 1e-12);
    EXPECT_NEAR(c.positive.intercept, c.negative.intercept, 1e-12);
    EXPECT_NEAR(c.positive.r2, c.negative.r2, 1e-12);
}

TEST(CostCurves, RecoversKnownSlopeFromNoise) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> err(-50, 50);
    std::normal_distribution<double> noise(0, 20);
    std::vector<double> x, y;
    for (int i = 0; i < 1000; ++i) {
        const double e = err(rng);
        x.push_back(e);
        y.push_back(5 * e + 12 + noise(rng));
    }
    auto c = rt_cost_curves(x, y);
    EXPECT_NEAR(c.positive.slope, 5, 0.25);
    EXPECT_NEAR(c.negative.slope, 5, 0.25);
    EXPECT_GT(c.positive.r2, 0.5);
}

TEST(CostCurves, DegenerateInputs) {
    EXPECT_THROW((void)rt_cost_curves(std::vector<double>{1, 1, -1, -2}, std::vector<double>{1, 2, 3, 4}), InputError);
    EXPECT_THROW((void)rt_cost_curves(std::vector<double>{1, -1, -2}, std::vector<double>{1, 3, 4}), InputError);
    EXPECT_THROW((void)rt_cost_curves(std::vector<double>{1, 2}, std::vector<double>{1}), InputError);
}

TEST(FlexDemand, SpanningProcurementIsOne) {
    auto nl = nl_table({5, 50, 95}, {{80, 90}, {100, 100}, {120, 100}});
    auto m = flexibility_demand_metric(awards({20, 3}, {20, 0}), nl);
    ASSERT_TRUE(m.total[0]);
    EXPECT_DOUBLE_EQ(*m.total[0], 1.0);
    EXPECT_DOUBLE_EQ(*m.up[0], 0.5);
    ASSERT_TRUE(m.total[1]);
    EXPECT_DOUBLE_EQ(*m.total[1], 0.3);
}

TEST(FlexDemand, NoProcurementAndZeroWidth) {
    auto nl = nl_table({5, 50, 95}, {{80, 100}, {100, 100}, {120, 100}});
    auto m = flexibility_demand_metric(awards({0, 5}, {0, 5}), nl);
    EXPECT_DOUBLE_EQ(*m.total[0], 0.0);
    EXPECT_FALSE(m.total[1].has_value());
}

TEST(FlexDemand, ScheduleAboveMedianNeedsMoreDownFlexibility) {
    // A cheap DA-only unit with a 130 MW minimum and a 120 MW median net
    // load: FO can schedule the buyer so that net load sits at 130, above the
    // median, and must then cover more than the [5,50] half of the band downward.
    auto base = unit("base", 130, 200, {{200, 20}});
    auto peak = unit("peak", 0, 200, {{200, 80}});
    peak.startup_cost = 300;
    auto m = with_units({base, peak});
    TierStructure tiers;
    tiers.account_id = "aggregate";
    tiers.percentiles = {5, 50, 95};
    tiers.levels = Grid<double>(3, 1);
    tiers.levels(0, 0) = -140;
    tiers.levels(1, 0) = -120;
    tiers.levels(2, 0) = -100;
    tiers.reference = {-120};
    tiers.prob_up = {0.05, 0.5};
    tiers.prob_down = {0.5, 0.05};
    const auto nl = nl_table({5, 50, 95}, {{100}, {120}, {140}});
    auto p = build_base_uc(m, std::vector<double>{120});
    auto buyer = aggregate_buyer(tiers, m.config);
    apply_fo_design(p, seller_params(m), {buyer}, tiers, m.config);
    auto sol = solve_da(p, m.config);

    oracle::Instance inst;
    inst.units = m.generators;
    inst.demand = {120};
    oracle::FoCase fo;
    fo.sellers = seller_params(m);
    fo.tiers = tiers;
    fo.buyer_forecast = tiers.reference;
    fo.vc_up = buyer.self_hedge_cost_up.value();
    fo.vc_down = buyer.self_hedge_cost_down.value();
    fo.penalty_m = m.config.fo_penalty_m;
    inst.fo = fo;
    auto best = oracle::enumerate(inst);
    ASSERT_TRUE(best.feasible);
    ASSERT_NEAR(sol.objective, best.objective, 1e-6 * std::max(1.0, std::abs(best.objective)));

    auto pct = da_schedule_percentile(sol, nl);
    EXPECT_GT(pct.percentile[0], 50.0);
    auto d = flexibility_demand_metric(sol, nl);
    ASSERT_TRUE(d.down[0]);
    EXPECT_GT(*d.down[0], 0.5);
}

TEST(SchedulePercentile, Interpolation) {
    auto nl = nl_table({5, 50, 95}, {{80, 80, 80, 80}, {100, 100, 100, 100}, {140, 140, 140, 140}});
    auto r = schedule_percentile(std::vector<double>{100, 140, 120, 60}, nl);
    EXPECT_DOUBLE_EQ(r.percentile[0], 50);
    EXPECT_DOUBLE_EQ(r.percentile[1], 95);
    EXPECT_DOUBLE_EQ(r.percentile[2], 72.5);
    EXPECT_DOUBLE_EQ(r.percentile[3], 5);
    EXPECT_FALSE(r.clamped[2]);
    EXPECT_TRUE(r.clamped[3]);
}

TEST(SchedulePercentile, ClampsToOneAndNinetyNine) {
    auto nl = nl_table({0.5, 50, 99.5}, {{80, 80}, {100, 100}, {140, 140}});
    auto r = schedule_percentile(std::vector<double>{80, 200}, nl);
    EXPECT_DOUBLE_EQ(r.percentile[0], 1);
    EXPECT_DOUBLE_EQ(r.percentile[1], 99);
    EXPECT_TRUE(r.clamped[0]);
    EXPECT_TRUE(r.clamped[1]);
}

TEST(SchedulePercentile, IrScheduleSitsAtMedian) {
    auto m = with_units({unit("a", 0, 150, {{150, 20}}), unit("b", 0, 150, {{150, 35}})});
    // full 1..99 table, linear between the 5/50/95 anchors
    PercentileTable nl;
    nl.quantity = "net_load";
    nl.percentiles = all_percentiles();
    nl.values = Grid<double>(nl.percentiles.size(), 2);
    const auto anchors = nl_table({5, 50, 95}, {{90, 120}, {110, 150}, {140, 170}});
    for (std::size_t k = 0; k < nl.percentiles.size(); ++k) {
        for (std::size_t t = 0; t < 2; ++t) nl.values(k, t) = interpolate_level(anchors, t, nl.percentiles[k]);
    }
    auto p = build_base_uc(m, nl);
    apply_ir_design(p, default_ir_products(), nl);
    auto sol = solve_da(p, m.config);
    auto r = da_schedule_percentile(sol, nl);
    for (double v : r.percentile) EXPECT_NEAR(v, 50, 1e-6);
}

TEST(WeeklyDiff, IdenticalDesignsGiveZero) {
    CostReport ir{"ir", "mean", {{"w1", "s", 100, 10, 1}, {"w2", "s", 200, 5, 0}}};
    CostReport fo = ir;
    fo.design = "fo";
    auto d = weekly_cost_diff(ir, fo, {}, 0.005);
    for (const auto& r : d.rows) {
        EXPECT_EQ(r.diff, 0.0);
        EXPECT_FALSE(r.outside_band());
    }
    EXPECT_DOUBLE_EQ(d.rows[0].band, 0.5);
    EXPECT_DOUBLE_EQ(d.annual_ir.total(), 316);
}

TEST(WeeklyDiff, WeightsAndLinearity) {
    CostReport ir{"ir", "mean", {{"w1", "s", 100, 10, 1}, {"w2", "s", 200, 5, 0}}};
    std::vector<double> ones{1, 1}, w{3, 2};
    EXPECT_DOUBLE_EQ(ir.annual(ones).total(), 316);
    EXPECT_DOUBLE_EQ(ir.annual(w).total(), 3 * 111 + 2 * 205);
    CostReport scaled = ir;
    for (auto& c : scaled.weeks) {
        c.da_cost *= 4;
        c.rtd_cost *= 4;
        c.rtd_scarcity *= 4;
    }
    EXPECT_DOUBLE_EQ(scaled.annual(w).total(), 4 * ir.annual(w).total());
    EXPECT_THROW((void)ir.annual(std::vector<double>{1}), InputError);
}

TEST(WeeklyDiff, MismatchedScenarioSets) {
    CostReport ir{"ir", "mean", {{"w1", "seed1", 100, 10, 1}}};
    CostReport fo{"fo", "mean", {{"w1", "seed2", 100, 10, 1}}};
    EXPECT_THROW((void)weekly_cost_diff(ir, fo, {}, 0.005), InputError);
    fo.weeks.clear();
    EXPECT_THROW((void)weekly_cost_diff(ir, fo, {}, 0.005), InputError);
}

TEST(WeeklyDiff, CheapCommitmentBeatsBand) {
    // IR leaves the cheap DA-only unit off and pays the peaker in RT;
    // FO commits it in DA.
    CostReport ir{"ir", "mean", {{"w1", "s", 1000, 600, 0}}};
    CostReport fo{"fo", "mean", {{"w1", "s", 1100, 150, 0}}};
    auto d = weekly_cost_diff(ir, fo, {}, 0.005);
    EXPECT_DOUBLE_EQ(d.rows[0].diff, 350);
    EXPECT_TRUE(d.rows[0].outside_band());
}

TEST(CommittedUnits, Counting) {
    auto da_only = unit("a", 0, 10, {{10, 1}});
    auto fast = unit("f", 0, 10, {{10, 1}});
    fast.commit_class = CommitClass::fast_start;
    std::vector<Generator> units{da_only, da_only, fast};
    auto ir = commitments({{1, 1, 1, 1, 1, 1, 1}, {0, 0, 0, 0, 0, 0, 0}, {1, 1, 1, 1, 1, 1, 1}});
    EXPECT_EQ(committed_unit_diff(units, ir, ir), std::vector<int>(7, 0));
    auto fo = commitments({{1, 1, 1, 1, 1, 1, 1}, {0, 1, 1, 1, 1, 1, 0}, {0, 0, 0, 0, 0, 0, 0}});
    EXPECT_EQ(committed_unit_diff(units, fo, ir), (std::vector<int>{0, 1, 1, 1, 1, 1, 0}));
}

TEST(AnalysisExport, CsvFiles) {
    const auto dir = std::filesystem::temp_directory_path();
    std::vector<double> x{-3, -2, -1, 1, 2, 3}, y{1, 2, 3, 4, 5, 7};
    write_cost_curves_csv({{"fo", rt_cost_curves(x, y)}}, dir / "curves_test.csv");
    EXPECT_EQ(read_csv(dir / "curves_test.csv").rows.size(), 2u);
    CostReport ir{"ir", "mean", {{"w1", "s", 100, 10, 1}}};
    write_cost_report_csv({ir}, {}, dir / "report_test.csv");
    auto t = read_csv(dir / "report_test.csv");
    ASSERT_EQ(t.rows.size(), 2u);
    EXPECT_EQ(t.number(1, "total"), 111);
    auto nl = nl_table({5, 95}, {{0, 0}, {10, 0}});
    write_hourly_metrics_csv(flexibility_demand_metric(awards({5, 5}, {0, 0}), nl), schedule_percentile(std::vector<double>{5, 0}, nl),
                             std::vector<int>{1, 0}, dir / "hourly_test.csv");
    auto h = read_csv(dir / "hourly_test.csv");
    ASSERT_EQ(h.rows.size(), 2u);
    EXPECT_EQ(h.rows[1][1], "");
}
