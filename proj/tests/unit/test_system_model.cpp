#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "flexmarket/errors.hpp"
#include "flexmarket/system_io.hpp"
#include "flexmarket/system_model.hpp"

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

SystemModel three_units() {
    SystemModel m;
    m.generators.push_back(unit("g1", 10, 100, {{100, 20}}));
    m.generators.push_back(unit("g2", 0, 50, {{25, 30}, {25, 35}}));
    m.generators.push_back(unit("g3", 5, 40, {{40, 60}}));
    m.products = default_ir_products();
    return m;
}

}  // namespace

TEST(StrikePrices, TwoSegmentCurve) {
    auto s = derive_strike_prices(unit("a", 0, 150, {{100, 20}, {50, 35}}));
    EXPECT_EQ(s.strike_up, 35.0);
    EXPECT_EQ(s.strike_down, 20.0);
    EXPECT_EQ(s.capacity_bid, 0.0);
}

TEST(StrikePrices, SingleSegment) {
    auto s = derive_strike_prices(unit("a", 0, 10, {{10, 40}}));
    EXPECT_EQ(s.strike_up, 40.0);
    EXPECT_EQ(s.strike_down, 40.0);
}

TEST(StrikePrices, EmptyCurveThrows) {
    EXPECT_THROW((void)derive_strike_prices(unit("a", 0, 10, {})), InputError);
}

TEST(StrikePrices, RandomCurvesMatchScanAndAreOrderInvariant) {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> cost(5.0, 200.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> costs(5);
        for (auto& c : costs) c = cost(rng);
        std::sort(costs.begin(), costs.end());
        double hi = costs[0];
        double lo = costs[0];
        for (double c : costs) {
            if (c > hi) hi = c;
            if (c < lo) lo = c;
        }
        std::vector<CostSegment> curve;
        for (double c : costs) curve.push_back({10.0, c});
        auto s = derive_strike_prices(unit("a", 0, 50, curve));
        EXPECT_EQ(s.strike_up, hi);
        EXPECT_EQ(s.strike_down, lo);
        std::shuffle(curve.begin(), curve.end(), rng);
        auto t = derive_strike_prices(unit("a", 0, 50, curve));
        EXPECT_EQ(t.strike_up, hi);
        EXPECT_EQ(t.strike_down, lo);
        auto again = derive_strike_prices(unit("a", 0, 50, {{25, t.strike_down}, {25, t.strike_up}}));
        EXPECT_EQ(again.strike_up, t.strike_up);
        EXPECT_EQ(again.strike_down, t.strike_down);
    }
}

TEST(StrikePrices, OverridesReplaceDerivedValues) {
    auto m = three_units();
    m.seller_overrides.push_back({"g2", 99.0, 1.0, 2.5});
    auto p = seller_params(m);
    ASSERT_EQ(p.size(), 3u);
    EXPECT_EQ(p[1].strike_up, 99.0);
    EXPECT_EQ(p[1].capacity_bid, 2.5);
    EXPECT_EQ(p[0].strike_up, 20.0);
}

TEST(Validate, WellFormedModelHasNoViolations) {
    EXPECT_TRUE(validate_system(three_units()).empty());
}

TEST(Validate, PminAbovePmaxNamesTheUnit) {
    auto m = three_units();
    m.generators[1].p_min = 60;
    auto v = validate_system(m);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].location, "generator g2");
}

TEST(Validate, NonMonotoneLevelsCiteAccountLevelAndHour) {
    auto m = three_units();
    UncertainAccount a;
    a.id = "wind";
    a.constituent = Constituent::wind;
    a.levels = Grid<double>(3, 2);
    a.levels(0, 1) = 0;
    a.levels(1, 1) = 10;
    a.levels(2, 1) = 5;
    m.accounts.push_back(a);
    auto v = validate_system(m);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].location, "account wind[s=2,t=1]");
}

TEST(Validate, FastStartLeadBeyondRtcLead) {
    auto m = three_units();
    m.generators[2].commit_class = CommitClass::fast_start;
    m.generators[2].start_lead_time = 90;
    auto v = validate_system(m);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].location, "generator g3");
}

TEST(Validate, OverlappingDemandSteps) {
    auto m = three_units();
    m.products[0].demand_steps = {{50, 70, 1200}, {65, 80, 1000}};
    auto v = validate_system(m);
    ASSERT_FALSE(v.empty());
    EXPECT_NE(v[0].message.find("overlap"), std::string::npos);
}

TEST(Validate, WidthsMustSumToPmax) {
    auto m = three_units();
    m.generators[0].cost_curve = {{90, 20}};
    EXPECT_EQ(validate_system(m).size(), 1u);
}

TEST(SystemIo, RoundTrip) {
    auto m = three_units();
    m.name = "tiny";
    m.ir_prices_defaulted = false;
    m.generators[2].commit_class = CommitClass::fast_start;
    m.generators[2].start_lead_time = 30;
    m.seller_overrides.push_back({"g1", 50, 10, 0});
    m.config.fo_penalty_m = 3.5;
    auto text = system_to_json(m);
    auto back = parse_system(text);
    EXPECT_EQ(system_to_json(back), text);
    EXPECT_EQ(back.generators[2].start_lead_time, 30.0);
    EXPECT_EQ(back.config.fo_penalty_m, 3.5);
}

TEST(SystemIo, MissingProductsUseFlaggedDefaults) {
    auto m = parse_system(R"({"generators":[{"id":"a","p_min":0,"p_max":10,"ramp_rate":10,"cost_curve":[[10,20]]}]})");
    EXPECT_TRUE(m.ir_prices_defaulted);
    ASSERT_EQ(m.products.size(), 2u);
    EXPECT_EQ(m.products[0].demand_steps[0].price, 1200.0);
    EXPECT_EQ(m.products[0].demand_steps[1].price, 1000.0);
}

TEST(SystemIo, UnknownKeyIsRejected) {
    EXPECT_THROW((void)parse_system(R"({"generators":[], "extra": 1})"), InputError);
    EXPECT_THROW((void)parse_system("not json"), InputError);
}

TEST(Defaults, MarketConfig) {
    MarketConfig c;
    EXPECT_EQ(c.tier_percentiles, (std::vector<double>{5, 10, 20, 35, 50, 65, 80, 90, 95}));
    EXPECT_EQ(c.fo_penalty_m, 2.8);
    EXPECT_EQ(c.mip_gap, 0.005);
    EXPECT_EQ(c.intervals_per_hour(), 4);
    ReserveProductDef p;
    p.response_time_min = 30;
    EXPECT_EQ(p.effective_beta(), 0.5);
}
