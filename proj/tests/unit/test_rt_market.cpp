#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "flexmarket/errors.hpp"
#include "flexmarket/rt_market.hpp"

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

// An RT system with every unit's DA output flat over `hours`.
RtSystem flat_system(std::vector<Generator> units, std::vector<double> p_da, std::size_t hours) {
    RtSystem s;
    s.units = std::move(units);
    const std::size_t N = s.units.size();
    s.p_da = Grid<double>(N, hours, 0.0);
    s.u_da = Grid<double>(N, hours, 0.0);
    s.award_up = Grid<double>(N, hours, 0.0);
    s.award_down = Grid<double>(N, hours, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const auto sp = derive_strike_prices(s.units[i]);
        s.strike_up.push_back(sp.strike_up);
        s.strike_down.push_back(sp.strike_down);
        for (std::size_t h = 0; h < hours; ++h) {
            s.p_da(i, h) = p_da[i];
            s.u_da(i, h) = p_da[i] > 0 ? 1.0 : 0.0;
        }
        s.units[i].initial_on = p_da[i] > 0;
        s.units[i].initial_output = p_da[i];
        total += p_da[i];
    }
    s.scheduled_net_load.assign(hours, total);
    s.da_shortfall.assign(hours, 0.0);
    s.da_surplus.assign(hours, 0.0);
    return s;
}

std::vector<double> constant(std::size_t n, double v) { return std::vector<double>(n, v); }

}  // namespace

TEST(Rtd, NoImbalanceKeepsDaSchedule) {
    auto sys = flat_system({unit("cheap", 0, 100, {{100, 20}}), unit("dear", 0, 100, {{100, 30}})}, {100, 20}, 2);
    auto r = rollout(sys, constant(8, 120));
    for (std::size_t k = 0; k < 8; ++k) {
        EXPECT_NEAR(r.p(0, k), 100, 1e-7);
        EXPECT_NEAR(r.p(1, k), 20, 1e-7);
        EXPECT_NEAR(r.lambda[k], 30, 1e-7);
        EXPECT_NEAR(r.incremental_cost[k], 0, 1e-7);
        EXPECT_NEAR(r.error[k], 0, 1e-9);
    }
    // Production cost at the DA point: (100*20 + 20*30) per hour.
    EXPECT_NEAR(r.production_cost[0], 0.25 * 2600, 1e-7);
}

TEST(Rtd, MarginalUnitSetsPriceAtStrikeUp) {
    auto sys = flat_system({unit("base", 0, 100, {{100, 20}}), unit("flex", 0, 100, {{50, 30}, {50, 50}})}, {100, 40}, 1);
    auto r = rollout(sys, constant(4, 150));
    EXPECT_NEAR(r.p(1, 0), 50, 1e-7);
    EXPECT_NEAR(r.lambda[0], 50, 1e-7);
    // 10 MW for a quarter hour at $50.
    EXPECT_NEAR(r.incremental_cost[0], 0.25 * 10 * 50, 1e-7);
}

TEST(Rtd, UnmeetableReserveIsScarcityPriced) {
    auto sys = flat_system({unit("only", 0, 100, {{100, 20}})}, {90}, 1);
    sys.config.rt_reserve_requirement = 50;
    auto r = rollout(sys, constant(4, 90));
    EXPECT_NEAR(r.reserve_short[0], 40, 1e-7);
    EXPECT_GE(r.lambda[0], sys.config.rt_spin_scarcity - 1e-6);
    EXPECT_NEAR(r.scarcity_cost[0], 0.25 * 40 * 4500, 1e-6);
}

TEST(Rtd, EnergyShortfallPricedAtPenalty) {
    auto sys = flat_system({unit("only", 0, 100, {{100, 20}})}, {90}, 1);
    auto r = rollout(sys, constant(4, 130));
    EXPECT_NEAR(r.shortfall[0], 30, 1e-7);
    EXPECT_NEAR(r.lambda[0], 9000, 1e-6);
    for (double c : r.scarcity_cost) EXPECT_GE(c, 0.0);
}

TEST(Rtd, RampLimitsFifteenMinuteMoves) {
    auto slow = unit("slow", 0, 200, {{200, 20}});
    slow.ramp_rate = 40;  // 10 MW per interval
    auto sys = flat_system({slow}, {100}, 1);
    auto r = rollout(sys, constant(4, 130));
    EXPECT_NEAR(r.p(0, 0), 110, 1e-7);
    EXPECT_NEAR(r.p(0, 1), 120, 1e-7);
    EXPECT_NEAR(r.p(0, 2), 130, 1e-7);
    EXPECT_NEAR(r.shortfall[0], 20, 1e-7);
}

TEST(Rtc, SustainedErrorStartsIdleFastUnit) {
    auto base = unit("base", 0, 100, {{100, 20}});
    auto peaker = unit("peaker", 10, 60, {{60, 80}});
    peaker.commit_class = CommitClass::fast_start;
    peaker.start_lead_time = 30;
    peaker.startup_cost = 500;
    peaker.no_load_cost = 100;
    auto sys = flat_system({base, peaker}, {100, 0}, 4);
    auto nl = constant(16, 150);
    auto r = rollout(sys, nl);
    for (std::size_t k = 0; k < 16; ++k) {
        EXPECT_EQ(r.u(1, k), 1.0);
        EXPECT_NEAR(r.p(1, k), 50, 1e-7);
        EXPECT_NEAR(r.shortfall[k], 0, 1e-7);
    }
    // Two-commitment comparison: over the 3-hour RTC window starting the unit
    // (500 + 3*(100 + 50*80)) beats 3 hours of 50 MW shortfall at 9000.
    EXPECT_LT(500 + 3 * (100 + 50 * 80.0), 3 * 50 * 9000.0);
    // The start-up shows up once in the incremental cost.
    double starts = 0;
    for (double c : r.incremental_cost) starts += c;
    EXPECT_NEAR(starts, 500 + 4 * (100 + 50 * 80.0), 1e-6);
}

TEST(Rtc, SlowFastUnitIsNeverRecommitted) {
    auto base = unit("base", 0, 100, {{100, 20}});
    auto peaker = unit("peaker", 10, 60, {{60, 80}});
    peaker.commit_class = CommitClass::fast_start;
    peaker.start_lead_time = 90;  // longer than the one-hour RTC lead
    auto sys = flat_system({base, peaker}, {100, 0}, 2);
    auto r = rollout(sys, constant(8, 150));
    for (std::size_t k = 0; k < 8; ++k) {
        EXPECT_EQ(r.u(1, k), 0.0);
        EXPECT_NEAR(r.shortfall[k], 50, 1e-7);
    }
}

TEST(Rtc, DaOnlyStatusNeverChanges) {
    auto a = unit("a", 20, 100, {{100, 20}});
    auto b = unit("b", 20, 100, {{100, 90}});
    auto sys = flat_system({a, b}, {100, 0}, 3);
    auto r = rollout(sys, constant(12, 60));
    for (std::size_t k = 0; k < 12; ++k) {
        EXPECT_EQ(r.u(0, k), 1.0);
        EXPECT_EQ(r.u(1, k), 0.0);
    }
}

TEST(Rollout, WrongLengthIsInputError) {
    auto sys = flat_system({unit("a", 0, 100, {{100, 20}})}, {50}, 2);
    EXPECT_THROW((void)rollout(sys, constant(7, 50)), InputError);
}

TEST(SimpleRt, ZeroErrorCostsNothing) {
    auto sys = flat_system({unit("a", 0, 100, {{100, 40}})}, {50}, 2);
    sys.award_up(0, 0) = sys.award_up(0, 1) = 10;
    Grid<double> sc(1, 8, 50.0);
    auto r = run_simple_rt(sys, sc);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_NEAR(r[0].total_cost, 0, 1e-9);
    for (double v : r[0].p_up.data()) EXPECT_NEAR(v, 0, 1e-9);
    for (double v : r[0].eps_up) EXPECT_NEAR(v, 0, 1e-9);
}

TEST(SimpleRt, ErrorWithinAward) {
    auto sys = flat_system({unit("a", 0, 100, {{100, 40}})}, {50}, 1);
    sys.award_up(0, 0) = 10;
    Grid<double> sc(1, 4, 56.0);
    auto r = run_simple_rt(sys, sc);
    // $240 per hour-equivalent: 6 MW at $40 for four quarter hours.
    EXPECT_NEAR(r[0].total_cost, 240, 1e-6);
    EXPECT_NEAR(r[0].p_up(0, 2), 6, 1e-9);
}

TEST(SimpleRt, ErrorBeyondAwardHitsSlack) {
    auto sys = flat_system({unit("a", 0, 100, {{100, 40}})}, {50}, 1);
    sys.award_up(0, 0) = 10;
    Grid<double> sc(1, 4, 65.0);
    auto r = run_simple_rt(sys, sc);
    EXPECT_NEAR(r[0].eps_up[0], 5, 1e-9);
    EXPECT_NEAR(r[0].total_cost, 10 * 40 + 5 * 9000, 1e-6);
}

TEST(SimpleRt, NegativeErrorUsesDownAwardThenSurplus) {
    auto sys = flat_system({unit("a", 0, 100, {{50, 25}, {50, 40}})}, {50}, 1);
    sys.award_down(0, 0) = 10;
    Grid<double> sc(1, 4, 35.0);
    auto r = run_simple_rt(sys, sc);
    EXPECT_NEAR(r[0].p_down(0, 0), 10, 1e-9);
    EXPECT_NEAR(r[0].eps_down[0], 5, 1e-9);
    EXPECT_NEAR(r[0].total_cost, -10 * 25 + 5 * 250, 1e-6);
}

TEST(SimpleRt, OfflineAwardHolderIsStarted) {
    auto base = unit("base", 0, 100, {{100, 20}});
    auto peaker = unit("peaker", 0, 40, {{40, 60}});
    peaker.commit_class = CommitClass::fast_start;
    peaker.start_lead_time = 20;
    peaker.startup_cost = 300;
    peaker.no_load_cost = 40;
    auto sys = flat_system({base, peaker}, {80, 0}, 1);
    sys.award_up(1, 0) = 30;
    Grid<double> sc(1, 4, 100.0);
    auto r = run_simple_rt(sys, sc);
    for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(r[0].u_rt(1, k), 1.0);
    EXPECT_EQ(r[0].u_start(1, 0), 1.0);
    EXPECT_NEAR(r[0].total_cost, 300 + 40 + 20 * 60, 1e-6);
    EXPECT_NEAR(r[0].interval_cost[0], 300 + 0.25 * (40 + 20 * 60), 1e-6);
}

TEST(SimpleRt, AgreesWithRestrictedDispatch) {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<Generator> gens;
        std::vector<double> pda;
        for (int i = 0; i < 3; ++i) {
            gens.push_back(unit("g" + std::to_string(i), 10, 100,
                                {{45, 15 + 20 * U(rng)}, {45, 40 + 20 * U(rng)}}));
            pda.push_back(30 + 40 * U(rng));
        }
        auto sys = flat_system(gens, pda, 3);
        for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t h = 0; h < 3; ++h) {
                sys.award_up(i, h) = (sys.units[i].p_max - pda[i]) * U(rng);
                sys.award_down(i, h) = (pda[i] - sys.units[i].p_min) * U(rng);
            }
        }
        Grid<double> sc(2, 12);
        for (std::size_t s = 0; s < 2; ++s) {
            for (std::size_t k = 0; k < 12; ++k) sc(s, k) = sys.scheduled_net_load[0] + 120 * (U(rng) - 0.5);
        }
        auto simple = run_simple_rt(sys, sc);
        for (std::size_t s = 0; s < 2; ++s) {
            std::vector<double> nl(sc.row(s).begin(), sc.row(s).end());
            auto rtd = rollout(sys, nl, RtMode::restricted);
            const double rtd_cost = rtd.total_incremental() + rtd.total_scarcity();
            EXPECT_NEAR(simple[s].total_cost, rtd_cost, 1e-6 * std::max(1.0, std::abs(rtd_cost)))
                << "trial " << trial << " scenario " << s;
        }
    }
}

TEST(RtExport, CsvShapes) {
    auto sys = flat_system({unit("a", 0, 100, {{100, 40}})}, {50}, 1);
    sys.award_up(0, 0) = 10;
    std::vector<RtResult> rts{rollout(sys, constant(4, 55))};
    Grid<double> sc(1, 4, 55.0);
    auto simple = run_simple_rt(sys, sc);
    const auto dir = std::filesystem::temp_directory_path();
    write_rt_dispatch_csv(sys, rts, dir / "rt_dispatch_test.csv");
    write_rt_system_csv(rts, dir / "rt_system_test.csv");
    write_simple_rt_csv(sys, simple, dir / "simple_rt_test.csv");
    EXPECT_TRUE(std::filesystem::file_size(dir / "rt_dispatch_test.csv") > 0);
    EXPECT_TRUE(std::filesystem::file_size(dir / "rt_system_test.csv") > 0);
    EXPECT_TRUE(std::filesystem::file_size(dir / "simple_rt_test.csv") > 0);
}
