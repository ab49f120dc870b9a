#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "flexmarket/csv.hpp"
#include "flexmarket/da_market.hpp"
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

MarketConfig exact() {
    MarketConfig c;
    c.mip_gap = 0.0;
    return c;
}

SystemModel with_units(std::vector<Generator> gens) {
    SystemModel m;
    m.generators = std::move(gens);
    m.config = exact();
    return m;
}

PercentileTable table(std::vector<double> pcts, std::vector<std::vector<double>> rows) {
    PercentileTable t;
    t.quantity = "net_load";
    t.percentiles = std::move(pcts);
    t.values = Grid<double>(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) t.values(i, j) = rows[i][j];
    }
    return t;
}

// Three injection levels per hour, percentiles 25/50/75.
TierStructure three_levels(const std::vector<std::array<double, 3>>& per_hour) {
    TierStructure tiers;
    tiers.account_id = "aggregate";
    tiers.percentiles = {25, 50, 75};
    tiers.levels = Grid<double>(3, per_hour.size());
    for (std::size_t t = 0; t < per_hour.size(); ++t) {
        for (std::size_t s = 0; s < 3; ++s) tiers.levels(s, t) = per_hour[t][s];
        tiers.reference.push_back(per_hour[t][1]);
    }
    tiers.prob_up = {0.25, 0.5};
    tiers.prob_down = {0.5, 0.25};
    return tiers;
}

double sum_terms(const DaSolution& s) {
    double total = 0.0;
    for (const auto& [tag, v] : s.cost_terms) total += v;
    return total;
}

}  // namespace

TEST(BaseUc, SingleUnitCost) {
    auto g = unit("g1", 0, 100, {{100, 20}});
    g.no_load_cost = 50;
    auto p = build_base_uc(with_units({g}), std::vector<double>(24, 50.0));
    auto s = solve_da(p, exact());
    EXPECT_NEAR(s.objective, 24 * 50 * 20 + 24 * 50, 1e-6);
    EXPECT_NEAR(s.production_cost(), s.objective, 1e-6);
    for (std::size_t t = 0; t < 24; ++t) EXPECT_NEAR(s.p(0, t), 50.0, 1e-7);
}

TEST(BaseUc, MeritOrderAndEnergyPrice) {
    auto p = build_base_uc(with_units({unit("cheap", 0, 100, {{100, 20}}), unit("dear", 0, 100, {{100, 30}})}),
                           std::vector<double>{120.0, 80.0});
    auto s = solve_da(p, exact());
    EXPECT_NEAR(s.p(0, 0), 100, 1e-7);
    EXPECT_NEAR(s.p(1, 0), 20, 1e-7);
    EXPECT_NEAR(s.p(1, 1), 0, 1e-7);
    auto prices = compute_prices(p, s);
    EXPECT_NEAR(prices.energy[0], 30.0, 1e-7);
    EXPECT_NEAR(prices.energy[1], 20.0, 1e-7);
}

TEST(BaseUc, ScarcityPricedAtShortfallPenalty) {
    auto p = build_base_uc(with_units({unit("g", 0, 50, {{50, 20}})}), std::vector<double>{70.0});
    auto s = solve_da(p, exact());
    EXPECT_NEAR(s.shortfall[0], 20, 1e-7);
    EXPECT_NEAR(compute_prices(p, s).energy[0], 9000.0, 1e-6);
    EXPECT_NEAR(s.cost_terms.at("energy_scarcity"), 20 * 9000.0, 1e-6);
}

TEST(BaseUc, MatchesExhaustiveCommitment) {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int trial = 0; trial < 4; ++trial) {
        std::vector<Generator> gens;
        for (int i = 0; i < 3; ++i) {
            const double pmax = 40 + 60 * U(rng);
            auto g = unit("g" + std::to_string(i), 0.2 * pmax, pmax,
                          {{0.6 * pmax, 15 + 20 * U(rng)}, {0.4 * pmax, 40 + 10 * U(rng)}});
            g.ramp_rate = 0.4 * pmax + 10 * U(rng);
            g.startup_cost = 200 + 800 * U(rng);
            g.no_load_cost = 50 * U(rng);
            g.min_up_time = 1 + (i + trial) % 3;
            g.min_down_time = 1 + (i * 2 + trial) % 3;
            g.initial_on = i == 0;
            g.initial_output = g.initial_on ? g.p_min + 5 : 0.0;
            gens.push_back(g);
        }
        std::vector<double> demand;
        for (int t = 0; t < 4; ++t) demand.push_back(40 + 90 * U(rng));

        auto p = build_base_uc(with_units(gens), demand);
        auto s = solve_da(p, exact());

        oracle::Instance inst;
        inst.units = gens;
        inst.demand = demand;
        auto best = oracle::enumerate(inst);
        ASSERT_TRUE(best.feasible);
        EXPECT_NEAR(s.objective, best.objective, 1e-5 * std::max(1.0, best.objective)) << "trial " << trial;
        EXPECT_LE(p.milp.max_violation(s.x), 1e-6);
    }
}

TEST(BaseUc, InfeasibleInitialStateRaises) {
    auto g = unit("stuck", 20, 100, {{100, 20}});
    g.ramp_rate = 10;
    g.initial_on = true;
    g.initial_output = 200;
    auto p = build_base_uc(with_units({g}), std::vector<double>{50.0});
    try {
        (void)solve_da(p, exact());
        FAIL() << "expected SolveError";
    } catch (const SolveError& e) {
        EXPECT_FALSE(e.causes().empty());
    }
}

TEST(BaseUc, ObjectiveDecomposesIntoTags) {
    auto a = unit("a", 10, 100, {{50, 20}, {50, 25}});
    a.startup_cost = 300;
    a.no_load_cost = 12;
    auto p = build_base_uc(with_units({a, unit("b", 0, 80, {{80, 40}})}), std::vector<double>{30, 140, 90});
    auto s = solve_da(p, exact());
    EXPECT_NEAR(sum_terms(s), s.objective, 1e-6);
    EXPECT_NEAR(s.cost_terms.at("startup"), 300, 1e-6);
}

TEST(Ir, ZeroWidthProcuresNothing) {
    auto m = with_units({unit("g", 0, 100, {{100, 20}})});
    auto nl = table({5, 10, 20, 35, 50, 65, 80, 90, 95}, std::vector<std::vector<double>>(9, {60.0, 60.0}));
    auto p = build_base_uc(m, nl);
    apply_ir_design(p, default_ir_products(), nl);
    auto s = solve_da(p, exact());
    for (double v : s.award_up.data()) EXPECT_NEAR(v, 0, 1e-9);
    for (double v : s.award_down.data()) EXPECT_NEAR(v, 0, 1e-9);
    for (const auto& pr : compute_prices(p, s).reserve) {
        for (double v : pr) EXPECT_NEAR(v, 0, 1e-9);
    }
}

TEST(Ir, RampLimitsAwardAndShortagesSetPrice) {
    auto g = unit("slow", 0, 200, {{200, 20}});
    g.ramp_rate = 10;
    ReserveProductDef up;
    up.name = "up";
    up.direction = Direction::up;
    up.demand_steps = {{50, 95, 600}};
    auto nl = table({50, 95}, {{100.0}, {150.0}});
    auto p = build_base_uc(with_units({g}), nl);
    apply_ir_design(p, {up}, nl);
    auto s = solve_da(p, exact());
    EXPECT_NEAR(s.award_up(0, 0), 10, 1e-7);
    EXPECT_NEAR(p.ir[0].step_quantity(0, 0), 50, 1e-9);
    EXPECT_NEAR(compute_prices(p, s).reserve[0][0], 600, 1e-6);
    EXPECT_NEAR(s.cost_terms.at("reserve_shortage"), 40 * 600, 1e-6);
}

TEST(Ir, CascadedProductPriceIncludesLowerRank) {
    auto g = unit("g", 0, 300, {{300, 20}});
    g.ramp_rate = 30;
    ReserveProductDef slow, fast;
    slow.name = "slow";
    slow.demand_steps = {{50, 80, 500}};
    fast.name = "fast";
    fast.cascade_rank = 1;
    fast.response_time_min = 15;
    fast.beta = 0.25;
    fast.demand_steps = {{80, 95, 900}};
    auto nl = table({50, 80, 95}, {{100.0}, {140.0}, {170.0}});
    auto p = build_base_uc(with_units({g}), nl);
    apply_ir_design(p, {slow, fast}, nl);
    auto s = solve_da(p, exact());
    auto prices = compute_prices(p, s);
    // Fast capacity also counts toward the slow requirement, so its price is never below slow's.
    EXPECT_GE(prices.reserve[1][0] + 1e-9, prices.reserve[0][0]);
    EXPECT_LE(p.milp.max_violation(s.x), 1e-6);
}

TEST(Fo, ForcedPositionHedgesBothSides) {
    auto tiers = three_levels({{40, 50, 60}});
    auto m = with_units({unit("g", 0, 200, {{200, 20}})});
    auto p = build_base_uc(m, std::vector<double>{0.0});
    auto buyer = aggregate_buyer(tiers, m.config);
    apply_fo_design(p, seller_params(m), {buyer}, tiers, m.config);
    p.milp.set_var_bounds(p.buyers[0].p_da[0], 50, 50);
    auto s = solve_da(p, exact());
    const auto& hd = s.hd[0];
    const auto& sd = s.sd[0];
    double up = 0, down = 0;
    for (std::size_t r = 0; r < 2; ++r) {
        up += hd[kUp](r, 0) + sd[kUp](r, 0);
        down += hd[kDown](r, 0) + sd[kDown](r, 0);
    }
    EXPECT_NEAR(up, 10, 1e-7);
    EXPECT_NEAR(down, 10, 1e-7);
    // Hedging identity at each level.
    for (std::size_t lvl = 0; lvl < 3; ++lvl) {
        double v = 50;
        for (std::size_t r = 0; r < 2; ++r) {
            if (r < lvl) {
                v += hd[kDown](r, 0) + sd[kDown](r, 0);
            } else {
                v -= hd[kUp](r, 0) + sd[kUp](r, 0);
            }
        }
        EXPECT_NEAR(v, tiers.levels(lvl, 0), 1e-7);
    }
}

TEST(Fo, NoUncertaintyNoHedges) {
    auto tiers = three_levels({{-80, -80, -80}, {-90, -90, -90}});
    auto m = with_units({unit("g", 0, 200, {{200, 20}})});
    auto p = build_base_uc(m, std::vector<double>{80, 90});
    apply_fo_design(p, seller_params(m), {aggregate_buyer(tiers, m.config)}, tiers, m.config);
    auto s = solve_da(p, exact());
    for (std::size_t d : {kUp, kDown}) {
        for (double v : s.hd[0][d].data()) EXPECT_NEAR(v, 0, 1e-9);
        for (double v : s.sd[0][d].data()) EXPECT_NEAR(v, 0, 1e-9);
    }
    for (double v : s.y[0].data()) EXPECT_NEAR(v, 0, 1e-9);
    EXPECT_NEAR(s.p(0, 0), 80, 1e-7);
    EXPECT_NEAR(s.buyer_p_da[0][1], -90, 1e-7);
}

TEST(Fo, MatchesExhaustiveCommitment) {
    auto base = unit("base", 20, 150, {{100, 20}, {50, 28}});
    base.ramp_rate = 60;
    base.startup_cost = 500;
    base.no_load_cost = 10;
    auto peaker = unit("peaker", 10, 60, {{60, 45}});
    peaker.ramp_rate = 30;
    peaker.startup_cost = 150;
    peaker.commit_class = CommitClass::fast_start;
    peaker.start_lead_time = 30;
    const std::vector<std::vector<std::array<double, 3>>> cases = {
        {{-150, -120, -100}, {-140, -125, -95}},
        {{-190, -130, -110}, {-100, -90, -60}},
    };
    for (const auto& levels : cases) {
        auto tiers = three_levels(levels);
        std::vector<double> demand;
        for (const auto& l : levels) demand.push_back(-l[1]);
        auto m = with_units({base, peaker});
        auto sellers = seller_params(m);
        auto buyer = aggregate_buyer(tiers, m.config);
        auto p = build_base_uc(m, demand);
        apply_fo_design(p, sellers, {buyer}, tiers, m.config);
        auto s = solve_da(p, exact());
        EXPECT_LE(p.milp.max_violation(s.x), 1e-6);
        EXPECT_NEAR(sum_terms(s), s.objective, 1e-6);

        oracle::Instance inst;
        inst.units = m.generators;
        inst.demand = demand;
        oracle::FoCase fo;
        fo.sellers = sellers;
        fo.tiers = tiers;
        fo.buyer_forecast = tiers.reference;
        fo.vc_up = buyer.self_hedge_cost_up.value();
        fo.vc_down = buyer.self_hedge_cost_down.value();
        fo.penalty_m = m.config.fo_penalty_m;
        inst.fo = fo;
        auto best = oracle::enumerate(inst);
        ASSERT_TRUE(best.feasible);
        EXPECT_NEAR(s.objective, best.objective, 1e-5 * std::max(1.0, std::abs(best.objective)));

        // FO prices are duals of the seller/buyer balance and must not be negative for up tiers here.
        auto prices = compute_prices(p, s);
        EXPECT_EQ(prices.fo[kUp].rows(), 2u);
    }
}

TEST(Fo, RejectsCombinedDesigns) {
    auto tiers = three_levels({{-60, -50, -40}});
    auto m = with_units({unit("g", 0, 100, {{100, 20}})});
    auto nl = table({5, 10, 20, 35, 50, 65, 80, 90, 95}, std::vector<std::vector<double>>(9, {50.0}));
    auto p = build_base_uc(m, nl);
    apply_ir_design(p, default_ir_products(), nl);
    EXPECT_THROW(apply_fo_design(p, seller_params(m), {aggregate_buyer(tiers, m.config)}, tiers, m.config), InputError);
}

TEST(DaExport, CsvFiles) {
    auto m = with_units({unit("g", 0, 100, {{100, 20}})});
    auto p = build_base_uc(m, std::vector<double>{10, 20});
    auto s = solve_da(p, exact());
    const auto dir = std::filesystem::temp_directory_path();
    write_da_solution_csv(p, s, dir / "da_sol_test.csv");
    write_da_prices_csv(p, compute_prices(p, s), dir / "da_price_test.csv");
    auto t = read_csv(dir / "da_sol_test.csv");
    bool found = false;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        if (t.rows[r][0] == "p" && t.rows[r][1] == "g,1") {
            found = true;
            EXPECT_NEAR(t.number(r, "value"), 20, 1e-9);
        }
    }
    EXPECT_TRUE(found);
    auto pr = read_csv(dir / "da_price_test.csv");
    EXPECT_EQ(pr.header, (std::vector<std::string>{"price", "key", "hour", "value"}));
    EXPECT_EQ(pr.rows.size(), 2u);
}
