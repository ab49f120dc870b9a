#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "flexmarket/csv.hpp"
#include "flexmarket/errors.hpp"
#include "flexmarket/settlement.hpp"

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

TierStructure levels_40_50_60(std::size_t hours) {
    TierStructure t;
    t.account_id = "aggregate";
    t.percentiles = {25, 50, 75};
    t.levels = Grid<double>(3, hours);
    for (std::size_t h = 0; h < hours; ++h) {
        t.levels(0, h) = 40;
        t.levels(1, h) = 50;
        t.levels(2, h) = 60;
        t.reference.push_back(50);
    }
    t.prob_up = {0.25, 0.5};
    t.prob_down = {0.5, 0.25};
    return t;
}

// An FO problem whose solution is filled in by hand: one seller, one buyer
// at p_da = 50 holding `up` MW in up tier 0 and `down` MW in down tier 1.
struct HandFo {
    DaProblem p;
    DaSolution sol;
};

HandFo hand_fo(double strike_up, double strike_down, double up, double down) {
    auto m = with_units({unit("s", 0, 200, {{200, 30}})});
    HandFo f;
    f.p = build_base_uc(m, std::vector<double>{0.0});
    auto tiers = levels_40_50_60(1);
    FlexSellerParams sp{"s", strike_up, strike_down, 0.0};
    apply_fo_design(f.p, {sp}, {aggregate_buyer(tiers, m.config)}, tiers, m.config);
    f.sol.p = Grid<double>(1, 1, 0.0);
    f.sol.u = Grid<double>(1, 1, 0.0);
    f.sol.buyer_p_da = {{50.0}};
    std::array<Grid<double>, 2> g{Grid<double>(2, 1, 0.0), Grid<double>(2, 1, 0.0)};
    g[kUp](0, 0) = up;
    g[kDown](1, 0) = down;
    f.sol.hs = {g};
    f.sol.hd = {g};
    f.sol.sd = {{Grid<double>(2, 1, 0.0), Grid<double>(2, 1, 0.0)}};
    return f;
}

RtResult flat_prices(double lambda, std::size_t k = 4) {
    RtResult r;
    r.interval_h = 0.25;
    r.lambda.assign(k, lambda);
    return r;
}

RtSystem no_units(std::size_t hours) {
    RtSystem s;
    s.p_da = Grid<double>(0, hours);
    s.u_da = Grid<double>(0, hours);
    return s;
}

double party_sum(const CashflowLedger& l, const std::string& party) {
    double s = 0.0;
    for (const auto& e : l.entries()) {
        if (e.party == party) s += e.amount;
    }
    return s;
}

}  // namespace

TEST(Ledger, PostMirrorsIsoAndSumsToZero) {
    CashflowLedger l;
    l.post({"a", PartyClass::seller, Stage::da, Product::energy, 0, 0, 12.5, "energy"});
    l.post({"b", PartyClass::buyer, Stage::rt, Product::fo_up, 0, 3, -7.0, "payoff"});
    ASSERT_EQ(l.entries().size(), 4u);
    EXPECT_EQ(l.entries()[1].party, "iso");
    EXPECT_EQ(l.entries()[1].amount, -12.5);
    EXPECT_EQ(l.total(), 0.0);
    auto iso = iso_position(l);
    EXPECT_EQ(iso.get(Product::energy, Stage::da), -12.5);
    EXPECT_EQ(iso.get(Product::fo_up, Stage::rt), 7.0);
}

TEST(Ledger, AuditNamesUnmatchedEntries) {
    CashflowLedger l;
    l.post({"a", PartyClass::seller, Stage::da, Product::energy, 0, 0, 10, "energy"});
    l.post_unpaired({"rogue", PartyClass::buyer, Stage::rt, Product::ir_up, 2, 5, -3, "allocation"});
    try {
        (void)iso_position(l);
        FAIL() << "expected AuditError";
    } catch (const AuditError& e) {
        ASSERT_EQ(e.offending().size(), 1u);
        EXPECT_NE(e.offending()[0].find("rogue"), std::string::npos);
    }
}

TEST(Ledger, EmptyLedgerGivesZeros) {
    auto iso = iso_position(CashflowLedger{});
    EXPECT_EQ(iso.total, 0.0);
    EXPECT_EQ(iso.fo_net(), 0.0);
    EXPECT_EQ(iso.ir_recovery_ratio(), 0.0);
}

TEST(Ledger, AppendKeepsPairsDistinct) {
    CashflowLedger a, b;
    a.post({"x", PartyClass::seller, Stage::da, Product::energy, 0, 0, 1, "energy"});
    b.post({"y", PartyClass::seller, Stage::da, Product::energy, 1, 0, 2, "energy"});
    a.append(b);
    EXPECT_NO_THROW((void)iso_position(a));
    a.post({"z", PartyClass::seller, Stage::da, Product::energy, 1, 0, 3, "energy"});
    EXPECT_NO_THROW((void)iso_position(a));
    EXPECT_EQ(a.entries().size(), 6u);
}

TEST(DaEnergy, SettlesAtClearingPrice) {
    auto m = with_units({unit("cheap", 0, 100, {{100, 20}}), unit("dear", 0, 100, {{100, 30}})});
    auto p = build_base_uc(m, std::vector<double>{150.0, 0.0});
    auto sol = solve_da(p, m.config);
    auto prices = compute_prices(p, sol);
    auto l = settle_da_energy(p, sol, prices);
    // Hour 0: cheap 100 MW at $30, dear 50 MW at $30, load pays 150*30.
    EXPECT_NEAR(party_sum(l, "cheap"), 3000, 1e-6);
    EXPECT_NEAR(party_sum(l, "dear"), 1500, 1e-6);
    EXPECT_NEAR(party_sum(l, "aggregate"), -4500, 1e-6);
    EXPECT_NEAR(l.total(), 0.0, 1e-9);
    // Hour 1 has no schedule and posts nothing.
    for (const auto& e : l.entries()) EXPECT_EQ(e.interval, 0u);
}

TEST(DaEnergy, IsoKeepsScarcityRent) {
    auto m = with_units({unit("g", 0, 50, {{50, 20}})});
    auto p = build_base_uc(m, std::vector<double>{70.0});
    auto sol = solve_da(p, m.config);
    auto prices = compute_prices(p, sol);
    auto iso = iso_position(settle_da_energy(p, sol, prices));
    // Load pays 70 MW at 9000, the unit receives 50 MW at 9000.
    EXPECT_NEAR(iso.get(Product::energy, Stage::da), prices.energy[0] * sol.shortfall[0], 1e-6);
}

TEST(FoPremiums, SymmetricTransfer) {
    auto f = hand_fo(50, 20, 10, 0);
    DaPrices prices;
    prices.energy = {0.0};
    prices.fo[kUp] = Grid<double>(2, 1, 0.0);
    prices.fo[kDown] = Grid<double>(2, 1, 0.0);
    prices.fo[kUp](0, 0) = 5;
    auto l = settle_fo_premiums(f.p, f.sol, prices);
    EXPECT_DOUBLE_EQ(party_sum(l, "s"), 50);
    EXPECT_DOUBLE_EQ(party_sum(l, "aggregate"), -50);
    EXPECT_EQ(iso_position(l).fo_net(), 0.0);
}

TEST(FoPremiums, EmptyWithoutFo) {
    auto m = with_units({unit("g", 0, 50, {{50, 20}})});
    auto p = build_base_uc(m, std::vector<double>{30.0});
    auto sol = solve_da(p, m.config);
    EXPECT_TRUE(settle_fo_premiums(p, sol, compute_prices(p, sol)).empty());
}

TEST(FoPremiums, MatchesDotProductOfAwards) {
    auto base = unit("base", 20, 150, {{100, 20}, {50, 28}});
    base.ramp_rate = 60;
    auto flex = unit("flex", 0, 80, {{40, 25}, {40, 45}});
    auto m = with_units({base, flex});
    TierStructure t;
    t.account_id = "aggregate";
    t.percentiles = {10, 50, 90};
    t.levels = Grid<double>(3, 2);
    const double lv[3][2] = {{-160, -140}, {-130, -120}, {-110, -90}};
    for (std::size_t s = 0; s < 3; ++s) {
        for (std::size_t h = 0; h < 2; ++h) t.levels(s, h) = lv[s][h];
    }
    t.reference = {-130, -120};
    t.prob_up = {0.1, 0.5};
    t.prob_down = {0.5, 0.1};
    auto p = build_base_uc(m, std::vector<double>{130, 120});
    apply_fo_design(p, seller_params(m), {aggregate_buyer(t, m.config)}, t, m.config);
    auto sol = solve_da(p, m.config);
    auto prices = compute_prices(p, sol);
    auto l = settle_fo_premiums(p, sol, prices);
    // Oracle: recompute from the raw solution vector and row duals.
    for (std::size_t j = 0; j < p.sellers.size(); ++j) {
        double expect = 0.0;
        for (std::size_t d : {kUp, kDown}) {
            for (std::size_t r = 0; r < 2; ++r) {
                for (std::size_t h = 0; h < 2; ++h) expect += prices.fo[d](r, h) * sol.value(p.sellers[j].hs[d](r, h));
            }
        }
        EXPECT_NEAR(party_sum(l, p.sellers[j].params.generator_id), expect, 1e-6);
    }
    auto iso = iso_position(l);
    EXPECT_NEAR(iso.fo_net(Stage::da), 0.0, 1e-6 * std::max(1.0, std::abs(party_sum(l, "aggregate"))));
}

TEST(FoPayoffs, NoImbalanceNoPayoff) {
    auto f = hand_fo(50, 20, 10, 10);
    auto out = settle_fo_payoffs(f.p, f.sol, flat_prices(80), {std::vector<double>(4, 50.0)});
    EXPECT_TRUE(out.records.empty());
    EXPECT_TRUE(out.ledger.empty());
}

TEST(FoPayoffs, InTheMoneyShortfallInsideOneTier) {
    auto f = hand_fo(50, 20, 10, 0);
    auto out = settle_fo_payoffs(f.p, f.sol, flat_prices(80), {std::vector<double>(4, 40.0)});
    // (80 - 50) * 10 MW over the hour.
    EXPECT_NEAR(party_sum(out.ledger, "aggregate"), 300, 1e-9);
    EXPECT_NEAR(party_sum(out.ledger, "s"), -300, 1e-9);
    ASSERT_EQ(out.records.size(), 4u);
    EXPECT_TRUE(out.records[0].price_trigger);
    EXPECT_NEAR(out.records[0].exercised_mw, 10, 1e-12);
    EXPECT_NEAR(out.records[0].payoff_per_mw, 30, 1e-12);
    EXPECT_EQ(iso_position(out.ledger).fo_net(), 0.0);
}

TEST(FoPayoffs, OutOfTheMoneyPaysNothing) {
    auto f = hand_fo(50, 20, 10, 0);
    auto out = settle_fo_payoffs(f.p, f.sol, flat_prices(45), {std::vector<double>(4, 42.0)});
    ASSERT_EQ(out.records.size(), 4u);
    EXPECT_TRUE(out.records[0].quantity_trigger);
    EXPECT_FALSE(out.records[0].price_trigger);
    EXPECT_EQ(out.records[0].exercised_mw, 0.0);
    EXPECT_TRUE(out.ledger.empty());
}

TEST(FoPayoffs, ExcessBeyondDeepestLevelIsUnhedged) {
    auto f = hand_fo(50, 20, 10, 0);
    auto out = settle_fo_payoffs(f.p, f.sol, flat_prices(80), {std::vector<double>(4, 30.0)});
    ASSERT_FALSE(out.records.empty());
    EXPECT_TRUE(out.records[0].beyond_levels);
    EXPECT_NEAR(out.records[0].exercised_mw, 10, 1e-12);
}

TEST(FoPayoffs, ExercisedVolumeGrowsWithShortfall) {
    auto f = hand_fo(50, 20, 10, 0);
    double prev = 0.0;
    for (double real = 50; real >= 30; real -= 2.5) {
        auto out = settle_fo_payoffs(f.p, f.sol, flat_prices(80, 4), {std::vector<double>(4, real)});
        double v = out.records.empty() ? 0.0 : out.records[0].exercised_mw;
        EXPECT_GE(v + 1e-12, prev);
        prev = v;
    }
}

TEST(FoPayoffs, HedgeInvarianceAcrossPrices) {
    const double cu = 50, cd = 20;
    for (bool up : {true, false}) {
        std::vector<double> per_mw;
        const std::vector<double> lambdas = up ? std::vector<double>{55, 80, 120, 400, 9000}
                                               : std::vector<double>{19, 10, 0, -40, -250};
        for (double lam : lambdas) {
            auto f = hand_fo(cu, cd, 10, 10);
            const double real = up ? 43.0 : 57.0;  // 7 MW inside the hedged tier
            const std::vector<double> realized(4, real);
            auto rt = flat_prices(lam);
            auto pay = settle_fo_payoffs(f.p, f.sol, rt, {realized});
            UncertainPosition pos{"aggregate", PartyClass::buyer, {50.0}, realized};
            auto energy = settle_rt_energy(no_units(1), rt, std::span<const UncertainPosition>(&pos, 1));
            const double combined = party_sum(pay.ledger, "aggregate") + party_sum(energy, "aggregate");
            per_mw.push_back(combined / 7.0);  // one hour of 7 MW
        }
        const double mean = std::accumulate(per_mw.begin(), per_mw.end(), 0.0) / 5.0;
        double var = 0.0;
        for (double v : per_mw) var += (v - mean) * (v - mean) / 5.0;
        EXPECT_NEAR(mean, up ? -cu : cd, 1e-9);
        EXPECT_LE(var, 1e-9);
    }
}

TEST(RtEnergy, DeviationsAtRtPrice) {
    RtSystem sys = no_units(1);
    sys.units = {unit("g", 0, 100, {{100, 20}})};
    sys.p_da = Grid<double>(1, 1, 40.0);
    sys.u_da = Grid<double>(1, 1, 1.0);
    RtResult rt = flat_prices(60);
    rt.p = Grid<double>(1, 4, 40.0);
    EXPECT_TRUE(settle_rt_energy(sys, rt, {}).empty());
    rt.p(0, 2) = 60;  // 20 MW for one interval: 5 MWh
    EXPECT_NEAR(party_sum(settle_rt_energy(sys, rt, {}), "g"), 300, 1e-9);
}

TEST(RtEnergy, PartiesSumToMinusScarcitySettlement) {
    std::vector<Generator> gens{unit("a", 0, 100, {{100, 20}}), unit("b", 0, 60, {{60, 35}})};
    auto m = with_units(gens);
    auto p = build_base_uc(m, std::vector<double>{120, 130});
    auto sol = solve_da(p, m.config);
    auto sys = make_rt_system(p, sol);
    std::vector<double> nl;
    for (std::size_t k = 0; k < 8; ++k) nl.push_back(k < 4 ? 150 : 175);  // second hour runs short
    auto rt = rollout(sys, nl);
    auto pos = aggregate_position(p, sol, nl);
    auto l = settle_rt_energy(sys, rt, std::span<const UncertainPosition>(&pos, 1));
    double parties = 0.0, scarcity = 0.0;
    for (const auto& e : l.entries()) {
        if (e.cls != PartyClass::iso) parties += e.amount;
    }
    for (std::size_t k = 0; k < 8; ++k) {
        const std::size_t h = k / 4;
        scarcity += 0.25 * rt.lambda[k] *
                    ((rt.shortfall[k] - rt.surplus[k]) - (sol.shortfall[h] - sol.surplus[h]));
    }
    EXPECT_GT(rt.shortfall[5], 0.0);
    EXPECT_NEAR(parties, -scarcity, 1e-6 * std::max(1.0, std::abs(scarcity)));
    EXPECT_NEAR(l.total(), 0.0, 1e-6);
}

namespace {

struct IrDay {
    DaProblem p;
    DaSolution sol;
    DaPrices prices;
};

// 10 MW of up reserve procured at $600 for one hour.
IrDay ir_day() {
    auto g = unit("slow", 0, 200, {{200, 20}});
    g.ramp_rate = 10;
    ReserveProductDef up;
    up.name = "up";
    up.demand_steps = {{50, 95, 600}};
    PercentileTable nl;
    nl.quantity = "net_load";
    nl.percentiles = {50, 95};
    nl.values = Grid<double>(2, 1);
    nl.values(0, 0) = 100;
    nl.values(1, 0) = 150;
    auto m = with_units({g});
    IrDay d;
    d.p = build_base_uc(m, nl);
    apply_ir_design(d.p, {up}, nl);
    d.sol = solve_da(d.p, m.config);
    d.prices = compute_prices(d.p, d.sol);
    return d;
}

UncertainPosition constituent(std::string id, double forecast, std::vector<double> realized) {
    return {std::move(id), PartyClass::buyer, {forecast}, std::move(realized)};
}

}  // namespace

TEST(Ir, NoImbalanceRecoversNothing) {
    auto d = ir_day();
    std::vector<UncertainPosition> c{constituent("aggregate", -100, std::vector<double>(4, -100))};
    IrSettlementSummary s;
    auto l = settle_ir(d.p, d.sol, d.prices, c, 0, &s);
    EXPECT_NEAR(s.da_cost, 6000, 1e-6);
    EXPECT_EQ(s.rt_recovery, 0.0);
    auto iso = iso_position(l);
    EXPECT_NEAR(iso.get(Product::ir_up, Stage::da) + iso.get(Product::ir_up, Stage::rt), -6000, 1e-6);
}

TEST(Ir, CapBindsWhenImbalanceMatchesProcurement) {
    auto d = ir_day();
    std::vector<UncertainPosition> c{constituent("load", -100, std::vector<double>(4, -110)),
                                     constituent("wind", 0, std::vector<double>(4, -10))};
    IrSettlementSummary s;
    auto l = settle_ir(d.p, d.sol, d.prices, c, 0, &s);
    EXPECT_NEAR(s.recovery_ratio(), 1.0, 1e-9);
    auto iso = iso_position(l);
    EXPECT_NEAR(iso.ir_recovery_ratio(), 1.0, 1e-9);
    EXPECT_NEAR(iso.get(Product::ir_up, Stage::da) + iso.get(Product::ir_up, Stage::rt), 0.0, 1e-6);
    // Both constituents share the capped charge equally.
    EXPECT_NEAR(party_sum(l, "load"), party_sum(l, "wind"), 1e-9);
}

TEST(Ir, SymmetricImbalanceUnderRecovers) {
    auto d = ir_day();
    std::vector<UncertainPosition> c{constituent("aggregate", -100, {-110, -90, -110, -90})};
    IrSettlementSummary s;
    (void)settle_ir(d.p, d.sol, d.prices, c, 0, &s);
    EXPECT_LT(s.recovery_ratio(), 1.0);
    EXPECT_NEAR(s.recovery_ratio(), 0.5, 1e-9);
    EXPECT_LE(s.rt_recovery, s.da_cost);
}

TEST(Ir, PaperScaleIdentity) {
    CashflowLedger l;
    l.post({"suppliers", PartyClass::seller, Stage::da, Product::ir_up, 0, 0, 51.96, "procurement"});
    l.post({"uncertain", PartyClass::buyer, Stage::rt, Product::ir_up, 0, 0, -25.93, "allocation"});
    auto iso = iso_position(l);
    EXPECT_NEAR(iso.total, -26.03, 1e-12);
    EXPECT_NEAR(iso.ir_da_cost, 51.96, 1e-12);
    EXPECT_NEAR(iso.ir_rt_recovery, 25.93, 1e-12);
}

TEST(Cashflows, FlexibleSupplierIdentity) {
    CashflowLedger l;
    l.post({"gs", PartyClass::seller, Stage::da, Product::ir_up, 0, 0, 0.14, "procurement"});
    l.post({"gs", PartyClass::seller, Stage::rt, Product::energy, 0, 0, 0.29, "energy"});
    auto st = aggregate_cashflows(l, {PartyClass::seller});
    ASSERT_EQ(st.days.size(), 1u);
    EXPECT_EQ(st.days[0].da_up, 0.14);
    EXPECT_EQ(st.days[0].da_down, 0.0);
    EXPECT_EQ(st.days[0].total, 0.43);
    EXPECT_EQ(st.stdev.total, 0.0);
}

TEST(Cashflows, ImbalanceChargeIdentity) {
    CashflowLedger l;
    l.post({"gb", PartyClass::buyer, Stage::rt, Product::energy, 0, 0, -0.29, "energy"});
    l.post({"gb", PartyClass::buyer, Stage::rt, Product::ir_up, 0, 0, -0.29, "allocation"});
    auto st = aggregate_cashflows(l, {PartyClass::buyer, PartyClass::load});
    EXPECT_EQ(st.mean.total, -0.58);
}

TEST(Cashflows, MeanStdAndMargin) {
    CashflowLedger l;
    const double v[3] = {1.0, 2.0, 6.0};
    for (int d = 0; d < 3; ++d) {
        l.post({"gs", PartyClass::seller, Stage::da, Product::fo_up, d, 0, v[d], "premium"});
        l.post({"gb", PartyClass::buyer, Stage::da, Product::fo_up, d, 0, -v[d], "premium"});
    }
    auto st = aggregate_cashflows(l, {PartyClass::seller}, {{0, 0.5}, {1, 0.5}, {2, 0.5}});
    ASSERT_EQ(st.days.size(), 3u);
    EXPECT_NEAR(st.mean.total, 3.0, 1e-12);
    EXPECT_NEAR(st.stdev.total, std::sqrt(((4.0) + (1.0) + (9.0)) / 2.0), 1e-12);
    EXPECT_NEAR(st.mean.margin, 2.5, 1e-12);
}

TEST(SettlementExport, CsvFiles) {
    CashflowLedger l;
    l.post({"a", PartyClass::seller, Stage::da, Product::energy, 0, 0, 10, "energy"});
    const auto dir = std::filesystem::temp_directory_path();
    write_ledger_csv(l, dir / "ledger_test.csv");
    write_iso_position_csv(iso_position(l), dir / "iso_test.csv");
    write_cashflow_stats_csv({{"x", aggregate_cashflows(l, {PartyClass::seller})}}, dir / "cash_test.csv");
    auto t = read_csv(dir / "ledger_test.csv");
    EXPECT_EQ(t.rows.size(), 2u);
    auto iso = read_csv(dir / "iso_test.csv");
    EXPECT_EQ(iso.header, (std::vector<std::string>{"product", "da", "rt", "total"}));
}
