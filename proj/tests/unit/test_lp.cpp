#include <gtest/gtest.h>

#include "flexmarket/lp/model.hpp"
#include "flexmarket/lp/solver.hpp"

using namespace flexmarket::lp;

TEST(LpModel, EvaluateAndViolation) {
    MipModel m;
    auto x = m.add_var("x", 0, 10, 2.0);
    auto y = m.add_var("y", 0, 1, 5.0, VarType::binary);
    auto r = m.add_row("cap", {{x, 1.0}, {y, -10.0}}, -kInf, 0.0);
    m.objective_offset = 1.0;
    EXPECT_DOUBLE_EQ(m.evaluate({3.0, 1.0}), 1.0 + 6.0 + 5.0);
    EXPECT_DOUBLE_EQ(m.activity(r, {3.0, 1.0}), -7.0);
    EXPECT_NEAR(m.max_violation({3.0, 0.0}), 3.0, 1e-12);
    EXPECT_NEAR(m.max_violation({3.0, 0.5}), 0.5, 1e-12);
    EXPECT_TRUE(m.has_integers());
}

TEST(LpModel, LpTextMentionsEveryRow) {
    MipModel m;
    auto x = m.add_var("p[g1,0]", 0, 10, 2.0);
    m.add_row("balance[0]", {{x, 1.0}}, 5.0, 5.0);
    const auto text = m.to_lp_format();
    EXPECT_NE(text.find("Minimize"), std::string::npos);
    EXPECT_NE(text.find("balance"), std::string::npos);
    EXPECT_NE(text.find("End"), std::string::npos);
}

TEST(HighsBackend, BalanceDualIsMarginalCost) {
    MipModel m;
    auto a = m.add_var("a", 0, 100, 30.0);
    auto b = m.add_var("b", 0, 100, 45.0);
    auto bal = m.add_row("balance", {{a, 1.0}, {b, 1.0}}, 50.0, 50.0);
    auto solver = make_solver("highs");
    SolveOptions opts;
    opts.want_duals = true;
    auto res = solver->solve(m, opts);
    ASSERT_EQ(res.status, SolveStatus::optimal);
    EXPECT_NEAR(res.objective, 1500.0, 1e-9);
    ASSERT_EQ(res.row_duals.size(), 1u);
    EXPECT_NEAR(res.row_duals[static_cast<std::size_t>(bal.index)], 30.0, 1e-9);
}

TEST(HighsBackend, GreaterEqualRowDualIsNonNegative) {
    MipModel m;
    auto a = m.add_var("a", 0, 100, 30.0);
    m.add_row("req", {{a, 1.0}}, 20.0, kInf);
    auto res = make_solver("highs")->solve(m, {});
    ASSERT_EQ(res.status, SolveStatus::optimal);
    EXPECT_NEAR(res.row_duals[0], 30.0, 1e-9);
}

TEST(HighsBackend, SmallKnapsack) {
    MipModel m;
    const double value[] = {10, 13, 7, 8};
    const double weight[] = {5, 7, 4, 3};
    std::vector<Term> w;
    for (int k = 0; k < 4; ++k) {
        auto v = m.add_var("x" + std::to_string(k), 0, 1, -value[k], VarType::binary);
        w.push_back({v, weight[k]});
    }
    m.add_row("cap", w, -kInf, 12.0);
    auto res = make_solver("highs")->solve(m, {});
    ASSERT_EQ(res.status, SolveStatus::optimal);
    // best: items 1,2 (13+8, weight 10) vs 0,2,3 (25, weight 12)
    EXPECT_NEAR(res.objective, -25.0, 1e-9);
}

TEST(HighsBackend, InfeasibleReportsCore) {
    MipModel m;
    auto a = m.add_var("a", 0, 10, 1.0);
    m.add_row("need", {{a, 1.0}}, 20.0, kInf);
    m.add_row("unrelated", {{a, 1.0}}, -kInf, 100.0);
    auto solver = make_solver("highs");
    auto res = solver->solve(m, {});
    EXPECT_EQ(res.status, SolveStatus::infeasible);
    auto core = solver->infeasible_core(m);
    ASSERT_FALSE(core.empty());
    bool named = false;
    for (const auto& c : core) named = named || c == "need";
    EXPECT_TRUE(named);
}

TEST(HighsBackend, UnknownBackendIsInputError) {
    EXPECT_ANY_THROW((void)make_solver("nope"));
}
