#pragma once

// Exhaustive-commitment reference for tiny DA instances. Every commitment
// pattern (and every offline fast-start tier flag) is enumerated; for each,
// commitment-dependent costs are constants and the rest is an LP solved by
// the dense simplex. Written from the model description, not from the
// library's MILP builder.

#include <functional>
#include <optional>
#include <vector>

#include "dense_lp.hpp"
#include "flexmarket/scenario.hpp"
#include "flexmarket/system_model.hpp"

namespace oracle {

struct FoCase {
    std::vector<flexmarket::FlexSellerParams> sellers;  // generator index = position in `units` by id
    flexmarket::TierStructure tiers;                    // single aggregate buyer's levels
    std::vector<double> buyer_forecast;                 // DA forecast of the buyer's injection
    double vc_up = 0.0;
    double vc_down = 0.0;
    double buyer_cost = 0.0;
    double penalty_m = 2.8;
};

struct Instance {
    std::vector<flexmarket::Generator> units;
    std::vector<double> demand;
    double shortfall_penalty = 9000.0;
    double surplus_penalty = 250.0;
    std::optional<FoCase> fo;
};

struct Best {
    bool feasible = false;
    double objective = 0.0;
    std::vector<std::vector<int>> u;
};

namespace detail {

inline bool pattern_ok(const flexmarket::Generator& g, const std::vector<int>& u) {
    const int T = static_cast<int>(u.size());
    int prev = g.initial_on ? 1 : 0;
    std::vector<int> start(T, 0), stop(T, 0);
    for (int t = 0; t < T; ++t) {
        start[t] = u[t] == 1 && prev == 0;
        stop[t] = u[t] == 0 && prev == 1;
        prev = u[t];
    }
    for (int t = 0; t < T; ++t) {
        for (int k = 0; k < g.min_up_time; ++k) {
            if (t - k >= 0 && start[t - k] && !u[t]) return false;
        }
        for (int k = 0; k < g.min_down_time; ++k) {
            if (t - k >= 0 && stop[t - k] && u[t]) return false;
        }
    }
    return true;
}

}  // namespace detail

/// `urt[j][r][t]` are the offline fast-start flags of seller j (all zero for
/// sellers that are not fast-start or when no FO case is present).
inline std::optional<double> evaluate(const Instance& inst, const std::vector<std::vector<int>>& u,
                                      const std::vector<std::vector<std::vector<int>>>& urt) {
    const int N = static_cast<int>(inst.units.size());
    const int T = static_cast<int>(inst.demand.size());
    DenseLp lp;
    double constant = 0.0;
    std::vector<std::vector<std::vector<int>>> seg(N);
    std::vector<std::vector<double>> unit_row_terms;
    for (int i = 0; i < N; ++i) {
        const auto& g = inst.units[i];
        if (!detail::pattern_ok(g, u[i])) return std::nullopt;
        int prev = g.initial_on ? 1 : 0;
        for (int t = 0; t < T; ++t) {
            constant += g.no_load_cost * u[i][t];
            if (u[i][t] == 1 && prev == 0) constant += g.startup_cost;
            prev = u[i][t];
        }
        seg[i].resize(T);
        for (int t = 0; t < T; ++t) {
            for (const auto& c : g.cost_curve) {
                seg[i][t].push_back(lp.add_var(c.marginal_cost, 0.0, u[i][t] ? c.width_mw : 0.0));
            }
        }
    }
    auto add_p = [&](std::vector<double>& row, int i, int t, double coef) {
        for (int v : seg[i][t]) row[v] += coef;
    };
    std::vector<int> shortv(T), surplusv(T);
    for (int t = 0; t < T; ++t) {
        shortv[t] = lp.add_var(inst.shortfall_penalty);
        surplusv[t] = lp.add_var(inst.surplus_penalty);
    }

    // FO variables.
    const bool fo = inst.fo.has_value();
    int R = 0, S = 0;
    std::vector<std::vector<std::vector<int>>> hs_up, hs_dn;  // [j][r][t]
    std::vector<std::vector<int>> hd_up, hd_dn, sd_up, sd_dn, y;
    std::vector<int> pda(T, -1);
    if (fo) {
        const auto& f = *inst.fo;
        S = static_cast<int>(f.tiers.num_levels());
        R = S - 1;
        const auto& pu = f.tiers.prob_up;
        const auto& pd = f.tiers.prob_down;
        const int J = static_cast<int>(f.sellers.size());
        hs_up.assign(J, std::vector<std::vector<int>>(R, std::vector<int>(T)));
        hs_dn = hs_up;
        for (int j = 0; j < J; ++j) {
            int gi = -1;
            for (int i = 0; i < N; ++i) {
                if (inst.units[i].id == f.sellers[j].generator_id) gi = i;
            }
            const auto& g = inst.units[gi];
            for (int r = 0; r < R; ++r) {
                for (int t = 0; t < T; ++t) {
                    hs_up[j][r][t] = lp.add_var(pu[r] * f.sellers[j].strike_up + f.sellers[j].capacity_bid);
                    hs_dn[j][r][t] = lp.add_var(-pd[r] * f.sellers[j].strike_down + f.sellers[j].capacity_bid);
                    constant += urt[j][r][t] * pu[r] * g.startup_cost;
                }
            }
        }
        hd_up.assign(R, std::vector<int>(T));
        hd_dn = sd_up = sd_dn = hd_up;
        y.assign(S, std::vector<int>(T));
        const double c = f.buyer_cost;
        for (int r = 0; r < R; ++r) {
            for (int t = 0; t < T; ++t) {
                hd_up[r][t] = lp.add_var(-pu[r] * c);
                hd_dn[r][t] = lp.add_var(pd[r] * c);
                sd_up[r][t] = lp.add_var(-pu[r] * c + pu[r] * f.vc_up);
                sd_dn[r][t] = lp.add_var(pd[r] * c - pd[r] * f.vc_down);
            }
        }
        for (int s = 0; s < S; ++s) {
            for (int t = 0; t < T; ++t) y[s][t] = lp.add_var(f.penalty_m);
        }
        for (int t = 0; t < T; ++t) pda[t] = lp.add_var(c, -kInf, kInf);
    }

    for (int i = 0; i < N; ++i) {
        const auto& g = inst.units[i];
        const double su = std::max(g.p_min, g.ramp_rate);
        for (int t = 0; t < T; ++t) {
            if (u[i][t]) {
                auto& r = lp.add_row('G', g.p_min);
                add_p(r, i, t, 1.0);
            }
            if (t > 0) {
                auto& up = lp.add_row('L', u[i][t - 1] ? g.ramp_rate : su);
                add_p(up, i, t, 1.0);
                add_p(up, i, t - 1, -1.0);
                auto& dn = lp.add_row('L', u[i][t] ? g.ramp_rate : su);
                add_p(dn, i, t - 1, 1.0);
                add_p(dn, i, t, -1.0);
            } else if (g.initial_on) {
                auto& up = lp.add_row('L', g.initial_output + g.ramp_rate);
                add_p(up, i, 0, 1.0);
                auto& dn = lp.add_row('L', (u[i][0] ? g.ramp_rate : su) - g.initial_output);
                add_p(dn, i, 0, -1.0);
            }
        }
    }
    for (int t = 0; t < T; ++t) {
        double rhs = inst.demand[t];
        if (fo) rhs += inst.fo->buyer_forecast[t];
        auto& r = lp.add_row('E', rhs);
        for (int i = 0; i < N; ++i) add_p(r, i, t, 1.0);
        r[shortv[t]] = 1.0;
        r[surplusv[t]] = -1.0;
        if (fo) r[pda[t]] = 1.0;
    }
    if (fo) {
        const auto& f = *inst.fo;
        const auto& L = f.tiers.levels;
        const int J = static_cast<int>(f.sellers.size());
        for (int r = 0; r < R; ++r) {
            for (int t = 0; t < T; ++t) {
                auto& a = lp.add_row('E', 0.0);
                for (int j = 0; j < J; ++j) a[hs_up[j][r][t]] = 1.0;
                a[hd_up[r][t]] = -1.0;
                auto& b = lp.add_row('E', 0.0);
                for (int j = 0; j < J; ++j) b[hs_dn[j][r][t]] = 1.0;
                b[hd_dn[r][t]] = -1.0;
                auto& w = lp.add_row('L', L(r + 1, t) - L(r, t));
                w[hd_dn[r][t]] = 1.0;
                w[sd_dn[r][t]] = 1.0;
            }
        }
        for (int s = 0; s < S; ++s) {
            for (int t = 0; t < T; ++t) {
                // Realized level s: down holdings of tiers below it, up holdings of tiers above.
                auto& h = lp.add_row('E', L(s, t));
                h[pda[t]] = 1.0;
                auto& v = lp.add_row('L', 0.0);
                v[y[s][t]] = -1.0;
                for (int r = 0; r < R; ++r) {
                    if (r < s) {
                        h[hd_dn[r][t]] += 1.0;
                        h[sd_dn[r][t]] += 1.0;
                        v[hd_dn[r][t]] += 1.0;
                        v[sd_dn[r][t]] += 1.0;
                    } else {
                        h[hd_up[r][t]] -= 1.0;
                        h[sd_up[r][t]] -= 1.0;
                        v[hd_up[r][t]] += 1.0;
                        v[sd_up[r][t]] += 1.0;
                    }
                }
                auto& e8 = lp.add_row('G', -L(s, t));
                e8[y[s][t]] = 1.0;
                e8[pda[t]] = -1.0;
                auto& e9 = lp.add_row('G', L(s, t));
                e9[y[s][t]] = 1.0;
                e9[pda[t]] = 1.0;
            }
        }
        for (int j = 0; j < J; ++j) {
            int gi = -1;
            for (int i = 0; i < N; ++i) {
                if (inst.units[i].id == f.sellers[j].generator_id) gi = i;
            }
            const auto& g = inst.units[gi];
            const double cap = std::min(g.p_max, g.p_min + g.ramp_rate);
            for (int t = 0; t < T; ++t) {
                int started = 0;
                for (int r = 0; r < R; ++r) started += urt[j][r][t];
                const double up_cap = u[gi][t] * g.ramp_rate + cap * started;
                auto& e10u = lp.add_row('L', up_cap);
                auto& e10d = lp.add_row('L', u[gi][t] * g.ramp_rate);
                for (int r = 0; r < R; ++r) {
                    e10u[hs_up[j][r][t]] = 1.0;
                    e10d[hs_dn[j][r][t]] = 1.0;
                }
                auto& e11 = lp.add_row('L', u[gi][t] * g.p_max + cap * started);
                add_p(e11, gi, t, 1.0);
                for (int r = 0; r < R; ++r) e11[hs_up[j][r][t]] = 1.0;
                auto& e12 = lp.add_row('G', u[gi][t] * g.p_min);
                add_p(e12, gi, t, 1.0);
                for (int r = 0; r < R; ++r) e12[hs_dn[j][r][t]] = -1.0;
                const bool fast = g.is_fast_start() && g.start_lead_time <= 60.0;
                if (fast) {
                    for (int r1 = 0; r1 < R; ++r1) {
                        int deeper_or_equal = 0;
                        for (int r = r1; r < R; ++r) deeper_or_equal += urt[j][r][t];
                        auto& link = lp.add_row('L', u[gi][t] * g.ramp_rate + cap * deeper_or_equal);
                        link[hs_up[j][r1][t]] = 1.0;
                    }
                }
            }
        }
    }
    const auto res = solve_dense(lp);
    if (!res.feasible || !res.bounded) return std::nullopt;
    return res.objective + constant;
}

inline Best enumerate(const Instance& inst) {
    const int N = static_cast<int>(inst.units.size());
    const int T = static_cast<int>(inst.demand.size());
    Best best;
    // Offline fast-start choices per seller and hour: none or one tier.
    int J = 0, R = 0;
    std::vector<int> seller_unit;
    std::vector<bool> seller_fast;
    if (inst.fo) {
        J = static_cast<int>(inst.fo->sellers.size());
        R = static_cast<int>(inst.fo->tiers.num_tiers());
        for (const auto& s : inst.fo->sellers) {
            for (int i = 0; i < N; ++i) {
                if (inst.units[i].id == s.generator_id) {
                    seller_unit.push_back(i);
                    seller_fast.push_back(inst.units[i].is_fast_start() && inst.units[i].start_lead_time <= 60.0);
                }
            }
        }
    }
    const long patterns = 1L << (N * T);
    for (long code = 0; code < patterns; ++code) {
        std::vector<std::vector<int>> u(N, std::vector<int>(T));
        for (int i = 0; i < N; ++i) {
            for (int t = 0; t < T; ++t) u[i][t] = static_cast<int>((code >> (i * T + t)) & 1);
        }
        // Slots where an offline fast-start seller may carry a tier flag.
        std::vector<std::pair<int, int>> slots;
        for (int j = 0; j < J; ++j) {
            for (int t = 0; t < T; ++t) {
                if (seller_fast[j] && u[seller_unit[j]][t] == 0) slots.push_back({j, t});
            }
        }
        std::vector<int> choice(slots.size(), 0);  // 0 = none, r+1 = tier r
        while (true) {
            std::vector<std::vector<std::vector<int>>> urt(J, std::vector<std::vector<int>>(R, std::vector<int>(T, 0)));
            for (std::size_t k = 0; k < slots.size(); ++k) {
                if (choice[k] > 0) urt[slots[k].first][choice[k] - 1][slots[k].second] = 1;
            }
            if (auto v = evaluate(inst, u, urt)) {
                if (!best.feasible || *v < best.objective) {
                    best.feasible = true;
                    best.objective = *v;
                    best.u = u;
                }
            }
            std::size_t k = 0;
            while (k < choice.size() && ++choice[k] > R) choice[k++] = 0;
            if (k == choice.size()) break;
        }
    }
    return best;
}

}  // namespace oracle
