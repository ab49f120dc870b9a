#include "flexmarket/da_market.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "flexmarket/csv.hpp"
#include "flexmarket/errors.hpp"

namespace flexmarket {

using lp::kInf;
using lp::RowId;
using lp::Term;
using lp::VarId;
using lp::VarType;

std::string_view to_string(DaDesign d) {
    switch (d) {
        case DaDesign::base: return "base";
        case DaDesign::ir: return "ir";
        case DaDesign::fo: return "fo";
    }
    return "?";
}

std::size_t DaProblem::unit_index(const std::string& id) const {
    for (std::size_t i = 0; i < units.size(); ++i) {
        if (units[i].id == id) return i;
    }
    throw InputError("unknown generator '" + id + "'");
}

double DaSolution::production_cost() const {
    double total = 0.0;
    for (const char* tag : {"energy", "no_load", "startup"}) {
        auto it = cost_terms.find(tag);
        if (it != cost_terms.end()) total += it->second;
    }
    return total;
}

std::vector<double> DaSolution::scheduled_net_load() const {
    std::vector<double> out(p.cols(), 0.0);
    for (std::size_t t = 0; t < p.cols(); ++t) {
        for (std::size_t i = 0; i < p.rows(); ++i) out[t] += p(i, t);
        if (t < shortfall.size()) out[t] += shortfall[t] - surplus[t];
    }
    return out;
}

std::vector<int> DaSolution::committed_count(const std::vector<Generator>& units, CommitClass cls) const {
    std::vector<int> out(u.cols(), 0);
    for (std::size_t i = 0; i < units.size(); ++i) {
        if (units[i].commit_class != cls) continue;
        for (std::size_t t = 0; t < u.cols(); ++t) out[t] += u(i, t) > 0.5 ? 1 : 0;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Base unit commitment

DaProblem build_base_uc(const SystemModel& model, const PercentileTable& forecast) {
    return build_base_uc(model, forecast.series(50.0));
}

DaProblem build_base_uc(const SystemModel& model, const std::vector<double>& demand) {
    DaProblem p;
    p.config = model.config;
    p.units = model.generators;
    p.demand = demand;
    p.hours = demand.size();
    const std::size_t N = p.units.size();
    const std::size_t H = p.hours;
    auto& m = p.milp;
    p.p = Grid<VarId>(N, H);
    p.u = Grid<VarId>(N, H);
    p.start = Grid<VarId>(N, H);
    p.stop = Grid<VarId>(N, H);

    for (std::size_t i = 0; i < N; ++i) {
        const auto& g = p.units[i];
        for (std::size_t t = 0; t < H; ++t) {
            p.u(i, t) = m.add_var(fmt::format("u[{},{}]", g.id, t), 0, 1, g.no_load_cost, VarType::binary, "no_load");
            p.p(i, t) = m.add_var(fmt::format("p[{},{}]", g.id, t), 0, g.p_max, 0.0);
            p.start(i, t) = m.add_var(fmt::format("start[{},{}]", g.id, t), 0, 1, g.startup_cost, VarType::continuous, "startup");
            p.stop(i, t) = m.add_var(fmt::format("stop[{},{}]", g.id, t), 0, 1, 0.0);
            std::vector<Term> seg{{p.p(i, t), 1.0}};
            for (std::size_t k = 0; k < g.cost_curve.size(); ++k) {
                const auto& c = g.cost_curve[k];
                auto s = m.add_var(fmt::format("seg[{},{},{}]", g.id, k, t), 0, c.width_mw, c.marginal_cost,
                                   VarType::continuous, "energy");
                seg.push_back({s, -1.0});
            }
            m.add_row(fmt::format("segments[{},{}]", g.id, t), std::move(seg), 0, 0, "segments");
            m.add_row(fmt::format("capacity[{},{}]", g.id, t), {{p.p(i, t), 1.0}, {p.u(i, t), -g.p_max}}, -kInf, 0,
                      "capacity");
            m.add_row(fmt::format("min_gen[{},{}]", g.id, t), {{p.p(i, t), 1.0}, {p.u(i, t), -g.p_min}}, 0, kInf,
                      "min_gen");
        }
        const double su = g.startup_ramp();
        const double rr = g.ramp_rate;
        for (std::size_t t = 0; t < H; ++t) {
            std::vector<Term> c{{p.u(i, t), 1.0}, {p.start(i, t), -1.0}, {p.stop(i, t), 1.0}};
            double rhs = 0.0;
            if (t > 0) {
                c.push_back({p.u(i, t - 1), -1.0});
            } else {
                rhs = g.initial_on ? 1.0 : 0.0;
            }
            m.add_row(fmt::format("commitment[{},{}]", g.id, t), std::move(c), rhs, rhs, "commitment");

            if (g.min_up_time > 1) {
                std::vector<Term> up{{p.u(i, t), -1.0}};
                for (std::size_t tau = t + 1 >= static_cast<std::size_t>(g.min_up_time) ? t + 1 - g.min_up_time : 0; tau <= t; ++tau) {
                    up.push_back({p.start(i, tau), 1.0});
                }
                m.add_row(fmt::format("min_up[{},{}]", g.id, t), std::move(up), -kInf, 0, "min_up");
            }
            if (g.min_down_time > 1) {
                std::vector<Term> dn{{p.u(i, t), 1.0}};
                for (std::size_t tau = t + 1 >= static_cast<std::size_t>(g.min_down_time) ? t + 1 - g.min_down_time : 0; tau <= t; ++tau) {
                    dn.push_back({p.stop(i, tau), 1.0});
                }
                m.add_row(fmt::format("min_down[{},{}]", g.id, t), std::move(dn), -kInf, 1, "min_down");
            }
            if (t > 0) {
                m.add_row(fmt::format("ramp_up[{},{}]", g.id, t),
                          {{p.p(i, t), 1.0}, {p.p(i, t - 1), -1.0}, {p.u(i, t - 1), su - rr}}, -kInf, su, "ramp");
                m.add_row(fmt::format("ramp_down[{},{}]", g.id, t),
                          {{p.p(i, t - 1), 1.0}, {p.p(i, t), -1.0}, {p.u(i, t), su - rr}}, -kInf, su, "ramp");
            } else if (g.initial_on) {
                m.add_row(fmt::format("ramp_up[{},0]", g.id), {{p.p(i, 0), 1.0}}, -kInf, g.initial_output + rr, "ramp");
                m.add_row(fmt::format("ramp_down[{},0]", g.id), {{p.p(i, 0), -1.0}, {p.u(i, 0), su - rr}}, -kInf,
                          su - g.initial_output, "ramp");
            }
        }
    }

    for (std::size_t t = 0; t < H; ++t) {
        p.shortfall.push_back(m.add_var(fmt::format("shortfall[{}]", t), 0, kInf, p.config.energy_shortfall_penalty,
                                        VarType::continuous, "energy_scarcity"));
        p.surplus.push_back(m.add_var(fmt::format("surplus[{}]", t), 0, kInf, p.config.energy_surplus_penalty,
                                      VarType::continuous, "energy_scarcity"));
        std::vector<Term> bal{{p.shortfall[t], 1.0}, {p.surplus[t], -1.0}};
        for (std::size_t i = 0; i < N; ++i) bal.push_back({p.p(i, t), 1.0});
        p.balance.push_back(m.add_row(fmt::format("balance[{}]", t), std::move(bal), demand[t], demand[t], "balance"));
    }
    return p;
}

// ---------------------------------------------------------------------------
// Imbalance reserves

namespace {

void check_steps(const ReserveProductDef& def) {
    for (std::size_t k = 0; k < def.demand_steps.size(); ++k) {
        const auto& s = def.demand_steps[k];
        if (!(s.lower_pct <= s.upper_pct)) throw InputError(fmt::format("product {}: step {} is inverted", def.name, k));
        if (k > 0 && !(s.price < def.demand_steps[k - 1].price)) {
            throw InputError(fmt::format("product {}: step prices must strictly decrease", def.name));
        }
        for (std::size_t j = 0; j < k; ++j) {
            const auto& o = def.demand_steps[j];
            if (std::max(s.lower_pct, o.lower_pct) < std::min(s.upper_pct, o.upper_pct)) {
                throw InputError(fmt::format("product {}: steps {} and {} overlap", def.name, j, k));
            }
        }
    }
    if (def.effective_beta() < 0.0) throw InputError("product " + def.name + ": beta is negative");
}

bool offline_eligible(const Generator& g, const ReserveProductDef& def) {
    return def.direction == Direction::up && g.is_fast_start() && g.start_lead_time <= def.response_time_min;
}

}  // namespace

constexpr double kIrAwardTieBreak = 1e-3;  // $/MW

void apply_ir_design(DaProblem& p, const std::vector<ReserveProductDef>& products, const PercentileTable& net_load) {
    if (p.design != DaDesign::base) throw InputError("IR and FO designs cannot be combined in one DA problem");
    if (net_load.num_intervals() != p.hours) throw InputError("net-load table does not match the DA horizon");
    p.design = DaDesign::ir;
    auto& m = p.milp;
    const std::size_t N = p.units.size();
    const std::size_t H = p.hours;

    for (const auto& def : products) {
        check_steps(def);
        IrProductVars v;
        v.def = def;
        v.step_quantity = Grid<double>(def.demand_steps.size(), H);
        v.step_short = Grid<VarId>(def.demand_steps.size(), H);
        for (std::size_t k = 0; k < def.demand_steps.size(); ++k) {
            const auto& s = def.demand_steps[k];
            for (std::size_t t = 0; t < H; ++t) {
                const double q = std::max(0.0, net_load.value(s.upper_pct, t) - net_load.value(s.lower_pct, t));
                v.step_quantity(k, t) = q;
                v.step_short(k, t) = m.add_var(fmt::format("ir_short[{},{},{}]", def.name, k, t), 0, q, s.price,
                                               VarType::continuous, "reserve_shortage");
            }
        }
        v.award = Grid<VarId>(N, H);
        for (std::size_t i = 0; i < N; ++i) {
            for (std::size_t t = 0; t < H; ++t) {
                // a tiny bid keeps awards at the requirement when offers are free
                v.award(i, t) = m.add_var(fmt::format("res[{},{},{}]", def.name, p.units[i].id, t), 0, kInf,
                                          def.capacity_bid + kIrAwardTieBreak, VarType::continuous, "ir_capacity_bid");
            }
        }
        p.ir.push_back(std::move(v));
    }

    for (std::size_t i = 0; i < N; ++i) {
        const auto& g = p.units[i];
        bool elig = false;
        for (const auto& v : p.ir) elig = elig || offline_eligible(g, v.def);
        const double cap = elig ? g.offline_up_capability() : 0.0;
        const double su = g.startup_ramp();
        const double rr = g.ramp_rate;
        auto reserve_terms = [&](std::size_t t, Direction d, double sign, bool weighted) {
            std::vector<Term> out;
            for (const auto& v : p.ir) {
                if (v.def.direction == d) out.push_back({v.award(i, t), sign * (weighted ? v.def.effective_beta() : 1.0)});
            }
            return out;
        };
        auto join = [](std::vector<Term> a, const std::vector<Term>& b) {
            a.insert(a.end(), b.begin(), b.end());
            return a;
        };
        for (std::size_t t = 0; t < H; ++t) {
            const VarId u = p.u(i, t);
            const VarId pv = p.p(i, t);
            m.add_row(fmt::format("ir_up_ramp[{},{}]", g.id, t),
                      join(reserve_terms(t, Direction::up, 1.0, true), {{u, cap - rr}}), -kInf, cap, "ir_ramp_reservation");
            m.add_row(fmt::format("ir_down_ramp[{},{}]", g.id, t),
                      join(reserve_terms(t, Direction::down, 1.0, true), {{u, -rr}}), -kInf, 0, "ir_ramp_reservation");
            m.add_row(fmt::format("ir_headroom[{},{}]", g.id, t),
                      join(reserve_terms(t, Direction::up, 1.0, false), {{pv, 1.0}, {u, cap - g.p_max}}), -kInf, cap,
                      "ir_headroom");
            m.add_row(fmt::format("ir_footroom[{},{}]", g.id, t),
                      join(reserve_terms(t, Direction::down, -1.0, false), {{pv, 1.0}, {u, -g.p_min}}), 0, kInf,
                      "ir_footroom");
            for (const auto& v : p.ir) {
                if (elig && v.def.direction == Direction::up && !offline_eligible(g, v.def)) {
                    m.add_row(fmt::format("ir_online_only[{},{},{}]", v.def.name, g.id, t),
                              {{v.award(i, t), 1.0}, {u, -g.p_max}}, -kInf, 0, "ir_headroom");
                }
            }
            // Moving from full down deployment in one hour to full up
            // deployment in the next (and back) must respect the ramp rate.
            if (t > 0) {
                auto up = join(reserve_terms(t, Direction::up, 1.0, false), reserve_terms(t - 1, Direction::down, 1.0, false));
                up.insert(up.end(), {{pv, 1.0}, {p.p(i, t - 1), -1.0}, {p.u(i, t - 1), su - rr}, {u, cap}});
                m.add_row(fmt::format("ir_ramp_up[{},{}]", g.id, t), std::move(up), -kInf, su + cap, "ir_ramp");
                auto dn = join(reserve_terms(t - 1, Direction::up, 1.0, false), reserve_terms(t, Direction::down, 1.0, false));
                dn.insert(dn.end(), {{p.p(i, t - 1), 1.0}, {pv, -1.0}, {u, su - rr}, {p.u(i, t - 1), cap}});
                m.add_row(fmt::format("ir_ramp_down[{},{}]", g.id, t), std::move(dn), -kInf, su + cap, "ir_ramp");
            } else if (g.initial_on) {
                auto up = reserve_terms(0, Direction::up, 1.0, false);
                up.insert(up.end(), {{pv, 1.0}, {u, cap}});
                m.add_row(fmt::format("ir_ramp_up[{},0]", g.id), std::move(up), -kInf, g.initial_output + rr + cap, "ir_ramp");
                auto dn = reserve_terms(0, Direction::down, 1.0, false);
                dn.insert(dn.end(), {{pv, -1.0}, {u, su - rr}});
                m.add_row(fmt::format("ir_ramp_down[{},0]", g.id), std::move(dn), -kInf, su - g.initial_output, "ir_ramp");
            }
        }
    }

    // Cascading: awards and shortfalls of a product count toward its own
    // requirement and toward every lower-ranked one of the same direction.
    for (std::size_t a = 0; a < p.ir.size(); ++a) {
        auto& va = p.ir[a];
        for (std::size_t t = 0; t < H; ++t) {
            std::vector<Term> terms;
            double need = 0.0;
            for (const auto& vb : p.ir) {
                if (vb.def.direction != va.def.direction || vb.def.cascade_rank < va.def.cascade_rank) continue;
                for (std::size_t i = 0; i < N; ++i) terms.push_back({vb.award(i, t), 1.0});
                for (std::size_t k = 0; k < vb.def.demand_steps.size(); ++k) {
                    terms.push_back({vb.step_short(k, t), 1.0});
                    need += vb.step_quantity(k, t);
                }
            }
            va.requirement.push_back(m.add_row(fmt::format("ir_requirement[{},{}]", va.def.name, t), std::move(terms),
                                               need, kInf, "ir_requirement"));
        }
    }
}

// ---------------------------------------------------------------------------
// Flexibility options

UncertainAccount aggregate_buyer(const TierStructure& tiers, const MarketConfig& cfg) {
    UncertainAccount a;
    a.id = tiers.account_id.empty() ? "aggregate" : tiers.account_id;
    a.constituent = Constituent::aggregate;
    a.levels = tiers.levels;
    a.da_forecast = tiers.reference;
    a.self_hedge_cost_up = default_self_hedge_cost_up(tiers, cfg);
    a.self_hedge_cost_down = 0.0;
    return a;
}

void apply_fo_design(DaProblem& p, const std::vector<FlexSellerParams>& sellers,
                     const std::vector<UncertainAccount>& buyers, const TierStructure& tiers, const MarketConfig& cfg) {
    if (p.design != DaDesign::base) throw InputError("IR and FO designs cannot be combined in one DA problem");
    if (tiers.num_hours() != p.hours) throw InputError("tier structure does not match the DA horizon");
    if (tiers.num_levels() < 2) throw InputError("FO needs at least two levels");
    p.design = DaDesign::fo;
    p.tiers = tiers;
    auto& m = p.milp;
    const std::size_t H = p.hours;
    const std::size_t S = tiers.num_levels();
    const std::size_t R = tiers.num_tiers();
    const auto& pu = tiers.prob_up;
    const auto& pd = tiers.prob_down;

    for (std::size_t d : {kUp, kDown}) {
        p.fo_balance[d] = Grid<RowId>(R, H);
        for (std::size_t r = 0; r < R; ++r) {
            for (std::size_t t = 0; t < H; ++t) {
                p.fo_balance[d](r, t) =
                    m.add_row(fmt::format("eq4_{}[{},{}]", d == kUp ? "up" : "down", r, t), {}, 0, 0, "eq4");
            }
        }
    }

    for (const auto& sp : sellers) {
        FoSellerVars s;
        s.params = sp;
        s.unit = p.unit_index(sp.generator_id);
        const auto& g = p.units[s.unit];
        const bool fast = g.is_fast_start() && g.start_lead_time <= 60.0;
        const double cap = g.offline_up_capability();
        for (std::size_t d : {kUp, kDown}) {
            s.hs[d] = Grid<VarId>(R, H);
            for (std::size_t r = 0; r < R; ++r) {
                for (std::size_t t = 0; t < H; ++t) {
                    const double cost = d == kUp ? pu[r] * sp.strike_up : -pd[r] * sp.strike_down;
                    s.hs[d](r, t) = m.add_var(fmt::format("hs_{}[{},{},{}]", d == kUp ? "up" : "down", g.id, r, t), 0, kInf,
                                              cost + sp.capacity_bid, VarType::continuous, "fo_seller");
                    m.add_term(p.fo_balance[d](r, t), s.hs[d](r, t), 1.0);
                }
            }
        }
        if (fast) {
            s.u_rt = Grid<VarId>(R, H);
            for (std::size_t r = 0; r < R; ++r) {
                for (std::size_t t = 0; t < H; ++t) {
                    s.u_rt(r, t) = m.add_var(fmt::format("u_rt[{},{},{}]", g.id, r, t), 0, 1, pu[r] * g.startup_cost,
                                             VarType::binary, "fast_start_startup");
                }
            }
        }
        for (std::size_t t = 0; t < H; ++t) {
            const VarId u = p.u(s.unit, t);
            const VarId pv = p.p(s.unit, t);
            std::vector<Term> up{{u, -g.ramp_rate}};
            std::vector<Term> dn{{u, -g.ramp_rate}};
            std::vector<Term> head{{pv, 1.0}, {u, -g.p_max}};
            std::vector<Term> foot{{pv, 1.0}, {u, -g.p_min}};
            for (std::size_t r = 0; r < R; ++r) {
                up.push_back({s.hs[kUp](r, t), 1.0});
                head.push_back({s.hs[kUp](r, t), 1.0});
                dn.push_back({s.hs[kDown](r, t), 1.0});
                foot.push_back({s.hs[kDown](r, t), -1.0});
                if (fast) {
                    up.push_back({s.u_rt(r, t), -cap});
                    head.push_back({s.u_rt(r, t), -cap});
                }
            }
            m.add_row(fmt::format("eq10_up[{},{}]", g.id, t), std::move(up), -kInf, 0, "eq10");
            m.add_row(fmt::format("eq10_down[{},{}]", g.id, t), std::move(dn), -kInf, 0, "eq10");
            m.add_row(fmt::format("eq11[{},{}]", g.id, t), std::move(head), -kInf, 0, "eq11");
            m.add_row(fmt::format("eq12[{},{}]", g.id, t), std::move(foot), 0, kInf, "eq12");
            if (fast) {
                std::vector<Term> excl{{u, 1.0}};
                for (std::size_t r = 0; r < R; ++r) excl.push_back({s.u_rt(r, t), 1.0});
                m.add_row(fmt::format("fast_start_exclusive[{},{}]", g.id, t), std::move(excl), -kInf, 1, "fast_start");
                // Offering tier r' offline needs a start in every event where
                // r' is exercised, i.e. a start flag at r' or a shallower tier.
                for (std::size_t r1 = 0; r1 < R; ++r1) {
                    std::vector<Term> link{{s.hs[kUp](r1, t), 1.0}, {u, -g.ramp_rate}};
                    for (std::size_t r = r1; r < R; ++r) link.push_back({s.u_rt(r, t), -cap});
                    m.add_row(fmt::format("fast_start_link[{},{},{}]", g.id, r1, t), std::move(link), -kInf, 0,
                              "fast_start");
                }
            }
        }
        p.sellers.push_back(std::move(s));
    }

    for (const auto& acct : buyers) {
        FoBuyerVars b;
        b.account = acct;
        if (b.account.levels.empty()) b.account.levels = tiers.levels;
        const auto& L = b.account.levels;
        if (L.rows() != S || L.cols() != H) {
            throw InputError(fmt::format("buyer {} has {}x{} levels, expected {}x{}", acct.id, L.rows(), L.cols(), S, H));
        }
        for (std::size_t t = 0; t < H; ++t) {
            for (std::size_t s = 1; s < S; ++s) {
                if (L(s, t) < L(s - 1, t)) {
                    throw InputError(fmt::format("buyer {} levels decrease at s={}, t={}", acct.id, s, t));
                }
            }
        }
        if (b.account.da_forecast.empty()) {
            const auto it = std::find(tiers.percentiles.begin(), tiers.percentiles.end(), 50.0);
            if (it == tiers.percentiles.end()) throw InputError("buyer " + acct.id + " has no DA forecast");
            const auto mid = static_cast<std::size_t>(it - tiers.percentiles.begin());
            auto row = L.row(mid);
            b.account.da_forecast.assign(row.begin(), row.end());
        }
        if (b.account.da_forecast.size() != H) throw InputError("buyer " + acct.id + " DA forecast length mismatch");
        b.vc_up = acct.self_hedge_cost_up.value_or(default_self_hedge_cost_up(tiers, cfg));
        b.vc_down = acct.self_hedge_cost_down.value_or(0.0);
        const double c = acct.da_cost;
        const bool free_sign = acct.constituent == Constituent::load || acct.constituent == Constituent::aggregate;

        for (std::size_t t = 0; t < H; ++t) {
            b.p_da.push_back(m.add_var(fmt::format("p_da[{},{}]", acct.id, t), free_sign ? -kInf : 0.0, kInf, c,
                                       VarType::continuous, "buyer_energy"));
            m.add_term(p.balance[t], b.p_da[t], 1.0);
            const auto& row = m.row(p.balance[t]);
            const double rhs = row.lower + b.account.da_forecast[t];
            m.set_row_bounds(p.balance[t], rhs, rhs);
        }
        for (std::size_t d : {kUp, kDown}) {
            b.hd[d] = Grid<VarId>(R, H);
            b.sd[d] = Grid<VarId>(R, H);
            const char* dn = d == kUp ? "up" : "down";
            for (std::size_t r = 0; r < R; ++r) {
                for (std::size_t t = 0; t < H; ++t) {
                    const double hd_cost = d == kUp ? -pu[r] * c : pd[r] * c;
                    const double sd_cost = d == kUp ? -pu[r] * c + pu[r] * b.vc_up : pd[r] * c - pd[r] * b.vc_down;
                    b.hd[d](r, t) = m.add_var(fmt::format("hd_{}[{},{},{}]", dn, acct.id, r, t), 0, kInf, hd_cost,
                                              VarType::continuous, "fo_buyer");
                    b.sd[d](r, t) = m.add_var(fmt::format("sd_{}[{},{},{}]", dn, acct.id, r, t), 0, kInf, sd_cost,
                                              VarType::continuous, "self_hedge");
                    m.add_term(p.fo_balance[d](r, t), b.hd[d](r, t), -1.0);
                }
            }
        }
        b.y = Grid<VarId>(S, H);
        b.hedge = Grid<RowId>(S, H);
        for (std::size_t t = 0; t < H; ++t) {
            for (std::size_t r = 0; r < R; ++r) {
                m.add_row(fmt::format("eq5[{},{},{}]", acct.id, r, t), {{b.hd[kDown](r, t), 1.0}, {b.sd[kDown](r, t), 1.0}},
                          -kInf, L(r + 1, t) - L(r, t), "eq5");
            }
            for (std::size_t s = 0; s < S; ++s) {
                b.y(s, t) = m.add_var(fmt::format("y[{},{},{}]", acct.id, s, t), 0, kInf, cfg.fo_penalty_m,
                                      VarType::continuous, "fo_volume");
                std::vector<Term> hedge{{b.p_da[t], 1.0}};
                std::vector<Term> vol{{b.y(s, t), -1.0}};
                for (std::size_t r = 0; r < R; ++r) {
                    const bool below = r < s;  // tiers under level s hedge the down direction
                    const std::size_t d = below ? kDown : kUp;
                    const double sign = below ? 1.0 : -1.0;
                    hedge.push_back({b.hd[d](r, t), sign});
                    hedge.push_back({b.sd[d](r, t), sign});
                    vol.push_back({b.hd[d](r, t), 1.0});
                    vol.push_back({b.sd[d](r, t), 1.0});
                }
                b.hedge(s, t) = m.add_row(fmt::format("eq6[{},{},{}]", acct.id, s, t), std::move(hedge), L(s, t), L(s, t), "eq6");
                m.add_row(fmt::format("eq7[{},{},{}]", acct.id, s, t), std::move(vol), -kInf, 0, "eq7");
                m.add_row(fmt::format("eq8[{},{},{}]", acct.id, s, t), {{b.y(s, t), 1.0}, {b.p_da[t], -1.0}}, -L(s, t), kInf,
                          "eq8");
                m.add_row(fmt::format("eq9[{},{},{}]", acct.id, s, t), {{b.y(s, t), 1.0}, {b.p_da[t], 1.0}}, L(s, t), kInf,
                          "eq9");
            }
        }
        p.buyers.push_back(std::move(b));
    }
}

// ---------------------------------------------------------------------------
// Solving and pricing

namespace {

double clean(double v) { return std::abs(v) < 1e-9 ? 0.0 : v; }

Grid<double> read_grid(const Grid<VarId>& ids, const std::vector<double>& x) {
    Grid<double> out(ids.rows(), ids.cols(), 0.0);
    for (std::size_t r = 0; r < ids.rows(); ++r) {
        for (std::size_t c = 0; c < ids.cols(); ++c) {
            const auto v = ids(r, c);
            if (v.valid()) out(r, c) = clean(x[static_cast<std::size_t>(v.index)]);
        }
    }
    return out;
}

}  // namespace

DaSolution extract_solution(const DaProblem& p, std::vector<double> x) {
    if (x.size() != p.milp.num_vars()) throw std::logic_error("solution vector does not match the DA problem");
    DaSolution s;
    s.x = std::move(x);
    s.objective = p.milp.evaluate(s.x);
    for (std::size_t j = 0; j < p.milp.num_vars(); ++j) {
        const auto& c = p.milp.columns()[j];
        if (c.cost != 0.0) s.cost_terms[c.tag.empty() ? "other" : c.tag] += c.cost * s.x[j];
    }
    const std::size_t N = p.units.size();
    const std::size_t H = p.hours;
    s.p = read_grid(p.p, s.x);
    s.u = read_grid(p.u, s.x);
    for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t t = 0; t < H; ++t) s.u(i, t) = std::round(s.u(i, t));
    }
    s.award_up = Grid<double>(N, H, 0.0);
    s.award_down = Grid<double>(N, H, 0.0);
    for (const auto& v : p.ir) {
        s.ir_award.push_back(read_grid(v.award, s.x));
        auto& dst = v.def.direction == Direction::up ? s.award_up : s.award_down;
        for (std::size_t i = 0; i < N; ++i) {
            for (std::size_t t = 0; t < H; ++t) dst(i, t) += s.ir_award.back()(i, t);
        }
    }
    for (const auto& sv : p.sellers) {
        std::array<Grid<double>, 2> hs{read_grid(sv.hs[kUp], s.x), read_grid(sv.hs[kDown], s.x)};
        for (std::size_t r = 0; r < hs[kUp].rows(); ++r) {
            for (std::size_t t = 0; t < H; ++t) {
                s.award_up(sv.unit, t) += hs[kUp](r, t);
                s.award_down(sv.unit, t) += hs[kDown](r, t);
            }
        }
        s.hs.push_back(std::move(hs));
        auto urt = read_grid(sv.u_rt, s.x);
        for (std::size_t r = 0; r < urt.rows(); ++r) {
            for (double& v : urt.row(r)) v = std::round(v);
        }
        s.u_rt.push_back(std::move(urt));
    }
    for (const auto& b : p.buyers) {
        std::vector<double> pda;
        for (auto v : b.p_da) pda.push_back(clean(s.x[static_cast<std::size_t>(v.index)]));
        s.buyer_p_da.push_back(std::move(pda));
        s.hd.push_back({read_grid(b.hd[kUp], s.x), read_grid(b.hd[kDown], s.x)});
        s.sd.push_back({read_grid(b.sd[kUp], s.x), read_grid(b.sd[kDown], s.x)});
        s.y.push_back(read_grid(b.y, s.x));
    }
    for (std::size_t t = 0; t < H; ++t) {
        s.shortfall.push_back(clean(s.x[static_cast<std::size_t>(p.shortfall[t].index)]));
        s.surplus.push_back(clean(s.x[static_cast<std::size_t>(p.surplus[t].index)]));
    }
    return s;
}

namespace {

// Incumbent for a design model: the plain UC commitment with no offline FO
// offers, everything else re-optimized around it (an LP once the binaries are
// fixed). Empty when that commitment does not fit the model.
std::vector<double> commitment_start(const DaProblem& p, const MarketConfig& cfg, const lp::MipSolver& solver) {
    SystemModel plain;
    plain.generators = p.units;
    plain.config = cfg;
    const auto base = build_base_uc(plain, p.demand);
    lp::SolveOptions opts;
    opts.mip_gap = std::max(cfg.mip_gap, 0.02);
    opts.time_limit_s = cfg.time_limit_s;
    opts.seed = cfg.solver_seed;
    const auto b = solver.solve(base.milp, opts);
    opts.mip_gap = cfg.mip_gap;
    if (!b.has_solution()) return {};
    lp::MipModel fixed = p.milp;
    for (std::size_t i = 0; i < p.units.size(); ++i) {
        for (std::size_t t = 0; t < p.hours; ++t) {
            for (auto [mine, theirs] : {std::pair{p.u(i, t), base.u(i, t)}, std::pair{p.start(i, t), base.start(i, t)},
                                        std::pair{p.stop(i, t), base.stop(i, t)}}) {
                if (!mine.valid() || !theirs.valid()) continue;
                const double v = std::round(b.x[static_cast<std::size_t>(theirs.index)]);
                fixed.set_var_bounds(mine, v, v);
            }
        }
    }
    for (const auto& sv : p.sellers) {
        for (std::size_t r = 0; r < sv.u_rt.rows(); ++r) {
            for (std::size_t t = 0; t < sv.u_rt.cols(); ++t) {
                if (sv.u_rt(r, t).valid()) fixed.set_var_bounds(sv.u_rt(r, t), 0, 0);
            }
        }
    }
    const auto f = solver.solve(fixed, opts);
    return f.has_solution() ? f.x : std::vector<double>{};
}

}  // namespace

DaSolution solve_da(const DaProblem& p, const MarketConfig& cfg, const lp::MipSolver* solver) {
    std::unique_ptr<lp::MipSolver> owned;
    if (!solver) {
        owned = lp::make_default_solver();
        solver = owned.get();
    }
    lp::SolveOptions opts;
    opts.mip_gap = cfg.mip_gap;
    opts.time_limit_s = cfg.time_limit_s;
    opts.seed = cfg.solver_seed;
    if (p.design != DaDesign::base && cfg.da_warm_start) opts.start = commitment_start(p, cfg, *solver);
    const auto res = solver->solve(p.milp, opts);
    if (res.status == lp::SolveStatus::infeasible) {
        throw SolveError("DA problem is infeasible", solver->infeasible_core(p.milp));
    }
    if (!res.has_solution()) {
        throw SolveError(fmt::format("DA solve failed: {} ({})", lp::to_string(res.status), res.message));
    }
    auto sol = extract_solution(p, res.x);
    sol.status = res.status;
    sol.best_bound = res.best_bound;
    sol.mip_gap = res.mip_gap;
    return sol;
}

DaPrices compute_prices(const DaProblem& p, const DaSolution& sol, const lp::MipSolver* solver) {
    std::unique_ptr<lp::MipSolver> owned;
    if (!solver) {
        owned = lp::make_default_solver();
        solver = owned.get();
    }
    lp::MipModel fixed = p.milp;
    for (std::size_t j = 0; j < fixed.num_vars(); ++j) {
        const auto& c = fixed.columns()[j];
        if (c.type == VarType::continuous) continue;
        const VarId v{static_cast<int>(j)};
        const double val = std::round(sol.x.at(j));
        fixed.set_type(v, VarType::continuous);
        fixed.set_var_bounds(v, val, val);
    }
    lp::SolveOptions opts;
    opts.want_duals = true;
    const auto res = solver->solve(fixed, opts);
    if (res.status != lp::SolveStatus::optimal || res.row_duals.size() != fixed.num_rows()) {
        throw SolveError(fmt::format("pricing LP with fixed commitments failed: {}", res.message));
    }
    auto dual = [&](RowId r) { return clean(res.row_duals[static_cast<std::size_t>(r.index)]); };
    DaPrices out;
    out.method = "fixed-integer LP re-solve, " + solver->name() + " default basis";
    for (auto r : p.balance) out.energy.push_back(dual(r));
    for (std::size_t d : {kUp, kDown}) {
        const auto& rows = p.fo_balance[d];
        out.fo[d] = Grid<double>(rows.rows(), rows.cols(), 0.0);
        for (std::size_t r = 0; r < rows.rows(); ++r) {
            for (std::size_t t = 0; t < rows.cols(); ++t) out.fo[d](r, t) = dual(rows(r, t));
        }
    }
    for (const auto& va : p.ir) {
        std::vector<double> price(p.hours, 0.0);
        for (const auto& vb : p.ir) {
            if (vb.def.direction != va.def.direction || vb.def.cascade_rank > va.def.cascade_rank) continue;
            for (std::size_t t = 0; t < p.hours; ++t) price[t] += dual(vb.requirement[t]);
        }
        out.reserve.push_back(std::move(price));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Export

void write_lp_file(const DaProblem& p, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path.string());
    out << p.milp.to_lp_format();
}

void write_da_solution_csv(const DaProblem& p, const DaSolution& sol, const std::filesystem::path& path) {
    CsvWriter w(path, {"variable", "index", "value"});
    for (std::size_t j = 0; j < p.milp.num_vars(); ++j) {
        const auto& name = p.milp.columns()[j].name;
        const auto open = name.find('[');
        const std::string var = open == std::string::npos ? name : name.substr(0, open);
        const std::string idx = open == std::string::npos ? "" : name.substr(open + 1, name.size() - open - 2);
        w.row({var, idx, format_number(clean(sol.x[j]))});
    }
}

void write_da_prices_csv(const DaProblem& p, const DaPrices& prices, const std::filesystem::path& path) {
    CsvWriter w(path, {"price", "key", "hour", "value"});
    for (std::size_t t = 0; t < prices.energy.size(); ++t) {
        w.row({"energy", "", std::to_string(t), format_number(prices.energy[t])});
    }
    for (std::size_t d : {kUp, kDown}) {
        const auto& g = prices.fo[d];
        for (std::size_t r = 0; r < g.rows(); ++r) {
            for (std::size_t t = 0; t < g.cols(); ++t) {
                w.row({d == kUp ? "fo_up" : "fo_down", "tier" + std::to_string(r), std::to_string(t), format_number(g(r, t))});
            }
        }
    }
    for (std::size_t a = 0; a < prices.reserve.size(); ++a) {
        for (std::size_t t = 0; t < prices.reserve[a].size(); ++t) {
            w.row({"reserve", p.ir.at(a).def.name, std::to_string(t), format_number(prices.reserve[a][t])});
        }
    }
}

}  // namespace flexmarket
