#include "flexmarket/rt_market.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "flexmarket/csv.hpp"
#include "flexmarket/errors.hpp"

namespace flexmarket {

using lp::kInf;
using lp::RowId;
using lp::Term;
using lp::VarId;
using lp::VarType;

bool RtSystem::recommittable(std::size_t i) const {
    const auto& g = units[i];
    return g.is_fast_start() && g.start_lead_time <= config.rtc_lead_h * 60.0;
}

bool RtSystem::da_start(std::size_t i, std::size_t k) const {
    const auto per = static_cast<std::size_t>(config.intervals_per_hour());
    if (k % per != 0) return false;
    const std::size_t h = k / per;
    const bool before = h == 0 ? units[i].initial_on : u_da(i, h - 1) > 0.5;
    return u_da(i, h) > 0.5 && !before;
}

double RtResult::total_incremental() const {
    double s = 0.0;
    for (double v : incremental_cost) s += v;
    return s;
}

double RtResult::total_scarcity() const {
    double s = 0.0;
    for (double v : scarcity_cost) s += v;
    return s;
}

RtSystem make_rt_system(const DaProblem& p, const DaSolution& sol, const std::vector<FlexSellerParams>& offers) {
    RtSystem s;
    s.units = p.units;
    s.config = p.config;
    const std::size_t N = p.units.size();
    const std::size_t H = p.hours;
    if (60 % s.config.intervals_per_hour() != 0 || s.config.intervals_per_hour() < 1) {
        throw InputError("RT resolution must divide the hour");
    }
    for (const auto& g : s.units) {
        auto sp = derive_strike_prices(g);
        for (const auto& o : offers) {
            if (o.generator_id == g.id) sp = o;
        }
        s.strike_up.push_back(sp.strike_up);
        s.strike_down.push_back(sp.strike_down);
    }
    s.p_da = sol.p;
    s.u_da = sol.u;
    s.award_up = sol.award_up.empty() ? Grid<double>(N, H, 0.0) : sol.award_up;
    s.award_down = sol.award_down.empty() ? Grid<double>(N, H, 0.0) : sol.award_down;
    s.scheduled_net_load = sol.scheduled_net_load();
    s.da_shortfall = sol.shortfall;
    s.da_surplus = sol.surplus;
    return s;
}

RtState init_rt_state(const RtSystem& sys) {
    RtState st;
    const std::size_t N = sys.units.size();
    const std::size_t K = sys.intervals();
    st.u = Grid<double>(N, K, 0.0);
    for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t k = 0; k < K; ++k) st.u(i, k) = sys.u_da(i, sys.hour_of(k));
        st.prev_p.push_back(sys.units[i].initial_on ? sys.units[i].initial_output : 0.0);
    }
    st.rtc_scarcity.assign(sys.hours(), false);
    return st;
}

namespace {

std::unique_ptr<lp::MipSolver> own_if_null(const lp::MipSolver*& solver) {
    std::unique_ptr<lp::MipSolver> owned;
    if (!solver) {
        owned = lp::make_default_solver();
        solver = owned.get();
    }
    return owned;
}

// DA output of unit i in the interval before k (initial output before the day).
double p_da_before(const RtSystem& sys, std::size_t i, std::size_t k) {
    if (k == 0) return sys.units[i].initial_on ? sys.units[i].initial_output : 0.0;
    return sys.p_da(i, sys.hour_of(k - 1));
}

bool on_before(const RtSystem& sys, const RtState& st, std::size_t i, std::size_t k) {
    if (k == 0) return sys.units[i].initial_on;
    return st.u(i, k - 1) > 0.5;
}

struct Penalties {
    double up, down, spin;
};

Penalties penalties(const RtSystem& sys, RtMode mode) {
    const auto& c = sys.config;
    if (mode == RtMode::restricted) return {c.simple_penalty_up, -c.simple_penalty_down, 0.0};
    return {c.energy_shortfall_penalty, c.energy_surplus_penalty, c.rt_spin_scarcity};
}

// One dispatch interval inside a model. `uvar[i]` is a commitment column or
// invalid, in which case `uval[i]` is the fixed status.
struct IntervalVars {
    std::vector<VarId> inc, dec;
    VarId shortv, surplusv, spin_short;
    RowId balance;
};

IntervalVars add_interval(lp::MipModel& m, const RtSystem& sys, std::size_t k, double nl, const std::vector<VarId>& uvar,
                          const std::vector<double>& uval, RtMode mode) {
    const std::size_t N = sys.units.size();
    const std::size_t h = sys.hour_of(k);
    const double dt = sys.config.rt_interval_h();
    const auto pen = penalties(sys, mode);
    IntervalVars v;
    std::vector<Term> bal;
    std::vector<Term> spin;
    double scheduled = 0.0;
    const bool reserve = mode == RtMode::full && sys.config.rt_reserve_requirement > 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const auto& g = sys.units[i];
        const double pda = sys.p_da(i, h);
        scheduled += pda;
        double inc_hi = kInf, dec_hi = kInf;
        if (mode == RtMode::restricted) {
            inc_hi = uval[i] > 0.5 ? sys.award_up(i, h) : 0.0;
            dec_hi = sys.award_down(i, h);
        }
        v.inc.push_back(m.add_var(fmt::format("inc[{},{}]", g.id, k), 0, inc_hi, dt * sys.strike_up[i],
                                  VarType::continuous, "rt_energy"));
        v.dec.push_back(m.add_var(fmt::format("dec[{},{}]", g.id, k), 0, dec_hi, -dt * sys.strike_down[i],
                                  VarType::continuous, "rt_energy"));
        std::vector<Term> hi{{v.inc[i], 1.0}, {v.dec[i], -1.0}};
        std::vector<Term> lo{{v.inc[i], 1.0}, {v.dec[i], -1.0}};
        double hi_rhs = -pda, lo_rhs = -pda;
        if (uvar[i].valid()) {
            hi.push_back({uvar[i], -g.p_max});
            lo.push_back({uvar[i], -g.p_min});
        } else {
            hi_rhs += g.p_max * uval[i];
            lo_rhs += g.p_min * uval[i];
        }
        m.add_row(fmt::format("pmax[{},{}]", g.id, k), hi, -kInf, hi_rhs, "capacity");
        m.add_row(fmt::format("pmin[{},{}]", g.id, k), lo, lo_rhs, kInf, "min_gen");
        if (reserve) {
            auto r = m.add_var(fmt::format("spin[{},{}]", g.id, k), 0, kInf, 0.0);
            hi.push_back({r, 1.0});
            m.add_row(fmt::format("spin_head[{},{}]", g.id, k), std::move(hi), -kInf, hi_rhs, "spin");
            std::vector<Term> ramp{{r, 1.0}};
            double ramp_rhs = 0.0;
            if (uvar[i].valid()) {
                ramp.push_back({uvar[i], -g.ramp_rate * dt});
            } else {
                ramp_rhs = g.ramp_rate * dt * uval[i];
            }
            m.add_row(fmt::format("spin_ramp[{},{}]", g.id, k), std::move(ramp), -kInf, ramp_rhs, "spin");
            spin.push_back({r, 1.0});
        }
        bal.push_back({v.inc[i], 1.0});
        bal.push_back({v.dec[i], -1.0});
    }
    v.shortv = m.add_var(fmt::format("short[{}]", k), 0, kInf, dt * pen.up, VarType::continuous, "scarcity");
    v.surplusv = m.add_var(fmt::format("surplus[{}]", k), 0, kInf, dt * pen.down, VarType::continuous, "scarcity");
    bal.push_back({v.shortv, 1.0});
    bal.push_back({v.surplusv, -1.0});
    v.balance = m.add_row(fmt::format("balance[{}]", k), std::move(bal), nl - scheduled, nl - scheduled, "balance");
    if (reserve) {
        v.spin_short = m.add_var(fmt::format("spin_short[{}]", k), 0, kInf, dt * pen.spin, VarType::continuous, "scarcity");
        spin.push_back({v.spin_short, 1.0});
        m.add_row(fmt::format("spin_req[{}]", k), std::move(spin), sys.config.rt_reserve_requirement, kInf, "spin");
    }
    return v;
}

// Ramp between consecutive intervals of a unit that stays online; the limit
// widens by any step in the DA schedule at an hour boundary.
void add_ramp(lp::MipModel& m, const RtSystem& sys, std::size_t i, std::size_t k, const IntervalVars& cur,
              const IntervalVars* prev, double prev_p) {
    const auto& g = sys.units[i];
    const double lim = g.ramp_rate * sys.config.rt_interval_h();
    const double pda = sys.p_da(i, sys.hour_of(k));
    const double pda_prev = p_da_before(sys, i, k);
    const double up = lim + std::max(0.0, pda - pda_prev);
    const double dn = lim + std::max(0.0, pda_prev - pda);
    std::vector<Term> t{{cur.inc[i], 1.0}, {cur.dec[i], -1.0}};
    double base = pda;  // p_k = pda + inc - dec
    if (prev) {
        t.push_back({prev->inc[i], -1.0});
        t.push_back({prev->dec[i], 1.0});
        base -= pda_prev;
    } else {
        base -= prev_p;
    }
    m.add_row(fmt::format("rt_ramp_up[{},{}]", g.id, k), t, -kInf, up - base, "ramp");
    m.add_row(fmt::format("rt_ramp_down[{},{}]", g.id, k), std::move(t), -dn - base, kInf, "ramp");
}

}  // namespace

void run_rtc(const RtSystem& sys, RtState& state, std::span<const double> actual_nl, std::size_t hour,
             const lp::MipSolver* solver) {
    auto owned = own_if_null(solver);
    const std::size_t per = static_cast<std::size_t>(sys.config.intervals_per_hour());
    const std::size_t K = sys.intervals();
    const std::size_t k0 = hour * per;
    const std::size_t k1 = std::min(K, k0 + per * static_cast<std::size_t>(std::max(1, sys.config.rtc_horizon_h)));
    if (k0 >= K) throw InputError(fmt::format("RTC hour {} is past the horizon", hour));
    if (actual_nl.size() < k1) throw InputError("RTC needs net load over its whole horizon");
    const std::size_t N = sys.units.size();
    const double dt = sys.config.rt_interval_h();

    lp::MipModel m;
    // Hourly commitment blocks for re-committable units.
    const std::size_t hours = (k1 - k0 + per - 1) / per;
    Grid<VarId> uh(N, hours);
    for (std::size_t i = 0; i < N; ++i) {
        if (!sys.recommittable(i)) continue;
        const auto& g = sys.units[i];
        for (std::size_t b = 0; b < hours; ++b) {
            if (k0 + b * per < state.frozen_until) continue;
            uh(i, b) = m.add_var(fmt::format("u[{},{}]", g.id, hour + b), 0, 1, dt * per * g.no_load_cost, VarType::binary,
                                 "no_load");
        }
        for (std::size_t b = 0; b < hours; ++b) {
            if (!uh(i, b).valid()) continue;
            auto st = m.add_var(fmt::format("start[{},{}]", g.id, hour + b), 0, 1, g.startup_cost, VarType::continuous,
                                "startup");
            std::vector<Term> t{{st, 1.0}, {uh(i, b), -1.0}};
            double rhs = 0.0;
            if (b > 0 && uh(i, b - 1).valid()) {
                t.push_back({uh(i, b - 1), 1.0});
            } else {
                rhs = -(on_before(sys, state, i, k0 + b * per) ? 1.0 : 0.0);
            }
            m.add_row(fmt::format("start_def[{},{}]", g.id, hour + b), std::move(t), rhs, kInf, "startup");
        }
    }
    std::vector<IntervalVars> iv;
    for (std::size_t k = k0; k < k1; ++k) {
        std::vector<VarId> uvar(N);
        std::vector<double> uval(N, 0.0);
        for (std::size_t i = 0; i < N; ++i) {
            uvar[i] = uh(i, (k - k0) / per);
            uval[i] = state.u(i, k);
        }
        iv.push_back(add_interval(m, sys, k, actual_nl[k], uvar, uval, RtMode::full));
        for (std::size_t i = 0; i < N; ++i) {
            if (sys.recommittable(i) || state.u(i, k) < 0.5 || !on_before(sys, state, i, k)) continue;
            if (k == k0) {
                add_ramp(m, sys, i, k, iv.back(), nullptr, state.prev_p[i]);
            } else {
                add_ramp(m, sys, i, k, iv.back(), &iv[iv.size() - 2], 0.0);
            }
        }
    }
    lp::SolveOptions opts;
    opts.mip_gap = sys.config.mip_gap;
    opts.time_limit_s = sys.config.time_limit_s;
    opts.seed = sys.config.solver_seed;
    const auto res = solver->solve(m, opts);
    if (!res.has_solution()) throw SolveError(fmt::format("RTC hour {}: {}", hour, res.message));
    for (std::size_t i = 0; i < N; ++i) {
        if (!uh(i, 0).valid()) continue;
        const double v = std::round(res.x[static_cast<std::size_t>(uh(i, 0).index)]);
        for (std::size_t k = k0; k < std::min(k1, k0 + per); ++k) state.u(i, k) = v;
    }
    bool scarce = false;
    for (std::size_t k = k0; k < std::min(k1, k0 + per); ++k) {
        scarce = scarce || res.x[static_cast<std::size_t>(iv[k - k0].shortv.index)] > 1e-6;
    }
    state.rtc_scarcity.at(hour) = scarce;
    state.frozen_until = std::max(state.frozen_until, k0 + per);
}

RtInterval run_rtd(const RtSystem& sys, RtState& state, std::span<const double> actual_nl, std::size_t k, RtMode mode,
                   const lp::MipSolver* solver) {
    auto owned = own_if_null(solver);
    const std::size_t N = sys.units.size();
    if (k >= sys.intervals() || k >= actual_nl.size()) throw InputError(fmt::format("RTD interval {} out of range", k));
    const std::size_t h = sys.hour_of(k);
    const double dt = sys.config.rt_interval_h();
    lp::MipModel m;
    std::vector<VarId> none(N);
    std::vector<double> uval(N);
    for (std::size_t i = 0; i < N; ++i) uval[i] = state.u(i, k);
    auto iv = add_interval(m, sys, k, actual_nl[k], none, uval, mode);
    if (mode == RtMode::full) {
        for (std::size_t i = 0; i < N; ++i) {
            if (sys.recommittable(i) || uval[i] < 0.5 || !on_before(sys, state, i, k)) continue;
            add_ramp(m, sys, i, k, iv, nullptr, state.prev_p[i]);
        }
    }
    lp::SolveOptions opts;
    opts.want_duals = true;
    const auto res = solver->solve(m, opts);
    if (res.status != lp::SolveStatus::optimal) throw SolveError(fmt::format("RTD interval {}: {}", k, res.message));
    auto val = [&](VarId v) { return v.valid() ? res.x[static_cast<std::size_t>(v.index)] : 0.0; };

    const auto pen = penalties(sys, mode);
    RtInterval out;
    out.lambda = res.row_duals[static_cast<std::size_t>(iv.balance.index)] / dt;
    out.shortfall = val(iv.shortv);
    out.surplus = val(iv.surplusv);
    out.reserve_short = val(iv.spin_short);
    out.scarcity_cost = dt * (pen.up * out.shortfall + pen.down * out.surplus + pen.spin * out.reserve_short);
    for (std::size_t i = 0; i < N; ++i) {
        const auto& g = sys.units[i];
        const double inc = val(iv.inc[i]);
        const double dec = val(iv.dec[i]);
        const double pda = sys.p_da(i, h);
        double p = pda + inc - dec;
        if (std::abs(p) < 1e-9) p = 0.0;
        out.p.push_back(p);
        out.u.push_back(uval[i]);
        const bool started = uval[i] > 0.5 && !on_before(sys, state, i, k);
        const double deviation = dt * (sys.strike_up[i] * inc - sys.strike_down[i] * dec);
        out.incremental_cost += deviation + dt * g.no_load_cost * (uval[i] - sys.u_da(i, h)) +
                                g.startup_cost * ((started ? 1.0 : 0.0) - (sys.da_start(i, k) ? 1.0 : 0.0));
        out.production_cost += dt * (g.energy_cost(pda) + g.no_load_cost * uval[i]) + deviation +
                               (started ? g.startup_cost : 0.0);
        state.prev_p[i] = p;
    }
    state.next_interval = k + 1;
    return out;
}

RtResult rollout(const RtSystem& sys, std::span<const double> actual_nl, RtMode mode, const lp::MipSolver* solver) {
    auto owned = own_if_null(solver);
    const std::size_t K = sys.intervals();
    const std::size_t N = sys.units.size();
    if (actual_nl.size() != K) {
        throw InputError(fmt::format("RT rollout needs {} intervals of net load, got {}", K, actual_nl.size()));
    }
    const std::size_t per = static_cast<std::size_t>(sys.config.intervals_per_hour());
    auto state = init_rt_state(sys);
    RtResult r;
    r.interval_h = sys.config.rt_interval_h();
    r.p = Grid<double>(N, K, 0.0);
    r.u = Grid<double>(N, K, 0.0);
    for (std::size_t k = 0; k < K; ++k) {
        if (mode == RtMode::full && k % per == 0) run_rtc(sys, state, actual_nl, k / per, solver);
        const auto iv = run_rtd(sys, state, actual_nl, k, mode, solver);
        for (std::size_t i = 0; i < N; ++i) {
            r.p(i, k) = iv.p[i];
            r.u(i, k) = iv.u[i];
        }
        r.lambda.push_back(iv.lambda);
        r.net_load.push_back(actual_nl[k]);
        r.error.push_back(actual_nl[k] - sys.scheduled_net_load[sys.hour_of(k)]);
        r.shortfall.push_back(iv.shortfall);
        r.surplus.push_back(iv.surplus);
        r.reserve_short.push_back(iv.reserve_short);
        r.incremental_cost.push_back(iv.incremental_cost);
        r.scarcity_cost.push_back(iv.scarcity_cost);
        r.production_cost.push_back(iv.production_cost);
    }
    r.rtc_scarcity = state.rtc_scarcity;
    return r;
}

// ---------------------------------------------------------------------------
// Simple out-of-sample model

std::vector<SimpleRtResult> run_simple_rt(const RtSystem& sys, const Grid<double>& scenarios, const lp::MipSolver* solver) {
    auto owned = own_if_null(solver);
    const std::size_t N = sys.units.size();
    const std::size_t K = sys.intervals();
    if (scenarios.cols() != K) {
        throw InputError(fmt::format("simple RT model needs {} intervals per scenario, got {}", K, scenarios.cols()));
    }
    const double dt = sys.config.rt_interval_h();
    const double lam_up = sys.config.simple_penalty_up;
    const double lam_dn = sys.config.simple_penalty_down;

    std::vector<bool> holder(N, false), startable(N, false);
    for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t h = 0; h < sys.hours(); ++h) {
            holder[i] = holder[i] || sys.award_up(i, h) > 0.0 || sys.award_down(i, h) > 0.0;
            startable[i] = startable[i] || (sys.award_up(i, h) > 0.0 && sys.u_da(i, h) < 0.5);
        }
    }

    std::vector<SimpleRtResult> out;
    for (std::size_t s = 0; s < scenarios.rows(); ++s) {
        lp::MipModel m;
        Grid<VarId> up(N, K), dn(N, K), u(N, K), st(N, K);
        std::vector<VarId> eu(K), ed(K);
        for (std::size_t k = 0; k < K; ++k) {
            const std::size_t h = sys.hour_of(k);
            std::vector<Term> bal;
            for (std::size_t i = 0; i < N; ++i) {
                if (!holder[i]) continue;
                const auto& g = sys.units[i];
                const double hs_up = sys.award_up(i, h);
                const bool online = sys.u_da(i, h) > 0.5;
                if (hs_up > 0.0) {
                    up(i, k) = m.add_var(fmt::format("p_up[{},{}]", g.id, k), 0, hs_up, dt * sys.strike_up[i]);
                    bal.push_back({up(i, k), 1.0});
                    if (!online) {
                        u(i, k) = m.add_var(fmt::format("u_rt[{},{}]", g.id, k), 0, 1, dt * g.no_load_cost, VarType::binary);
                        m.add_row(fmt::format("up_limit[{},{}]", g.id, k), {{up(i, k), 1.0}, {u(i, k), -hs_up}}, -kInf, 0);
                    }
                }
                if (sys.award_down(i, h) > 0.0) {
                    dn(i, k) = m.add_var(fmt::format("p_down[{},{}]", g.id, k), 0, sys.award_down(i, h),
                                         -dt * sys.strike_down[i]);
                    bal.push_back({dn(i, k), -1.0});
                }
            }
            eu[k] = m.add_var(fmt::format("eps_up[{}]", k), 0, kInf, dt * lam_up);
            ed[k] = m.add_var(fmt::format("eps_down[{}]", k), 0, kInf, -dt * lam_dn);
            bal.push_back({eu[k], 1.0});
            bal.push_back({ed[k], -1.0});
            const double rhs = scenarios(s, k) - sys.scheduled_net_load[h];
            m.add_row(fmt::format("balance[{}]", k), std::move(bal), rhs, rhs);
        }
        // Start-up tracking for units that may be started; the DA start-ups
        // they would incur anyway are netted out through the offset.
        for (std::size_t i = 0; i < N; ++i) {
            if (!startable[i]) continue;
            const auto& g = sys.units[i];
            for (std::size_t k = 0; k < K; ++k) {
                st(i, k) = m.add_var(fmt::format("u_start[{},{}]", g.id, k), 0, 1, g.startup_cost);
                const double cur = sys.u_da(i, sys.hour_of(k));
                const double prev = k == 0 ? (g.initial_on ? 1.0 : 0.0) : sys.u_da(i, sys.hour_of(k - 1));
                std::vector<Term> t{{st(i, k), 1.0}};
                if (u(i, k).valid()) t.push_back({u(i, k), -1.0});
                if (k > 0 && u(i, k - 1).valid()) t.push_back({u(i, k - 1), 1.0});
                m.add_row(fmt::format("start_track[{},{}]", g.id, k), std::move(t), cur - prev, kInf);
                if (sys.da_start(i, k)) m.objective_offset -= g.startup_cost;
            }
        }
        lp::SolveOptions opts;
        opts.mip_gap = sys.config.mip_gap;
        opts.time_limit_s = sys.config.time_limit_s;
        opts.seed = sys.config.solver_seed;
        const auto res = solver->solve(m, opts);
        if (!res.has_solution()) throw SolveError(fmt::format("simple RT scenario {}: {}", s, res.message));
        auto val = [&](VarId v) { return v.valid() ? res.x[static_cast<std::size_t>(v.index)] : 0.0; };
        SimpleRtResult r;
        r.p_up = Grid<double>(N, K, 0.0);
        r.p_down = Grid<double>(N, K, 0.0);
        r.u_rt = Grid<double>(N, K, 0.0);
        r.u_start = Grid<double>(N, K, 0.0);
        for (std::size_t k = 0; k < K; ++k) {
            double c = dt * (lam_up * val(eu[k]) - lam_dn * val(ed[k]));
            for (std::size_t i = 0; i < N; ++i) {
                const auto& g = sys.units[i];
                r.p_up(i, k) = val(up(i, k));
                r.p_down(i, k) = val(dn(i, k));
                r.u_rt(i, k) = std::round(val(u(i, k)));
                r.u_start(i, k) = std::round(val(st(i, k)));
                c += dt * (sys.strike_up[i] * r.p_up(i, k) - sys.strike_down[i] * r.p_down(i, k) +
                           g.no_load_cost * r.u_rt(i, k));
                if (st(i, k).valid()) c += g.startup_cost * (r.u_start(i, k) - (sys.da_start(i, k) ? 1.0 : 0.0));
            }
            r.eps_up.push_back(val(eu[k]));
            r.eps_down.push_back(val(ed[k]));
            r.error.push_back(scenarios(s, k) - sys.scheduled_net_load[sys.hour_of(k)]);
            r.interval_cost.push_back(c);
            r.total_cost += c;
        }
        out.push_back(std::move(r));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Export

void write_rt_dispatch_csv(const RtSystem& sys, std::span<const RtResult> results, const std::filesystem::path& path) {
    CsvWriter w(path, {"scenario", "interval", "unit", "p", "u"});
    for (std::size_t s = 0; s < results.size(); ++s) {
        const auto& r = results[s];
        for (std::size_t k = 0; k < r.p.cols(); ++k) {
            for (std::size_t i = 0; i < r.p.rows(); ++i) {
                w.row({std::to_string(s), std::to_string(k), sys.units[i].id, format_number(r.p(i, k)),
                       format_number(r.u(i, k))});
            }
        }
    }
}

void write_rt_system_csv(std::span<const RtResult> results, const std::filesystem::path& path) {
    CsvWriter w(path, {"scenario", "interval", "net_load", "error", "lambda", "shortfall", "surplus", "reserve_short",
                       "incremental_cost", "scarcity_cost", "production_cost"});
    for (std::size_t s = 0; s < results.size(); ++s) {
        const auto& r = results[s];
        for (std::size_t k = 0; k < r.lambda.size(); ++k) {
            w.row({std::to_string(s), std::to_string(k), format_number(r.net_load[k]), format_number(r.error[k]),
                   format_number(r.lambda[k]), format_number(r.shortfall[k]), format_number(r.surplus[k]),
                   format_number(r.reserve_short[k]), format_number(r.incremental_cost[k]),
                   format_number(r.scarcity_cost[k]), format_number(r.production_cost[k])});
        }
    }
}

void write_simple_rt_csv(const RtSystem& sys, std::span<const SimpleRtResult> results, const std::filesystem::path& path) {
    CsvWriter w(path, {"scenario", "interval", "unit", "p_up", "p_down", "u_rt", "u_start", "eps_up", "eps_down", "cost"});
    for (std::size_t s = 0; s < results.size(); ++s) {
        const auto& r = results[s];
        for (std::size_t k = 0; k < r.error.size(); ++k) {
            double up = 0.0, dn = 0.0;
            for (std::size_t i = 0; i < r.p_up.rows(); ++i) {
                up += r.p_up(i, k);
                dn += r.p_down(i, k);
                if (r.p_up(i, k) != 0.0 || r.p_down(i, k) != 0.0 || r.u_rt(i, k) != 0.0 || r.u_start(i, k) != 0.0) {
                    w.row({std::to_string(s), std::to_string(k), sys.units[i].id, format_number(r.p_up(i, k)),
                           format_number(r.p_down(i, k)), format_number(r.u_rt(i, k)), format_number(r.u_start(i, k)), "",
                           "", ""});
                }
            }
            w.row({std::to_string(s), std::to_string(k), "system", format_number(up), format_number(dn), "", "",
                   format_number(r.eps_up[k]), format_number(r.eps_down[k]), format_number(r.interval_cost[k])});
        }
    }
}

}  // namespace flexmarket
