#include "flexmarket/settlement.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "flexmarket/csv.hpp"
#include "flexmarket/errors.hpp"

namespace flexmarket {

std::string_view to_string(PartyClass c) {
    switch (c) {
        case PartyClass::seller: return "seller";
        case PartyClass::buyer: return "buyer";
        case PartyClass::load: return "load";
        case PartyClass::iso: return "iso";
    }
    return "?";
}

std::string_view to_string(Stage s) { return s == Stage::da ? "da" : "rt"; }

std::string_view to_string(Product p) {
    switch (p) {
        case Product::energy: return "energy";
        case Product::fo_up: return "fo_up";
        case Product::fo_down: return "fo_down";
        case Product::ir_up: return "ir_up";
        case Product::ir_down: return "ir_down";
    }
    return "?";
}

void CashflowLedger::post(LedgerEntry e) {
    if (e.cls == PartyClass::iso) throw std::logic_error("ISO entries are created as counterparts");
    if (e.amount == 0.0) return;
    e.pair = next_pair_++;
    LedgerEntry iso = e;
    iso.party = kIsoParty;
    iso.cls = PartyClass::iso;
    iso.amount = -e.amount;
    entries_.push_back(std::move(e));
    entries_.push_back(std::move(iso));
}

void CashflowLedger::post_unpaired(LedgerEntry e) {
    e.pair = next_pair_++;
    entries_.push_back(std::move(e));
}

void CashflowLedger::append(const CashflowLedger& other) {
    const std::size_t shift = next_pair_ - 1;
    std::size_t top = 0;
    for (auto e : other.entries_) {
        e.pair += shift;
        top = std::max(top, e.pair);
        entries_.push_back(std::move(e));
    }
    next_pair_ = std::max(next_pair_, top + 1);
}

double CashflowLedger::total() const {
    double s = 0.0;
    for (const auto& e : entries_) s += e.amount;
    return s;
}

// ---------------------------------------------------------------------------

std::vector<double> uncertain_da_position(const DaProblem& p, const DaSolution& sol) {
    std::vector<double> x(p.hours, 0.0);
    for (std::size_t t = 0; t < p.hours; ++t) {
        x[t] = -p.demand[t];
        for (std::size_t b = 0; b < p.buyers.size(); ++b) {
            x[t] += sol.buyer_p_da[b][t] - p.buyers[b].account.da_forecast[t];
        }
    }
    return x;
}

UncertainPosition aggregate_position(const DaProblem& p, const DaSolution& sol, std::span<const double> realized_net_load) {
    UncertainPosition u;
    u.party = "aggregate";
    u.cls = PartyClass::buyer;
    u.da_position = uncertain_da_position(p, sol);
    for (double nl : realized_net_load) u.realized.push_back(-nl);
    return u;
}

CashflowLedger settle_da_energy(const DaProblem& p, const DaSolution& sol, const DaPrices& prices, int day) {
    CashflowLedger l;
    const auto x = uncertain_da_position(p, sol);
    for (std::size_t t = 0; t < p.hours; ++t) {
        const double lam = prices.energy.at(t);
        for (std::size_t i = 0; i < p.units.size(); ++i) {
            l.post({p.units[i].id, PartyClass::seller, Stage::da, Product::energy, day, t, lam * sol.p(i, t), "energy"});
        }
        // FO buyers settle their own positions; whatever fixed demand is left
        // sits with the aggregate account.
        double fixed = x[t];
        for (std::size_t b = 0; b < p.buyers.size(); ++b) {
            const double pos = sol.buyer_p_da[b][t];
            fixed -= pos;
            l.post({p.buyers[b].account.id, PartyClass::buyer, Stage::da, Product::energy, day, t, lam * pos, "energy"});
        }
        if (std::abs(fixed) > 1e-9) {
            l.post({"aggregate", PartyClass::buyer, Stage::da, Product::energy, day, t, lam * fixed, "energy"});
        }
    }
    return l;
}

CashflowLedger settle_fo_premiums(const DaProblem& p, const DaSolution& sol, const DaPrices& prices, int day) {
    CashflowLedger l;
    if (p.design != DaDesign::fo) return l;
    const std::size_t R = p.tiers.num_tiers();
    for (std::size_t d : {kUp, kDown}) {
        const Product prod = d == kUp ? Product::fo_up : Product::fo_down;
        for (std::size_t t = 0; t < p.hours; ++t) {
            for (std::size_t j = 0; j < p.sellers.size(); ++j) {
                double v = 0.0;
                for (std::size_t r = 0; r < R; ++r) v += prices.fo[d](r, t) * sol.hs[j][d](r, t);
                l.post({p.sellers[j].params.generator_id, PartyClass::seller, Stage::da, prod, day, t, v, "premium"});
            }
            for (std::size_t b = 0; b < p.buyers.size(); ++b) {
                double v = 0.0;
                for (std::size_t r = 0; r < R; ++r) v += prices.fo[d](r, t) * sol.hd[b][d](r, t);
                l.post({p.buyers[b].account.id, PartyClass::buyer, Stage::da, prod, day, t, -v, "premium"});
            }
        }
    }
    return l;
}

FoPayoffs settle_fo_payoffs(const DaProblem& p, const DaSolution& sol, const RtResult& rt,
                            const std::vector<std::vector<double>>& realized, int day) {
    FoPayoffs out;
    if (p.design != DaDesign::fo) return out;
    if (realized.size() != p.buyers.size()) throw InputError("need one realized series per FO buyer");
    const std::size_t K = rt.lambda.size();
    if (K % std::max<std::size_t>(1, p.hours) != 0) throw InputError("RT intervals do not tile the DA hours");
    const std::size_t per = K / p.hours;
    const double dt = rt.interval_h;
    const std::size_t R = p.tiers.num_tiers();

    for (std::size_t b = 0; b < p.buyers.size(); ++b) {
        const auto& acct = p.buyers[b].account;
        if (realized[b].size() != K) throw InputError("realized series of " + acct.id + " has the wrong length");
        const auto& L = acct.levels;
        for (std::size_t k = 0; k < K; ++k) {
            const std::size_t h = k / per;
            const double lam = rt.lambda[k];
            const double pda = sol.buyer_p_da[b][h];
            const double real = realized[b][k];
            const bool beyond = real < L(0, h) - 1e-9 || real > L(L.rows() - 1, h) + 1e-9;
            for (std::size_t d : {kUp, kDown}) {
                const bool up = d == kUp;
                for (std::size_t r = 0; r < R; ++r) {
                    const double held = sol.hd[b][d](r, h);
                    const double lo = L(r, h), hi = L(r + 1, h);
                    const double inside = up ? std::max(0.0, std::min(hi, pda) - std::max(real, lo))
                                             : std::max(0.0, std::min(real, hi) - std::max(lo, pda));
                    const double q = std::min(held, inside);
                    if (q <= 0.0) continue;
                    ExerciseRecord rec;
                    rec.buyer = acct.id;
                    rec.direction = up ? Direction::up : Direction::down;
                    rec.tier = r;
                    rec.interval = k;
                    rec.quantity_trigger = true;
                    rec.beyond_levels = beyond;
                    rec.held_mw = held;
                    rec.triggered_mw = q;
                    double total_hs = 0.0;
                    for (std::size_t j = 0; j < p.sellers.size(); ++j) total_hs += sol.hs[j][d](r, h);
                    double paid = 0.0;
                    for (std::size_t j = 0; j < p.sellers.size() && total_hs > 0.0; ++j) {
                        const double share = sol.hs[j][d](r, h) / total_hs;
                        if (share <= 0.0) continue;
                        const auto& sp = p.sellers[j].params;
                        const double per_mw = up ? lam - sp.strike_up : sp.strike_down - lam;
                        if (per_mw <= 0.0) continue;
                        rec.price_trigger = true;
                        const double mw = q * share;
                        rec.exercised_mw += mw;
                        const double amount = dt * mw * per_mw;
                        paid += mw * per_mw;
                        const Product prod = up ? Product::fo_up : Product::fo_down;
                        out.ledger.post({sp.generator_id, PartyClass::seller, Stage::rt, prod, day, k, -amount, "payoff"});
                        out.ledger.post({acct.id, PartyClass::buyer, Stage::rt, prod, day, k, amount, "payoff"});
                    }
                    rec.payoff_per_mw = rec.exercised_mw > 0.0 ? paid / rec.exercised_mw : 0.0;
                    out.records.push_back(rec);
                }
            }
        }
    }
    return out;
}

CashflowLedger settle_rt_energy(const RtSystem& sys, const RtResult& rt, std::span<const UncertainPosition> uncertain,
                                int day) {
    CashflowLedger l;
    const std::size_t K = rt.lambda.size();
    const double dt = rt.interval_h;
    for (std::size_t k = 0; k < K; ++k) {
        const std::size_t h = sys.hour_of(k);
        const double lam = rt.lambda[k];
        for (std::size_t i = 0; i < sys.units.size(); ++i) {
            const double dev = rt.p(i, k) - sys.p_da(i, h);
            l.post({sys.units[i].id, PartyClass::seller, Stage::rt, Product::energy, day, k, dt * lam * dev, "energy"});
        }
        for (const auto& u : uncertain) {
            if (u.realized.size() != K) throw InputError("realized series of " + u.party + " has the wrong length");
            const double dev = u.realized[k] - u.da_position.at(h);
            l.post({u.party, u.cls, Stage::rt, Product::energy, day, k, dt * lam * dev, "energy"});
        }
    }
    return l;
}

CashflowLedger settle_ir(const DaProblem& p, const DaSolution& sol, const DaPrices& prices,
                         std::span<const UncertainPosition> constituents, int day, IrSettlementSummary* summary) {
    CashflowLedger l;
    IrSettlementSummary sum;
    if (p.design != DaDesign::ir) {
        if (summary) *summary = sum;
        return l;
    }
    const std::size_t H = p.hours;
    const std::size_t N = p.units.size();
    // DA procurement cost and quantity per direction and hour.
    std::array<std::vector<double>, 2> cost{std::vector<double>(H, 0.0), std::vector<double>(H, 0.0)};
    std::array<std::vector<double>, 2> qty = cost;
    for (std::size_t a = 0; a < p.ir.size(); ++a) {
        const std::size_t d = p.ir[a].def.direction == Direction::up ? kUp : kDown;
        const Product prod = d == kUp ? Product::ir_up : Product::ir_down;
        for (std::size_t t = 0; t < H; ++t) {
            const double price = prices.reserve.at(a).at(t);
            for (std::size_t i = 0; i < N; ++i) {
                const double award = sol.ir_award[a](i, t);
                if (award <= 0.0) continue;
                cost[d][t] += price * award;
                qty[d][t] += award;
                l.post({p.units[i].id, PartyClass::seller, Stage::da, prod, day, t, price * award, "procurement"});
            }
        }
    }
    for (std::size_t d : {kUp, kDown})
        for (double c : cost[d]) sum.da_cost += c;

    std::size_t K = 0;
    for (const auto& c : constituents) K = std::max(K, c.realized.size());
    if (K % std::max<std::size_t>(1, H) != 0) throw InputError("RT intervals do not tile the DA hours");
    const std::size_t per = H > 0 ? K / H : 1;
    const double dt = 1.0 / static_cast<double>(per);
    for (std::size_t k = 0; k < K; ++k) {
        const std::size_t h = k / per;
        for (std::size_t d : {kUp, kDown}) {
            if (cost[d][h] <= 0.0 || qty[d][h] <= 0.0) continue;
            const double rate = cost[d][h] / qty[d][h];
            const double cap = dt * cost[d][h];
            std::vector<double> charge(constituents.size(), 0.0);
            double total = 0.0;
            for (std::size_t c = 0; c < constituents.size(); ++c) {
                const auto& u = constituents[c];
                if (u.realized.size() != K) throw InputError("realized series of " + u.party + " has the wrong length");
                const double dev = u.realized[k] - u.da_position.at(h);
                const double imbalance = d == kUp ? std::max(0.0, -dev) : std::max(0.0, dev);
                charge[c] = dt * rate * imbalance;
                total += charge[c];
            }
            const double scale = total > cap ? cap / total : 1.0;
            const Product prod = d == kUp ? Product::ir_up : Product::ir_down;
            for (std::size_t c = 0; c < constituents.size(); ++c) {
                const double amount = charge[c] * scale;
                if (amount <= 0.0) continue;
                sum.rt_recovery += amount;
                l.post({constituents[c].party, constituents[c].cls, Stage::rt, prod, day, k, -amount, "allocation"});
            }
        }
    }
    if (summary) *summary = sum;
    return l;
}

// ---------------------------------------------------------------------------

double IsoPosition::get(Product p, Stage s) const {
    auto it = net.find({p, s});
    return it == net.end() ? 0.0 : it->second;
}

double IsoPosition::fo_net(std::optional<Stage> s) const {
    double v = 0.0;
    for (Stage st : {Stage::da, Stage::rt}) {
        if (s && *s != st) continue;
        v += get(Product::fo_up, st) + get(Product::fo_down, st);
    }
    return v;
}

IsoPosition iso_position(const CashflowLedger& ledger) {
    std::map<std::size_t, std::vector<const LedgerEntry*>> pairs;
    for (const auto& e : ledger.entries()) pairs[e.pair].push_back(&e);
    std::vector<std::string> bad;
    for (const auto& [id, es] : pairs) {
        int iso = 0;
        double s = 0.0, scale = 0.0;
        for (const auto* e : es) {
            iso += e->cls == PartyClass::iso ? 1 : 0;
            s += e->amount;
            scale = std::max(scale, std::abs(e->amount));
        }
        if (es.size() != 2 || iso != 1 || std::abs(s) > 1e-9 * std::max(1.0, scale)) {
            for (const auto* e : es) {
                bad.push_back(fmt::format("{} {} {} day {} interval {}: {}", e->party, to_string(e->stage),
                                          to_string(e->product), e->day, e->interval, e->amount));
            }
        }
    }
    if (!bad.empty()) throw AuditError(fmt::format("ledger has {} unmatched entries", bad.size()), bad);
    IsoPosition pos;
    for (const auto& e : ledger.entries()) {
        if (e.cls == PartyClass::iso) {
            pos.net[{e.product, e.stage}] += e.amount;
            pos.total += e.amount;
        } else if (e.product == Product::ir_up || e.product == Product::ir_down) {
            if (e.stage == Stage::da) pos.ir_da_cost += e.amount;
            if (e.stage == Stage::rt) pos.ir_rt_recovery -= e.amount;
        }
    }
    return pos;
}

CashflowStats aggregate_cashflows(const CashflowLedger& ledger, const std::vector<PartyClass>& classes,
                                  const std::map<int, double>& rt_costs) {
    std::map<int, CashflowRow> days;
    for (const auto& [d, c] : rt_costs) days[d].rt_cost = c;
    for (const auto& e : ledger.entries()) {
        if (std::find(classes.begin(), classes.end(), e.cls) == classes.end()) continue;
        auto& row = days[e.day];
        const bool up = e.product == Product::fo_up || e.product == Product::ir_up;
        if (e.product == Product::energy) {
            (e.stage == Stage::da ? row.da_energy : row.rt_energy) += e.amount;
        } else if (e.stage == Stage::da) {
            (up ? row.da_up : row.da_down) += e.amount;
        } else {
            (up ? row.rt_up : row.rt_down) += e.amount;
        }
    }
    CashflowStats st;
    for (auto& [d, row] : days) {
        row.day = d;
        row.total = row.da_up + row.da_down + row.rt_energy + row.rt_up + row.rt_down;
        row.margin = row.total - row.rt_cost;
        st.days.push_back(row);
    }
    const double n = static_cast<double>(st.days.size());
    if (st.days.empty()) return st;
    auto fields = [](CashflowRow& r) {
        return std::array<double*, 9>{&r.da_energy, &r.da_up, &r.da_down, &r.rt_energy, &r.rt_up,
                                      &r.rt_down, &r.total, &r.rt_cost, &r.margin};
    };
    auto mean = fields(st.mean);
    auto sd = fields(st.stdev);
    for (std::size_t f = 0; f < mean.size(); ++f) {
        double s = 0.0;
        for (auto& r : st.days) s += *fields(r)[f];
        *mean[f] = s / n;
        double v = 0.0;
        for (auto& r : st.days) v += std::pow(*fields(r)[f] - *mean[f], 2);
        *sd[f] = st.days.size() > 1 ? std::sqrt(v / (n - 1.0)) : 0.0;
    }
    st.mean.day = st.stdev.day = -1;
    return st;
}

// ---------------------------------------------------------------------------

void write_ledger_csv(const CashflowLedger& ledger, const std::filesystem::path& path) {
    CsvWriter w(path, {"party", "class", "stage", "product", "day", "interval", "amount", "component", "pair"});
    for (const auto& e : ledger.entries()) {
        w.row({e.party, std::string(to_string(e.cls)), std::string(to_string(e.stage)), std::string(to_string(e.product)),
               std::to_string(e.day), std::to_string(e.interval), format_number(e.amount), e.component,
               std::to_string(e.pair)});
    }
}

void write_iso_position_csv(const IsoPosition& iso, const std::filesystem::path& path) {
    CsvWriter w(path, {"product", "da", "rt", "total"});
    for (Product p : {Product::energy, Product::fo_up, Product::fo_down, Product::ir_up, Product::ir_down}) {
        const double da = iso.get(p, Stage::da);
        const double rt = iso.get(p, Stage::rt);
        w.row({std::string(to_string(p)), format_number(da), format_number(rt), format_number(da + rt)});
    }
    w.row({"all", "", "", format_number(iso.total)});
    w.row({"ir_recovery_ratio", "", "", format_number(iso.ir_recovery_ratio())});
}

void write_exercise_csv(std::span<const ExerciseRecord> records, const std::filesystem::path& path) {
    CsvWriter w(path, {"buyer", "direction", "tier", "interval", "quantity_trigger", "price_trigger", "beyond_levels",
                       "held_mw", "triggered_mw", "exercised_mw", "payoff_per_mw"});
    for (const auto& r : records) {
        w.row({r.buyer, std::string(to_string(r.direction)), std::to_string(r.tier), std::to_string(r.interval),
               r.quantity_trigger ? "1" : "0", r.price_trigger ? "1" : "0", r.beyond_levels ? "1" : "0",
               format_number(r.held_mw), format_number(r.triggered_mw), format_number(r.exercised_mw),
               format_number(r.payoff_per_mw)});
    }
}

void write_cashflow_stats_csv(const std::map<std::string, CashflowStats>& by_label, const std::filesystem::path& path) {
    CsvWriter w(path, {"label", "row", "da_energy", "da_up", "da_down", "rt_energy", "rt_up", "rt_down", "total",
                       "rt_cost", "margin"});
    auto emit = [&](const std::string& label, const std::string& row, const CashflowRow& r) {
        w.row({label, row, format_number(r.da_energy), format_number(r.da_up), format_number(r.da_down),
               format_number(r.rt_energy), format_number(r.rt_up), format_number(r.rt_down), format_number(r.total),
               format_number(r.rt_cost), format_number(r.margin)});
    };
    for (const auto& [label, st] : by_label) {
        for (const auto& r : st.days) emit(label, "day" + std::to_string(r.day), r);
        emit(label, "mean", st.mean);
        emit(label, "std", st.stdev);
    }
}

}  // namespace flexmarket
