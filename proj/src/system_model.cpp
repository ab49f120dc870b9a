#include "flexmarket/system_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "flexmarket/errors.hpp"

namespace flexmarket {

std::string_view to_string(Direction d) { return d == Direction::up ? "up" : "down"; }

std::string_view to_string(CommitClass c) { return c == CommitClass::da_only ? "da_only" : "fast_start"; }

std::string_view to_string(Constituent c) {
    switch (c) {
        case Constituent::load: return "load";
        case Constituent::wind: return "wind";
        case Constituent::solar: return "solar";
        case Constituent::aggregate: return "aggregate";
    }
    return "?";
}

std::string_view to_string(FoAccountMode m) {
    return m == FoAccountMode::single_aggregate ? "single_aggregate" : "per_constituent";
}

double Generator::offline_up_capability() const { return std::min(p_max, p_min + ramp_rate); }

double Generator::startup_ramp() const { return std::max(p_min, ramp_rate); }

double Generator::energy_cost(double mw) const {
    double cost = 0.0;
    double left = mw;
    for (const auto& seg : cost_curve) {
        if (left <= 0.0) break;
        const double take = std::min(left, seg.width_mw);
        cost += take * seg.marginal_cost;
        left -= take;
    }
    if (left > 1e-9 && !cost_curve.empty()) cost += left * cost_curve.back().marginal_cost;
    return cost;
}

const Generator* SystemModel::find_generator(std::string_view id) const {
    auto it = std::find_if(generators.begin(), generators.end(), [&](const Generator& g) { return g.id == id; });
    return it == generators.end() ? nullptr : &*it;
}

const UncertainAccount* SystemModel::find_account(std::string_view id) const {
    auto it = std::find_if(accounts.begin(), accounts.end(), [&](const UncertainAccount& a) { return a.id == id; });
    return it == accounts.end() ? nullptr : &*it;
}

FlexSellerParams derive_strike_prices(const Generator& gen) {
    if (gen.cost_curve.empty()) {
        throw InputError("generator '" + gen.id + "' has an empty cost curve");
    }
    auto [lo, hi] = std::minmax_element(gen.cost_curve.begin(), gen.cost_curve.end(),
                                        [](const CostSegment& a, const CostSegment& b) {
                                            return a.marginal_cost < b.marginal_cost;
                                        });
    return FlexSellerParams{gen.id, hi->marginal_cost, lo->marginal_cost, 0.0};
}

std::vector<FlexSellerParams> seller_params(const SystemModel& model) {
    std::vector<FlexSellerParams> out;
    out.reserve(model.generators.size());
    for (const auto& g : model.generators) {
        auto it = std::find_if(model.seller_overrides.begin(), model.seller_overrides.end(),
                               [&](const FlexSellerParams& o) { return o.generator_id == g.id; });
        out.push_back(it != model.seller_overrides.end() ? *it : derive_strike_prices(g));
    }
    return out;
}

namespace {

void check_generator(const Generator& g, const MarketConfig& cfg, std::vector<Violation>& out) {
    const std::string loc = "generator " + g.id;
    auto add = [&](std::string msg) { out.push_back({loc, std::move(msg)}); };
    if (g.p_min < 0.0) add(fmt::format("p_min {} is negative", g.p_min));
    if (g.p_min > g.p_max) add(fmt::format("p_min {} exceeds p_max {}", g.p_min, g.p_max));
    if (g.ramp_rate < 0.0) add("ramp_rate is negative");
    if (g.min_up_time < 1 || g.min_down_time < 1) add("min up/down times must be at least 1 h");
    if (g.startup_cost < 0.0 || g.no_load_cost < 0.0) add("commitment costs must be non-negative");
    if (g.cost_curve.empty()) {
        add("cost curve is empty");
    } else {
        double width = 0.0;
        for (std::size_t k = 0; k < g.cost_curve.size(); ++k) {
            const auto& seg = g.cost_curve[k];
            if (seg.width_mw < 0.0) add(fmt::format("segment {} has negative width", k));
            width += seg.width_mw;
            if (k > 0 && seg.marginal_cost < g.cost_curve[k - 1].marginal_cost) {
                add(fmt::format("marginal cost decreases at segment {}", k));
            }
        }
        if (std::abs(width - g.p_max) > 1e-6 * std::max(1.0, g.p_max)) {
            add(fmt::format("segment widths sum to {} but p_max is {}", width, g.p_max));
        }
    }
    if (g.is_fast_start() && g.start_lead_time > cfg.rtc_lead_h * 60.0) {
        add(fmt::format("fast-start lead time {} min exceeds the RTC lead of {} min", g.start_lead_time,
                        cfg.rtc_lead_h * 60.0));
    }
    if (g.initial_on && (g.initial_output < g.p_min - 1e-9 || g.initial_output > g.p_max + 1e-9)) {
        add("initial_output outside [p_min, p_max]");
    }
}

void check_account(const UncertainAccount& a, std::vector<Violation>& out) {
    const auto& lv = a.levels;
    for (std::size_t t = 0; t < lv.cols(); ++t) {
        for (std::size_t s = 1; s < lv.rows(); ++s) {
            if (lv(s, t) < lv(s - 1, t)) {
                out.push_back({fmt::format("account {}[s={},t={}]", a.id, s, t),
                               fmt::format("level {} is below the previous level {}", lv(s, t), lv(s - 1, t))});
            }
        }
    }
    if (!lv.empty() && !a.da_forecast.empty() && a.da_forecast.size() != lv.cols()) {
        out.push_back({"account " + a.id, "da_forecast length differs from the level grid"});
    }
    if (a.self_hedge_cost_up && *a.self_hedge_cost_up < 0.0) {
        out.push_back({"account " + a.id, "self_hedge_cost_up is negative"});
    }
}

void check_product(const ReserveProductDef& p, std::vector<Violation>& out) {
    const std::string loc = "product " + p.name;
    if (p.effective_beta() < 0.0) out.push_back({loc, "beta is negative"});
    if (p.response_time_min <= 0.0) out.push_back({loc, "response time must be positive"});
    for (std::size_t k = 0; k < p.demand_steps.size(); ++k) {
        const auto& s = p.demand_steps[k];
        if (!(s.lower_pct > 0.0 && s.upper_pct < 100.0 && s.lower_pct <= s.upper_pct)) {
            out.push_back({loc, fmt::format("step {} interval [{},{}] is not inside (0,100)", k, s.lower_pct,
                                            s.upper_pct)});
        }
        if (k > 0 && !(s.price < p.demand_steps[k - 1].price)) {
            out.push_back({loc, fmt::format("step {} price {} is not below the previous step", k, s.price)});
        }
        for (std::size_t j = 0; j < k; ++j) {
            const auto& o = p.demand_steps[j];
            if (std::max(s.lower_pct, o.lower_pct) < std::min(s.upper_pct, o.upper_pct)) {
                out.push_back({loc, fmt::format("steps {} and {} overlap", j, k)});
            }
        }
    }
}

}  // namespace

std::vector<Violation> validate_system(const SystemModel& model) {
    std::vector<Violation> out;
    std::set<std::string> ids;
    for (const auto& g : model.generators) {
        if (!ids.insert(g.id).second) out.push_back({"generator " + g.id, "duplicate id"});
        check_generator(g, model.config, out);
    }
    std::set<std::string> acc_ids;
    for (const auto& a : model.accounts) {
        if (!acc_ids.insert(a.id).second) out.push_back({"account " + a.id, "duplicate id"});
        check_account(a, out);
    }
    for (const auto& p : model.products) check_product(p, out);
    for (const auto& o : model.seller_overrides) {
        if (!model.find_generator(o.generator_id)) {
            out.push_back({"seller " + o.generator_id, "override names an unknown generator"});
        }
        if (o.strike_down > o.strike_up) {
            out.push_back({"seller " + o.generator_id, "strike_down exceeds strike_up"});
        }
    }
    const auto& cfg = model.config;
    for (std::size_t k = 0; k < cfg.tier_percentiles.size(); ++k) {
        const double p = cfg.tier_percentiles[k];
        if (!(p > 0.0 && p < 100.0)) out.push_back({"config", fmt::format("tier percentile {} outside (0,100)", p)});
        if (k > 0 && !(p > cfg.tier_percentiles[k - 1])) {
            out.push_back({"config", "tier percentiles are not strictly increasing"});
        }
    }
    if (cfg.mip_gap < 0.0) out.push_back({"config", "mip_gap is negative"});
    if (cfg.rt_resolution_min <= 0.0 || std::fmod(60.0, cfg.rt_resolution_min) != 0.0) {
        out.push_back({"config", "rt_resolution_min must divide 60"});
    }
    return out;
}

std::vector<ReserveProductDef> default_ir_products() {
    ReserveProductDef up;
    up.name = "ir_up";
    up.direction = Direction::up;
    up.response_time_min = 60.0;
    up.demand_steps = {{50, 65, 1200}, {65, 80, 1000}, {80, 90, 800}, {90, 95, 600}};
    ReserveProductDef down;
    down.name = "ir_down";
    down.direction = Direction::down;
    down.response_time_min = 60.0;
    down.demand_steps = {{35, 50, 1200}, {20, 35, 1000}, {10, 20, 800}, {5, 10, 600}};
    return {up, down};
}

}  // namespace flexmarket
