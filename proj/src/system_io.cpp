#include "flexmarket/system_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "flexmarket/errors.hpp"

namespace flexmarket {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.count(key)) throw InputError(where + ": unknown key '" + key + "'");
    }
}

template <typename T>
void read_opt(const json& obj, const char* key, T& dst) {
    if (obj.contains(key)) dst = obj.at(key).get<T>();
}

Direction parse_direction(const std::string& s) {
    if (s == "up") return Direction::up;
    if (s == "down") return Direction::down;
    throw InputError("direction must be 'up' or 'down', got '" + s + "'");
}

Constituent parse_constituent(const std::string& s) {
    if (s == "load") return Constituent::load;
    if (s == "wind") return Constituent::wind;
    if (s == "solar") return Constituent::solar;
    if (s == "aggregate") return Constituent::aggregate;
    throw InputError("unknown constituent '" + s + "'");
}

MarketConfig parse_config(const json& j) {
    reject_unknown(j,
                   {"da_resolution_h", "da_horizon_h", "rtc_lead_h", "rtc_horizon_h", "rt_resolution_min",
                    "tier_percentiles", "fo_penalty_m", "mip_gap", "time_limit_s", "solver_seed",
                    "da_warm_start", "rt_reserve_requirement", "rt_spin_scarcity", "simple_penalty_up", "simple_penalty_down",
                    "energy_shortfall_penalty", "energy_surplus_penalty", "fo_account_mode"},
                   "config");
    MarketConfig c;
    read_opt(j, "da_resolution_h", c.da_resolution_h);
    read_opt(j, "da_horizon_h", c.da_horizon_h);
    read_opt(j, "rtc_lead_h", c.rtc_lead_h);
    read_opt(j, "rtc_horizon_h", c.rtc_horizon_h);
    read_opt(j, "rt_resolution_min", c.rt_resolution_min);
    read_opt(j, "tier_percentiles", c.tier_percentiles);
    read_opt(j, "fo_penalty_m", c.fo_penalty_m);
    read_opt(j, "mip_gap", c.mip_gap);
    read_opt(j, "time_limit_s", c.time_limit_s);
    read_opt(j, "solver_seed", c.solver_seed);
    read_opt(j, "da_warm_start", c.da_warm_start);
    read_opt(j, "rt_reserve_requirement", c.rt_reserve_requirement);
    read_opt(j, "rt_spin_scarcity", c.rt_spin_scarcity);
    read_opt(j, "simple_penalty_up", c.simple_penalty_up);
    read_opt(j, "simple_penalty_down", c.simple_penalty_down);
    read_opt(j, "energy_shortfall_penalty", c.energy_shortfall_penalty);
    read_opt(j, "energy_surplus_penalty", c.energy_surplus_penalty);
    if (j.contains("fo_account_mode")) {
        const auto m = j.at("fo_account_mode").get<std::string>();
        if (m == "single_aggregate") {
            c.fo_account_mode = FoAccountMode::single_aggregate;
        } else if (m == "per_constituent") {
            c.fo_account_mode = FoAccountMode::per_constituent;
        } else {
            throw InputError("fo_account_mode must be single_aggregate or per_constituent");
        }
    }
    if (c.da_resolution_h != 1.0) throw InputError("only hourly DA resolution is supported");
    return c;
}

Generator parse_generator(const json& j) {
    reject_unknown(j,
                   {"id", "p_min", "p_max", "ramp_rate", "min_up_time", "min_down_time", "startup_cost",
                    "no_load_cost", "cost_curve", "commit_class", "start_lead_time", "initial_on",
                    "initial_output"},
                   "generator");
    Generator g;
    g.id = j.at("id").get<std::string>();
    g.p_min = j.at("p_min").get<double>();
    g.p_max = j.at("p_max").get<double>();
    g.ramp_rate = j.at("ramp_rate").get<double>();
    read_opt(j, "min_up_time", g.min_up_time);
    read_opt(j, "min_down_time", g.min_down_time);
    read_opt(j, "startup_cost", g.startup_cost);
    read_opt(j, "no_load_cost", g.no_load_cost);
    for (const auto& seg : j.at("cost_curve")) {
        if (!seg.is_array() || seg.size() != 2) throw InputError("generator " + g.id + ": cost_curve entries are [MW, $/MWh]");
        g.cost_curve.push_back({seg[0].get<double>(), seg[1].get<double>()});
    }
    if (j.contains("commit_class")) {
        const auto c = j.at("commit_class").get<std::string>();
        if (c == "da_only") {
            g.commit_class = CommitClass::da_only;
        } else if (c == "fast_start") {
            g.commit_class = CommitClass::fast_start;
        } else {
            throw InputError("generator " + g.id + ": commit_class must be da_only or fast_start");
        }
    }
    read_opt(j, "start_lead_time", g.start_lead_time);
    read_opt(j, "initial_on", g.initial_on);
    read_opt(j, "initial_output", g.initial_output);
    return g;
}

UncertainAccount parse_account(const json& j) {
    reject_unknown(j, {"id", "constituent", "da_cost", "self_hedge_cost_up", "self_hedge_cost_down"}, "account");
    UncertainAccount a;
    a.id = j.at("id").get<std::string>();
    a.constituent = parse_constituent(j.at("constituent").get<std::string>());
    read_opt(j, "da_cost", a.da_cost);
    if (j.contains("self_hedge_cost_up")) a.self_hedge_cost_up = j.at("self_hedge_cost_up").get<double>();
    if (j.contains("self_hedge_cost_down")) a.self_hedge_cost_down = j.at("self_hedge_cost_down").get<double>();
    return a;
}

ReserveProductDef parse_product(const json& j) {
    reject_unknown(j, {"name", "direction", "response_time_min", "demand_steps", "cascade_rank", "beta", "capacity_bid"},
                   "product");
    ReserveProductDef p;
    p.name = j.at("name").get<std::string>();
    p.direction = parse_direction(j.at("direction").get<std::string>());
    read_opt(j, "response_time_min", p.response_time_min);
    read_opt(j, "cascade_rank", p.cascade_rank);
    read_opt(j, "capacity_bid", p.capacity_bid);
    if (j.contains("beta")) p.beta = j.at("beta").get<double>();
    for (const auto& s : j.at("demand_steps")) {
        if (!s.is_array() || s.size() != 3) throw InputError("product " + p.name + ": demand_steps entries are [lo, hi, price]");
        p.demand_steps.push_back({s[0].get<double>(), s[1].get<double>(), s[2].get<double>()});
    }
    return p;
}

}  // namespace

SystemModel parse_system(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("system file is not valid JSON: ") + e.what());
    }
    try {
        reject_unknown(doc, {"name", "config", "generators", "accounts", "products", "sellers"}, "system");
        SystemModel m;
        read_opt(doc, "name", m.name);
        if (doc.contains("config")) m.config = parse_config(doc.at("config"));
        for (const auto& g : doc.at("generators")) m.generators.push_back(parse_generator(g));
        if (doc.contains("accounts")) {
            for (const auto& a : doc.at("accounts")) m.accounts.push_back(parse_account(a));
        }
        if (doc.contains("products")) {
            for (const auto& p : doc.at("products")) m.products.push_back(parse_product(p));
        } else {
            m.products = default_ir_products();
            m.ir_prices_defaulted = true;
        }
        if (doc.contains("sellers")) {
            for (const auto& s : doc.at("sellers")) {
                reject_unknown(s, {"generator", "strike_up", "strike_down", "capacity_bid"}, "seller");
                FlexSellerParams f;
                f.generator_id = s.at("generator").get<std::string>();
                f.strike_up = s.at("strike_up").get<double>();
                f.strike_down = s.at("strike_down").get<double>();
                read_opt(s, "capacity_bid", f.capacity_bid);
                m.seller_overrides.push_back(f);
            }
        }
        return m;
    } catch (const json::exception& e) {
        throw InputError(std::string("system file: ") + e.what());
    }
}

SystemModel load_system(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open system file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_system(ss.str());
}

std::string system_to_json(const SystemModel& m) {
    json doc;
    doc["name"] = m.name;
    const auto& c = m.config;
    doc["config"] = {
        {"da_resolution_h", c.da_resolution_h},
        {"da_horizon_h", c.da_horizon_h},
        {"rtc_lead_h", c.rtc_lead_h},
        {"rtc_horizon_h", c.rtc_horizon_h},
        {"rt_resolution_min", c.rt_resolution_min},
        {"tier_percentiles", c.tier_percentiles},
        {"fo_penalty_m", c.fo_penalty_m},
        {"mip_gap", c.mip_gap},
        {"time_limit_s", c.time_limit_s},
        {"solver_seed", c.solver_seed},
        {"da_warm_start", c.da_warm_start},
        {"rt_reserve_requirement", c.rt_reserve_requirement},
        {"rt_spin_scarcity", c.rt_spin_scarcity},
        {"simple_penalty_up", c.simple_penalty_up},
        {"simple_penalty_down", c.simple_penalty_down},
        {"energy_shortfall_penalty", c.energy_shortfall_penalty},
        {"energy_surplus_penalty", c.energy_surplus_penalty},
        {"fo_account_mode", std::string(to_string(c.fo_account_mode))},
    };
    json gens = json::array();
    for (const auto& g : m.generators) {
        json curve = json::array();
        for (const auto& s : g.cost_curve) curve.push_back({s.width_mw, s.marginal_cost});
        json jg = {{"id", g.id},
                   {"p_min", g.p_min},
                   {"p_max", g.p_max},
                   {"ramp_rate", g.ramp_rate},
                   {"min_up_time", g.min_up_time},
                   {"min_down_time", g.min_down_time},
                   {"startup_cost", g.startup_cost},
                   {"no_load_cost", g.no_load_cost},
                   {"cost_curve", curve},
                   {"commit_class", std::string(to_string(g.commit_class))}};
        if (g.is_fast_start()) jg["start_lead_time"] = g.start_lead_time;
        if (g.initial_on) {
            jg["initial_on"] = true;
            jg["initial_output"] = g.initial_output;
        }
        gens.push_back(jg);
    }
    doc["generators"] = gens;
    json accs = json::array();
    for (const auto& a : m.accounts) {
        json ja = {{"id", a.id}, {"constituent", std::string(to_string(a.constituent))}, {"da_cost", a.da_cost}};
        if (a.self_hedge_cost_up) ja["self_hedge_cost_up"] = *a.self_hedge_cost_up;
        if (a.self_hedge_cost_down) ja["self_hedge_cost_down"] = *a.self_hedge_cost_down;
        accs.push_back(ja);
    }
    doc["accounts"] = accs;
    if (!m.ir_prices_defaulted) {
        json prods = json::array();
        for (const auto& p : m.products) {
            json steps = json::array();
            for (const auto& s : p.demand_steps) steps.push_back({s.lower_pct, s.upper_pct, s.price});
            json jp = {{"name", p.name},
                       {"direction", std::string(to_string(p.direction))},
                       {"response_time_min", p.response_time_min},
                       {"cascade_rank", p.cascade_rank},
                       {"capacity_bid", p.capacity_bid},
                       {"demand_steps", steps}};
            if (p.beta) jp["beta"] = *p.beta;
            prods.push_back(jp);
        }
        doc["products"] = prods;
    }
    if (!m.seller_overrides.empty()) {
        json sellers = json::array();
        for (const auto& s : m.seller_overrides) {
            sellers.push_back({{"generator", s.generator_id},
                               {"strike_up", s.strike_up},
                               {"strike_down", s.strike_down},
                               {"capacity_bid", s.capacity_bid}});
        }
        doc["sellers"] = sellers;
    }
    return doc.dump(2) + "\n";
}

void save_system(const SystemModel& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path.string());
    out << system_to_json(model);
}

}  // namespace flexmarket
