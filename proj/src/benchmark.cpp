#include "flexmarket/benchmark.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "flexmarket/errors.hpp"

namespace flexmarket {

namespace {

struct UnitSpec {
    const char* kind;
    int count;
    double p_min, p_max, ramp;
    int min_up, min_down;
    double startup, no_load;
    double mc_lo, mc_hi;  // marginal cost of the first and last segment
    bool on;
    CommitClass cls;
    double lead_min;
};

Generator make_unit(const UnitSpec& s, int k) {
    Generator g;
    g.id = fmt::format("{}{}", s.kind, k + 1);
    g.p_min = s.p_min;
    g.p_max = s.p_max;
    g.ramp_rate = s.ramp;
    g.min_up_time = s.min_up;
    g.min_down_time = s.min_down;
    g.startup_cost = s.startup;
    g.no_load_cost = s.no_load;
    g.commit_class = s.cls;
    g.start_lead_time = s.lead_min;
    // spread costs across units of a kind so merit order is strict
    const double shift = 0.6 * k;
    const double w = s.p_max / 3.0;
    g.cost_curve = {{w, s.mc_lo + shift}, {w, 0.5 * (s.mc_lo + s.mc_hi) + shift}, {s.p_max - 2 * w, s.mc_hi + shift}};
    g.initial_on = s.on;
    g.initial_output = s.on ? s.p_min : 0.0;
    return g;
}

void add_units(SystemModel& m, const UnitSpec& s) {
    for (int k = 0; k < s.count; ++k) m.generators.push_back(make_unit(s, k));
}

}  // namespace

SystemModel desk_benchmark() {
    SystemModel m;
    m.name = "desk";
    const auto da = CommitClass::da_only;
    const auto fast = CommitClass::fast_start;
    // DA-only: 600 + 1080 + 1100 + 270 = 3050 MW
    add_units(m, {"nuc", 2, 280, 300, 30, 24, 24, 20000, 300, 7, 9, true, da, 0});
    add_units(m, {"coal", 6, 80, 180, 60, 8, 6, 4000, 400, 18, 26, true, da, 0});
    add_units(m, {"ccgt", 10, 45, 110, 90, 4, 4, 2500, 350, 27, 38, false, da, 0});
    add_units(m, {"steam", 6, 15, 45, 30, 4, 4, 900, 180, 44, 58, false, da, 0});
    // fast start: 300 + 100 = 400 MW
    add_units(m, {"ct", 4, 20, 75, 300, 1, 1, 300, 150, 68, 90, false, fast, 30});
    add_units(m, {"recip", 2, 5, 50, 200, 1, 1, 60, 40, 95, 115, false, fast, 10});
    m.config.rt_reserve_requirement = 60.0;
    m.products = default_ir_products();
    m.ir_prices_defaulted = true;
    return m;
}

SystemModel asymmetric_benchmark() {
    SystemModel m;
    m.name = "asymmetric";
    const auto da = CommitClass::da_only;
    const auto fast = CommitClass::fast_start;
    // Large cheap DA-only units with wide operating ranges: flexible upward at
    // low cost once committed. Fast-start capacity is small and expensive.
    add_units(m, {"base", 2, 150, 300, 600, 4, 4, 3000, 200, 20, 24, true, da, 0});
    add_units(m, {"mid", 3, 40, 160, 300, 4, 4, 1500, 150, 30, 34, false, da, 0});
    add_units(m, {"peak", 3, 10, 60, 240, 1, 1, 400, 120, 150, 190, false, fast, 20});
    m.products = default_ir_products();
    m.ir_prices_defaulted = true;
    return m;
}

DayProfile benchmark_profile(const SystemModel& model, int day) {
    const auto& cfg = model.config;
    const int per_hour = cfg.intervals_per_hour();
    const int n = cfg.da_horizon_h * per_hour;
    const bool small = model.name == "asymmetric";
    const double load_scale = small ? 0.35 : 1.0;
    const double wind_cap = small ? 300.0 : 1300.0;
    const double solar_cap = small ? 40.0 : 100.0;

    std::mt19937_64 rng(0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(day));
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double season = std::cos(2.0 * std::numbers::pi * ((day % 364) - 200) / 364.0);  // peaks mid-summer
    const double wind_mean = 0.2 + 0.35 * u01(rng);
    const double wind_phase = 24.0 * u01(rng);
    const double cloud = 0.6 + 0.4 * u01(rng);

    DayProfile p;
    for (int k = 0; k < n; ++k) {
        const double h = (k + 0.5) / per_hour;
        const double diurnal = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * (h - 4.0) / 24.0);
        const double evening = std::exp(-0.5 * std::pow((h - 19.0) / 2.0, 2));
        p.load.push_back(load_scale * (1750.0 + 250.0 * season + 550.0 * diurnal + 150.0 * evening));
        const double w = wind_mean * (1.0 + 0.35 * std::cos(2.0 * std::numbers::pi * (h - wind_phase) / 24.0));
        p.wind.push_back(wind_cap * std::clamp(w, 0.02, 0.95));
        const double s = h > 6.5 && h < 19.5 ? std::sin(std::numbers::pi * (h - 6.5) / 13.0) : 0.0;
        p.solar.push_back(solar_cap * cloud * (0.75 + 0.25 * season) * std::max(0.0, s));
    }
    return p;
}

PercentileTable hourly_net_load_table(const ScenarioSet& set) {
    const auto hourly = set.resample_mean(60.0);
    const auto pcts = all_percentiles();
    return compute_percentiles(hourly.net_load(), hourly.probabilities, pcts, "net_load");
}

DayInputs synthetic_day(const SystemModel& model, int day, int scenarios, int oos, std::uint64_t seed) {
    if (scenarios < 1) throw InputError("synthetic day: need at least one forecast scenario");
    if (oos < 0) throw InputError("synthetic day: negative out-of-sample count");
    const auto prof = benchmark_profile(model, day);
    const bool small = model.name == "asymmetric";
    const int total = scenarios + 1 + oos;
    const std::uint64_t base = seed * 1000003ULL + static_cast<std::uint64_t>(day) * 7919ULL;

    NoiseConfig load;
    load.constituent = Constituent::load;
    load.scenarios = total;
    load.relative_std = 0.025;
    load.ar1 = 0.97;
    load.resolution_min = model.config.rt_resolution_min;
    load.floor = 0.0;

    NoiseConfig wind = load;
    wind.constituent = Constituent::wind;
    wind.relative_std = 0.0;
    wind.std_mw = small ? 30.0 : 110.0;
    wind.cap = small ? 300.0 : 1300.0;

    NoiseConfig solar = load;
    solar.constituent = Constituent::solar;
    solar.relative_std = 0.12;

    auto set = merge_scenario_sets({generate_synthetic_scenarios(prof.load, load, base + 1),
                                    generate_synthetic_scenarios(prof.wind, wind, base + 2),
                                    generate_synthetic_scenarios(prof.solar, solar, base + 3)});
    const Grid<double> nl = set.net_load();
    const std::size_t K = nl.cols();

    ScenarioSet forecast = set;
    for (auto& [c, g] : forecast.values) {
        Grid<double> head(static_cast<std::size_t>(scenarios), K);
        for (int s = 0; s < scenarios; ++s) {
            for (std::size_t k = 0; k < K; ++k) head(s, k) = g(s, k);
        }
        g = std::move(head);
    }
    forecast.probabilities = uniform_probabilities(static_cast<std::size_t>(scenarios));

    DayInputs d;
    d.net_load = hourly_net_load_table(forecast);
    auto row = nl.row(static_cast<std::size_t>(scenarios));
    d.actual.assign(row.begin(), row.end());
    d.out_of_sample = Grid<double>(static_cast<std::size_t>(oos), K);
    for (int s = 0; s < oos; ++s) {
        for (std::size_t k = 0; k < K; ++k) d.out_of_sample(s, k) = nl(scenarios + 1 + s, k);
    }
    return d;
}

}  // namespace flexmarket
