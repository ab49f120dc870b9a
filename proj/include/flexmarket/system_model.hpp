#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flexmarket/grid.hpp"

namespace flexmarket {

enum class Direction { up, down };
enum class CommitClass { da_only, fast_start };
enum class Constituent { load, wind, solar, aggregate };
enum class FoAccountMode { single_aggregate, per_constituent };

[[nodiscard]] std::string_view to_string(Direction d);
[[nodiscard]] std::string_view to_string(CommitClass c);
[[nodiscard]] std::string_view to_string(Constituent c);
[[nodiscard]] std::string_view to_string(FoAccountMode m);

/// One block of a piecewise-linear convex offer curve.
struct CostSegment {
    double width_mw = 0.0;
    double marginal_cost = 0.0;  // $/MWh
};

struct Generator {
    std::string id;
    double p_min = 0.0;        // MW
    double p_max = 0.0;        // MW
    double ramp_rate = 0.0;    // MW/h
    int min_up_time = 1;       // h
    int min_down_time = 1;     // h
    double startup_cost = 0.0; // $
    double no_load_cost = 0.0; // $/h
    std::vector<CostSegment> cost_curve;
    CommitClass commit_class = CommitClass::da_only;
    double start_lead_time = 0.0;  // minutes, fast_start only
    bool initial_on = false;
    double initial_output = 0.0;   // MW, used when initial_on

    [[nodiscard]] bool is_fast_start() const { return commit_class == CommitClass::fast_start; }

    /// Upward capability of an offline fast-start unit within one hour of
    /// its start: minimum output plus one hour of ramping, capped at p_max.
    [[nodiscard]] double offline_up_capability() const;

    /// Largest change allowed in the interval of a start or shutdown.
    [[nodiscard]] double startup_ramp() const;

    /// Cost of producing `mw` on the offer curve (no-load excluded).
    [[nodiscard]] double energy_cost(double mw) const;
};

struct FlexSellerParams {
    std::string generator_id;
    double strike_up = 0.0;     // $/MWh
    double strike_down = 0.0;   // $/MWh
    double capacity_bid = 0.0;  // $/MW
};

struct UncertainAccount {
    std::string id;
    Constituent constituent = Constituent::aggregate;
    double da_cost = 0.0;  // $/MWh
    // Self-hedging costs; unset means "derive from tiers and scarcity price"
    // for up and 0 for down.
    std::optional<double> self_hedge_cost_up;
    std::optional<double> self_hedge_cost_down;
    // P_{i,s,t}: net injection at each discrete level s (ascending) and hour t.
    // Negative for load. Empty until the scenario engine fills it.
    Grid<double> levels;
    // Deterministic DA forecast of the net injection (median), per hour.
    std::vector<double> da_forecast;
};

/// A stepped demand curve block: requirement equal to the width of the
/// net-load prediction interval [lower_pct, upper_pct], valued at `price`.
struct DemandStep {
    double lower_pct = 0.0;
    double upper_pct = 0.0;
    double price = 0.0;  // $/MW
};

struct ReserveProductDef {
    std::string name;
    Direction direction = Direction::up;
    double response_time_min = 60.0;
    std::vector<DemandStep> demand_steps;
    int cascade_rank = 0;           // higher rank may fill lower-rank requirements
    std::optional<double> beta;     // ramp-reservation factor; default response/60
    double capacity_bid = 0.0;      // $/MW offered by every supplier

    [[nodiscard]] double effective_beta() const { return beta ? *beta : response_time_min / 60.0; }
};

struct MarketConfig {
    double da_resolution_h = 1.0;
    int da_horizon_h = 24;
    double rtc_lead_h = 1.0;
    int rtc_horizon_h = 3;
    double rt_resolution_min = 15.0;
    std::vector<double> tier_percentiles{5, 10, 20, 35, 50, 65, 80, 90, 95};
    double fo_penalty_m = 2.8;            // $/MW
    double mip_gap = 0.005;
    double time_limit_s = 600.0;
    unsigned solver_seed = 0;
    bool da_warm_start = true;            // seed design solves with the plain UC commitment
    double rt_reserve_requirement = 0.0;  // MW
    double rt_spin_scarcity = 4500.0;     // $/MWh
    double simple_penalty_up = 9000.0;    // lambda-bar, $/MWh
    double simple_penalty_down = -250.0;  // lambda-underbar, $/MWh (negative)
    double energy_shortfall_penalty = 9000.0;
    double energy_surplus_penalty = 250.0;
    FoAccountMode fo_account_mode = FoAccountMode::single_aggregate;

    [[nodiscard]] int intervals_per_hour() const { return static_cast<int>(60.0 / rt_resolution_min + 0.5); }
    [[nodiscard]] double rt_interval_h() const { return rt_resolution_min / 60.0; }
};

struct SystemModel {
    std::string name;
    std::vector<Generator> generators;
    std::vector<UncertainAccount> accounts;
    std::vector<ReserveProductDef> products;
    std::vector<FlexSellerParams> seller_overrides;  // replaces derived strikes by generator id
    MarketConfig config;
    // True when the IR demand-curve prices were not supplied by the user and
    // come from the library defaults (reported in study outputs).
    bool ir_prices_defaulted = false;

    [[nodiscard]] const Generator* find_generator(std::string_view id) const;
    [[nodiscard]] const UncertainAccount* find_account(std::string_view id) const;
};

/// Strike prices from the offer curve: highest marginal cost for up,
/// lowest for down. Throws InputError on an empty curve.
[[nodiscard]] FlexSellerParams derive_strike_prices(const Generator& gen);

/// Strikes for every generator, with `seller_overrides` applied.
[[nodiscard]] std::vector<FlexSellerParams> seller_params(const SystemModel& model);

struct Violation {
    std::string location;  // e.g. "generator g3", "account wind[s=2,t=5]"
    std::string message;
};

[[nodiscard]] std::vector<Violation> validate_system(const SystemModel& model);

/// Imbalance-reserve products with the library's default demand curves:
/// up [50,65] $1,200, [65,80] $1,000, [80,90] $800, [90,95] $600; down
/// mirrors the prices on [35,50], [20,35], [10,20], [5,10].
[[nodiscard]] std::vector<ReserveProductDef> default_ir_products();

}  // namespace flexmarket
