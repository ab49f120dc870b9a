#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "flexmarket/da_market.hpp"
#include "flexmarket/grid.hpp"
#include "flexmarket/lp/solver.hpp"
#include "flexmarket/system_model.hpp"

namespace flexmarket {

/// Everything RT needs from the DA stage, frozen.
struct RtSystem {
    std::vector<Generator> units;
    std::vector<double> strike_up, strike_down;  // RT offer prices for deviations, per unit
    Grid<double> p_da, u_da;                     // [unit][hour]
    Grid<double> award_up, award_down;           // [unit][hour], FO or IR awards
    std::vector<double> scheduled_net_load;      // [hour]
    std::vector<double> da_shortfall, da_surplus;  // [hour]
    MarketConfig config;

    [[nodiscard]] std::size_t hours() const { return p_da.cols(); }
    [[nodiscard]] std::size_t intervals() const { return hours() * static_cast<std::size_t>(config.intervals_per_hour()); }
    [[nodiscard]] std::size_t hour_of(std::size_t k) const { return k / static_cast<std::size_t>(config.intervals_per_hour()); }
    /// Fast-start units whose lead time fits the RTC lead.
    [[nodiscard]] bool recommittable(std::size_t i) const;
    /// DA start-up of unit i falling in interval k (first interval of an hour).
    [[nodiscard]] bool da_start(std::size_t i, std::size_t k) const;
};

/// Offers default to strikes derived from each unit's offer curve; entries of
/// `offers` override by generator id.
[[nodiscard]] RtSystem make_rt_system(const DaProblem& p, const DaSolution& sol,
                                      const std::vector<FlexSellerParams>& offers = {});

enum class RtMode {
    full,        // RTC re-commits fast units, RTD re-dispatches every online unit
    restricted,  // DA commitments, deviations limited to awards, no reserve or ramp
};

struct RtState {
    Grid<double> u;               // [unit][interval] commitment in force
    std::size_t frozen_until = 0; // intervals before this index are decided
    std::vector<double> prev_p;   // dispatch in the last solved interval
    std::size_t next_interval = 0;
    std::vector<bool> rtc_scarcity;  // [hour] RTC needed slack in its frozen hour
};

[[nodiscard]] RtState init_rt_state(const RtSystem& sys);

/// Hour-ahead commitment: MILP over `rtc_horizon_h` hours starting at
/// `hour`, fast units re-committable, DA awards released. Freezes the
/// commitments of the first hour.
void run_rtc(const RtSystem& sys, RtState& state, std::span<const double> actual_nl, std::size_t hour,
             const lp::MipSolver* solver = nullptr);

struct RtInterval {
    std::vector<double> p;
    std::vector<double> u;
    double lambda = 0.0;        // $/MWh
    double shortfall = 0.0;     // MW
    double surplus = 0.0;
    double reserve_short = 0.0;
    double incremental_cost = 0.0;  // $ relative to the DA schedule
    double scarcity_cost = 0.0;     // $
    double production_cost = 0.0;   // $ at RT offers, no-load and start-ups
};

/// Single-interval economic dispatch with commitments taken from `state`.
[[nodiscard]] RtInterval run_rtd(const RtSystem& sys, RtState& state, std::span<const double> actual_nl,
                                 std::size_t interval, RtMode mode = RtMode::full, const lp::MipSolver* solver = nullptr);

struct RtResult {
    double interval_h = 0.25;
    Grid<double> p, u;  // [unit][interval]
    std::vector<double> lambda, net_load, error, shortfall, surplus, reserve_short;
    std::vector<double> incremental_cost, scarcity_cost, production_cost;  // [interval]
    std::vector<bool> rtc_scarcity;  // [hour]

    [[nodiscard]] double total_incremental() const;
    [[nodiscard]] double total_scarcity() const;
};

/// Sequential RTC/RTD over the day for one realization of net load at RT resolution.
[[nodiscard]] RtResult rollout(const RtSystem& sys, std::span<const double> actual_nl, RtMode mode = RtMode::full,
                               const lp::MipSolver* solver = nullptr);

struct SimpleRtResult {
    Grid<double> p_up, p_down, u_rt, u_start;  // [unit][interval]
    std::vector<double> eps_up, eps_down, error;  // [interval]
    std::vector<double> interval_cost;            // [interval], start-ups counted where they occur
    double total_cost = 0.0;
};

/// Out-of-sample evaluator: per scenario, award holders move within their
/// awards and may be started if offline; the rest is penalized slack.
/// `scenarios` holds realized net load [scenario][interval].
[[nodiscard]] std::vector<SimpleRtResult> run_simple_rt(const RtSystem& sys, const Grid<double>& scenarios,
                                                        const lp::MipSolver* solver = nullptr);

void write_rt_dispatch_csv(const RtSystem& sys, std::span<const RtResult> results, const std::filesystem::path& path);
void write_rt_system_csv(std::span<const RtResult> results, const std::filesystem::path& path);
void write_simple_rt_csv(const RtSystem& sys, std::span<const SimpleRtResult> results, const std::filesystem::path& path);

}  // namespace flexmarket
