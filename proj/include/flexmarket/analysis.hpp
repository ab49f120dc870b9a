#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flexmarket/da_market.hpp"
#include "flexmarket/rt_market.hpp"
#include "flexmarket/scenario.hpp"

namespace flexmarket {

enum class ErrorSign { positive, negative };

[[nodiscard]] std::string_view to_string(ErrorSign s);

struct CostCurveFit {
    ErrorSign sign = ErrorSign::positive;
    std::size_t n = 0;
    double slope = 0.0;      // $ per MW of error
    double intercept = 0.0;  // $
    double r2 = 0.0;
};

struct CostCurves {
    CostCurveFit positive, negative;
};

/// OLS of per-interval cost difference on forecast error, one fit per error
/// sign. Zero-error intervals belong to neither fit.
[[nodiscard]] CostCurves rt_cost_curves(std::span<const double> error_mw, std::span<const double> cost_diff);

/// Same, using an RT rollout's per-interval error and incremental cost.
[[nodiscard]] CostCurves rt_cost_curves(const RtResult& rt);

struct FlexDemand {
    // per hour; nullopt where the [5,95] width is zero
    std::vector<std::optional<double>> total, up, down;
};

/// Up and down flexibility per hour normalized by the [5,95] net-load
/// prediction interval width. Under FO this is the buyers' covered tiers
/// (bought or self-hedged); otherwise the reserve awards.
[[nodiscard]] FlexDemand flexibility_demand_metric(const DaSolution& sol, const PercentileTable& net_load);

struct SchedulePercentile {
    std::vector<double> percentile;  // per hour, within [1,99]
    std::vector<bool> clamped;
};

/// Percentile of each hour's scheduled net load within the forecast table.
[[nodiscard]] SchedulePercentile da_schedule_percentile(const DaSolution& sol, const PercentileTable& net_load);
[[nodiscard]] SchedulePercentile schedule_percentile(std::span<const double> schedule, const PercentileTable& net_load);

/// Linear interpolation of the table at hour t; pct outside the table is
/// clamped to its ends.
[[nodiscard]] double interpolate_level(const PercentileTable& table, std::size_t t, double pct);

struct WeekCost {
    std::string week;
    std::string scenario_key;  // identifies the scenario set the week was run on
    double da_cost = 0.0;
    double rtd_cost = 0.0;
    double rtd_scarcity = 0.0;
    [[nodiscard]] double total() const { return da_cost + rtd_cost + rtd_scarcity; }
};

struct CostReport {
    std::string design;
    std::string statistic = "mean";  // how multi-scenario week costs were aggregated
    std::vector<WeekCost> weeks;

    /// Weighted sum of weeks; empty weights count each week once.
    [[nodiscard]] WeekCost annual(std::span<const double> weights = {}) const;
};

/// Week cost from a DA solution and one RT rollout.
[[nodiscard]] WeekCost week_cost(std::string week, std::string scenario_key, const DaSolution& da, const RtResult& rt);

/// Week cost as the mean over several rollouts of the same DA solution.
[[nodiscard]] WeekCost mean_week_cost(std::string week, std::string scenario_key, const DaSolution& da,
                                      std::span<const RtResult> rollouts);

struct WeeklyDiffRow {
    std::string week;
    double ir_total = 0.0;
    double fo_total = 0.0;
    double diff = 0.0;  // IR - FO
    double band = 0.0;  // mip_gap times the mean DA cost of the two designs
    [[nodiscard]] bool outside_band() const { return diff > band || diff < -band; }
};

struct WeeklyDiff {
    std::vector<WeeklyDiffRow> rows;
    WeekCost annual_ir, annual_fo;
    double annual_diff = 0.0;
};

[[nodiscard]] WeeklyDiff weekly_cost_diff(const CostReport& ir, const CostReport& fo, std::span<const double> weights,
                                          double mip_gap);

/// Per hour: DA-only units committed under FO minus under IR.
[[nodiscard]] std::vector<int> committed_unit_diff(const std::vector<Generator>& units, const DaSolution& da_fo,
                                                   const DaSolution& da_ir);

void write_cost_curves_csv(const std::vector<std::pair<std::string, CostCurves>>& by_design,
                           const std::filesystem::path& path);
void write_cost_report_csv(const std::vector<CostReport>& reports, std::span<const double> weights,
                           const std::filesystem::path& path);
void write_weekly_diff_csv(const WeeklyDiff& diff, const std::filesystem::path& path);
void write_hourly_metrics_csv(const FlexDemand& demand, const SchedulePercentile& pct, std::span<const int> committed_diff,
                              const std::filesystem::path& path);

}  // namespace flexmarket
