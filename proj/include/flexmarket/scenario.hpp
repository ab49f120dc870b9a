#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flexmarket/grid.hpp"
#include "flexmarket/system_model.hpp"

namespace flexmarket {

/// Ensembles of constituent trajectories on a shared time axis.
/// Each grid is [scenario][interval] in MW (load positive, renewables positive).
struct ScenarioSet {
    double resolution_min = 60.0;
    std::int64_t start_minute = 0;  // minutes since 1970-01-01T00:00 (UTC, no DST)
    std::vector<double> probabilities;
    std::map<Constituent, Grid<double>> values;

    [[nodiscard]] std::size_t num_scenarios() const;
    [[nodiscard]] std::size_t num_intervals() const;
    [[nodiscard]] bool has(Constituent c) const { return values.count(c) > 0; }
    [[nodiscard]] const Grid<double>& at(Constituent c) const;

    /// Throws InputError when probabilities or shapes are inconsistent.
    void validate() const;

    /// load - wind - solar per scenario and interval; missing constituents count as 0.
    [[nodiscard]] Grid<double> net_load() const;

    /// Intervals [first, first + count) of every constituent.
    [[nodiscard]] ScenarioSet slice(std::size_t first, std::size_t count) const;

    /// Averages consecutive intervals into coarser ones (e.g. 15 min to 1 h).
    [[nodiscard]] ScenarioSet resample_mean(double new_resolution_min) const;
};

/// Uniform probabilities over `n` scenarios.
[[nodiscard]] std::vector<double> uniform_probabilities(std::size_t n);

struct PercentileTable {
    std::string quantity;
    std::vector<double> percentiles;  // ascending, in (0,100)
    Grid<double> values;              // [percentile][interval]

    [[nodiscard]] std::size_t num_intervals() const { return values.cols(); }
    [[nodiscard]] std::optional<std::size_t> index_of(double pct) const;
    /// Value at a tabulated percentile; throws InputError when absent.
    [[nodiscard]] double value(double pct, std::size_t t) const;
    [[nodiscard]] std::vector<double> series(double pct) const;
};

/// Percentiles 1..99.
[[nodiscard]] std::vector<double> all_percentiles();

/// Nearest-rank empirical quantile of `values` under `probs` (uniform when empty):
/// the smallest value whose cumulative probability reaches pct/100.
[[nodiscard]] double nearest_rank_quantile(std::span<const double> values, std::span<const double> probs, double pct);

[[nodiscard]] PercentileTable compute_percentiles(const Grid<double>& ensemble, std::span<const double> probs,
                                                  std::span<const double> pcts, std::string quantity);

[[nodiscard]] PercentileTable compute_constituent_percentiles(const ScenarioSet& set, Constituent c,
                                                              std::span<const double> pcts);

/// NL(p) = load(p) - wind(100-p) - solar(100-p). Every requested percentile of
/// `load` needs its complement in `wind` and `solar`.
[[nodiscard]] PercentileTable compute_net_load_percentiles(const PercentileTable& load, const PercentileTable& wind,
                                                           const PercentileTable& solar);

/// Discrete levels and exercise probabilities for one account, in the
/// account's net-injection space (levels ascending in generation).
struct TierStructure {
    std::string account_id;
    std::vector<double> percentiles;  // generation-space percentile of each level
    Grid<double> levels;              // [level][hour]
    std::vector<double> prob_up;      // per tier, P(realized <= lower level)
    std::vector<double> prob_down;    // per tier, P(realized >= upper level)
    std::vector<double> reference;    // median injection per hour

    [[nodiscard]] std::size_t num_levels() const { return levels.rows(); }
    [[nodiscard]] std::size_t num_tiers() const { return levels.rows() > 0 ? levels.rows() - 1 : 0; }
    [[nodiscard]] std::size_t num_hours() const { return levels.cols(); }
    [[nodiscard]] double width(std::size_t r, std::size_t t) const { return levels(r + 1, t) - levels(r, t); }
};

/// Tiers for an account whose injection is `sign * quantity`. With sign -1
/// (load, net load) the generation-space percentile q reads the quantity at
/// 100 - q. The table must contain those percentiles and the median.
[[nodiscard]] TierStructure build_account_tiers(const PercentileTable& quantity, double sign,
                                                std::span<const double> tier_percentiles, std::string account_id);

/// Tiers of the single aggregate account (injection = -net load).
[[nodiscard]] TierStructure build_tiers(const PercentileTable& net_load, const MarketConfig& cfg);

/// Probability of the rarest up tier times the RT spinning scarcity price.
[[nodiscard]] double default_self_hedge_cost_up(const TierStructure& tiers, const MarketConfig& cfg);

// ---------------------------------------------------------------------------
// Characteristic weeks

struct WeekClusterResult {
    std::vector<int> assignment;  // week -> cluster
    std::vector<int> medoids;     // cluster -> week
    std::vector<int> weights;     // cluster -> member count
    double objective = 0.0;       // total distance of members to their medoid
};

/// {mean of DA mean net load, mean of DA std, mean and std of the
/// standardized RT deviation (actual - DA mean) / DA std}.
[[nodiscard]] std::vector<double> week_features(std::span<const double> da_mean, std::span<const double> da_std,
                                                std::span<const double> rt_actual);

/// k-medoids on z-scored features (Euclidean), deterministic.
[[nodiscard]] WeekClusterResult cluster_weeks(const std::vector<std::vector<double>>& features, int k);

// ---------------------------------------------------------------------------
// Forecast diagnostics

struct ForecastDiagnostics {
    std::vector<double> interval_rank;        // mid-rank of the actual in the ensemble, 0..100
    std::vector<double> nominal_percentiles;  // 1..99
    std::vector<double> observed_rank;        // quantile of interval_rank at each nominal percentile
    std::vector<double> pi_width_pct;         // [5,95] width as % of median, per interval
    std::vector<double> error_pct;            // (actual - median) / median * 100, per interval
    double mean_error_pct = 0.0;
    double min_error_pct = 0.0;
    double max_error_pct = 0.0;
};

[[nodiscard]] ForecastDiagnostics forecast_diagnostics(const Grid<double>& ensemble, std::span<const double> actuals);

// ---------------------------------------------------------------------------
// Synthetic ensembles

struct NoiseConfig {
    Constituent constituent = Constituent::load;
    int scenarios = 100;
    double std_mw = 0.0;         // additive part of the error std
    double relative_std = 0.0;   // error std proportional to the profile
    double ar1 = 0.0;            // lag-one autocorrelation of the error
    std::optional<double> floor; // clamp below (e.g. 0 for renewables)
    std::optional<double> cap;   // clamp above (e.g. installed capacity)
    double resolution_min = 60.0;
};

/// profile + stationary AR(1) noise; deterministic for a fixed seed.
[[nodiscard]] ScenarioSet generate_synthetic_scenarios(std::span<const double> profile, const NoiseConfig& noise,
                                                       std::uint64_t seed);

/// Combines constituent sets that share time axis and scenario count.
[[nodiscard]] ScenarioSet merge_scenario_sets(const std::vector<ScenarioSet>& parts);

// ---------------------------------------------------------------------------
// CSV: constituent,scenario,timestamp,mw

void write_scenarios_csv(const ScenarioSet& set, const std::filesystem::path& path);
[[nodiscard]] ScenarioSet read_scenarios_csv(const std::filesystem::path& path);

[[nodiscard]] std::string format_timestamp(std::int64_t minute);
[[nodiscard]] std::int64_t parse_timestamp(const std::string& text);

}  // namespace flexmarket
