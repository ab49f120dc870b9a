#pragma once

#include <cstdint>

#include "flexmarket/scenario.hpp"
#include "flexmarket/system_model.hpp"

namespace flexmarket {

/// Desk-scale thermal fleet: 24 DA-only units (3,050 MW) and 6 fast-start
/// units (400 MW), with 1,300 MW wind and 100 MW solar installed.
[[nodiscard]] SystemModel desk_benchmark();

/// Small system where upward flexibility is cheap on committed DA-only
/// units and expensive on fast-start units.
[[nodiscard]] SystemModel asymmetric_benchmark();

struct DayProfile {
    std::vector<double> load, wind, solar;  // MW at RT resolution
};

/// Load, wind and solar shapes for one day. `day` shifts season and weather.
[[nodiscard]] DayProfile benchmark_profile(const SystemModel& model, int day);

struct DayInputs {
    PercentileTable net_load;          // hourly, percentiles 1..99
    std::vector<double> actual;        // net load at RT resolution
    Grid<double> out_of_sample;        // [scenario][interval] net load at RT resolution
};

/// Forecast ensemble (`scenarios` members), one actual and `oos` extra
/// realizations drawn from the same error process. Deterministic in `seed`.
[[nodiscard]] DayInputs synthetic_day(const SystemModel& model, int day, int scenarios, int oos, std::uint64_t seed);

/// Hourly percentile table of an ensemble given at RT resolution.
[[nodiscard]] PercentileTable hourly_net_load_table(const ScenarioSet& set);

}  // namespace flexmarket
