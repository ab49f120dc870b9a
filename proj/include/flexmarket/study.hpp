#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "flexmarket/analysis.hpp"
#include "flexmarket/benchmark.hpp"
#include "flexmarket/da_market.hpp"
#include "flexmarket/rt_market.hpp"
#include "flexmarket/settlement.hpp"

namespace flexmarket {

struct WeekSpec {
    std::string name;
    double weight = 1.0;              // number of weeks the week stands for
    int first_day = 0;                // synthetic day index of its first day
    std::filesystem::path scenarios;  // optional: ensemble at RT resolution
    std::filesystem::path actuals;    // optional: one-scenario realization
};

struct StudyConfig {
    std::filesystem::path system_file;  // empty: built-in benchmark
    std::string benchmark = "desk";     // desk | asymmetric
    std::vector<DaDesign> designs{DaDesign::fo, DaDesign::ir};
    std::vector<WeekSpec> weeks;
    int days_per_week = 7;
    int scenarios = 200;                // forecast ensemble size for synthetic days
    int oos_scenarios = 0;
    bool rollout = true;                // full RTC/RTD rollout on the actual
    std::optional<std::uint64_t> seed;
    int workers = 1;
    std::filesystem::path output_dir;
    std::optional<double> time_limit_s;
    std::optional<double> mip_gap;
};

/// Reads a JSON study file; relative paths resolve against its directory.
[[nodiscard]] StudyConfig load_study_config(const std::filesystem::path& path);
[[nodiscard]] StudyConfig parse_study_config(const std::string& text, const std::filesystem::path& base_dir = {});

/// System of a study: the file when given, else the named benchmark.
[[nodiscard]] SystemModel study_system(const StudyConfig& cfg);

/// Everything produced for one design on one day.
struct DayResult {
    DaDesign design = DaDesign::fo;
    std::string week;
    int day = 0;                       // global day index
    DaSolution da;
    DaPrices prices;
    PercentileTable net_load;
    std::optional<RtSystem> rt_system;
    std::optional<RtResult> rt;
    CashflowLedger ledger;
    std::vector<ExerciseRecord> exercises;
    IrSettlementSummary ir;
    std::vector<SimpleRtResult> oos;
    double seconds = 0.0;
};

struct DayTask {
    DaDesign design;
    std::string week;
    int day = 0;
    DayInputs inputs;
};

/// DA clear, RT rollout, settlement and out-of-sample sweep for one day.
[[nodiscard]] DayResult run_day(const SystemModel& model, const DayTask& task, bool rollout,
                                const lp::MipSolver* solver = nullptr);

/// Day inputs for every week and day of the study, in key order.
[[nodiscard]] std::vector<DayTask> plan_study(const StudyConfig& cfg, const SystemModel& model);

/// Runs `tasks` on at most `workers` threads. Results come back in task
/// order whatever the completion order. The first failure is rethrown after
/// the pool drains.
[[nodiscard]] std::vector<DayResult> run_tasks(const SystemModel& model, const std::vector<DayTask>& tasks,
                                               bool rollout, int workers);

struct ManifestEntry {
    std::string file;
    std::uintmax_t bytes = 0;
    std::string checksum;  // FNV-1a 64, hex
};

[[nodiscard]] std::string fnv1a64_hex(const std::filesystem::path& file);
[[nodiscard]] std::vector<ManifestEntry> build_manifest(const std::filesystem::path& dir);
void write_manifest(const std::filesystem::path& dir);

/// Writes per-design reports, comparisons when both designs ran, and the
/// manifest. Returns the number of day results written.
std::size_t write_study_outputs(const StudyConfig& cfg, const SystemModel& model, const std::vector<DayResult>& results);

struct StudyOutcome {
    std::vector<DayResult> results;
    std::filesystem::path output_dir;
};

/// Full pipeline. On failure writes failure.log into the output directory,
/// keeps whatever was already written and rethrows.
StudyOutcome run_study(const StudyConfig& cfg);

/// Compares two artifact directories (B minus A) and writes the deltas into `out`.
void compare_studies(const std::filesystem::path& a, const std::filesystem::path& b, const std::filesystem::path& out);

/// Per-design cost report of day results grouped by week.
[[nodiscard]] CostReport cost_report(DaDesign design, const std::vector<DayResult>& results, bool use_oos);

}  // namespace flexmarket
