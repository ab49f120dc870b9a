#include <cmath>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "flexmarket/csv.hpp"
#include "flexmarket/errors.hpp"
#include "flexmarket/study.hpp"

using namespace flexmarket;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto d = fs::temp_directory_path() / "flexmarket_unit" / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void put(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

const char* kTwoUnit = R"({
  "name": "two-unit",
  "config": { "rt_reserve_requirement": 10 },
  "generators": [
    { "id": "base", "p_min": 50, "p_max": 200, "ramp_rate": 120, "startup_cost": 2000, "no_load_cost": 150,
      "cost_curve": [[100, 20], [100, 26]], "initial_on": true, "initial_output": 50 },
    { "id": "peaker", "p_min": 10, "p_max": 60, "ramp_rate": 240, "commit_class": "fast_start",
      "start_lead_time": 20, "startup_cost": 300, "no_load_cost": 100, "cost_curve": [[60, 150]] }
  ]
})";

// Two-unit system with file-based scenarios for `days` days.
fs::path file_study(const fs::path& dir, int days) {
    put(dir / "system.json", kTwoUnit);
    std::vector<double> load;
    for (int k = 0; k < 96 * days; ++k) load.push_back(150 + 30 * std::sin(k * 3.14159265 / 48.0));
    NoiseConfig n;
    n.scenarios = 40;
    n.relative_std = 0.05;
    n.ar1 = 0.9;
    n.resolution_min = 15;
    write_scenarios_csv(generate_synthetic_scenarios(load, n, 5), dir / "ensemble.csv");
    n.scenarios = 1;
    write_scenarios_csv(generate_synthetic_scenarios(load, n, 6), dir / "actual.csv");
    put(dir / "study.json", R"({"system": "system.json", "designs": "both", "days_per_week": )" + std::to_string(days) +
                                R"(, "oos_scenarios": 4, "output_dir": "out",
        "weeks": [{"name": "w1", "scenarios": "ensemble.csv", "actuals": "actual.csv"}]})");
    return dir / "study.json";
}

}  // namespace

TEST(StudyConfig, ParsesAndResolvesPaths) {
    const auto d = scratch("cfg");
    put(d / "sys.json", kTwoUnit);
    put(d / "s.json", R"({"system": "sys.json", "designs": "ir", "seed": 3, "workers": 2, "output_dir": "o",
                          "weeks": [{"first_day": 4, "weight": 2.5}, {"name": "b"}]})");
    const auto c = load_study_config(d / "s.json");
    EXPECT_EQ(c.system_file, d / "sys.json");
    EXPECT_EQ(c.output_dir, d / "o");
    ASSERT_EQ(c.designs.size(), 1u);
    EXPECT_EQ(c.designs[0], DaDesign::ir);
    ASSERT_EQ(c.weeks.size(), 2u);
    EXPECT_EQ(c.weeks[0].name, "week01");
    EXPECT_EQ(c.weeks[0].first_day, 4);
    EXPECT_EQ(c.weeks[0].weight, 2.5);
    EXPECT_EQ(c.weeks[1].name, "b");
    EXPECT_EQ(*c.seed, 3u);
    EXPECT_EQ(c.workers, 2);
}

TEST(StudyConfig, RejectsBadInput) {
    EXPECT_THROW((void)parse_study_config(R"({"wekks": []})"), InputError);
    EXPECT_THROW((void)parse_study_config(R"({"designs": "fo+ir"})"), InputError);
    EXPECT_THROW((void)parse_study_config("not json"), InputError);
    // synthetic week without a seed
    EXPECT_THROW((void)parse_study_config(R"({"weeks": [{"name": "a"}]})"), InputError);
    EXPECT_THROW((void)parse_study_config(R"({"seed": 1, "weeks": [{"name": "a"}, {"name": "a"}]})"), InputError);
    EXPECT_THROW((void)parse_study_config(R"({"weeks": [{"scenarios": "/nonexistent/x.csv", "actuals": "/nonexistent/y.csv"}]})"),
                 InputError);
    EXPECT_THROW((void)parse_study_config(R"({"seed": 1, "weeks": [{"scenarios": "x.csv"}]})"), InputError);
    EXPECT_THROW((void)parse_study_config(R"({"system": "/nonexistent/system.json"})"), InputError);
    EXPECT_THROW((void)parse_study_config(R"({"workers": 0})"), InputError);
}

TEST(Study, EmptyWeekListWritesEmptyManifest) {
    StudyConfig c;
    c.output_dir = scratch("empty");
    const auto r = run_study(c);
    EXPECT_TRUE(r.results.empty());
    const auto m = read_csv(c.output_dir / "manifest.csv");
    EXPECT_TRUE(m.rows.empty());
    EXPECT_EQ(m.header, (std::vector<std::string>{"file", "bytes", "fnv1a64"}));
    EXPECT_FALSE(fs::exists(c.output_dir / "failure.log"));
}

TEST(Manifest, FnvTestVectors) {
    const auto d = scratch("fnv");
    put(d / "empty", "");
    put(d / "a", "a");
    put(d / "foobar", "foobar");
    EXPECT_EQ(fnv1a64_hex(d / "empty"), "cbf29ce484222325");
    EXPECT_EQ(fnv1a64_hex(d / "a"), "af63dc4c8601ec8c");
    EXPECT_EQ(fnv1a64_hex(d / "foobar"), "85944171f73967e8");
    put(d / "run.log", "timing");
    fs::create_directories(d / "sub");
    put(d / "sub" / "x.csv", "1\n");
    const auto m = build_manifest(d);
    ASSERT_EQ(m.size(), 4u);
    EXPECT_EQ(m[0].file, "a");
    EXPECT_EQ(m[3].file, "sub/x.csv");
    EXPECT_EQ(m[3].bytes, 2u);
}

TEST(Study, PlanOrdersByWeekDayDesign) {
    StudyConfig c;
    c.benchmark = "asymmetric";
    c.seed = 1;
    c.days_per_week = 2;
    c.scenarios = 20;
    c.weeks = {{"a", 1, 0, {}, {}}, {"b", 1, 50, {}, {}}};
    const auto model = study_system(c);
    const auto tasks = plan_study(c, model);
    ASSERT_EQ(tasks.size(), 8u);
    EXPECT_EQ(tasks[0].week, "a");
    EXPECT_EQ(tasks[0].design, DaDesign::fo);
    EXPECT_EQ(tasks[1].design, DaDesign::ir);
    EXPECT_EQ(tasks[2].day, 1);
    EXPECT_EQ(tasks[4].week, "b");
    EXPECT_EQ(tasks[4].day, 50);
    // both designs see the same inputs
    EXPECT_EQ(tasks[0].inputs.actual, tasks[1].inputs.actual);
}

TEST(Study, FileScenariosBothDesignsAreDeterministic) {
    const auto d = scratch("files");
    auto cfg = load_study_config(file_study(d, 2));
    const auto r = run_study(cfg);
    ASSERT_EQ(r.results.size(), 4u);
    for (const char* f : {"fo/ledger.csv", "fo/exercises.csv", "fo/cashflows.csv", "ir/days.csv", "ir/costs.csv",
                          "fo/oos_costs.csv", "comparison/weekly_cost_diff.csv", "comparison/committed_unit_diff.csv",
                          "study.json", "manifest.csv"}) {
        EXPECT_TRUE(fs::exists(cfg.output_dir / f)) << f;
    }
    CashflowLedger all;
    for (const auto& x : r.results) {
        EXPECT_EQ(x.oos.size(), 4u);
        all.append(x.ledger);
        if (x.design == DaDesign::ir) EXPECT_LE(x.ir.rt_recovery, x.ir.da_cost + 1e-6);
    }
    const auto iso = iso_position(all);
    EXPECT_NEAR(iso.fo_net(), 0.0, 1e-6);
    const auto manifest = slurp(cfg.output_dir / "manifest.csv");
    EXPECT_EQ(manifest.find("run.log"), std::string::npos);

    // same inputs, more workers: identical artifacts
    cfg.output_dir = d / "out2";
    cfg.workers = 3;
    (void)run_study(cfg);
    EXPECT_EQ(slurp(cfg.output_dir / "manifest.csv"), manifest);
}

TEST(Study, FailureLeavesLog) {
    const auto d = scratch("fail");
    auto cfg = load_study_config(file_study(d, 1));
    cfg.days_per_week = 3;  // files only cover one day
    EXPECT_THROW((void)run_study(cfg), InputError);
    EXPECT_TRUE(fs::exists(cfg.output_dir / "failure.log"));
}

TEST(Compare, SelfIsZeroAndMissingFileIsNamed) {
    const auto d = scratch("cmp");
    auto cfg = load_study_config(file_study(d, 1));
    (void)run_study(cfg);
    compare_studies(cfg.output_dir, cfg.output_dir, d / "cmp");
    for (const char* f : {"weekly_cost_diff.csv", "committed_unit_diff.csv", "cashflow_delta.csv"}) {
        const auto t = read_csv(d / "cmp" / f);
        ASSERT_FALSE(t.rows.empty()) << f;
        for (std::size_t i = 0; i < t.rows.size(); ++i) EXPECT_EQ(t.number(i, "b_minus_a"), 0.0) << f;
    }
    fs::remove(cfg.output_dir / "ir" / "hourly.csv");
    try {
        compare_studies(cfg.output_dir, cfg.output_dir, d / "cmp2");
        FAIL() << "expected InputError";
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("hourly.csv"), std::string::npos);
    }
}

TEST(Compare, SchemaMismatch) {
    const auto d = scratch("schema");
    for (const char* side : {"a", "b"}) {
        fs::create_directories(d / side / "fo");
        put(d / side / "fo" / "costs.csv", std::string(side) == "a" ? "design,week,total\nfo,w1,1\n" : "design,wk,total\nfo,w1,1\n");
    }
    EXPECT_THROW(compare_studies(d / "a", d / "b", d / "out"), InputError);
}

TEST(Benchmark, DeskProportions) {
    const auto m = desk_benchmark();
    double da = 0, fast = 0;
    for (const auto& g : m.generators) {
        (g.commit_class == CommitClass::da_only ? da : fast) += g.p_max;
        double w = 0;
        for (const auto& s : g.cost_curve) w += s.width_mw;
        EXPECT_NEAR(w, g.p_max, 1e-9) << g.id;
    }
    EXPECT_EQ(m.generators.size(), 30u);
    EXPECT_DOUBLE_EQ(da / fast, 61.0 / 8.0);
    EXPECT_TRUE(validate_system(m).empty());
    EXPECT_TRUE(validate_system(asymmetric_benchmark()).empty());
    // installed renewables, read off a profile's hourly peaks: wind never exceeds 1300, solar 100
    const auto p = benchmark_profile(m, 180);
    for (double w : p.wind) EXPECT_LE(w, 1300.0);
    for (double s : p.solar) EXPECT_LE(s, 100.0);
}

TEST(Benchmark, SyntheticDayIsDeterministicAndOrdered) {
    const auto m = asymmetric_benchmark();
    const auto a = synthetic_day(m, 3, 50, 5, 9);
    const auto b = synthetic_day(m, 3, 50, 5, 9);
    const auto c = synthetic_day(m, 3, 50, 5, 10);
    EXPECT_EQ(a.actual, b.actual);
    EXPECT_EQ(a.out_of_sample.data(), b.out_of_sample.data());
    EXPECT_NE(a.actual, c.actual);
    EXPECT_EQ(a.actual.size(), 96u);
    EXPECT_EQ(a.out_of_sample.rows(), 5u);
    EXPECT_EQ(a.net_load.num_intervals(), 24u);
    for (std::size_t t = 0; t < 24; ++t) {
        for (int q = 2; q <= 99; ++q) EXPECT_GE(a.net_load.value(q, t), a.net_load.value(q - 1, t));
    }
    EXPECT_THROW((void)synthetic_day(m, 0, 0, 0, 1), InputError);
}
