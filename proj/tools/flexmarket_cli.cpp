#include <cstdio>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "flexmarket/errors.hpp"
#include "flexmarket/study.hpp"
#include "flexmarket/system_io.hpp"

using namespace flexmarket;
namespace fs = std::filesystem;

namespace {

struct RunOpts {
    fs::path config, out;
    std::optional<std::uint64_t> seed;
    std::string designs;
    std::optional<int> workers;
    std::optional<int> count;
};

StudyConfig load_with_overrides(const RunOpts& o) {
    auto cfg = load_study_config(o.config);
    if (!o.out.empty()) cfg.output_dir = o.out;
    if (o.seed) cfg.seed = o.seed;
    if (o.workers) cfg.workers = *o.workers;
    if (!o.designs.empty()) {
        if (o.designs == "fo") cfg.designs = {DaDesign::fo};
        else if (o.designs == "ir") cfg.designs = {DaDesign::ir};
        else if (o.designs == "both") cfg.designs = {DaDesign::fo, DaDesign::ir};
        else throw InputError("--designs must be fo, ir or both");
    }
    if (cfg.output_dir.empty()) throw InputError("no output directory: set output_dir in the config or pass --out");
    if (cfg.workers < 1) throw InputError("--workers must be at least 1");
    return cfg;
}

int run(const StudyConfig& cfg) {
    const auto outcome = run_study(cfg);
    std::printf("%zu day results written to %s\n", outcome.results.size(), outcome.output_dir.string().c_str());
    return 0;
}

int diagnose(const fs::path& system, const std::string& benchmark, const fs::path& scenarios, const fs::path& actuals) {
    StudyConfig c;
    c.system_file = system;
    if (!benchmark.empty()) c.benchmark = benchmark;
    const auto m = study_system(c);
    double da_cap = 0, fast_cap = 0;
    for (const auto& g : m.generators) (g.commit_class == CommitClass::da_only ? da_cap : fast_cap) += g.p_max;
    std::printf("system %s: %zu generators, %.0f MW DA-only, %.0f MW fast-start, %zu IR products\n", m.name.c_str(),
                m.generators.size(), da_cap, fast_cap, m.products.size());
    if (m.ir_prices_defaulted) std::printf("IR demand-curve prices are library defaults\n");
    if (scenarios.empty() != actuals.empty()) throw InputError("--scenarios and --actuals go together");
    if (scenarios.empty()) return 0;
    const auto ens = read_scenarios_csv(scenarios);
    const auto act = read_scenarios_csv(actuals);
    if (act.num_intervals() != ens.num_intervals()) throw InputError("scenario and actual files differ in length");
    const auto nl = act.net_load();
    const auto row = nl.row(0);
    const auto d = forecast_diagnostics(ens.net_load(), row);
    std::printf("%zu intervals, %zu scenarios\n", ens.num_intervals(), ens.net_load().rows());
    std::printf("error %%: mean %.3f min %.3f max %.3f\n", d.mean_error_pct, d.min_error_pct, d.max_error_pct);
    std::printf("nominal,observed\n");
    for (std::size_t i = 0; i < d.nominal_percentiles.size(); i += 10)
        std::printf("%g,%.2f\n", d.nominal_percentiles[i], d.observed_rank[i]);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-settlement market simulator: flexibility options vs imbalance reserves"};
    app.require_subcommand(1);

    RunOpts ro;
    auto* run_cmd = app.add_subcommand("run", "run a study (DA, RT rollout, settlement, reports)");
    run_cmd->add_option("--config", ro.config, "study JSON")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--out", ro.out, "output directory (overrides config)");
    run_cmd->add_option("--seed", ro.seed, "seed for synthetic scenarios");
    run_cmd->add_option("--designs", ro.designs, "fo, ir or both");
    run_cmd->add_option("--workers", ro.workers, "parallel day workers");

    RunOpts oo;
    auto* oos_cmd = app.add_subcommand("oos", "out-of-sample sweep with the simple RT model");
    oos_cmd->add_option("--config", oo.config, "study JSON")->required()->check(CLI::ExistingFile);
    oos_cmd->add_option("--out", oo.out, "output directory");
    oos_cmd->add_option("--seed", oo.seed, "seed");
    oos_cmd->add_option("--designs", oo.designs, "fo, ir or both");
    oos_cmd->add_option("--workers", oo.workers, "parallel day workers");
    oos_cmd->add_option("--count", oo.count, "out-of-sample scenarios per day");

    fs::path cmp_a, cmp_b, cmp_out;
    auto* cmp_cmd = app.add_subcommand("compare", "diff two artifact directories (B minus A)");
    cmp_cmd->add_option("a", cmp_a)->required();
    cmp_cmd->add_option("b", cmp_b)->required();
    cmp_cmd->add_option("--out", cmp_out, "where to write comparison CSVs")->required();

    fs::path diag_system, diag_scen, diag_act;
    std::string diag_bench;
    auto* diag_cmd = app.add_subcommand("diagnose", "validate a system and report forecast calibration");
    auto* sys_opt = diag_cmd->add_option("--system", diag_system, "system JSON")->check(CLI::ExistingFile);
    diag_cmd->add_option("--benchmark", diag_bench, "desk or asymmetric")->excludes(sys_opt);
    diag_cmd->add_option("--scenarios", diag_scen, "ensemble CSV")->check(CLI::ExistingFile);
    diag_cmd->add_option("--actuals", diag_act, "realization CSV")->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*run_cmd) return run(load_with_overrides(ro));
        if (*oos_cmd) {
            auto cfg = load_with_overrides(oo);
            cfg.rollout = false;
            if (oo.count) cfg.oos_scenarios = *oo.count;
            if (cfg.oos_scenarios < 1) throw InputError("oos needs --count or oos_scenarios > 0");
            return run(cfg);
        }
        if (*cmp_cmd) {
            compare_studies(cmp_a, cmp_b, cmp_out);
            std::printf("comparison written to %s\n", cmp_out.string().c_str());
            return 0;
        }
        if (*diag_cmd) return diagnose(diag_system, diag_bench, diag_scen, diag_act);
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 1;
    } catch (const SolveError& e) {
        std::cerr << "solve failed: " << e.what() << "\n";
        for (const auto& c : e.causes()) std::cerr << "  " << c << "\n";
        return 2;
    } catch (const AuditError& e) {
        std::cerr << "ledger audit failed: " << e.what() << "\n";
        for (const auto& c : e.offending()) std::cerr << "  " << c << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
