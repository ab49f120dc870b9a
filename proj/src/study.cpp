#include "flexmarket/study.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "flexmarket/csv.hpp"
#include "flexmarket/errors.hpp"
#include "flexmarket/lp/solver.hpp"
#include "flexmarket/system_io.hpp"

namespace flexmarket {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::vector<DaDesign> parse_designs(const std::string& s) {
    if (s == "fo") return {DaDesign::fo};
    if (s == "ir") return {DaDesign::ir};
    if (s == "both") return {DaDesign::fo, DaDesign::ir};
    throw InputError("designs must be fo, ir or both (got '" + s + "')");
}

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path q(p);
    return q.is_relative() && !base.empty() ? base / q : q;
}

template <typename T>
void get_opt(const json& j, const char* key, T& dst) {
    if (!j.contains(key)) return;
    try {
        dst = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw InputError(fmt::format("study config: bad value for '{}': {}", key, e.what()));
    }
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
    for (const auto& [k, v] : j.items()) {
        if (!known.count(k)) throw InputError(fmt::format("{}: unknown key '{}'", where, k));
    }
}

std::string design_dir(DaDesign d) { return std::string(to_string(d)); }

// Weeks picked as medoids of synthetic candidate weeks.
std::vector<WeekSpec> clustered_weeks(const SystemModel& model, int candidates, int k, int days, int scenarios,
                                      std::uint64_t seed) {
    std::vector<std::vector<double>> features;
    for (int w = 0; w < candidates; ++w) {
        std::vector<double> mean, sd, actual;
        for (int d = 0; d < days; ++d) {
            const auto in = synthetic_day(model, w * days + d, scenarios, 0, seed);
            for (std::size_t t = 0; t < in.net_load.num_intervals(); ++t) {
                mean.push_back(in.net_load.value(50, t));
                sd.push_back(std::max(1e-6, (in.net_load.value(84, t) - in.net_load.value(16, t)) / 2.0));
            }
            // hourly means of the realization
            const std::size_t per = in.actual.size() / in.net_load.num_intervals();
            for (std::size_t t = 0; t < in.net_load.num_intervals(); ++t) {
                double s = 0.0;
                for (std::size_t j = 0; j < per; ++j) s += in.actual[t * per + j];
                actual.push_back(s / static_cast<double>(per));
            }
        }
        features.push_back(week_features(mean, sd, actual));
    }
    const auto cl = cluster_weeks(features, k);
    std::vector<WeekSpec> out;
    for (std::size_t c = 0; c < cl.medoids.size(); ++c) {
        WeekSpec w;
        w.name = fmt::format("week{:02d}", cl.medoids[c] + 1);
        w.first_day = cl.medoids[c] * days;
        w.weight = cl.weights[c];
        out.push_back(w);
    }
    std::sort(out.begin(), out.end(), [](const WeekSpec& a, const WeekSpec& b) { return a.first_day < b.first_day; });
    return out;
}

}  // namespace

StudyConfig parse_study_config(const std::string& text, const fs::path& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw InputError(std::string("study config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw InputError("study config must be a JSON object");
    reject_unknown(j,
                   {"system", "benchmark", "designs", "weeks", "clustering", "days_per_week", "scenarios",
                    "oos_scenarios", "rollout", "seed", "workers", "output_dir", "time_limit_s", "mip_gap"},
                   "study config");
    StudyConfig c;
    if (j.contains("system")) c.system_file = resolve(base_dir, j.at("system").get<std::string>());
    get_opt(j, "benchmark", c.benchmark);
    if (j.contains("designs")) c.designs = parse_designs(j.at("designs").get<std::string>());
    get_opt(j, "days_per_week", c.days_per_week);
    get_opt(j, "scenarios", c.scenarios);
    get_opt(j, "oos_scenarios", c.oos_scenarios);
    get_opt(j, "rollout", c.rollout);
    get_opt(j, "workers", c.workers);
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("output_dir")) c.output_dir = resolve(base_dir, j.at("output_dir").get<std::string>());
    if (j.contains("time_limit_s")) c.time_limit_s = j.at("time_limit_s").get<double>();
    if (j.contains("mip_gap")) c.mip_gap = j.at("mip_gap").get<double>();
    if (j.contains("weeks")) {
        for (const auto& w : j.at("weeks")) {
            reject_unknown(w, {"name", "weight", "first_day", "scenarios", "actuals"}, "study config week");
            WeekSpec s;
            get_opt(w, "name", s.name);
            get_opt(w, "weight", s.weight);
            get_opt(w, "first_day", s.first_day);
            if (w.contains("scenarios")) s.scenarios = resolve(base_dir, w.at("scenarios").get<std::string>());
            if (w.contains("actuals")) s.actuals = resolve(base_dir, w.at("actuals").get<std::string>());
            if (s.name.empty()) s.name = fmt::format("week{:02d}", c.weeks.size() + 1);
            c.weeks.push_back(s);
        }
    }
    if (j.contains("clustering")) {
        if (j.contains("weeks")) throw InputError("study config: give either weeks or clustering, not both");
        const auto& cl = j.at("clustering");
        reject_unknown(cl, {"candidate_weeks", "k"}, "study config clustering");
        int candidates = 51, k = 12;
        get_opt(cl, "candidate_weeks", candidates);
        get_opt(cl, "k", k);
        if (!c.seed) throw InputError("study config: clustering synthetic weeks needs a seed");
        if (k < 1 || candidates < k) throw InputError("study config: clustering needs 1 <= k <= candidate_weeks");
        c.weeks = clustered_weeks(study_system(c), candidates, k, c.days_per_week, std::min(c.scenarios, 100), *c.seed);
    }

    if (c.days_per_week < 1) throw InputError("days_per_week must be at least 1");
    if (c.scenarios < 1) throw InputError("scenarios must be at least 1");
    if (c.oos_scenarios < 0) throw InputError("oos_scenarios must not be negative");
    if (c.workers < 1) throw InputError("workers must be at least 1");
    std::set<std::string> names;
    for (const auto& w : c.weeks) {
        if (!names.insert(w.name).second) throw InputError("duplicate week name " + w.name);
        if (w.scenarios.empty() != w.actuals.empty())
            throw InputError("week " + w.name + ": scenarios and actuals must be given together");
        if (!w.scenarios.empty()) {
            for (const auto& f : {w.scenarios, w.actuals}) {
                if (!fs::exists(f)) throw InputError("week " + w.name + ": file not found: " + f.string());
            }
        } else if (!c.seed) {
            throw InputError("week " + w.name + " uses synthetic scenarios but the study has no seed");
        }
    }
    if (!c.system_file.empty() && !fs::exists(c.system_file))
        throw InputError("system file not found: " + c.system_file.string());
    return c;
}

StudyConfig load_study_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open study config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_study_config(ss.str(), path.parent_path());
}

SystemModel study_system(const StudyConfig& cfg) {
    SystemModel m;
    if (!cfg.system_file.empty()) {
        m = load_system(cfg.system_file);
    } else if (cfg.benchmark == "desk") {
        m = desk_benchmark();
    } else if (cfg.benchmark == "asymmetric") {
        m = asymmetric_benchmark();
    } else {
        throw InputError("unknown benchmark '" + cfg.benchmark + "' (desk, asymmetric)");
    }
    if (cfg.time_limit_s) m.config.time_limit_s = *cfg.time_limit_s;
    if (cfg.mip_gap) m.config.mip_gap = *cfg.mip_gap;
    if (m.products.empty()) {
        m.products = default_ir_products();
        m.ir_prices_defaulted = true;
    }
    const auto v = validate_system(m);
    if (!v.empty()) {
        std::string msg = "system is invalid:";
        for (const auto& x : v) msg += "\n  " + x.location + ": " + x.message;
        throw InputError(msg);
    }
    return m;
}

std::vector<DayTask> plan_study(const StudyConfig& cfg, const SystemModel& model) {
    std::vector<DayTask> tasks;
    const int per_hour = model.config.intervals_per_hour();
    const std::size_t day_len = static_cast<std::size_t>(model.config.da_horizon_h * per_hour);
    for (const auto& w : cfg.weeks) {
        std::optional<ScenarioSet> ens, act;
        if (!w.scenarios.empty()) {
            ens = read_scenarios_csv(w.scenarios);
            act = read_scenarios_csv(w.actuals);
            for (const auto* s : {&*ens, &*act}) {
                if (std::abs(s->resolution_min - model.config.rt_resolution_min) > 1e-9)
                    throw InputError("week " + w.name + ": scenario files must be at RT resolution");
                if (s->num_intervals() < day_len * static_cast<std::size_t>(cfg.days_per_week))
                    throw InputError("week " + w.name + ": scenario files cover fewer than days_per_week days");
            }
        }
        for (int d = 0; d < cfg.days_per_week; ++d) {
            const int day = w.first_day + d;
            DayInputs in;
            if (ens) {
                const auto e = ens->slice(static_cast<std::size_t>(d) * day_len, day_len);
                in.net_load = hourly_net_load_table(e);
                auto a = act->slice(static_cast<std::size_t>(d) * day_len, day_len).net_load();
                auto row = a.row(0);
                in.actual.assign(row.begin(), row.end());
                // out-of-sample realizations cycle through the ensemble members
                const auto nl = e.net_load();
                in.out_of_sample = Grid<double>(static_cast<std::size_t>(cfg.oos_scenarios), day_len);
                for (int s = 0; s < cfg.oos_scenarios; ++s) {
                    for (std::size_t k = 0; k < day_len; ++k) in.out_of_sample(s, k) = nl(s % nl.rows(), k);
                }
            } else {
                in = synthetic_day(model, day, cfg.scenarios, cfg.oos_scenarios, *cfg.seed);
            }
            for (auto design : cfg.designs) tasks.push_back({design, w.name, day, in});
        }
    }
    return tasks;
}

DayResult run_day(const SystemModel& model, const DayTask& task, bool rollout_rt, const lp::MipSolver* solver) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto& cfg = model.config;
    DayResult r;
    r.design = task.design;
    r.week = task.week;
    r.day = task.day;
    r.net_load = task.inputs.net_load;

    auto p = build_base_uc(model, task.inputs.net_load);
    if (task.design == DaDesign::fo) {
        if (cfg.fo_account_mode != FoAccountMode::single_aggregate)
            throw InputError("the study runner supports the single aggregate FO account only");
        const auto tiers = build_tiers(task.inputs.net_load, cfg);
        apply_fo_design(p, seller_params(model), {aggregate_buyer(tiers, cfg)}, tiers, cfg);
    } else if (task.design == DaDesign::ir) {
        apply_ir_design(p, model.products, task.inputs.net_load);
    }
    r.da = solve_da(p, cfg, solver);
    r.prices = compute_prices(p, r.da, solver);
    r.ledger.append(settle_da_energy(p, r.da, r.prices, r.day));
    r.ledger.append(settle_fo_premiums(p, r.da, r.prices, r.day));

    if (rollout_rt || task.inputs.out_of_sample.rows() > 0) r.rt_system = make_rt_system(p, r.da);
    std::vector<UncertainPosition> constituents;
    if (rollout_rt) {
        r.rt = rollout(*r.rt_system, task.inputs.actual, RtMode::full, solver);
        const auto pos = aggregate_position(p, r.da, task.inputs.actual);
        r.ledger.append(settle_rt_energy(*r.rt_system, *r.rt, std::span<const UncertainPosition>(&pos, 1), r.day));
        if (task.design == DaDesign::fo) {
            auto pay = settle_fo_payoffs(p, r.da, *r.rt, {pos.realized}, r.day);
            r.ledger.append(pay.ledger);
            r.exercises = std::move(pay.records);
        }
        UncertainPosition c = pos;
        c.da_position.clear();
        for (double d : p.demand) c.da_position.push_back(-d);
        constituents.push_back(std::move(c));
    }
    if (task.design == DaDesign::ir) r.ledger.append(settle_ir(p, r.da, r.prices, constituents, r.day, &r.ir));
    if (task.inputs.out_of_sample.rows() > 0) r.oos = run_simple_rt(*r.rt_system, task.inputs.out_of_sample, solver);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

std::vector<DayResult> run_tasks(const SystemModel& model, const std::vector<DayTask>& tasks, bool rollout_rt,
                                 int workers) {
    std::vector<std::optional<DayResult>> slots(tasks.size());
    std::vector<std::exception_ptr> errors(tasks.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    auto work = [&] {
        const auto solver = lp::make_default_solver();
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            if (failed) break;
            try {
                slots[i] = run_day(model, tasks[i], rollout_rt, solver.get());
            } catch (...) {
                errors[i] = std::current_exception();
                failed = true;
            }
        }
    };
    const int n = std::max(1, std::min<int>(workers, static_cast<int>(tasks.size())));
    if (n == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int k = 0; k < n; ++k) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    std::vector<DayResult> out;
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

std::string fnv1a64_hex(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw InputError("cannot read " + file.string());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    return fmt::format("{:016x}", h);
}

std::vector<ManifestEntry> build_manifest(const fs::path& dir) {
    std::vector<ManifestEntry> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        const auto rel = fs::relative(e.path(), dir).generic_string();
        // timing and failure logs differ between identical runs
        if (rel == "manifest.csv" || rel == "run.log" || rel == "failure.log") continue;
        out.push_back({rel, e.file_size(), fnv1a64_hex(e.path())});
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.file < b.file; });
    return out;
}

void write_manifest(const fs::path& dir) {
    const auto entries = build_manifest(dir);
    CsvWriter w(dir / "manifest.csv", {"file", "bytes", "fnv1a64"});
    for (const auto& e : entries) w.row({e.file, std::to_string(e.bytes), e.checksum});
}

CostReport cost_report(DaDesign design, const std::vector<DayResult>& results, bool use_oos) {
    CostReport rep;
    rep.design = std::string(to_string(design));
    rep.statistic = use_oos ? "mean" : "single";
    std::map<std::string, std::size_t> index;
    for (const auto& r : results) {
        if (r.design != design) continue;
        if (!index.count(r.week)) {
            index[r.week] = rep.weeks.size();
            rep.weeks.push_back({r.week, "", 0, 0, 0});
        }
        auto& w = rep.weeks[index[r.week]];
        w.scenario_key += fmt::format("{}{}", w.scenario_key.empty() ? "d" : "+", r.day);
        w.da_cost += r.da.production_cost();
        if (use_oos) {
            if (r.oos.empty()) continue;
            const double dt = r.rt_system->config.rt_interval_h();
            const double up = r.rt_system->config.simple_penalty_up, dn = r.rt_system->config.simple_penalty_down;
            double total = 0.0, pen = 0.0;
            for (const auto& s : r.oos) {
                total += s.total_cost;
                for (std::size_t k = 0; k < s.eps_up.size(); ++k) pen += dt * (up * s.eps_up[k] - dn * s.eps_down[k]);
            }
            const double n = static_cast<double>(r.oos.size());
            w.rtd_cost += (total - pen) / n;
            w.rtd_scarcity += pen / n;
        } else if (r.rt) {
            w.rtd_cost += r.rt->total_incremental();
            w.rtd_scarcity += r.rt->total_scarcity();
        }
    }
    return rep;
}

namespace {

std::vector<double> week_weights(const StudyConfig& cfg) {
    std::vector<double> w;
    for (const auto& s : cfg.weeks) w.push_back(s.weight);
    return w;
}

void write_design_outputs(const StudyConfig& cfg, const SystemModel& model, DaDesign design,
                          const std::vector<DayResult>& results, const fs::path& dir) {
    fs::create_directories(dir);
    std::vector<const DayResult*> mine;
    for (const auto& r : results) {
        if (r.design == design) mine.push_back(&r);
    }
    const auto weights = week_weights(cfg);

    CashflowLedger ledger;
    for (const auto* r : mine) ledger.append(r->ledger);
    write_ledger_csv(ledger, dir / "ledger.csv");
    write_iso_position_csv(iso_position(ledger), dir / "iso_position.csv");

    std::map<int, double> rt_costs;
    for (const auto* r : mine) rt_costs[r->day] = r->rt ? r->rt->total_incremental() : 0.0;
    write_cashflow_stats_csv({{"flexible_suppliers", aggregate_cashflows(ledger, {PartyClass::seller}, rt_costs)},
                              {"uncertain_parties", aggregate_cashflows(ledger, {PartyClass::buyer, PartyClass::load})}},
                             dir / "cashflows.csv");

    {
        CsvWriter w(dir / "days.csv", {"week", "day", "status", "objective", "best_bound", "mip_gap", "da_cost",
                                       "rtd_cost", "rtd_scarcity", "ir_da_cost", "ir_rt_recovery"});
        for (const auto* r : mine) {
            w.row({r->week, std::to_string(r->day), std::string(lp::to_string(r->da.status)),
                   format_number(r->da.objective), format_number(r->da.best_bound), format_number(r->da.mip_gap),
                   format_number(r->da.production_cost()), format_number(r->rt ? r->rt->total_incremental() : 0.0),
                   format_number(r->rt ? r->rt->total_scarcity() : 0.0), format_number(r->ir.da_cost),
                   format_number(r->ir.rt_recovery)});
        }
    }
    {
        CsvWriter w(dir / "hourly.csv", {"week", "day", "hour", "energy_price", "scheduled_net_load", "median_net_load",
                                         "schedule_percentile", "clamped", "flex_up", "flex_down", "flex_total",
                                         "da_only_committed", "fast_start_committed"});
        for (const auto* r : mine) {
            const auto nl = r->da.scheduled_net_load();
            const auto pct = schedule_percentile(nl, r->net_load);
            const auto flex = flexibility_demand_metric(r->da, r->net_load);
            const auto da_only = r->da.committed_count(model.generators, CommitClass::da_only);
            const auto fast = r->da.committed_count(model.generators, CommitClass::fast_start);
            auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
            for (std::size_t t = 0; t < nl.size(); ++t) {
                w.row({r->week, std::to_string(r->day), std::to_string(t), format_number(r->prices.energy[t]),
                       format_number(nl[t]), format_number(r->net_load.value(50, t)), format_number(pct.percentile[t]),
                       pct.clamped[t] ? "1" : "0", opt(flex.up[t]), opt(flex.down[t]), opt(flex.total[t]),
                       std::to_string(da_only[t]), std::to_string(fast[t])});
            }
        }
    }

    std::vector<ExerciseRecord> ex;
    std::vector<double> err, cost;
    bool any_rt = false;
    for (const auto* r : mine) {
        ex.insert(ex.end(), r->exercises.begin(), r->exercises.end());
        if (!r->rt) continue;
        any_rt = true;
        err.insert(err.end(), r->rt->error.begin(), r->rt->error.end());
        cost.insert(cost.end(), r->rt->incremental_cost.begin(), r->rt->incremental_cost.end());
    }
    if (design == DaDesign::fo && any_rt) write_exercise_csv(ex, dir / "exercises.csv");
    if (any_rt) {
        CsvWriter w(dir / "rt_intervals.csv", {"week", "day", "interval", "net_load", "error", "lambda",
                                               "incremental_cost", "scarcity_cost", "shortfall", "surplus",
                                               "reserve_short"});
        for (const auto* r : mine) {
            if (!r->rt) continue;
            const auto& x = *r->rt;
            for (std::size_t k = 0; k < x.lambda.size(); ++k) {
                w.row({r->week, std::to_string(r->day), std::to_string(k), format_number(x.net_load[k]),
                       format_number(x.error[k]), format_number(x.lambda[k]), format_number(x.incremental_cost[k]),
                       format_number(x.scarcity_cost[k]), format_number(x.shortfall[k]), format_number(x.surplus[k]),
                       format_number(x.reserve_short[k])});
            }
        }
        write_cost_report_csv({cost_report(design, results, false)}, weights, dir / "costs.csv");
    }

    std::vector<std::pair<std::string, CostCurves>> curves;
    std::vector<std::string> notes;
    auto try_curve = [&](const std::string& label, const std::vector<double>& x, const std::vector<double>& y) {
        try {
            curves.emplace_back(label, rt_cost_curves(x, y));
        } catch (const InputError& e) {
            notes.push_back(label + ": " + e.what());
        }
    };
    if (any_rt) try_curve("rtd", err, cost);

    bool any_oos = false;
    std::vector<double> oerr, ocost;
    for (const auto* r : mine) {
        for (const auto& s : r->oos) {
            any_oos = true;
            oerr.insert(oerr.end(), s.error.begin(), s.error.end());
            ocost.insert(ocost.end(), s.interval_cost.begin(), s.interval_cost.end());
        }
    }
    if (any_oos) {
        try_curve("simple", oerr, ocost);
        write_cost_report_csv({cost_report(design, results, true)}, weights, dir / "oos_costs.csv");
        CsvWriter w(dir / "oos_scenarios.csv", {"week", "day", "scenario", "total_cost"});
        for (const auto* r : mine) {
            for (std::size_t s = 0; s < r->oos.size(); ++s) {
                w.row({r->week, std::to_string(r->day), std::to_string(s), format_number(r->oos[s].total_cost)});
            }
        }
    }
    if (!curves.empty() || !notes.empty()) {
        write_cost_curves_csv(curves, dir / "cost_curves.csv");
        if (!notes.empty()) {
            std::ofstream n(dir / "cost_curves_notes.txt");
            for (const auto& s : notes) n << s << "\n";
        }
    }
}

}  // namespace

std::size_t write_study_outputs(const StudyConfig& cfg, const SystemModel& model, const std::vector<DayResult>& results) {
    const fs::path& out = cfg.output_dir;
    fs::create_directories(out);
    {
        json j;
        j["system"] = cfg.system_file.empty() ? "benchmark:" + cfg.benchmark : cfg.system_file.filename().string();
        std::vector<std::string> designs;
        for (auto d : cfg.designs) designs.emplace_back(to_string(d));
        j["designs"] = designs;
        j["seed"] = cfg.seed ? json(*cfg.seed) : json(nullptr);
        j["days_per_week"] = cfg.days_per_week;
        j["scenarios"] = cfg.scenarios;
        j["oos_scenarios"] = cfg.oos_scenarios;
        j["rollout"] = cfg.rollout;
        j["solver"] = lp::make_default_solver()->name();
        j["mip_gap"] = model.config.mip_gap;
        j["ir_prices_defaulted"] = model.ir_prices_defaulted;
        // Solutions are reproducible for a fixed seed and backend; a solver
        // stopped by its time limit may return different incumbents.
        j["time_limit_s"] = model.config.time_limit_s;
        json weeks = json::array();
        for (const auto& w : cfg.weeks) weeks.push_back({{"name", w.name}, {"weight", w.weight}, {"first_day", w.first_day}});
        j["weeks"] = weeks;
        std::ofstream(out / "study.json") << j.dump(2) << "\n";
    }
    for (auto d : cfg.designs) write_design_outputs(cfg, model, d, results, out / design_dir(d));

    const bool both = std::count(cfg.designs.begin(), cfg.designs.end(), DaDesign::fo) &&
                      std::count(cfg.designs.begin(), cfg.designs.end(), DaDesign::ir);
    if (both && !results.empty()) {
        const auto cmp = out / "comparison";
        fs::create_directories(cmp);
        const auto weights = week_weights(cfg);
        if (cfg.rollout) {
            write_weekly_diff_csv(weekly_cost_diff(cost_report(DaDesign::ir, results, false),
                                                   cost_report(DaDesign::fo, results, false), weights,
                                                   model.config.mip_gap),
                                  cmp / "weekly_cost_diff.csv");
        }
        if (cfg.oos_scenarios > 0) {
            write_weekly_diff_csv(weekly_cost_diff(cost_report(DaDesign::ir, results, true),
                                                   cost_report(DaDesign::fo, results, true), weights,
                                                   model.config.mip_gap),
                                  cmp / "weekly_cost_diff_oos.csv");
        }
        std::map<std::pair<std::string, int>, const DayResult*> fo, ir;
        for (const auto& r : results) (r.design == DaDesign::fo ? fo : ir)[{r.week, r.day}] = &r;
        CsvWriter w(cmp / "committed_unit_diff.csv", {"week", "day", "hour", "fo_minus_ir"});
        for (const auto& [key, f] : fo) {
            auto it = ir.find(key);
            if (it == ir.end()) continue;
            const auto diff = committed_unit_diff(model.generators, f->da, it->second->da);
            for (std::size_t t = 0; t < diff.size(); ++t)
                w.row({key.first, std::to_string(key.second), std::to_string(t), std::to_string(diff[t])});
        }
    }
    {
        std::ofstream log(out / "run.log");
        for (const auto& r : results) {
            log << fmt::format("{} {} day {} {:.2f}s status {} gap {:.5f}\n", to_string(r.design), r.week, r.day,
                               r.seconds, lp::to_string(r.da.status), r.da.mip_gap);
        }
    }
    write_manifest(out);
    return results.size();
}

StudyOutcome run_study(const StudyConfig& cfg) {
    if (cfg.output_dir.empty()) throw InputError("study has no output directory");
    fs::create_directories(cfg.output_dir);
    const auto fail_log = cfg.output_dir / "failure.log";
    std::error_code ec;
    fs::remove(fail_log, ec);
    if (cfg.weeks.empty()) {
        CsvWriter(cfg.output_dir / "manifest.csv", {"file", "bytes", "fnv1a64"});
        return {{}, cfg.output_dir};
    }
    try {
        const auto model = study_system(cfg);
        StudyOutcome out;
        out.output_dir = cfg.output_dir;
        const auto tasks = plan_study(cfg, model);
        out.results = run_tasks(model, tasks, cfg.rollout, cfg.workers);
        write_study_outputs(cfg, model, out.results);
        return out;
    } catch (const std::exception& e) {
        std::ofstream log(fail_log);
        log << e.what() << "\n";
        if (const auto* se = dynamic_cast<const SolveError*>(&e)) {
            for (const auto& c : se->causes()) log << "  " << c << "\n";
        }
        if (const auto* ae = dynamic_cast<const AuditError*>(&e)) {
            for (const auto& c : ae->offending()) log << "  " << c << "\n";
        }
        throw;
    }
}

// ---------------------------------------------------------------------------
// compare

namespace {

std::vector<std::string> designs_in(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw InputError("not an artifact directory: " + dir.string());
    std::vector<std::string> out;
    for (const char* d : {"fo", "ir"}) {
        if (fs::is_directory(dir / d)) out.emplace_back(d);
    }
    if (out.empty()) throw InputError("no fo/ or ir/ results in " + dir.string());
    return out;
}

CsvTable need(const fs::path& file) {
    if (!fs::exists(file)) throw InputError("missing file: " + file.string());
    return read_csv(file);
}

void same_header(const CsvTable& a, const CsvTable& b, const std::string& what) {
    if (a.header != b.header) throw InputError("schema mismatch in " + what);
}

}  // namespace

void compare_studies(const fs::path& a, const fs::path& b, const fs::path& out) {
    const auto da = designs_in(a), db = designs_in(b);
    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& d : da) {
        if (std::find(db.begin(), db.end(), d) != db.end()) pairs.emplace_back(d, d);
    }
    if (pairs.empty()) {
        if (da.size() != 1 || db.size() != 1)
            throw InputError("cannot pair designs of " + a.string() + " and " + b.string());
        pairs.emplace_back(da[0], db[0]);
    }
    fs::create_directories(out);
    CsvWriter cw(out / "weekly_cost_diff.csv", {"a", "b", "week", "a_total", "b_total", "b_minus_a"});
    CsvWriter uw(out / "committed_unit_diff.csv", {"a", "b", "week", "day", "hour", "b_minus_a"});
    CsvWriter fw(out / "cashflow_delta.csv", {"a", "b", "label", "row", "column", "a_value", "b_value", "b_minus_a"});
    for (const auto& [x, y] : pairs) {
        const auto ca = need(a / x / "costs.csv"), cb = need(b / y / "costs.csv");
        same_header(ca, cb, "costs.csv");
        std::map<std::string, std::size_t> rows_b;
        for (std::size_t r = 0; r < cb.rows.size(); ++r) rows_b[cb.rows[r][cb.column_index("week")]] = r;
        for (std::size_t r = 0; r < ca.rows.size(); ++r) {
            const auto& week = ca.rows[r][ca.column_index("week")];
            auto it = rows_b.find(week);
            if (it == rows_b.end()) throw InputError("week " + week + " missing from " + (b / y / "costs.csv").string());
            const double va = ca.number(r, "total"), vb = cb.number(it->second, "total");
            cw.row({x, y, week, format_number(va), format_number(vb), format_number(vb - va)});
        }

        const auto ha = need(a / x / "hourly.csv"), hb = need(b / y / "hourly.csv");
        same_header(ha, hb, "hourly.csv");
        if (ha.rows.size() != hb.rows.size()) throw InputError("hourly.csv row counts differ");
        for (std::size_t r = 0; r < ha.rows.size(); ++r) {
            for (const char* key : {"week", "day", "hour"}) {
                if (ha.rows[r][ha.column_index(key)] != hb.rows[r][hb.column_index(key)])
                    throw InputError("hourly.csv rows are not aligned");
            }
            const double va = ha.number(r, "da_only_committed"), vb = hb.number(r, "da_only_committed");
            uw.row({x, y, ha.rows[r][0], ha.rows[r][1], ha.rows[r][2], format_number(vb - va)});
        }

        const auto fa = need(a / x / "cashflows.csv"), fb = need(b / y / "cashflows.csv");
        same_header(fa, fb, "cashflows.csv");
        std::map<std::pair<std::string, std::string>, std::size_t> idx;
        for (std::size_t r = 0; r < fb.rows.size(); ++r) idx[{fb.rows[r][0], fb.rows[r][1]}] = r;
        for (std::size_t r = 0; r < fa.rows.size(); ++r) {
            const auto& row = fa.rows[r];
            if (row[1] != "mean" && row[1] != "std") continue;
            auto it = idx.find({row[0], row[1]});
            if (it == idx.end()) continue;
            for (std::size_t c = 2; c < fa.header.size(); ++c) {
                const double va = fa.number(r, fa.header[c]), vb = fb.number(it->second, fa.header[c]);
                fw.row({x, y, row[0], row[1], fa.header[c], format_number(va), format_number(vb), format_number(vb - va)});
            }
        }
    }
}

}  // namespace flexmarket
