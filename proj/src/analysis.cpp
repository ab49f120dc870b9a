#include "flexmarket/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "flexmarket/csv.hpp"
#include "flexmarket/errors.hpp"

namespace flexmarket {

std::string_view to_string(ErrorSign s) { return s == ErrorSign::positive ? "positive" : "negative"; }

namespace {

CostCurveFit ols(ErrorSign sign, const std::vector<double>& x, const std::vector<double>& y) {
    const std::string name{to_string(sign)};
    if (x.size() < 2) throw InputError("cost curve: fewer than 2 " + name + "-error points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 1e-12 * std::max(1.0, mx * mx) * n) throw InputError("cost curve: constant " + name + " error");
    CostCurveFit f;
    f.sign = sign;
    f.n = x.size();
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    // a perfect fit of constant y has nothing left to explain
    f.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return f;
}

}  // namespace

CostCurves rt_cost_curves(std::span<const double> error_mw, std::span<const double> cost_diff) {
    if (error_mw.size() != cost_diff.size()) throw InputError("cost curve: error and cost series differ in length");
    std::vector<double> px, py, nx, ny;
    for (std::size_t k = 0; k < error_mw.size(); ++k) {
        if (error_mw[k] > 0.0) {
            px.push_back(error_mw[k]);
            py.push_back(cost_diff[k]);
        } else if (error_mw[k] < 0.0) {
            nx.push_back(error_mw[k]);
            ny.push_back(cost_diff[k]);
        }
    }
    return {ols(ErrorSign::positive, px, py), ols(ErrorSign::negative, nx, ny)};
}

CostCurves rt_cost_curves(const RtResult& rt) { return rt_cost_curves(rt.error, rt.incremental_cost); }

double interpolate_level(const PercentileTable& table, std::size_t t, double pct) {
    const auto& ps = table.percentiles;
    if (ps.empty()) throw InputError("percentile table " + table.quantity + " is empty");
    if (pct <= ps.front()) return table.values(0, t);
    if (pct >= ps.back()) return table.values(ps.size() - 1, t);
    std::size_t j = 1;
    while (ps[j] < pct) ++j;
    const double w = (pct - ps[j - 1]) / (ps[j] - ps[j - 1]);
    return (1.0 - w) * table.values(j - 1, t) + w * table.values(j, t);
}

FlexDemand flexibility_demand_metric(const DaSolution& sol, const PercentileTable& net_load) {
    const std::size_t H = net_load.values.cols();
    if (sol.award_up.cols() != H) throw InputError("flexibility demand: solution and table cover different hours");
    FlexDemand out;
    out.total.resize(H);
    out.up.resize(H);
    out.down.resize(H);
    for (std::size_t t = 0; t < H; ++t) {
        const double width = interpolate_level(net_load, t, 95) - interpolate_level(net_load, t, 5);
        if (width <= 0.0) continue;
        double up = 0.0, down = 0.0;
        if (!sol.hd.empty()) {
            for (std::size_t b = 0; b < sol.hd.size(); ++b) {
                for (std::size_t r = 0; r < sol.hd[b][kUp].rows(); ++r) {
                    up += sol.hd[b][kUp](r, t) + sol.sd[b][kUp](r, t);
                    down += sol.hd[b][kDown](r, t) + sol.sd[b][kDown](r, t);
                }
            }
        } else {
            for (std::size_t i = 0; i < sol.award_up.rows(); ++i) {
                up += sol.award_up(i, t);
                down += sol.award_down(i, t);
            }
        }
        out.up[t] = up / width;
        out.down[t] = down / width;
        out.total[t] = (up + down) / width;
    }
    return out;
}

SchedulePercentile schedule_percentile(std::span<const double> schedule, const PercentileTable& net_load) {
    const auto& ps = net_load.percentiles;
    if (ps.empty()) throw InputError("percentile table " + net_load.quantity + " is empty");
    if (schedule.size() != net_load.values.cols()) throw InputError("schedule and percentile table differ in length");
    SchedulePercentile out;
    for (std::size_t t = 0; t < schedule.size(); ++t) {
        const double x = schedule[t];
        const std::size_t m = ps.size();
        double pct;
        bool outside = false;
        if (x < net_load.values(0, t)) {
            pct = ps.front();
            outside = true;
        } else if (x > net_load.values(m - 1, t)) {
            pct = ps.back();
            outside = true;
        } else {
            // equal levels span a range of percentiles; take its middle
            std::size_t lo = 0;
            while (lo + 1 < m && net_load.values(lo + 1, t) <= x) ++lo;
            std::size_t first = lo;
            while (first > 0 && net_load.values(first - 1, t) == net_load.values(lo, t)) --first;
            if (net_load.values(lo, t) == x) {
                pct = 0.5 * (ps[first] + ps[lo]);
            } else {
                const double a = net_load.values(lo, t), b = net_load.values(lo + 1, t);
                pct = ps[lo] + (x - a) / (b - a) * (ps[lo + 1] - ps[lo]);
            }
        }
        if (pct < 1.0 || pct > 99.0) outside = true;
        out.percentile.push_back(std::clamp(pct, 1.0, 99.0));
        out.clamped.push_back(outside);
    }
    return out;
}

SchedulePercentile da_schedule_percentile(const DaSolution& sol, const PercentileTable& net_load) {
    const auto nl = sol.scheduled_net_load();
    return schedule_percentile(nl, net_load);
}

WeekCost CostReport::annual(std::span<const double> weights) const {
    if (!weights.empty() && weights.size() != weeks.size())
        throw InputError(design + ": " + std::to_string(weights.size()) + " weights for " + std::to_string(weeks.size()) +
                         " weeks");
    WeekCost a;
    a.week = "annual";
    for (std::size_t w = 0; w < weeks.size(); ++w) {
        const double k = weights.empty() ? 1.0 : weights[w];
        a.da_cost += k * weeks[w].da_cost;
        a.rtd_cost += k * weeks[w].rtd_cost;
        a.rtd_scarcity += k * weeks[w].rtd_scarcity;
    }
    return a;
}

WeekCost week_cost(std::string week, std::string scenario_key, const DaSolution& da, const RtResult& rt) {
    return {std::move(week), std::move(scenario_key), da.production_cost(), rt.total_incremental(), rt.total_scarcity()};
}

WeekCost mean_week_cost(std::string week, std::string scenario_key, const DaSolution& da,
                        std::span<const RtResult> rollouts) {
    if (rollouts.empty()) throw InputError("week " + week + ": no rollouts to average");
    WeekCost c{std::move(week), std::move(scenario_key), da.production_cost(), 0.0, 0.0};
    for (const auto& r : rollouts) {
        c.rtd_cost += r.total_incremental();
        c.rtd_scarcity += r.total_scarcity();
    }
    c.rtd_cost /= static_cast<double>(rollouts.size());
    c.rtd_scarcity /= static_cast<double>(rollouts.size());
    return c;
}

WeeklyDiff weekly_cost_diff(const CostReport& ir, const CostReport& fo, std::span<const double> weights, double mip_gap) {
    if (ir.weeks.size() != fo.weeks.size())
        throw InputError("weekly cost diff: " + std::to_string(ir.weeks.size()) + " IR weeks vs " +
                         std::to_string(fo.weeks.size()) + " FO weeks");
    WeeklyDiff out;
    for (std::size_t w = 0; w < ir.weeks.size(); ++w) {
        const auto& a = ir.weeks[w];
        const auto& b = fo.weeks[w];
        if (a.week != b.week || a.scenario_key != b.scenario_key)
            throw InputError("weekly cost diff: week " + a.week + " [" + a.scenario_key + "] does not match " + b.week +
                             " [" + b.scenario_key + "]");
        WeeklyDiffRow r;
        r.week = a.week;
        r.ir_total = a.total();
        r.fo_total = b.total();
        r.diff = r.ir_total - r.fo_total;
        r.band = mip_gap * 0.5 * (a.da_cost + b.da_cost);
        out.rows.push_back(r);
    }
    out.annual_ir = ir.annual(weights);
    out.annual_fo = fo.annual(weights);
    out.annual_diff = out.annual_ir.total() - out.annual_fo.total();
    return out;
}

std::vector<int> committed_unit_diff(const std::vector<Generator>& units, const DaSolution& da_fo,
                                     const DaSolution& da_ir) {
    auto a = da_fo.committed_count(units, CommitClass::da_only);
    const auto b = da_ir.committed_count(units, CommitClass::da_only);
    if (a.size() != b.size()) throw InputError("committed unit diff: solutions cover different hours");
    for (std::size_t t = 0; t < a.size(); ++t) a[t] -= b[t];
    return a;
}

void write_cost_curves_csv(const std::vector<std::pair<std::string, CostCurves>>& by_design,
                           const std::filesystem::path& path) {
    CsvWriter w(path, {"design", "sign", "n", "slope", "intercept", "r2"});
    for (const auto& [design, c] : by_design) {
        for (const auto* f : {&c.positive, &c.negative}) {
            w.row({design, std::string(to_string(f->sign)), std::to_string(f->n), format_number(f->slope),
                   format_number(f->intercept), format_number(f->r2)});
        }
    }
}

void write_cost_report_csv(const std::vector<CostReport>& reports, std::span<const double> weights,
                           const std::filesystem::path& path) {
    CsvWriter w(path, {"design", "statistic", "week", "scenario_key", "da_cost", "rtd_cost", "rtd_scarcity", "total"});
    for (const auto& r : reports) {
        auto emit = [&](const WeekCost& c) {
            w.row({r.design, r.statistic, c.week, c.scenario_key, format_number(c.da_cost), format_number(c.rtd_cost),
                   format_number(c.rtd_scarcity), format_number(c.total())});
        };
        for (const auto& c : r.weeks) emit(c);
        emit(r.annual(weights));
    }
}

void write_weekly_diff_csv(const WeeklyDiff& diff, const std::filesystem::path& path) {
    CsvWriter w(path, {"week", "ir_total", "fo_total", "diff", "band", "outside_band"});
    for (const auto& r : diff.rows) {
        w.row({r.week, format_number(r.ir_total), format_number(r.fo_total), format_number(r.diff),
               format_number(r.band), r.outside_band() ? "1" : "0"});
    }
    w.row({"annual", format_number(diff.annual_ir.total()), format_number(diff.annual_fo.total()),
           format_number(diff.annual_diff), "", ""});
}

void write_hourly_metrics_csv(const FlexDemand& demand, const SchedulePercentile& pct, std::span<const int> committed_diff,
                              const std::filesystem::path& path) {
    CsvWriter w(path, {"hour", "flex_total", "flex_up", "flex_down", "schedule_percentile", "clamped",
                       "committed_da_only_diff"});
    const std::size_t H = std::max({demand.total.size(), pct.percentile.size(), committed_diff.size()});
    auto opt = [](const std::vector<std::optional<double>>& v, std::size_t t) {
        return t < v.size() && v[t] ? format_number(*v[t]) : std::string();
    };
    for (std::size_t t = 0; t < H; ++t) {
        w.row({std::to_string(t), opt(demand.total, t), opt(demand.up, t), opt(demand.down, t),
               t < pct.percentile.size() ? format_number(pct.percentile[t]) : "",
               t < pct.clamped.size() ? (pct.clamped[t] ? "1" : "0") : "",
               t < committed_diff.size() ? std::to_string(committed_diff[t]) : ""});
    }
}

}  // namespace flexmarket
