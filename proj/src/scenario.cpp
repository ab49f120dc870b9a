#include "flexmarket/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "flexmarket/errors.hpp"

namespace flexmarket {

std::size_t ScenarioSet::num_scenarios() const {
    return values.empty() ? probabilities.size() : values.begin()->second.rows();
}

std::size_t ScenarioSet::num_intervals() const { return values.empty() ? 0 : values.begin()->second.cols(); }

const Grid<double>& ScenarioSet::at(Constituent c) const {
    auto it = values.find(c);
    if (it == values.end()) throw InputError(fmt::format("scenario set has no {} constituent", to_string(c)));
    return it->second;
}

void ScenarioSet::validate() const {
    if (resolution_min <= 0.0) throw InputError("scenario resolution must be positive");
    const std::size_t n = num_scenarios();
    const std::size_t t = num_intervals();
    for (const auto& [c, g] : values) {
        if (g.rows() != n || g.cols() != t) {
            throw InputError(fmt::format("constituent {} is {}x{}, expected {}x{}", to_string(c), g.rows(), g.cols(), n, t));
        }
    }
    if (probabilities.size() != n) throw InputError("one probability per scenario is required");
    double sum = 0.0;
    for (double p : probabilities) {
        if (!(p >= 0.0)) throw InputError("scenario probabilities must be non-negative");
        sum += p;
    }
    if (n > 0 && std::abs(sum - 1.0) > 1e-9) throw InputError(fmt::format("scenario probabilities sum to {}", sum));
}

Grid<double> ScenarioSet::net_load() const {
    Grid<double> nl(num_scenarios(), num_intervals(), 0.0);
    for (const auto& [c, g] : values) {
        const double sign = c == Constituent::load || c == Constituent::aggregate ? 1.0 : -1.0;
        for (std::size_t s = 0; s < g.rows(); ++s) {
            for (std::size_t t = 0; t < g.cols(); ++t) nl(s, t) += sign * g(s, t);
        }
    }
    return nl;
}

ScenarioSet ScenarioSet::slice(std::size_t first, std::size_t count) const {
    if (first + count > num_intervals()) throw InputError("scenario slice beyond the time axis");
    ScenarioSet out;
    out.resolution_min = resolution_min;
    out.start_minute = start_minute + static_cast<std::int64_t>(std::llround(static_cast<double>(first) * resolution_min));
    out.probabilities = probabilities;
    for (const auto& [c, g] : values) {
        Grid<double> part(g.rows(), count);
        for (std::size_t s = 0; s < g.rows(); ++s) {
            for (std::size_t t = 0; t < count; ++t) part(s, t) = g(s, first + t);
        }
        out.values.emplace(c, std::move(part));
    }
    return out;
}

ScenarioSet ScenarioSet::resample_mean(double new_resolution_min) const {
    const double ratio = new_resolution_min / resolution_min;
    const auto k = static_cast<std::size_t>(std::llround(ratio));
    if (k == 0 || std::abs(ratio - static_cast<double>(k)) > 1e-9) {
        throw InputError("resampling needs an integer multiple of the current resolution");
    }
    if (num_intervals() % k != 0) throw InputError("time axis length is not a multiple of the resampling factor");
    ScenarioSet out;
    out.resolution_min = new_resolution_min;
    out.start_minute = start_minute;
    out.probabilities = probabilities;
    for (const auto& [c, g] : values) {
        Grid<double> coarse(g.rows(), g.cols() / k, 0.0);
        for (std::size_t s = 0; s < g.rows(); ++s) {
            for (std::size_t t = 0; t < coarse.cols(); ++t) {
                double sum = 0.0;
                for (std::size_t j = 0; j < k; ++j) sum += g(s, t * k + j);
                coarse(s, t) = sum / static_cast<double>(k);
            }
        }
        out.values.emplace(c, std::move(coarse));
    }
    return out;
}

std::vector<double> uniform_probabilities(std::size_t n) {
    return std::vector<double>(n, n > 0 ? 1.0 / static_cast<double>(n) : 0.0);
}

std::optional<std::size_t> PercentileTable::index_of(double pct) const {
    for (std::size_t k = 0; k < percentiles.size(); ++k) {
        if (std::abs(percentiles[k] - pct) < 1e-9) return k;
    }
    return std::nullopt;
}

double PercentileTable::value(double pct, std::size_t t) const {
    auto k = index_of(pct);
    if (!k) throw InputError(fmt::format("percentile {} is not tabulated for {}", pct, quantity));
    return values.at(*k, t);
}

std::vector<double> PercentileTable::series(double pct) const {
    auto k = index_of(pct);
    if (!k) throw InputError(fmt::format("percentile {} is not tabulated for {}", pct, quantity));
    auto r = values.row(*k);
    return {r.begin(), r.end()};
}

std::vector<double> all_percentiles() {
    std::vector<double> p(99);
    std::iota(p.begin(), p.end(), 1.0);
    return p;
}

namespace {

void check_pct(double pct) {
    if (!(pct > 0.0 && pct < 100.0)) throw InputError(fmt::format("percentile {} outside (0,100)", pct));
}

// Nearest rank over values already sorted through `order`.
double pick(std::span<const double> values, std::span<const double> probs, const std::vector<std::size_t>& order,
            double pct) {
    const std::size_t n = values.size();
    if (probs.empty()) {
        auto rank = static_cast<std::size_t>(std::ceil(pct * static_cast<double>(n) / 100.0 - 1e-9));
        rank = std::clamp<std::size_t>(rank, 1, n);
        return values[order[rank - 1]];
    }
    const double target = pct / 100.0 - 1e-12;
    double cum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        cum += probs[order[k]];
        if (cum >= target && probs[order[k]] > 0.0) return values[order[k]];
    }
    return values[order.back()];
}

std::vector<std::size_t> sort_order(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    return order;
}

}  // namespace

double nearest_rank_quantile(std::span<const double> values, std::span<const double> probs, double pct) {
    check_pct(pct);
    if (values.empty()) throw InputError("quantile of an empty sample");
    if (!probs.empty() && probs.size() != values.size()) throw InputError("probabilities do not match the sample");
    return pick(values, probs, sort_order(values), pct);
}

PercentileTable compute_percentiles(const Grid<double>& ensemble, std::span<const double> probs,
                                    std::span<const double> pcts, std::string quantity) {
    if (ensemble.rows() < 2) throw InputError("percentiles need at least 2 scenarios");
    for (double p : pcts) check_pct(p);
    if (!std::is_sorted(pcts.begin(), pcts.end())) throw InputError("percentiles must be ascending");
    if (!probs.empty() && probs.size() != ensemble.rows()) throw InputError("probabilities do not match the ensemble");

    // With uniform probabilities the general rule reduces to the rank formula.
    bool uniform = true;
    for (double p : probs) uniform = uniform && std::abs(p - probs[0]) < 1e-15;
    const std::span<const double> weights = uniform ? std::span<const double>{} : probs;

    PercentileTable out;
    out.quantity = std::move(quantity);
    out.percentiles.assign(pcts.begin(), pcts.end());
    out.values = Grid<double>(pcts.size(), ensemble.cols());
    std::vector<double> column(ensemble.rows());
    for (std::size_t t = 0; t < ensemble.cols(); ++t) {
        for (std::size_t s = 0; s < ensemble.rows(); ++s) column[s] = ensemble(s, t);
        const auto order = sort_order(column);
        for (std::size_t k = 0; k < pcts.size(); ++k) out.values(k, t) = pick(column, weights, order, pcts[k]);
    }
    return out;
}

PercentileTable compute_constituent_percentiles(const ScenarioSet& set, Constituent c, std::span<const double> pcts) {
    return compute_percentiles(set.at(c), set.probabilities, pcts, std::string(to_string(c)));
}

PercentileTable compute_net_load_percentiles(const PercentileTable& load, const PercentileTable& wind,
                                             const PercentileTable& solar) {
    if (wind.num_intervals() != load.num_intervals() || solar.num_intervals() != load.num_intervals()) {
        throw InputError("load, wind and solar percentile tables have different time axes");
    }
    PercentileTable out;
    out.quantity = "net_load";
    out.percentiles = load.percentiles;
    out.values = Grid<double>(load.percentiles.size(), load.num_intervals());
    for (std::size_t k = 0; k < load.percentiles.size(); ++k) {
        const double p = load.percentiles[k];
        const auto kw = wind.index_of(100.0 - p);
        const auto ks = solar.index_of(100.0 - p);
        if (!kw || !ks) throw InputError(fmt::format("net load percentile {} needs renewable percentile {}", p, 100.0 - p));
        for (std::size_t t = 0; t < load.num_intervals(); ++t) {
            out.values(k, t) = load.values(k, t) - wind.values(*kw, t) - solar.values(*ks, t);
        }
    }
    return out;
}

TierStructure build_account_tiers(const PercentileTable& quantity, double sign, std::span<const double> tier_percentiles,
                                  std::string account_id) {
    if (tier_percentiles.size() < 2) throw InputError("tiers need at least 2 percentiles");
    for (std::size_t k = 0; k < tier_percentiles.size(); ++k) {
        check_pct(tier_percentiles[k]);
        if (k > 0 && !(tier_percentiles[k] > tier_percentiles[k - 1])) {
            throw InputError("tier percentiles must be strictly increasing");
        }
    }
    const std::size_t n_levels = tier_percentiles.size();
    const std::size_t hours = quantity.num_intervals();
    TierStructure out;
    out.account_id = std::move(account_id);
    out.percentiles.assign(tier_percentiles.begin(), tier_percentiles.end());
    out.levels = Grid<double>(n_levels, hours);
    auto source_pct = [&](double q) { return sign < 0.0 ? 100.0 - q : q; };
    for (std::size_t s = 0; s < n_levels; ++s) {
        const double q = tier_percentiles[s];
        for (std::size_t t = 0; t < hours; ++t) out.levels(s, t) = sign * quantity.value(source_pct(q), t);
    }
    for (std::size_t r = 0; r + 1 < n_levels; ++r) {
        out.prob_up.push_back(tier_percentiles[r] / 100.0);
        out.prob_down.push_back(1.0 - tier_percentiles[r + 1] / 100.0);
    }
    out.reference.resize(hours);
    for (std::size_t t = 0; t < hours; ++t) out.reference[t] = sign * quantity.value(50.0, t);
    return out;
}

TierStructure build_tiers(const PercentileTable& net_load, const MarketConfig& cfg) {
    return build_account_tiers(net_load, -1.0, cfg.tier_percentiles, "aggregate");
}

double default_self_hedge_cost_up(const TierStructure& tiers, const MarketConfig& cfg) {
    if (tiers.prob_up.empty()) return 0.0;
    return tiers.prob_up.front() * cfg.rt_spin_scarcity;
}

// ---------------------------------------------------------------------------

namespace {

double mean_of(std::span<const double> v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double pop_std(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size()));
}

}  // namespace

std::vector<double> week_features(std::span<const double> da_mean, std::span<const double> da_std,
                                  std::span<const double> rt_actual) {
    if (da_mean.size() != da_std.size() || rt_actual.size() != da_mean.size() || da_mean.empty()) {
        throw InputError("week features need aligned, non-empty DA mean, DA std and RT series");
    }
    std::vector<double> z(da_mean.size());
    for (std::size_t t = 0; t < z.size(); ++t) {
        z[t] = da_std[t] > 0.0 ? (rt_actual[t] - da_mean[t]) / da_std[t] : 0.0;
    }
    return {mean_of(da_mean), mean_of(da_std), mean_of(z), pop_std(z)};
}

WeekClusterResult cluster_weeks(const std::vector<std::vector<double>>& features, int k) {
    const int n = static_cast<int>(features.size());
    if (k <= 0 || k > n) throw InputError(fmt::format("cluster count {} must be in [1, {}]", k, n));
    const std::size_t dim = features.front().size();
    for (const auto& f : features) {
        if (f.size() != dim) throw InputError("week feature vectors differ in length");
    }

    // z-score each feature; constant features drop out.
    std::vector<std::vector<double>> z(features);
    for (std::size_t d = 0; d < dim; ++d) {
        std::vector<double> col(static_cast<std::size_t>(n));
        for (int w = 0; w < n; ++w) col[static_cast<std::size_t>(w)] = features[static_cast<std::size_t>(w)][d];
        const double m = mean_of(col);
        const double sd = pop_std(col);
        for (int w = 0; w < n; ++w) {
            auto& x = z[static_cast<std::size_t>(w)][d];
            x = sd > 0.0 ? (x - m) / sd : 0.0;
        }
    }
    Grid<double> dist(static_cast<std::size_t>(n), static_cast<std::size_t>(n), 0.0);
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            double ss = 0.0;
            for (std::size_t d = 0; d < dim; ++d) {
                const double diff = z[static_cast<std::size_t>(a)][d] - z[static_cast<std::size_t>(b)][d];
                ss += diff * diff;
            }
            dist(static_cast<std::size_t>(a), static_cast<std::size_t>(b)) = std::sqrt(ss);
            dist(static_cast<std::size_t>(b), static_cast<std::size_t>(a)) = std::sqrt(ss);
        }
    }
    auto d = [&](int a, int b) { return dist(static_cast<std::size_t>(a), static_cast<std::size_t>(b)); };

    auto cost_of = [&](const std::vector<int>& medoids) {
        double total = 0.0;
        for (int w = 0; w < n; ++w) {
            double best = std::numeric_limits<double>::infinity();
            for (int m : medoids) best = std::min(best, d(w, m));
            total += best;
        }
        return total;
    };

    // BUILD: greedy seeding.
    std::vector<int> medoids;
    std::vector<bool> is_medoid(static_cast<std::size_t>(n), false);
    while (static_cast<int>(medoids.size()) < k) {
        int best_w = -1;
        double best_cost = std::numeric_limits<double>::infinity();
        for (int w = 0; w < n; ++w) {
            if (is_medoid[static_cast<std::size_t>(w)]) continue;
            medoids.push_back(w);
            const double c = cost_of(medoids);
            medoids.pop_back();
            if (c < best_cost - 1e-12) {
                best_cost = c;
                best_w = w;
            }
        }
        medoids.push_back(best_w);
        is_medoid[static_cast<std::size_t>(best_w)] = true;
    }

    // SWAP until no single exchange improves the objective.
    double current = cost_of(medoids);
    for (bool improved = true; improved;) {
        improved = false;
        for (std::size_t mi = 0; mi < medoids.size(); ++mi) {
            for (int w = 0; w < n; ++w) {
                if (is_medoid[static_cast<std::size_t>(w)]) continue;
                const int old = medoids[mi];
                medoids[mi] = w;
                const double c = cost_of(medoids);
                if (c < current - 1e-12) {
                    current = c;
                    is_medoid[static_cast<std::size_t>(old)] = false;
                    is_medoid[static_cast<std::size_t>(w)] = true;
                    improved = true;
                } else {
                    medoids[mi] = old;
                }
            }
        }
    }

    WeekClusterResult out;
    out.medoids = medoids;
    out.assignment.assign(static_cast<std::size_t>(n), 0);
    out.weights.assign(static_cast<std::size_t>(k), 0);
    for (int w = 0; w < n; ++w) {
        int best = 0;
        for (int c = 1; c < k; ++c) {
            if (d(w, medoids[static_cast<std::size_t>(c)]) < d(w, medoids[static_cast<std::size_t>(best)]) - 1e-12) best = c;
        }
        if (is_medoid[static_cast<std::size_t>(w)]) {
            best = static_cast<int>(std::find(medoids.begin(), medoids.end(), w) - medoids.begin());
        }
        out.assignment[static_cast<std::size_t>(w)] = best;
        out.weights[static_cast<std::size_t>(best)] += 1;
    }
    // Re-centre each cluster on the member with the smallest summed distance.
    out.objective = 0.0;
    for (int c = 0; c < k; ++c) {
        int best_m = medoids[static_cast<std::size_t>(c)];
        double best_sum = std::numeric_limits<double>::infinity();
        for (int w = 0; w < n; ++w) {
            if (out.assignment[static_cast<std::size_t>(w)] != c) continue;
            double sum = 0.0;
            for (int v = 0; v < n; ++v) {
                if (out.assignment[static_cast<std::size_t>(v)] == c) sum += d(w, v);
            }
            if (sum < best_sum - 1e-12) {
                best_sum = sum;
                best_m = w;
            }
        }
        out.medoids[static_cast<std::size_t>(c)] = best_m;
        out.objective += best_sum;
    }
    return out;
}

// ---------------------------------------------------------------------------

ForecastDiagnostics forecast_diagnostics(const Grid<double>& ensemble, std::span<const double> actuals) {
    if (ensemble.cols() != actuals.size()) {
        throw InputError(fmt::format("actuals have {} intervals, ensemble has {}", actuals.size(), ensemble.cols()));
    }
    if (ensemble.rows() < 2) throw InputError("diagnostics need at least 2 scenarios");
    const std::size_t n = ensemble.rows();
    const std::size_t T = ensemble.cols();
    ForecastDiagnostics out;
    const std::vector<double> pcts{5.0, 50.0, 95.0};
    const auto table = compute_percentiles(ensemble, {}, pcts, "net_load");
    double sum_err = 0.0;
    out.min_error_pct = std::numeric_limits<double>::infinity();
    out.max_error_pct = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < T; ++t) {
        std::size_t below = 0;
        std::size_t equal = 0;
        for (std::size_t s = 0; s < n; ++s) {
            if (ensemble(s, t) < actuals[t]) {
                ++below;
            } else if (ensemble(s, t) == actuals[t]) {
                ++equal;
            }
        }
        out.interval_rank.push_back(100.0 * (static_cast<double>(below) + 0.5 * static_cast<double>(equal)) /
                                    static_cast<double>(n));
        const double med = table.values(1, t);
        out.pi_width_pct.push_back(med != 0.0 ? 100.0 * (table.values(2, t) - table.values(0, t)) / std::abs(med)
                                              : std::numeric_limits<double>::quiet_NaN());
        const double err = med != 0.0 ? 100.0 * (actuals[t] - med) / std::abs(med) : 0.0;
        out.error_pct.push_back(err);
        sum_err += err;
        out.min_error_pct = std::min(out.min_error_pct, err);
        out.max_error_pct = std::max(out.max_error_pct, err);
    }
    out.mean_error_pct = T > 0 ? sum_err / static_cast<double>(T) : 0.0;
    if (T == 0) out.min_error_pct = out.max_error_pct = 0.0;
    out.nominal_percentiles = all_percentiles();
    for (double p : out.nominal_percentiles) {
        out.observed_rank.push_back(T > 0 ? nearest_rank_quantile(out.interval_rank, {}, p) : 0.0);
    }
    return out;
}

}  // namespace flexmarket
