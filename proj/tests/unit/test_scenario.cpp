#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "flexmarket/errors.hpp"
#include "flexmarket/scenario.hpp"

using namespace flexmarket;

namespace {

// Sort-and-index quantile: the k-th smallest with k = ceil(p N / 100),
// computed in integer arithmetic for integer p.
double sorted_oracle(std::vector<double> v, int p) {
    std::sort(v.begin(), v.end());
    const long n = static_cast<long>(v.size());
    long k = (p * n + 99) / 100;
    if (k < 1) k = 1;
    return v[static_cast<std::size_t>(k - 1)];
}

// Exhaustive k-partition search: minimum total of per-cluster medoid costs.
double brute_force_partition(const std::vector<std::vector<double>>& pts, int k, std::vector<int>& best_assign) {
    const int n = static_cast<int>(pts.size());
    auto dist = [&](int a, int b) {
        double s = 0;
        for (std::size_t d = 0; d < pts[0].size(); ++d) s += (pts[a][d] - pts[b][d]) * (pts[a][d] - pts[b][d]);
        return std::sqrt(s);
    };
    double best = 1e300;
    std::vector<int> assign(n, 0);
    long total = 1;
    for (int i = 0; i < n; ++i) total *= k;
    for (long code = 0; code < total; ++code) {
        long c = code;
        for (int i = 0; i < n; ++i) {
            assign[i] = static_cast<int>(c % k);
            c /= k;
        }
        double cost = 0;
        bool empty = false;
        for (int cl = 0; cl < k; ++cl) {
            double cl_best = 1e300;
            for (int m = 0; m < n; ++m) {
                if (assign[m] != cl) continue;
                double s = 0;
                for (int w = 0; w < n; ++w) {
                    if (assign[w] == cl) s += dist(m, w);
                }
                cl_best = std::min(cl_best, s);
            }
            if (cl_best == 1e300) empty = true;
            cost += cl_best;
        }
        if (!empty && cost < best - 1e-12) {
            best = cost;
            best_assign = assign;
        }
    }
    return best;
}

bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < a.size(); ++j) {
            if ((a[i] == a[j]) != (b[i] == b[j])) return false;
        }
    }
    return true;
}

ScenarioSet single(Constituent c, Grid<double> g) {
    ScenarioSet s;
    s.probabilities = uniform_probabilities(g.rows());
    s.values.emplace(c, std::move(g));
    return s;
}

}  // namespace

TEST(Percentiles, IdenticalScenarios) {
    auto set = single(Constituent::load, Grid<double>(7, 3, 50.0));
    auto t = compute_constituent_percentiles(set, Constituent::load, all_percentiles());
    for (double v : t.values.data()) EXPECT_EQ(v, 50.0);
}

TEST(Percentiles, TwoEquiprobableScenarios) {
    Grid<double> g(2, 1);
    g(1, 0) = 100.0;
    auto set = single(Constituent::load, g);
    const std::vector<double> p{5, 50, 95};
    auto t = compute_constituent_percentiles(set, Constituent::load, p);
    EXPECT_GE(t.value(50, 0), 0.0);
    EXPECT_LE(t.value(50, 0), 100.0);
    EXPECT_LE(t.value(5, 0), t.value(95, 0));
}

TEST(Percentiles, MatchSortedOracleOn5000Samples) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n(1000.0, 80.0);
    Grid<double> g(5000, 4);
    for (std::size_t s = 0; s < 5000; ++s) {
        for (std::size_t t = 0; t < 4; ++t) g(s, t) = n(rng);
    }
    auto set = single(Constituent::load, g);
    auto table = compute_constituent_percentiles(set, Constituent::load, all_percentiles());
    for (std::size_t t = 0; t < 4; ++t) {
        auto col = g.column(t);
        for (int p = 1; p <= 99; ++p) EXPECT_EQ(table.value(p, t), sorted_oracle(col, p)) << "p=" << p << " t=" << t;
        for (int p = 2; p <= 99; ++p) EXPECT_LE(table.value(p - 1, t), table.value(p, t));
    }
}

TEST(Percentiles, WeightedRuleWithUnequalProbabilities) {
    const std::vector<double> v{10, 20, 30};
    const std::vector<double> pr{0.5, 0.25, 0.25};
    EXPECT_EQ(nearest_rank_quantile(v, pr, 50), 10.0);
    EXPECT_EQ(nearest_rank_quantile(v, pr, 51), 20.0);
    EXPECT_EQ(nearest_rank_quantile(v, pr, 76), 30.0);
}

TEST(Percentiles, OutOfRangeIsInputError) {
    auto set = single(Constituent::load, Grid<double>(3, 1, 1.0));
    const std::vector<double> bad{0};
    EXPECT_THROW((void)compute_constituent_percentiles(set, Constituent::load, bad), InputError);
    const std::vector<double> bad2{100};
    EXPECT_THROW((void)compute_constituent_percentiles(set, Constituent::load, bad2), InputError);
}

namespace {

PercentileTable table_of(std::string q, std::vector<double> pcts, std::vector<double> vals) {
    PercentileTable t;
    t.quantity = std::move(q);
    t.percentiles = pcts;
    t.values = Grid<double>(pcts.size(), 1);
    for (std::size_t k = 0; k < pcts.size(); ++k) t.values(k, 0) = vals[k];
    return t;
}

}  // namespace

TEST(NetLoad, ComplementaryPercentiles) {
    auto load = table_of("load", {5, 50, 95}, {30000, 35000, 40000});
    auto wind = table_of("wind", {5, 50, 95}, {4000, 7000, 10000});
    auto solar = table_of("solar", {5, 50, 95}, {500, 1200, 2000});
    auto nl = compute_net_load_percentiles(load, wind, solar);
    EXPECT_EQ(nl.value(5, 0), 18000.0);
    EXPECT_EQ(nl.value(50, 0), 35000.0 - 7000.0 - 1200.0);
    EXPECT_EQ(nl.value(95, 0), 40000.0 - 4000.0 - 500.0);
}

TEST(NetLoad, ZeroRenewables) {
    auto load = table_of("load", {5, 50, 95}, {1, 2, 3});
    auto zero = table_of("w", {5, 50, 95}, {0, 0, 0});
    auto nl = compute_net_load_percentiles(load, zero, zero);
    EXPECT_EQ(nl.values, load.values);
}

TEST(NetLoad, MissingComplementThrows) {
    auto load = table_of("load", {5, 50}, {1, 2});
    auto wind = table_of("wind", {5, 50}, {0, 0});
    EXPECT_THROW((void)compute_net_load_percentiles(load, wind, wind), InputError);
}

TEST(Tiers, DefaultProbabilitiesAndSelfHedgeCost) {
    MarketConfig cfg;
    Grid<double> g(101, 1);
    for (int s = 0; s <= 100; ++s) g(static_cast<std::size_t>(s), 0) = s;
    auto nl = compute_percentiles(g, {}, all_percentiles(), "net_load");
    auto tiers = build_tiers(nl, cfg);
    ASSERT_EQ(tiers.num_levels(), 9u);
    ASSERT_EQ(tiers.num_tiers(), 8u);
    EXPECT_EQ(tiers.prob_up.front(), 0.05);
    EXPECT_EQ(default_self_hedge_cost_up(tiers, cfg), 225.0);
    for (std::size_t r = 1; r < tiers.num_tiers(); ++r) {
        EXPECT_GT(tiers.prob_up[r], tiers.prob_up[r - 1]);
        EXPECT_LT(tiers.prob_down[r], tiers.prob_down[r - 1]);
    }
    EXPECT_NEAR(tiers.prob_down.back(), 0.05, 1e-15);
}

TEST(Tiers, UniformNetLoadWidthsFollowPercentileGaps) {
    // Uniform on [0,100]: the p-th percentile is p.
    Grid<double> g(101, 2);
    for (int s = 0; s <= 100; ++s) {
        g(static_cast<std::size_t>(s), 0) = s;
        g(static_cast<std::size_t>(s), 1) = s;
    }
    auto nl = compute_percentiles(g, {}, all_percentiles(), "net_load");
    MarketConfig cfg;
    auto tiers = build_tiers(nl, cfg);
    const auto& q = cfg.tier_percentiles;
    double total = 0;
    for (std::size_t r = 0; r < tiers.num_tiers(); ++r) {
        EXPECT_DOUBLE_EQ(tiers.width(r, 0), q[r + 1] - q[r]);
        total += tiers.width(r, 0);
    }
    EXPECT_EQ(total, tiers.levels(8, 0) - tiers.levels(0, 0));
    // tier between the 50th and 65th generation-space percentiles is 15 MW wide
    EXPECT_DOUBLE_EQ(tiers.width(4, 1), 15.0);
    EXPECT_EQ(tiers.reference[0], -50.0);
}

TEST(Tiers, TooFewPercentiles) {
    MarketConfig cfg;
    cfg.tier_percentiles = {50};
    auto nl = table_of("nl", {50}, {1});
    EXPECT_THROW((void)build_tiers(nl, cfg), InputError);
}

TEST(Clustering, SingletonClusters) {
    std::vector<std::vector<double>> f{{1, 2}, {3, 1}, {0, 0}, {5, 5}};
    auto r = cluster_weeks(f, 4);
    for (int w : r.weights) EXPECT_EQ(w, 1);
    for (int c = 0; c < 4; ++c) EXPECT_EQ(r.assignment[static_cast<std::size_t>(r.medoids[static_cast<std::size_t>(c)])], c);
}

TEST(Clustering, SeparatedGroupsMatchExhaustiveOracle) {
    std::mt19937 rng(3);
    std::normal_distribution<double> n(0.0, 0.3);
    std::vector<std::vector<double>> f;
    for (int w = 0; w < 8; ++w) {
        const double base = w % 2 == 0 ? 0.0 : 10.0;
        f.push_back({base + n(rng), base + n(rng), n(rng), 1.0 + n(rng)});
    }
    // Oracle operates on the same z-scored features.
    auto z = f;
    for (std::size_t d = 0; d < 4; ++d) {
        double m = 0;
        for (auto& x : f) m += x[d];
        m /= 8;
        double ss = 0;
        for (auto& x : f) ss += (x[d] - m) * (x[d] - m);
        const double sd = std::sqrt(ss / 8);
        for (std::size_t w = 0; w < 8; ++w) z[w][d] = (f[w][d] - m) / sd;
    }
    std::vector<int> oracle;
    const double best = brute_force_partition(z, 2, oracle);
    auto r = cluster_weeks(f, 2);
    EXPECT_TRUE(same_partition(r.assignment, oracle));
    EXPECT_NEAR(r.objective, best, 1e-9);
    EXPECT_EQ(r.weights[0] + r.weights[1], 8);
}

TEST(Clustering, MedoidMinimisesSummedDistanceInItsCluster) {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::vector<double>> f(30, std::vector<double>(4));
    for (auto& x : f) {
        for (auto& v : x) v = u(rng);
    }
    auto r = cluster_weeks(f, 5);
    int sum = 0;
    for (int w : r.weights) sum += w;
    EXPECT_EQ(sum, 30);
    for (int c = 0; c < 5; ++c) EXPECT_EQ(r.assignment[static_cast<std::size_t>(r.medoids[static_cast<std::size_t>(c)])], c);
}

TEST(Clustering, IdenticalWeeks) {
    std::vector<std::vector<double>> f(6, std::vector<double>{1, 2, 3, 4});
    auto r = cluster_weeks(f, 3);
    EXPECT_EQ(r.weights[0] + r.weights[1] + r.weights[2], 6);
}

TEST(Clustering, BadK) {
    std::vector<std::vector<double>> f(3, std::vector<double>{1});
    EXPECT_THROW((void)cluster_weeks(f, 0), InputError);
    EXPECT_THROW((void)cluster_weeks(f, 4), InputError);
}

TEST(Clustering, WeekFeatures) {
    const std::vector<double> m{10, 20};
    const std::vector<double> s{2, 4};
    const std::vector<double> a{12, 16};
    auto f = week_features(m, s, a);
    EXPECT_EQ(f[0], 15.0);
    EXPECT_EQ(f[1], 3.0);
    EXPECT_EQ(f[2], 0.0);  // z = {1, -1}
    EXPECT_EQ(f[3], 1.0);
}

TEST(Diagnostics, PerfectForecast) {
    Grid<double> g(11, 5);
    for (std::size_t s = 0; s < 11; ++s) {
        for (std::size_t t = 0; t < 5; ++t) g(s, t) = 100.0 + static_cast<double>(s) - 5.0;
    }
    const std::vector<double> actual(5, 100.0);
    auto d = forecast_diagnostics(g, actual);
    EXPECT_EQ(d.observed_rank[49], 50.0);
    EXPECT_EQ(d.mean_error_pct, 0.0);
    EXPECT_NEAR(d.pi_width_pct[0], 10.0, 1e-12);
}

TEST(Diagnostics, ActualAboveEveryScenario) {
    Grid<double> g(10, 3, 1.0);
    const std::vector<double> actual(3, 5.0);
    auto d = forecast_diagnostics(g, actual);
    for (double r : d.observed_rank) EXPECT_EQ(r, 100.0);
}

TEST(Diagnostics, MisalignedAxes) {
    Grid<double> g(10, 3, 1.0);
    const std::vector<double> actual(4, 5.0);
    EXPECT_THROW((void)forecast_diagnostics(g, actual), InputError);
}

TEST(Synthetic, ZeroNoiseReproducesProfile) {
    const std::vector<double> profile{1, 2, 3};
    NoiseConfig n;
    n.scenarios = 4;
    auto s = generate_synthetic_scenarios(profile, n, 1);
    for (std::size_t k = 0; k < 4; ++k) {
        for (std::size_t t = 0; t < 3; ++t) EXPECT_EQ(s.at(Constituent::load)(k, t), profile[t]);
    }
}

TEST(Synthetic, SameSeedIsBitwiseIdentical) {
    const std::vector<double> profile{10, 20, 30, 40};
    NoiseConfig n;
    n.scenarios = 50;
    n.std_mw = 3;
    n.ar1 = 0.7;
    auto a = generate_synthetic_scenarios(profile, n, 42);
    auto b = generate_synthetic_scenarios(profile, n, 42);
    EXPECT_EQ(a.at(Constituent::load), b.at(Constituent::load));
    auto c = generate_synthetic_scenarios(profile, n, 43);
    EXPECT_NE(a.at(Constituent::load), c.at(Constituent::load));
}

TEST(Synthetic, EnsembleStdMatchesNoise) {
    const std::vector<double> profile(6, 500.0);
    NoiseConfig n;
    n.scenarios = 10000;
    n.std_mw = 5.0;
    n.ar1 = 0.8;
    auto s = generate_synthetic_scenarios(profile, n, 2024);
    const auto& g = s.at(Constituent::load);
    for (std::size_t t = 0; t < 6; ++t) {
        double mean = 0;
        for (std::size_t k = 0; k < g.rows(); ++k) mean += g(k, t);
        mean /= static_cast<double>(g.rows());
        double ss = 0;
        for (std::size_t k = 0; k < g.rows(); ++k) ss += (g(k, t) - mean) * (g(k, t) - mean);
        const double sd = std::sqrt(ss / static_cast<double>(g.rows() - 1));
        EXPECT_NEAR(sd, 5.0, 0.1) << "t=" << t;
        EXPECT_NEAR(mean, 500.0, 0.25);
    }
}

TEST(Synthetic, NonPositiveCount) {
    const std::vector<double> profile{1};
    NoiseConfig n;
    n.scenarios = 0;
    EXPECT_THROW((void)generate_synthetic_scenarios(profile, n, 1), InputError);
}

TEST(ScenarioCsv, RoundTripAndNetLoad) {
    NoiseConfig n;
    n.scenarios = 3;
    n.std_mw = 1;
    n.resolution_min = 15;
    const std::vector<double> profile{100, 101, 102, 103};
    auto load = generate_synthetic_scenarios(profile, n, 1);
    n.constituent = Constituent::wind;
    auto wind = generate_synthetic_scenarios(profile, n, 2);
    load.start_minute = wind.start_minute = parse_timestamp("2018-03-01T00:00");
    auto set = merge_scenario_sets({load, wind});
    const auto path = std::filesystem::temp_directory_path() / "flexmarket_scen_roundtrip.csv";
    write_scenarios_csv(set, path);
    auto back = read_scenarios_csv(path);
    std::filesystem::remove(path);
    EXPECT_EQ(back.resolution_min, 15.0);
    EXPECT_EQ(back.start_minute, set.start_minute);
    EXPECT_EQ(back.at(Constituent::load), set.at(Constituent::load));
    auto nl = back.net_load();
    EXPECT_EQ(nl(1, 2), set.at(Constituent::load)(1, 2) - set.at(Constituent::wind)(1, 2));
    auto hourly = back.resample_mean(60);
    EXPECT_EQ(hourly.num_intervals(), 1u);
}

TEST(ScenarioCsv, Timestamps) {
    EXPECT_EQ(format_timestamp(parse_timestamp("2020-02-29T23:45")), "2020-02-29T23:45");
    EXPECT_EQ(parse_timestamp("1970-01-02T00:00"), 1440);
    EXPECT_THROW((void)parse_timestamp("2020/01/01"), InputError);
}
