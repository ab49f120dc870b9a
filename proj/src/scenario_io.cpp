#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "flexmarket/csv.hpp"
#include "flexmarket/errors.hpp"
#include "flexmarket/scenario.hpp"

namespace flexmarket {

ScenarioSet generate_synthetic_scenarios(std::span<const double> profile, const NoiseConfig& noise, std::uint64_t seed) {
    if (noise.scenarios <= 0) throw InputError("synthetic scenario count must be positive");
    if (noise.std_mw < 0.0 || noise.relative_std < 0.0) throw InputError("noise std must be non-negative");
    if (!(noise.ar1 > -1.0 && noise.ar1 < 1.0)) throw InputError("ar1 coefficient must lie in (-1, 1)");
    const auto n = static_cast<std::size_t>(noise.scenarios);
    const std::size_t T = profile.size();
    Grid<double> g(n, T);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    // Innovation scaled so the stationary std of the AR(1) process is 1.
    const double innov = std::sqrt(1.0 - noise.ar1 * noise.ar1);
    for (std::size_t s = 0; s < n; ++s) {
        double e = normal(rng);
        for (std::size_t t = 0; t < T; ++t) {
            if (t > 0) e = noise.ar1 * e + innov * normal(rng);
            const double sd = noise.std_mw + noise.relative_std * std::abs(profile[t]);
            double v = profile[t] + sd * e;
            if (noise.floor) v = std::max(v, *noise.floor);
            if (noise.cap) v = std::min(v, *noise.cap);
            g(s, t) = v;
        }
    }
    ScenarioSet out;
    out.resolution_min = noise.resolution_min;
    out.probabilities = uniform_probabilities(n);
    out.values.emplace(noise.constituent, std::move(g));
    return out;
}

ScenarioSet merge_scenario_sets(const std::vector<ScenarioSet>& parts) {
    if (parts.empty()) return {};
    ScenarioSet out;
    out.resolution_min = parts.front().resolution_min;
    out.start_minute = parts.front().start_minute;
    out.probabilities = parts.front().probabilities;
    for (const auto& p : parts) {
        if (p.resolution_min != out.resolution_min || p.start_minute != out.start_minute) {
            throw InputError("scenario sets have different time axes");
        }
        if (p.num_scenarios() != parts.front().num_scenarios() || p.num_intervals() != parts.front().num_intervals()) {
            throw InputError("scenario sets have different shapes");
        }
        for (const auto& [c, g] : p.values) {
            if (!out.values.emplace(c, g).second) {
                throw InputError(fmt::format("constituent {} appears twice", to_string(c)));
            }
        }
    }
    return out;
}

namespace {

// Days since 1970-01-01 for a proleptic Gregorian date.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const auto doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp < 10 ? mp + 3 : mp - 9;
    y = static_cast<int>(static_cast<std::int64_t>(yoe) + era * 400 + (m <= 2));
}

Constituent constituent_from(const std::string& s) {
    if (s == "load") return Constituent::load;
    if (s == "wind") return Constituent::wind;
    if (s == "solar") return Constituent::solar;
    if (s == "aggregate" || s == "net_load") return Constituent::aggregate;
    throw InputError("unknown constituent '" + s + "'");
}

}  // namespace

std::string format_timestamp(std::int64_t minute) {
    std::int64_t days = minute / 1440;
    std::int64_t rem = minute % 1440;
    if (rem < 0) {
        rem += 1440;
        --days;
    }
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    civil_from_days(days, y, m, d);
    return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}", y, m, d, rem / 60, rem % 60);
}

std::int64_t parse_timestamp(const std::string& text) {
    int y = 0;
    unsigned mo = 0;
    unsigned d = 0;
    unsigned h = 0;
    unsigned mi = 0;
    char sep = 0;
    if (std::sscanf(text.c_str(), "%d-%u-%u%c%u:%u", &y, &mo, &d, &sep, &h, &mi) != 6 || (sep != 'T' && sep != ' ') ||
        mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59) {
        throw InputError("bad timestamp '" + text + "' (expected YYYY-MM-DDTHH:MM)");
    }
    return days_from_civil(y, mo, d) * 1440 + static_cast<std::int64_t>(h) * 60 + mi;
}

void write_scenarios_csv(const ScenarioSet& set, const std::filesystem::path& path) {
    CsvWriter w(path, {"constituent", "scenario", "timestamp", "mw"});
    for (const auto& [c, g] : set.values) {
        for (std::size_t s = 0; s < g.rows(); ++s) {
            for (std::size_t t = 0; t < g.cols(); ++t) {
                const auto minute = set.start_minute + static_cast<std::int64_t>(std::llround(static_cast<double>(t) * set.resolution_min));
                w.row({std::string(to_string(c)), std::to_string(s), format_timestamp(minute), format_number(g(s, t))});
            }
        }
    }
}

ScenarioSet read_scenarios_csv(const std::filesystem::path& path) {
    const CsvTable table = read_csv(path);
    const auto ic = table.column_index("constituent");
    const auto is = table.column_index("scenario");
    const auto it = table.column_index("timestamp");
    const auto iv = table.column_index("mw");

    std::map<Constituent, std::map<std::string, std::map<std::int64_t, double>>> raw;
    std::map<std::int64_t, int> stamps;
    std::map<std::string, int> scenario_ids;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const auto c = constituent_from(row[ic]);
        const auto minute = parse_timestamp(row[it]);
        double v = 0.0;
        try {
            std::size_t used = 0;
            v = std::stod(row[iv], &used);
            if (used != row[iv].size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw InputError(fmt::format("{}:{}: bad MW value '{}'", path.string(), r + 2, row[iv]));
        }
        if (!raw[c][row[is]].emplace(minute, v).second) {
            throw InputError(fmt::format("{}:{}: duplicate entry", path.string(), r + 2));
        }
        stamps.emplace(minute, 0);
        scenario_ids.emplace(row[is], 0);
    }
    if (raw.empty()) throw InputError(path.string() + ": no scenario rows");

    // Scenario ids sort numerically when they are integers, else lexically.
    std::vector<std::string> ids;
    for (const auto& [id, _] : scenario_ids) ids.push_back(id);
    auto numeric = [](const std::string& s) {
        return !s.empty() && s.find_first_not_of("0123456789") == std::string::npos;
    };
    if (std::all_of(ids.begin(), ids.end(), numeric)) {
        std::sort(ids.begin(), ids.end(), [](const std::string& a, const std::string& b) { return std::stoll(a) < std::stoll(b); });
    }
    std::vector<std::int64_t> times;
    for (const auto& [m, _] : stamps) times.push_back(m);
    double resolution = 60.0;
    if (times.size() > 1) {
        resolution = static_cast<double>(times[1] - times[0]);
        for (std::size_t k = 1; k < times.size(); ++k) {
            if (static_cast<double>(times[k] - times[k - 1]) != resolution) {
                throw InputError(path.string() + ": timestamps are not evenly spaced");
            }
        }
    }
    ScenarioSet out;
    out.resolution_min = resolution;
    out.start_minute = times.front();
    out.probabilities = uniform_probabilities(ids.size());
    for (const auto& [c, by_scenario] : raw) {
        Grid<double> g(ids.size(), times.size());
        for (std::size_t s = 0; s < ids.size(); ++s) {
            auto f = by_scenario.find(ids[s]);
            if (f == by_scenario.end() || f->second.size() != times.size()) {
                throw InputError(fmt::format("{}: {} scenario {} does not cover the time axis", path.string(),
                                             to_string(c), ids[s]));
            }
            std::size_t t = 0;
            for (const auto& [m, v] : f->second) g(s, t++) = v;
        }
        out.values.emplace(c, std::move(g));
    }
    out.validate();
    return out;
}

}  // namespace flexmarket
