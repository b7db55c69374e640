#include "atcd/baselines.hpp"

#include <algorithm>

#include "atcd/errors.hpp"

namespace atcd::baselines {

int minimum_clearance(const Scenario& s) {
    int count = 0;
    for (const auto& a : s.aircraft) {
        const bool at_exit = a.flight_level == static_cast<double>(a.exit_fl);
        const bool cleared_to_exit = a.cleared_fl == a.exit_fl;
        if (!at_exit && !cleared_to_exit) ++count;
    }
    return count;
}

const std::vector<std::string>& linear_factor_names() {
    static const std::vector<std::string> names = {
        "aircraft_count", "climbing_count", "descending_count",
        "jet_count",      "turboprop_count", "piston_count",
        "low_band_count", "mid_band_count",  "high_band_count",
        "slow_high_count", "fast_low_count"};
    return names;
}

std::map<std::string, double> linear_factors(const Scenario& s, const LinearThresholds& th) {
    std::map<std::string, double> f;
    for (const auto& name : linear_factor_names()) f[name] = 0.0;
    f["aircraft_count"] = static_cast<double>(s.aircraft.size());
    for (const auto& a : s.aircraft) {
        if (a.cleared_fl > a.flight_level) f["climbing_count"] += 1.0;
        if (a.cleared_fl < a.flight_level) f["descending_count"] += 1.0;
        switch (a.engine_type) {
            case EngineType::jet: f["jet_count"] += 1.0; break;
            case EngineType::turboprop: f["turboprop_count"] += 1.0; break;
            case EngineType::piston: f["piston_count"] += 1.0; break;
        }
        if (a.flight_level < th.low_fl) f["low_band_count"] += 1.0;
        else if (a.flight_level > th.high_fl) f["high_band_count"] += 1.0;
        else f["mid_band_count"] += 1.0;
        if (a.ground_speed < th.slow_speed_kt && a.flight_level > th.high_fl)
            f["slow_high_count"] += 1.0;
        if (a.ground_speed > th.fast_speed_kt && a.flight_level < th.low_fl)
            f["fast_low_count"] += 1.0;
    }
    return f;
}

double linear_complexity(const Scenario& s, const std::map<std::string, double>& weights,
                         const LinearThresholds& th) {
    const auto& names = linear_factor_names();
    for (const auto& [name, weight] : weights)
        if (std::find(names.begin(), names.end(), name) == names.end())
            throw config_error("unknown linear complexity factor: " + name);
    const auto factors = linear_factors(s, th);
    double total = 0.0;
    for (const auto& [name, value] : factors) {
        const auto it = weights.find(name);
        if (it != weights.end()) total += it->second * value;
    }
    return total;
}

}  // namespace atcd::baselines
