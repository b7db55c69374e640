#pragma once

#include <map>
#include <string>
#include <vector>

#include "atcd/types.hpp"

// Comparison heuristics: the minimum-clearance count and a configurable
// linear complexity model.

namespace atcd::baselines {

// +1 for every aircraft that is neither at its exit level nor already
// cleared toward it. Never exceeds the aircraft count.
int minimum_clearance(const Scenario& s);

// Speed/level cutoffs for the slow-high and fast-low factor counts.
struct LinearThresholds {
    double slow_speed_kt = 250.0;
    double fast_speed_kt = 400.0;
    double low_fl = 245.0;
    double high_fl = 275.0;
};

// Names of all supported factors, in output order.
const std::vector<std::string>& linear_factor_names();

// Extracts every factor value for one scenario.
std::map<std::string, double> linear_factors(const Scenario& s, const LinearThresholds& thresholds = {});

// Weighted sum of the factors. Factors missing from the weight map count as
// zero weight; an unknown factor name in the map is a config_error.
double linear_complexity(const Scenario& s, const std::map<std::string, double>& weights,
                         const LinearThresholds& thresholds = {});

}  // namespace atcd::baselines
