#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "atcd/graph.hpp"
#include "atcd/train.hpp"
#include "atcd/types.hpp"

// Ablation-based per-aircraft task demand: phi_i = C(G) - C(G without
// aircraft i), where C is the ensemble's clamped graph-head median.

namespace atcd::demand {

struct DemandReport {
    double timestamp = 0.0;
    std::vector<std::pair<std::string, double>> per_aircraft;  // (callsign, phi), node order
    double scenario_total = 0.0;      // sum of phi values
    double baseline_prediction = 0.0; // C(G)
    double p10 = 0.0, p90 = 0.0;      // graph-head quantile context
};

// Predicted clearance count C(G). The empty graph counts 0 by convention
// rather than evaluating the model on it.
double clearance_count(const Ensemble& e, const ScenarioGraph& g);

// phi for node i; may be negative. Index out of range is an argument error.
double aircraft_demand(const Ensemble& e, const ScenarioGraph& g, int i);

// phi for every aircraft (n+1 ensemble evaluations) plus the graph context.
DemandReport scenario_demand(const Ensemble& e, const ScenarioGraph& g);

struct TimelinePoint {
    double t = 0.0;
    std::optional<DemandReport> report;  // missing when no scenario covers the tick
};

// One report per interval tick across the stream's time span; ticks with no
// scenario yield explicit gaps. Scenarios must be time-ordered.
std::vector<TimelinePoint> demand_timeline(const Ensemble& e,
                                           const std::vector<Scenario>& stream,
                                           double interval_s = 60.0);

}  // namespace atcd::demand
