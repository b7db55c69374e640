#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "atcd/features.hpp"
#include "atcd/types.hpp"

// Interaction graphs: one node per aircraft, an undirected edge wherever two
// aircraft's flight level ranges overlap.

namespace atcd {

struct FlRange {
    double lo = 0.0;
    double hi = 0.0;
};

// Span of levels the aircraft may occupy: [min(FL, CFL, XFL) - buffer,
// max(FL, CFL, XFL) + buffer].
FlRange fl_range(const AircraftState& a, double buffer = 10.0);

// Closed-interval overlap test of the two aircraft's level ranges. Touching
// ranges count as overlapping.
bool fl_ranges_overlap(const AircraftState& a, const AircraftState& b, double buffer = 10.0);

struct ScenarioGraph {
    double timestamp = 0.0;
    std::string sector_id;
    std::vector<std::vector<double>> node_features;    // n rows of length kNodeFeatureCount
    std::vector<std::string> node_ids;                 // callsigns
    std::vector<std::pair<int, int>> edges;            // unordered pairs, stored i < j
    std::vector<std::array<double, 2>> edge_features;  // separation zscore, closing maxabs
    std::optional<int> label_total;
    std::optional<std::vector<int>> label_per_node;

    // Raw states and edge statistics are carried along so ablation variants
    // can recompute edge features without the originating scenario.
    std::vector<AircraftState> aircraft;
    FeatureStat edge_sep_stat;
    FeatureStat edge_close_stat;

    int node_count() const { return static_cast<int>(node_ids.size()); }
    int edge_count() const { return static_cast<int>(edges.size()); }
};

ScenarioGraph build_graph(const Scenario& s, const NormalizationStats& stats, double fl_buffer = 10.0);

// Erdos-Renyi replacement of the edge set: one inclusion probability p drawn
// uniformly from [0,1] per graph, then each unordered pair kept with
// probability p. Edge features are recomputed for the new pairs.
ScenarioGraph randomize_edges(const ScenarioGraph& g, std::uint64_t rng_seed);

// Same nodes, no edges.
ScenarioGraph strip_edges(const ScenarioGraph& g);

// Drops node i together with its incident edges; surviving node features are
// carried over bitwise. Used by the ablation attribution.
ScenarioGraph remove_node(const ScenarioGraph& g, int i);

}  // namespace atcd
