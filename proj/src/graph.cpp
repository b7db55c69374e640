#include "atcd/graph.hpp"

#include <algorithm>
#include <stdexcept>

#include "atcd/errors.hpp"
#include "atcd/geodesy.hpp"
#include "atcd/rng.hpp"

namespace atcd {

namespace {

std::array<double, 2> encode_edge(const AircraftState& a, const AircraftState& b,
                                  const FeatureStat& sep_stat, const FeatureStat& close_stat) {
    const double sep = geodesy::separation_distance(a, b);
    const double close = geodesy::closing_speed(a, b);
    return {(sep - sep_stat.mean) / sep_stat.stdev, max_abs_scale(close, close_stat.bound)};
}

}  // namespace

FlRange fl_range(const AircraftState& a, double buffer) {
    const double lo = std::min({a.flight_level, static_cast<double>(a.cleared_fl),
                                static_cast<double>(a.exit_fl)});
    const double hi = std::max({a.flight_level, static_cast<double>(a.cleared_fl),
                                static_cast<double>(a.exit_fl)});
    return {lo - buffer, hi + buffer};
}

bool fl_ranges_overlap(const AircraftState& a, const AircraftState& b, double buffer) {
    const FlRange ra = fl_range(a, buffer);
    const FlRange rb = fl_range(b, buffer);
    return ra.lo <= rb.hi && rb.lo <= ra.hi;
}

ScenarioGraph build_graph(const Scenario& s, const NormalizationStats& stats, double fl_buffer) {
    if (s.aircraft.empty()) throw data_error("cannot build graph from empty scenario");
    ScenarioGraph g;
    g.timestamp = s.timestamp;
    g.sector_id = s.sector_id;
    g.aircraft = s.aircraft;
    g.edge_sep_stat = stats.edge_separation;
    g.edge_close_stat = stats.edge_closing;
    const int n = static_cast<int>(s.aircraft.size());
    g.node_ids.reserve(n);
    g.node_features.reserve(n);
    for (const auto& a : s.aircraft) {
        g.node_ids.push_back(a.callsign);
        g.node_features.push_back(encode_node_features(a, stats));
    }
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (!fl_ranges_overlap(s.aircraft[i], s.aircraft[j], fl_buffer)) continue;
            g.edges.emplace_back(i, j);
            g.edge_features.push_back(
                encode_edge(s.aircraft[i], s.aircraft[j], g.edge_sep_stat, g.edge_close_stat));
        }
    }
    if (s.labels) {
        std::vector<int> per_node(n);
        int total = 0;
        for (int i = 0; i < n; ++i) {
            per_node[i] = s.label_for(s.aircraft[i].callsign);
            total += per_node[i];
        }
        g.label_per_node = std::move(per_node);
        g.label_total = total;
    }
    return g;
}

ScenarioGraph randomize_edges(const ScenarioGraph& g, std::uint64_t rng_seed) {
    ScenarioGraph out = g;
    out.edges.clear();
    out.edge_features.clear();
    Rng rng(rng_seed);
    const double p = rng.uniform01();
    const int n = out.node_count();
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (rng.uniform01() >= p) continue;
            out.edges.emplace_back(i, j);
            out.edge_features.push_back(
                encode_edge(out.aircraft[i], out.aircraft[j], out.edge_sep_stat, out.edge_close_stat));
        }
    }
    return out;
}

ScenarioGraph strip_edges(const ScenarioGraph& g) {
    ScenarioGraph out = g;
    out.edges.clear();
    out.edge_features.clear();
    return out;
}

ScenarioGraph remove_node(const ScenarioGraph& g, int i) {
    if (i < 0 || i >= g.node_count())
        throw std::invalid_argument("remove_node: index out of range");
    ScenarioGraph out;
    out.timestamp = g.timestamp;
    out.sector_id = g.sector_id;
    out.edge_sep_stat = g.edge_sep_stat;
    out.edge_close_stat = g.edge_close_stat;
    for (int k = 0; k < g.node_count(); ++k) {
        if (k == i) continue;
        out.node_ids.push_back(g.node_ids[k]);
        out.node_features.push_back(g.node_features[k]);
        out.aircraft.push_back(g.aircraft[k]);
    }
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        const auto [a, b] = g.edges[e];
        if (a == i || b == i) continue;
        out.edges.emplace_back(a > i ? a - 1 : a, b > i ? b - 1 : b);
        out.edge_features.push_back(g.edge_features[e]);
    }
    if (g.label_per_node) {
        std::vector<int> per_node;
        int total = 0;
        for (int k = 0; k < g.node_count(); ++k) {
            if (k == i) continue;
            per_node.push_back((*g.label_per_node)[k]);
            total += per_node.back();
        }
        out.label_per_node = std::move(per_node);
        out.label_total = total;
    }
    return out;
}

}  // namespace atcd
