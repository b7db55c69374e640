#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "atcd/types.hpp"

// Proximity-threshold weighted graphs and the four spatio-temporal
// complexity indicators, plus lag-correlation between time series.

namespace atcd::indicators {

struct WeightedEdge {
    std::size_t i = 0;
    std::size_t j = 0;  // i < j
    double w = 0.0;     // in [0, 1]
};

struct IndicatorGraph {
    std::size_t vertex_count = 0;
    std::vector<WeightedEdge> edges;
};

struct IndicatorSet {
    double edge_density = 0.0;
    double strength = 0.0;
    double clustering_coefficient = 0.0;
    double nearest_neighbour_degree = 0.0;
};

// Connects aircraft within both thresholds. Weights scale linearly from 1 at
// the safety distances (5 NM, 1000 ft) to 0 at the thresholds, the pair
// weight being the smaller of the horizontal and vertical components.
// Thresholds at or below the safety distances are a config_error.
IndicatorGraph build_indicator_graph(const Scenario& s, double h_thresh_nm = 48.0,
                                     double v_thresh_ft = 4400.0);

// Edge count over n(n-1)/2. Zero for fewer than 2 vertices.
double edge_density(const IndicatorGraph& g);

// Mean over all vertices of the sum of incident edge weights.
double mean_strength(const IndicatorGraph& g);

// Mean Onnela weighted clustering coefficient: per-vertex average of
// cube-root triangle weights (weights rescaled by the graph maximum),
// vertices of degree < 2 contributing zero.
double mean_clustering(const IndicatorGraph& g);

// Mean weighted nearest-neighbour degree over vertices with positive
// strength: (sum_j w_ij * k_j) / s_i. Zero when no vertex qualifies.
double mean_nnd(const IndicatorGraph& g);

IndicatorSet compute_indicators(const IndicatorGraph& g);

struct LagCorrelation {
    int best_lag = 0;
    std::vector<std::optional<double>> r_per_lag;  // index = lag, nullopt = undefined
};

// Pearson r between a(t) and b(t+lag) for lag = 0..max_lag. NaN entries mark
// gaps and are dropped pairwise. Lags with fewer than 3 valid pairs or a
// constant side are undefined and excluded from the argmax; if every lag is
// undefined a numeric_error is thrown.
LagCorrelation lag_correlation(const std::vector<double>& a, const std::vector<double>& b,
                               int max_lag = 20);

}  // namespace atcd::indicators
