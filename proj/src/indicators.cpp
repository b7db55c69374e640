#include "atcd/indicators.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "atcd/errors.hpp"
#include "atcd/geodesy.hpp"

namespace atcd::indicators {

namespace {

constexpr double kSafetyHorizNm = 5.0;
constexpr double kSafetyVertFt = 1000.0;

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

std::vector<double> strengths(const IndicatorGraph& g) {
    std::vector<double> s(g.vertex_count, 0.0);
    for (const auto& e : g.edges) {
        s[e.i] += e.w;
        s[e.j] += e.w;
    }
    return s;
}

// Degree counts only edges with positive weight; a zero-weight edge marks a
// pair exactly at the threshold and carries no interaction.
std::vector<int> degrees(const IndicatorGraph& g) {
    std::vector<int> k(g.vertex_count, 0);
    for (const auto& e : g.edges)
        if (e.w > 0.0) {
            ++k[e.i];
            ++k[e.j];
        }
    return k;
}

}  // namespace

IndicatorGraph build_indicator_graph(const Scenario& s, double h_thresh_nm, double v_thresh_ft) {
    if (h_thresh_nm <= kSafetyHorizNm)
        throw config_error("horizontal threshold must exceed the 5 NM safety distance");
    if (v_thresh_ft <= kSafetyVertFt)
        throw config_error("vertical threshold must exceed the 1000 ft safety distance");
    IndicatorGraph g;
    g.vertex_count = s.aircraft.size();
    for (std::size_t i = 0; i < s.aircraft.size(); ++i)
        for (std::size_t j = i + 1; j < s.aircraft.size(); ++j) {
            const auto& a = s.aircraft[i];
            const auto& b = s.aircraft[j];
            const double d_h = geodesy::haversine_nm(a.lat, a.lon, b.lat, b.lon);
            const double d_v = std::abs(a.flight_level - b.flight_level) * 100.0;
            if (d_h > h_thresh_nm || d_v > v_thresh_ft) continue;
            const double w_h = clamp01((h_thresh_nm - d_h) / (h_thresh_nm - kSafetyHorizNm));
            const double w_v = clamp01((v_thresh_ft - d_v) / (v_thresh_ft - kSafetyVertFt));
            g.edges.push_back({i, j, std::min(w_h, w_v)});
        }
    return g;
}

double edge_density(const IndicatorGraph& g) {
    if (g.vertex_count < 2) return 0.0;
    const double pairs = static_cast<double>(g.vertex_count) *
                         static_cast<double>(g.vertex_count - 1) / 2.0;
    return static_cast<double>(g.edges.size()) / pairs;
}

double mean_strength(const IndicatorGraph& g) {
    if (g.vertex_count == 0) return 0.0;
    const auto s = strengths(g);
    double total = 0.0;
    for (double v : s) total += v;
    return total / static_cast<double>(g.vertex_count);
}

double mean_clustering(const IndicatorGraph& g) {
    if (g.vertex_count == 0) return 0.0;
    double max_w = 0.0;
    for (const auto& e : g.edges) max_w = std::max(max_w, e.w);
    if (max_w <= 0.0) return 0.0;

    // Dense weight lookup; scenario graphs are small.
    std::vector<std::vector<double>> w(g.vertex_count, std::vector<double>(g.vertex_count, 0.0));
    for (const auto& e : g.edges) {
        w[e.i][e.j] = e.w / max_w;
        w[e.j][e.i] = e.w / max_w;
    }
    const auto k = degrees(g);
    double total = 0.0;
    for (std::size_t i = 0; i < g.vertex_count; ++i) {
        if (k[i] < 2) continue;
        double tri = 0.0;
        for (std::size_t j = 0; j < g.vertex_count; ++j) {
            if (w[i][j] <= 0.0) continue;
            for (std::size_t l = j + 1; l < g.vertex_count; ++l) {
                if (w[i][l] <= 0.0 || w[j][l] <= 0.0) continue;
                tri += 2.0 * std::cbrt(w[i][j] * w[i][l] * w[j][l]);
            }
        }
        total += tri / (static_cast<double>(k[i]) * static_cast<double>(k[i] - 1));
    }
    return total / static_cast<double>(g.vertex_count);
}

double mean_nnd(const IndicatorGraph& g) {
    if (g.vertex_count == 0) return 0.0;
    const auto s = strengths(g);
    const auto k = degrees(g);
    double total = 0.0;
    std::size_t counted = 0;
    for (std::size_t i = 0; i < g.vertex_count; ++i) {
        if (s[i] <= 0.0) continue;
        double acc = 0.0;
        for (const auto& e : g.edges) {
            if (e.i == i) acc += e.w * static_cast<double>(k[e.j]);
            else if (e.j == i) acc += e.w * static_cast<double>(k[e.i]);
        }
        total += acc / s[i];
        ++counted;
    }
    return counted == 0 ? 0.0 : total / static_cast<double>(counted);
}

IndicatorSet compute_indicators(const IndicatorGraph& g) {
    IndicatorSet set;
    set.edge_density = edge_density(g);
    set.strength = mean_strength(g);
    set.clustering_coefficient = mean_clustering(g);
    set.nearest_neighbour_degree = mean_nnd(g);
    return set;
}

LagCorrelation lag_correlation(const std::vector<double>& a, const std::vector<double>& b,
                               int max_lag) {
    if (max_lag < 0) throw std::invalid_argument("max_lag must be non-negative");
    const std::size_t n = std::min(a.size(), b.size());
    if (n < static_cast<std::size_t>(max_lag) + 3)
        throw data_error("series too short for the requested maximum lag");

    LagCorrelation out;
    out.r_per_lag.resize(static_cast<std::size_t>(max_lag) + 1);
    double best_r = 0.0;
    bool have_best = false;
    for (int lag = 0; lag <= max_lag; ++lag) {
        std::vector<double> x, y;
        for (std::size_t t = 0; t + static_cast<std::size_t>(lag) < n; ++t) {
            const double xa = a[t];
            const double yb = b[t + static_cast<std::size_t>(lag)];
            if (std::isnan(xa) || std::isnan(yb)) continue;
            x.push_back(xa);
            y.push_back(yb);
        }
        if (x.size() < 3) continue;
        double mx = 0.0, my = 0.0;
        for (std::size_t t = 0; t < x.size(); ++t) {
            mx += x[t];
            my += y[t];
        }
        mx /= static_cast<double>(x.size());
        my /= static_cast<double>(x.size());
        double sxy = 0.0, sxx = 0.0, syy = 0.0;
        for (std::size_t t = 0; t < x.size(); ++t) {
            sxy += (x[t] - mx) * (y[t] - my);
            sxx += (x[t] - mx) * (x[t] - mx);
            syy += (y[t] - my) * (y[t] - my);
        }
        if (sxx <= 0.0 || syy <= 0.0) continue;  // constant side, undefined
        const double r = sxy / std::sqrt(sxx * syy);
        out.r_per_lag[static_cast<std::size_t>(lag)] = r;
        if (!have_best || r > best_r) {
            best_r = r;
            out.best_lag = lag;
            have_best = true;
        }
    }
    if (!have_best) throw numeric_error("correlation undefined at every lag");
    return out;
}

}  // namespace atcd::indicators
