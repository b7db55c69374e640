#include "atcd/demand.hpp"

#include <cmath>

#include "atcd/errors.hpp"

namespace atcd::demand {

double clearance_count(const Ensemble& e, const ScenarioGraph& g) {
    if (g.node_count() == 0) return 0.0;
    return ensemble_predict(e, g).graph_median;
}

double aircraft_demand(const Ensemble& e, const ScenarioGraph& g, int i) {
    if (i < 0 || i >= g.node_count()) throw std::invalid_argument("node index out of range");
    return clearance_count(e, g) - clearance_count(e, remove_node(g, i));
}

DemandReport scenario_demand(const Ensemble& e, const ScenarioGraph& g) {
    DemandReport report;
    report.timestamp = g.timestamp;
    const double base = clearance_count(e, g);
    report.baseline_prediction = base;
    if (g.node_count() > 0) {
        const auto pred = ensemble_predict(e, g);
        report.p10 = pred.graph_p10;
        report.p90 = pred.graph_p90;
    }
    report.per_aircraft.reserve(g.node_ids.size());
    double total = 0.0;
    for (int i = 0; i < g.node_count(); ++i) {
        const double phi = base - clearance_count(e, remove_node(g, i));
        report.per_aircraft.emplace_back(g.node_ids[static_cast<std::size_t>(i)], phi);
        total += phi;
    }
    report.scenario_total = total;
    return report;
}

std::vector<TimelinePoint> demand_timeline(const Ensemble& e,
                                           const std::vector<Scenario>& stream,
                                           double interval_s) {
    if (interval_s <= 0.0) throw std::invalid_argument("interval must be positive");
    if (stream.empty()) throw data_error("empty scenario stream");
    if (e.members.empty()) throw data_error("empty ensemble");
    for (std::size_t i = 1; i < stream.size(); ++i)
        if (stream[i].timestamp < stream[i - 1].timestamp)
            throw data_error("scenario stream is not time-ordered");

    const auto& stats_ref = e.members.front().stats;
    const double t0 = stream.front().timestamp;
    const double t1 = stream.back().timestamp;
    const auto ticks = static_cast<std::size_t>(std::floor((t1 - t0) / interval_s + 1e-9)) + 1;

    std::vector<TimelinePoint> out;
    out.reserve(ticks);
    std::size_t cursor = 0;
    for (std::size_t k = 0; k < ticks; ++k) {
        TimelinePoint point;
        point.t = t0 + static_cast<double>(k) * interval_s;
        // Nearest scenario within half an interval claims the tick.
        while (cursor + 1 < stream.size() &&
               std::abs(stream[cursor + 1].timestamp - point.t) <
                   std::abs(stream[cursor].timestamp - point.t))
            ++cursor;
        if (std::abs(stream[cursor].timestamp - point.t) <= interval_s / 2.0)
            point.report = scenario_demand(e, build_graph(stream[cursor], stats_ref));
        out.push_back(std::move(point));
    }
    return out;
}

}  // namespace atcd::demand
