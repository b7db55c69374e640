#include "atcd/features.hpp"

#include <cmath>
#include <stdexcept>

#include "atcd/errors.hpp"
#include "atcd/geodesy.hpp"
#include "atcd/graph.hpp"

namespace atcd {

namespace {

const std::vector<std::string> kFeatureNames = {
    "lat",          "lon",          "flight_level", "ground_speed",
    "track_east",   "track_north",  "climb_rate",   "step_climb",
    "delta_exit_fl", "engine_type",  "wake_category", "on_heading",
    "speed_control", "comm_state",   "time_to_exit", "exit_direction",
};

NormKind slot_kind(int slot) {
    switch (slot) {
        case feat::lat:
        case feat::lon:
        case feat::flight_level:
        case feat::ground_speed:
        case feat::time_to_exit:
            return NormKind::zscore;
        case feat::track_east:
        case feat::track_north:
            return NormKind::passthrough;
        case feat::climb_rate:
        case feat::delta_exit_fl:
            return NormKind::maxabs;
        case feat::step_climb:
        case feat::engine_type:
        case feat::wake_category:
        case feat::on_heading:
        case feat::speed_control:
        case feat::comm_state:
        case feat::exit_direction:
            return NormKind::integer_class;
        default:
            throw std::invalid_argument("unknown feature slot");
    }
}

int slot_classes(int slot) {
    switch (slot) {
        case feat::step_climb:
        case feat::on_heading:
        case feat::speed_control:
        case feat::comm_state:
            return 2;
        case feat::engine_type:
            return 3;
        case feat::wake_category:
            return 3;
        case feat::exit_direction:
            return 4;
        default:
            return 0;
    }
}

struct RunningMoments {
    double sum = 0.0;
    double sum_sq = 0.0;
    long n = 0;
    void add(double x) {
        sum += x;
        sum_sq += x * x;
        ++n;
    }
    double mean() const { return sum / static_cast<double>(n); }
    // Population standard deviation.
    double stdev() const {
        const double m = mean();
        const double var = sum_sq / static_cast<double>(n) - m * m;
        return std::sqrt(std::max(0.0, var));
    }
};

}  // namespace

const std::vector<std::string>& node_feature_names() { return kFeatureNames; }

NormKind node_feature_kind(int slot) { return slot_kind(slot); }

int node_feature_classes(int slot) { return slot_classes(slot); }

double max_abs_scale(double x, double bound) {
    if (bound <= 0.0) throw std::invalid_argument("max_abs_scale bound must be positive");
    return x / bound;
}

double raw_node_feature(const AircraftState& a, int slot) {
    switch (slot) {
        case feat::lat: return a.lat;
        case feat::lon: return a.lon;
        case feat::flight_level: return a.flight_level;
        case feat::ground_speed: return a.ground_speed;
        case feat::track_east: return a.track_east;
        case feat::track_north: return a.track_north;
        case feat::climb_rate: return a.climb_rate;
        case feat::step_climb: return a.step_climb ? 1.0 : 0.0;
        case feat::delta_exit_fl: return delta_to_exit_fl(a);
        case feat::engine_type: return static_cast<double>(a.engine_type);
        case feat::wake_category: return static_cast<double>(a.wake_category);
        case feat::on_heading: return a.on_heading ? 1.0 : 0.0;
        case feat::speed_control: return a.speed_control ? 1.0 : 0.0;
        case feat::comm_state: return a.comm_state ? 1.0 : 0.0;
        case feat::time_to_exit: return a.time_to_exit;
        case feat::exit_direction: return static_cast<double>(a.exit_direction);
        default: throw std::invalid_argument("unknown feature slot");
    }
}

void set_raw_node_feature(AircraftState& a, int slot, double value) {
    switch (slot) {
        case feat::lat: a.lat = value; return;
        case feat::lon: a.lon = value; return;
        case feat::flight_level: a.flight_level = value; return;
        case feat::ground_speed: a.ground_speed = value; return;
        case feat::track_east: a.track_east = value; return;
        case feat::track_north: a.track_north = value; return;
        case feat::climb_rate: a.climb_rate = value; return;
        case feat::step_climb: a.step_climb = value != 0.0; return;
        case feat::delta_exit_fl:
            a.exit_fl = static_cast<int>(std::lround(a.flight_level + value));
            return;
        case feat::engine_type: a.engine_type = static_cast<EngineType>(static_cast<int>(value)); return;
        case feat::wake_category: a.wake_category = static_cast<WakeCategory>(static_cast<int>(value)); return;
        case feat::on_heading: a.on_heading = value != 0.0; return;
        case feat::speed_control: a.speed_control = value != 0.0; return;
        case feat::comm_state: a.comm_state = value != 0.0; return;
        case feat::time_to_exit: a.time_to_exit = value; return;
        case feat::exit_direction: a.exit_direction = static_cast<ExitDirection>(static_cast<int>(value)); return;
        default: throw std::invalid_argument("unknown feature slot");
    }
}

NormalizationStats fit_normalization(const std::vector<Scenario>& training, int fl_buffer) {
    long total_aircraft = 0;
    for (const auto& s : training) total_aircraft += static_cast<long>(s.aircraft.size());
    if (total_aircraft == 0) throw data_error("cannot fit normalization: no aircraft in training data");

    NormalizationStats stats;
    stats.node.resize(kNodeFeatureCount);
    std::vector<RunningMoments> moments(kNodeFeatureCount);
    std::vector<double> bounds(kNodeFeatureCount, 0.0);

    for (const auto& s : training) {
        for (const auto& a : s.aircraft) {
            for (int slot = 0; slot < kNodeFeatureCount; ++slot) {
                const double v = raw_node_feature(a, slot);
                moments[slot].add(v);
                bounds[slot] = std::max(bounds[slot], std::abs(v));
            }
        }
    }

    for (int slot = 0; slot < kNodeFeatureCount; ++slot) {
        FeatureStat& fs = stats.node[slot];
        fs.name = kFeatureNames[slot];
        fs.kind = slot_kind(slot);
        switch (fs.kind) {
            case NormKind::zscore:
                fs.mean = moments[slot].mean();
                fs.stdev = moments[slot].stdev();
                if (fs.stdev <= 0.0)
                    throw data_error("degenerate feature " + fs.name + ": zero variance");
                break;
            case NormKind::maxabs:
                fs.bound = bounds[slot];
                if (fs.bound <= 0.0)
                    throw data_error("degenerate feature " + fs.name + ": all values zero");
                break;
            case NormKind::integer_class:
                fs.num_classes = slot_classes(slot);
                break;
            case NormKind::passthrough:
                break;
        }
    }

    // Edge statistics come from the pairs the FL-overlap rule would connect.
    RunningMoments sep_moments;
    double closing_bound = 0.0;
    for (const auto& s : training) {
        for (std::size_t i = 0; i < s.aircraft.size(); ++i) {
            for (std::size_t j = i + 1; j < s.aircraft.size(); ++j) {
                if (!fl_ranges_overlap(s.aircraft[i], s.aircraft[j], fl_buffer)) continue;
                sep_moments.add(geodesy::separation_distance(s.aircraft[i], s.aircraft[j]));
                closing_bound = std::max(
                    closing_bound, std::abs(geodesy::closing_speed(s.aircraft[i], s.aircraft[j])));
            }
        }
    }
    if (sep_moments.n == 0)
        throw data_error("cannot fit edge statistics: no edges in training data");
    stats.edge_separation.name = "separation_distance";
    stats.edge_separation.kind = NormKind::zscore;
    stats.edge_separation.mean = sep_moments.mean();
    stats.edge_separation.stdev = sep_moments.stdev();
    if (stats.edge_separation.stdev <= 0.0)
        throw data_error("degenerate feature separation_distance: zero variance");
    stats.edge_closing.name = "closing_speed";
    stats.edge_closing.kind = NormKind::maxabs;
    stats.edge_closing.bound = closing_bound;
    if (stats.edge_closing.bound <= 0.0)
        throw data_error("degenerate feature closing_speed: all values zero");
    return stats;
}

std::vector<double> encode_node_features(const AircraftState& a, const NormalizationStats& stats) {
    if (stats.node.size() != static_cast<std::size_t>(kNodeFeatureCount))
        throw data_error("normalization stats not fitted");
    std::vector<double> out(kNodeFeatureCount);
    for (int slot = 0; slot < kNodeFeatureCount; ++slot) {
        const FeatureStat& fs = stats.node[slot];
        const double raw = raw_node_feature(a, slot);
        switch (fs.kind) {
            case NormKind::zscore:
                out[slot] = (raw - fs.mean) / fs.stdev;
                break;
            case NormKind::maxabs:
                out[slot] = max_abs_scale(raw, fs.bound);
                break;
            case NormKind::integer_class: {
                const int code = static_cast<int>(raw);
                if (code < 0 || code >= fs.num_classes)
                    throw data_error("enum value out of range for feature " + fs.name);
                out[slot] = static_cast<double>(code);
                break;
            }
            case NormKind::passthrough:
                out[slot] = raw;
                break;
        }
    }
    return out;
}

int decode_class_slot(double value, int num_classes) {
    const double rounded = std::round(value);
    if (std::abs(value - rounded) > 1e-9)
        throw data_error("class slot value is not an integer code");
    const int code = static_cast<int>(rounded);
    if (code < 0 || code >= num_classes) throw data_error("class code out of declared range");
    return code;
}

double project_time_to_exit(const AircraftState& a, const SectorGeometry& sector) {
    if (a.ground_speed <= 0.0)
        throw data_error("exit time undefined for " + a.callsign + ": zero ground speed");
    const auto [clat, clon] = sector.centroid();
    const geodesy::LocalFrame frame(clat, clon);
    const auto [px, py] = frame.to_local(a.lat, a.lon);
    // Velocity in NM per second.
    const double vx = a.ground_speed * a.track_east / 3600.0;
    const double vy = a.ground_speed * a.track_north / 3600.0;

    // The projected track is a ray; for a convex polygon the last boundary
    // crossing is where the aircraft leaves for good.
    double last_crossing = -1.0;
    const auto& poly = sector.polygon;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const auto [a1x, a1y] = frame.to_local(poly[i].first, poly[i].second);
        const auto [a2x, a2y] = frame.to_local(poly[(i + 1) % poly.size()].first,
                                               poly[(i + 1) % poly.size()].second);
        const double ex = a2x - a1x, ey = a2y - a1y;
        const double denom = vx * ey - vy * ex;
        if (std::abs(denom) < 1e-12) continue;  // parallel to this edge
        const double wx = a1x - px, wy = a1y - py;
        const double t = (wx * ey - wy * ex) / denom;
        const double u = (wx * vy - wy * vx) / denom;
        if (u < -1e-9 || u > 1.0 + 1e-9) continue;  // misses the segment
        if (t < -1e-9) continue;                    // behind the aircraft
        last_crossing = std::max(last_crossing, t);
    }
    if (last_crossing < 0.0) return 0.0;  // outside and moving away
    return std::max(0.0, last_crossing);
}

}  // namespace atcd
