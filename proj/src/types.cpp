#include "atcd/types.hpp"

#include <cmath>
#include <set>

#include "atcd/errors.hpp"

namespace atcd {

std::string to_string(EngineType e) {
    switch (e) {
        case EngineType::piston: return "piston";
        case EngineType::turboprop: return "turboprop";
        case EngineType::jet: return "jet";
    }
    throw std::invalid_argument("unknown engine type value");
}

std::string to_string(WakeCategory w) {
    switch (w) {
        case WakeCategory::light: return "light";
        case WakeCategory::medium: return "medium";
        case WakeCategory::heavy_jumbo: return "heavy_jumbo";
    }
    throw std::invalid_argument("unknown wake category value");
}

std::string to_string(ExitDirection d) {
    switch (d) {
        case ExitDirection::north: return "N";
        case ExitDirection::south: return "S";
        case ExitDirection::east: return "E";
        case ExitDirection::west: return "W";
    }
    throw std::invalid_argument("unknown exit direction value");
}

EngineType engine_type_from_string(const std::string& s) {
    if (s == "piston") return EngineType::piston;
    if (s == "turboprop") return EngineType::turboprop;
    if (s == "jet") return EngineType::jet;
    throw data_error("unknown engine type: " + s);
}

WakeCategory wake_category_from_string(const std::string& s) {
    if (s == "light") return WakeCategory::light;
    if (s == "medium") return WakeCategory::medium;
    if (s == "heavy_jumbo") return WakeCategory::heavy_jumbo;
    throw data_error("unknown wake category: " + s);
}

ExitDirection exit_direction_from_string(const std::string& s) {
    if (s == "N") return ExitDirection::north;
    if (s == "S") return ExitDirection::south;
    if (s == "E") return ExitDirection::east;
    if (s == "W") return ExitDirection::west;
    throw data_error("unknown exit direction: " + s);
}

int Scenario::label_total() const {
    if (!labels) throw data_error("scenario has no labels");
    int total = 0;
    for (const auto& [cs, count] : *labels) total += count;
    return total;
}

int Scenario::label_for(const std::string& callsign) const {
    if (!labels) throw data_error("scenario has no labels");
    auto it = labels->find(callsign);
    if (it == labels->end()) throw data_error("no label for callsign " + callsign);
    return it->second;
}

void validate_scenario(const Scenario& s) {
    std::set<std::string> seen;
    for (const auto& a : s.aircraft) {
        if (!seen.insert(a.callsign).second)
            throw data_error("duplicate callsign in scenario: " + a.callsign);
        const double norm = std::hypot(a.track_east, a.track_north);
        if (std::abs(norm - 1.0) > 1e-6)
            throw data_error("track vector of " + a.callsign + " is not unit length");
        if (a.ground_speed < 0.0)
            throw data_error("negative ground speed for " + a.callsign);
        if (a.time_to_exit < 0.0)
            throw data_error("negative time to exit for " + a.callsign);
    }
    if (s.labels) {
        if (s.labels->size() != s.aircraft.size())
            throw data_error("labels do not cover every aircraft in scenario");
        for (const auto& [cs, count] : *s.labels) {
            if (!seen.count(cs)) throw data_error("label for unknown callsign: " + cs);
            if (count < 0) throw data_error("negative clearance count for " + cs);
        }
    }
}

std::pair<double, double> SectorGeometry::centroid() const {
    double lat = 0.0, lon = 0.0;
    for (const auto& [vlat, vlon] : polygon) {
        lat += vlat;
        lon += vlon;
    }
    const double n = static_cast<double>(polygon.size());
    return {lat / n, lon / n};
}

bool sector_contains(const SectorGeometry& sector, double lat, double lon) {
    // Winding test for a convex polygon; a point on an edge counts as inside.
    const auto& poly = sector.polygon;
    const std::size_t n = poly.size();
    if (n < 3) return false;
    int sign = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& [alat, alon] = poly[i];
        const auto& [blat, blon] = poly[(i + 1) % n];
        const double cross = (blon - alon) * (lat - alat) - (blat - alat) * (lon - alon);
        if (cross > 1e-12) {
            if (sign < 0) return false;
            sign = 1;
        } else if (cross < -1e-12) {
            if (sign > 0) return false;
            sign = -1;
        }
    }
    return true;
}

bool sector_buffer_contains(const SectorGeometry& sector, double lat, double lon) {
    if (sector_contains(sector, lat, lon)) return true;
    // Distance to polygon edges in degrees (lat/lon treated as a plane; the
    // buffer is itself specified in degrees).
    const auto& poly = sector.polygon;
    double best = 1e300;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const auto& [alat, alon] = poly[i];
        const auto& [blat, blon] = poly[(i + 1) % poly.size()];
        const double ex = blon - alon, ey = blat - alat;
        const double px = lon - alon, py = lat - alat;
        const double len2 = ex * ex + ey * ey;
        double t = len2 > 0.0 ? (px * ex + py * ey) / len2 : 0.0;
        t = std::min(1.0, std::max(0.0, t));
        const double dx = px - t * ex, dy = py - t * ey;
        best = std::min(best, std::hypot(dx, dy));
    }
    return best <= sector.buffer_deg;
}

}  // namespace atcd
