#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace atcd {

enum class EngineType { piston = 0, turboprop = 1, jet = 2 };
enum class WakeCategory { light = 0, medium = 1, heavy_jumbo = 2 };
enum class ExitDirection { north = 0, south = 1, east = 2, west = 3 };

std::string to_string(EngineType e);
std::string to_string(WakeCategory w);
std::string to_string(ExitDirection d);
EngineType engine_type_from_string(const std::string& s);
WakeCategory wake_category_from_string(const std::string& s);
ExitDirection exit_direction_from_string(const std::string& s);

// One aircraft's attributes at a snapshot instant. Flight levels are in
// hundreds of feet; the current level may be fractional mid-climb while the
// cleared and exit levels are whole clearance values.
struct AircraftState {
    std::string callsign;
    double lat = 0.0;            // degrees WGS-84
    double lon = 0.0;            // degrees WGS-84
    double flight_level = 0.0;   // FL
    int cleared_fl = 0;          // FL the aircraft is cleared toward
    int exit_fl = 0;             // FL required at sector exit
    double ground_speed = 0.0;   // knots
    double track_east = 0.0;     // unit ground-track vector, east component
    double track_north = 0.0;    // unit ground-track vector, north component
    double climb_rate = 0.0;     // feet per minute, signed
    bool step_climb = false;
    EngineType engine_type = EngineType::jet;
    WakeCategory wake_category = WakeCategory::medium;
    bool on_heading = false;
    bool speed_control = false;
    bool comm_state = false;
    double time_to_exit = 0.0;   // seconds
    ExitDirection exit_direction = ExitDirection::north;
};

// Derived feature: signed level change still required at the boundary,
// positive when a climb is needed.
inline double delta_to_exit_fl(const AircraftState& a) {
    return static_cast<double>(a.exit_fl) - a.flight_level;
}

// Static snapshot of every aircraft in or near the sector, optionally with
// per-aircraft clearance-count labels for the following 10 minutes.
struct Scenario {
    double timestamp = 0.0;  // seconds since stream epoch
    std::string sector_id;
    std::vector<AircraftState> aircraft;
    std::optional<std::map<std::string, int>> labels;

    bool has_labels() const { return labels.has_value(); }
    int label_total() const;
    int label_for(const std::string& callsign) const;
};

// Throws data_error on duplicate callsigns, label/aircraft mismatch or
// negative label counts.
void validate_scenario(const Scenario& s);

struct FlBand {
    int lo = 0;
    int hi = 0;
};

// Sector volume: a convex lat/lon polygon, a flight-level band and the
// lateral buffer within which off-sector aircraft are still tracked.
struct SectorGeometry {
    std::string id;
    std::vector<std::pair<double, double>> polygon;  // (lat, lon) vertices
    FlBand fl_band{215, 305};
    double buffer_deg = 0.3;

    std::pair<double, double> centroid() const;
};

// Point-in-polygon test on the (lat, lon) plane; boundary counts as inside.
bool sector_contains(const SectorGeometry& sector, double lat, double lon);

// True when (lat, lon) lies within buffer_deg of the polygon (or inside it).
bool sector_buffer_contains(const SectorGeometry& sector, double lat, double lon);

}  // namespace atcd
