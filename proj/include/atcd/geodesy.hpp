#pragma once

#include <array>

#include "atcd/types.hpp"

// Geometric helpers on the WGS-84 ellipsoid. Horizontal positions come in as
// geodetic lat/lon in degrees, altitudes as flight levels (hundreds of feet).

namespace atcd::geodesy {

inline constexpr double kWgs84A = 6378137.0;               // semi-major axis [m]
inline constexpr double kWgs84F = 1.0 / 298.257223563;     // flattening
inline constexpr double kFeetPerMeter = 1.0 / 0.3048;
inline constexpr double kMetersPerFoot = 0.3048;
inline constexpr double kMetersPerNm = 1852.0;
inline constexpr double kEarthRadiusKm = 6371.0;           // spherical radius for haversine

// Geodetic coordinates (degrees, meters above the ellipsoid) to earth-centred
// earth-fixed cartesian coordinates in meters.
std::array<double, 3> geodetic_to_ecef(double lat_deg, double lon_deg, double alt_m);

// Straight-line (chord) distance in meters between two aircraft, altitude
// taken from the current flight level.
double separation_distance(const AircraftState& a, const AircraftState& b);

// Great-circle distance in nautical miles on a sphere of radius 6371 km.
double haversine_nm(double lat1_deg, double lon1_deg, double lat2_deg, double lon2_deg);

// Component of the pair's relative velocity toward their lat/lon midpoint,
// in knots. Positive when the aircraft converge, negative when they move
// apart, 0 for coincident positions. Velocities are projected onto the local
// east-north plane at the midpoint.
double closing_speed(const AircraftState& a, const AircraftState& b);

// Flat local east-north frame, anchored at a reference point. One degree of
// latitude spans 60 NM; longitude is compressed by cos of the anchor latitude.
class LocalFrame {
  public:
    LocalFrame(double lat0_deg, double lon0_deg);

    // lat/lon in degrees to east/north offsets in nautical miles.
    std::pair<double, double> to_local(double lat_deg, double lon_deg) const;
    // Inverse of to_local.
    std::pair<double, double> to_geodetic(double east_nm, double north_nm) const;

    double lat0() const { return lat0_; }
    double lon0() const { return lon0_; }

  private:
    double lat0_, lon0_, cos_lat0_;
};

}  // namespace atcd::geodesy
