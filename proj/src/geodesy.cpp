#include "atcd/geodesy.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace atcd::geodesy {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double deg2rad(double d) { return d * kPi / 180.0; }
constexpr double kNmPerDegLat = 60.0;
}  // namespace

std::array<double, 3> geodetic_to_ecef(double lat_deg, double lon_deg, double alt_m) {
    if (lat_deg < -90.0 || lat_deg > 90.0)
        throw std::invalid_argument("latitude " + std::to_string(lat_deg) + " out of range");
    const double lat = deg2rad(lat_deg);
    const double lon = deg2rad(lon_deg);
    const double e2 = kWgs84F * (2.0 - kWgs84F);  // first eccentricity squared
    const double sin_lat = std::sin(lat);
    const double cos_lat = std::cos(lat);
    const double n = kWgs84A / std::sqrt(1.0 - e2 * sin_lat * sin_lat);
    return {(n + alt_m) * cos_lat * std::cos(lon),
            (n + alt_m) * cos_lat * std::sin(lon),
            (n * (1.0 - e2) + alt_m) * sin_lat};
}

double separation_distance(const AircraftState& a, const AircraftState& b) {
    const double alt_a = a.flight_level * 100.0 * kMetersPerFoot;
    const double alt_b = b.flight_level * 100.0 * kMetersPerFoot;
    const auto pa = geodetic_to_ecef(a.lat, a.lon, alt_a);
    const auto pb = geodetic_to_ecef(b.lat, b.lon, alt_b);
    const double dx = pa[0] - pb[0];
    const double dy = pa[1] - pb[1];
    const double dz = pa[2] - pb[2];
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double haversine_nm(double lat1_deg, double lon1_deg, double lat2_deg, double lon2_deg) {
    const double lat1 = deg2rad(lat1_deg);
    const double lat2 = deg2rad(lat2_deg);
    const double dlat = lat2 - lat1;
    const double dlon = deg2rad(lon2_deg - lon1_deg);
    const double s1 = std::sin(dlat / 2.0);
    const double s2 = std::sin(dlon / 2.0);
    const double h = s1 * s1 + std::cos(lat1) * std::cos(lat2) * s2 * s2;
    const double dist_km = 2.0 * kEarthRadiusKm * std::asin(std::sqrt(std::min(1.0, h)));
    return dist_km * 1000.0 / kMetersPerNm;
}

double closing_speed(const AircraftState& a, const AircraftState& b) {
    const double mid_lat = 0.5 * (a.lat + b.lat);
    const double mid_lon = 0.5 * (a.lon + b.lon);
    const LocalFrame frame(mid_lat, mid_lon);
    const auto [xa, ya] = frame.to_local(a.lat, a.lon);
    const auto [xb, yb] = frame.to_local(b.lat, b.lon);
    // Direction from a toward b (the midpoint lies along it from either end).
    const double dx = xb - xa;
    const double dy = yb - ya;
    const double dist = std::hypot(dx, dy);
    if (dist < 1e-9) return 0.0;
    // Velocity components in knots (ground_speed in knots, track unit vector).
    const double dvx = a.ground_speed * a.track_east - b.ground_speed * b.track_east;
    const double dvy = a.ground_speed * a.track_north - b.ground_speed * b.track_north;
    return (dx * dvx + dy * dvy) / dist;
}

LocalFrame::LocalFrame(double lat0_deg, double lon0_deg)
    : lat0_(lat0_deg), lon0_(lon0_deg), cos_lat0_(std::cos(deg2rad(lat0_deg))) {}

std::pair<double, double> LocalFrame::to_local(double lat_deg, double lon_deg) const {
    const double east = (lon_deg - lon0_) * kNmPerDegLat * cos_lat0_;
    const double north = (lat_deg - lat0_) * kNmPerDegLat;
    return {east, north};
}

std::pair<double, double> LocalFrame::to_geodetic(double east_nm, double north_nm) const {
    const double lat = lat0_ + north_nm / kNmPerDegLat;
    const double lon = lon0_ + east_nm / (kNmPerDegLat * cos_lat0_);
    return {lat, lon};
}

}  // namespace atcd::geodesy
