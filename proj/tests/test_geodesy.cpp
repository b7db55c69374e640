#include "atcd/geodesy.hpp"

#include <cmath>
#include <stdexcept>

#include "doctest.h"

using namespace atcd;
using namespace atcd::geodesy;

namespace {

AircraftState at(double lat, double lon, double fl = 250.0) {
    AircraftState a;
    a.lat = lat;
    a.lon = lon;
    a.flight_level = fl;
    return a;
}

AircraftState moving(double lat, double lon, double te, double tn, double gs) {
    AircraftState a = at(lat, lon);
    a.track_east = te;
    a.track_north = tn;
    a.ground_speed = gs;
    return a;
}

}  // namespace

TEST_CASE("ecef of the origin point is the semi-major axis") {
    const auto p = geodetic_to_ecef(0.0, 0.0, 0.0);
    CHECK(p[0] == doctest::Approx(6378137.0).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(0.0).scale(1.0));
    CHECK(p[2] == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("ecef of the north pole is the semi-minor axis") {
    const auto p = geodetic_to_ecef(90.0, 0.0, 0.0);
    CHECK(std::abs(p[0]) < 1e-3);
    CHECK(std::abs(p[1]) < 1e-3);
    CHECK(p[2] == doctest::Approx(6356752.314).epsilon(1e-9));
}

TEST_CASE("ecef altitude adds along the surface normal at the equator") {
    const auto p = geodetic_to_ecef(0.0, 0.0, 1000.0);
    CHECK(p[0] == doctest::Approx(6378137.0 + 1000.0).epsilon(1e-12));
}

TEST_CASE("ecef rejects out-of-range latitudes") {
    CHECK_THROWS_AS(geodetic_to_ecef(90.5, 0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(geodetic_to_ecef(-91.0, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("separation of an aircraft from itself is zero") {
    const auto a = at(51.0, -1.0, 250.0);
    CHECK(separation_distance(a, a) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("purely vertical separation equals the level difference") {
    const auto a = at(51.0, -1.0, 250.0);
    const auto b = at(51.0, -1.0, 260.0);
    // 10 FL = 1000 ft, chord along the shared surface normal.
    CHECK(separation_distance(a, b) == doctest::Approx(1000.0 * kMetersPerFoot).epsilon(1e-6));
}

TEST_CASE("equatorial separation matches the spherical chord") {
    const auto a = at(0.0, 0.0, 0.0);
    const auto b = at(0.0, 1.0, 0.0);
    const double chord = 2.0 * kWgs84A * std::sin(0.5 * M_PI / 180.0);
    CHECK(separation_distance(a, b) == doctest::Approx(chord).epsilon(5e-3));
}

TEST_CASE("separation is symmetric") {
    const auto a = at(50.2, -2.0, 230.0);
    const auto b = at(51.9, 0.4, 305.0);
    CHECK(separation_distance(a, b) == doctest::Approx(separation_distance(b, a)).epsilon(1e-15));
}

TEST_CASE("haversine of identical points is zero") {
    CHECK(haversine_nm(51.0, -1.0, 51.0, -1.0) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("haversine of antipodal points is half the circumference") {
    const double half = M_PI * kEarthRadiusKm * 1000.0 / kMetersPerNm;
    CHECK(haversine_nm(0.0, 0.0, 0.0, 180.0) == doctest::Approx(half).epsilon(1e-9));
    // Around 10800 NM under the 60 NM per degree convention.
    CHECK(haversine_nm(0.0, 0.0, 0.0, 180.0) == doctest::Approx(10800.0).epsilon(0.01));
}

TEST_CASE("one degree of latitude is about sixty nautical miles") {
    CHECK(haversine_nm(51.0, 0.0, 52.0, 0.0) == doctest::Approx(60.0).epsilon(0.5 / 60.0));
}

TEST_CASE("head-on aircraft close at the sum of their speeds") {
    const auto a = moving(51.0, -0.5, 1.0, 0.0, 240.0);
    const auto b = moving(51.0, 0.5, -1.0, 0.0, 240.0);
    CHECK(closing_speed(a, b) == doctest::Approx(480.0).epsilon(1e-6));
}

TEST_CASE("parallel aircraft with identical velocity do not close") {
    const auto a = moving(50.5, -1.0, 0.0, 1.0, 300.0);
    const auto b = moving(51.5, 0.0, 0.0, 1.0, 300.0);
    CHECK(closing_speed(a, b) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("closing speed of coincident aircraft is zero by convention") {
    const auto a = moving(51.0, -1.0, 1.0, 0.0, 400.0);
    const auto b = moving(51.0, -1.0, -1.0, 0.0, 400.0);
    CHECK(closing_speed(a, b) == 0.0);
}

TEST_CASE("closing speed is symmetric and signed") {
    const auto a = moving(51.0, -1.0, 1.0, 0.0, 420.0);
    const auto b = moving(51.0, 0.0, 1.0, 0.0, 380.0);  // slower, ahead: a catches up
    CHECK(closing_speed(a, b) == doctest::Approx(closing_speed(b, a)).epsilon(1e-12));
    CHECK(closing_speed(a, b) > 0.0);
    // Swap the speeds and the pair separates instead.
    const auto c = moving(51.0, -1.0, 1.0, 0.0, 380.0);
    const auto d = moving(51.0, 0.0, 1.0, 0.0, 420.0);
    CHECK(closing_speed(c, d) < 0.0);
}

TEST_CASE("local frame round-trips positions") {
    const LocalFrame frame(51.0, -1.0);
    const double cases[][2] = {{51.0, -1.0}, {51.7, -2.3}, {50.1, 0.4}, {52.0, -1.0}};
    for (const auto& c : cases) {
        const auto [e, n] = frame.to_local(c[0], c[1]);
        const auto [lat, lon] = frame.to_geodetic(e, n);
        CHECK(lat == doctest::Approx(c[0]).epsilon(1e-12));
        CHECK(lon == doctest::Approx(c[1]).epsilon(1e-12));
    }
}

TEST_CASE("local frame treats one degree of latitude as sixty miles north") {
    const LocalFrame frame(51.0, -1.0);
    const auto [e, n] = frame.to_local(52.0, -1.0);
    CHECK(e == doctest::Approx(0.0).scale(1.0));
    CHECK(n == doctest::Approx(60.0).epsilon(1e-12));
}

TEST_CASE("local frame compresses longitude by the anchor latitude") {
    const LocalFrame frame(60.0, 10.0);  // cos(60 deg) = 0.5
    const auto [e, n] = frame.to_local(60.0, 11.0);
    CHECK(n == doctest::Approx(0.0).scale(1.0));
    CHECK(e == doctest::Approx(30.0).epsilon(1e-12));
}
