#include "atcd/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "atcd/errors.hpp"
#include "atcd/features.hpp"
#include "atcd/geodesy.hpp"
#include "atcd/rng.hpp"
#include "json.hpp"

namespace atcd::synth {

namespace {

using nlohmann::json;

constexpr double kTickS = 5.0;
constexpr double kControlTickS = 15.0;
constexpr double kPi = 3.14159265358979323846;

std::uint64_t callsign_hash(const std::string& callsign) {
    std::uint64_t h = 1469598103934665603ull;
    for (char c : callsign) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

// Per-aircraft climb performance, derived from the callsign so the labeling
// re-simulation sees the same climb rates as the generator.
double climb_perf_fpm(const std::string& callsign) {
    return 1500.0 + static_cast<double>(callsign_hash(callsign) % 7) * 100.0;
}

// Crews ask for descent at different points. Spreading the request window
// per callsign keeps the labeling re-simulation in step with the generator
// without carrying extra state in the snapshot.
double descend_window_for(const std::string& callsign, const ControllerKnobs& kn) {
    const double u = static_cast<double>((callsign_hash(callsign) >> 8) % 1000) / 999.0;
    return kn.descend_window_s * (0.5 + 1.2 * u);
}

struct Plane {
    std::string callsign;
    double x = 0.0, y = 0.0;  // local east/north, NM
    double tx = 0.0, ty = 1.0;
    double gs = 0.0;  // knots
    double fl = 0.0;
    int cfl = 0, xfl = 0;
    double climb_fpm = 1800.0;
    EngineType engine = EngineType::jet;
    WakeCategory wake = WakeCategory::medium;
    ExitDirection exit_dir = ExitDirection::north;
    bool on_heading = false, speed_control = false, handed_off = false;
    int vcount = 0;
    bool has_exit_fix = false;
    double exit_x = 0.0, exit_y = 0.0;
    double no_vector_until = 0.0;
    bool seen = false;
    bool active = true;
};

struct ClearanceEvent {
    double t = 0.0;
    std::string callsign;
    char kind = 'L';
};

struct World {
    const SectorGeometry& sector;
    geodesy::LocalFrame frame;
    explicit World(const SectorGeometry& s)
        : sector(s), frame(s.centroid().first, s.centroid().second) {}
};

bool plane_inside(const World& w, const Plane& p) {
    const auto [lat, lon] = w.frame.to_geodetic(p.x, p.y);
    return sector_contains(w.sector, lat, lon);
}

bool plane_visible(const World& w, const Plane& p) {
    const auto [lat, lon] = w.frame.to_geodetic(p.x, p.y);
    return sector_buffer_contains(w.sector, lat, lon);
}

bool in_comm(const World& w, const Plane& p) { return !p.handed_off && plane_inside(w, p); }

double current_climb_rate(const Plane& p) {
    if (p.fl < p.cfl - 0.01) return p.climb_fpm;
    if (p.fl > p.cfl + 0.01) return -p.climb_fpm;
    return 0.0;
}

AircraftState make_state(const World& w, const Plane& p) {
    AircraftState a;
    a.callsign = p.callsign;
    const auto [lat, lon] = w.frame.to_geodetic(p.x, p.y);
    a.lat = lat;
    a.lon = lon;
    a.flight_level = p.fl;
    a.cleared_fl = p.cfl;
    a.exit_fl = p.xfl;
    a.ground_speed = p.gs;
    a.track_east = p.tx;
    a.track_north = p.ty;
    a.climb_rate = current_climb_rate(p);
    a.step_climb = p.vcount >= 2 || p.cfl != p.xfl;
    a.engine_type = p.engine;
    a.wake_category = p.wake;
    a.on_heading = p.on_heading;
    a.speed_control = p.speed_control;
    a.comm_state = in_comm(w, p);
    a.exit_direction = p.exit_dir;
    a.time_to_exit = project_time_to_exit(a, w.sector);
    return a;
}

double plane_tte(const World& w, const Plane& p) {
    AircraftState a;
    a.callsign = p.callsign;
    const auto [lat, lon] = w.frame.to_geodetic(p.x, p.y);
    a.lat = lat;
    a.lon = lon;
    a.ground_speed = p.gs;
    a.track_east = p.tx;
    a.track_north = p.ty;
    return project_time_to_exit(a, w.sector);
}

void advance_kinematics(std::vector<Plane>& planes, double dt) {
    for (auto& p : planes) {
        if (!p.active) continue;
        p.x += p.tx * p.gs * dt / 3600.0;
        p.y += p.ty * p.gs * dt / 3600.0;
        const double dfl = p.climb_fpm * dt / 60.0 / 100.0;
        if (p.fl < p.cfl) p.fl = std::min(static_cast<double>(p.cfl), p.fl + dfl);
        else if (p.fl > p.cfl) p.fl = std::max(static_cast<double>(p.cfl), p.fl - dfl);
    }
}

void retire_planes(const World& w, std::vector<Plane>& planes) {
    for (auto& p : planes) {
        if (!p.active) continue;
        if (plane_visible(w, p)) {
            p.seen = true;
        } else if (p.seen) {
            p.active = false;
        }
    }
}

double dist_nm(const Plane& a, const Plane& b) { return std::hypot(a.x - b.x, a.y - b.y); }

bool level_reached(const Plane& p) { return std::abs(p.fl - p.cfl) < 0.01; }

// Occupied level span (current level to cleared level) widened by the usual
// 10 FL safety buffer.
std::pair<double, double> occupied_span(const Plane& p) {
    const double lo = std::min(p.fl, static_cast<double>(p.cfl));
    const double hi = std::max(p.fl, static_cast<double>(p.cfl));
    return {lo - 10.0, hi + 10.0};
}

bool level_blocked(const Plane& a, int level, const std::vector<Plane>& planes,
                   const ControllerKnobs& kn) {
    for (const auto& b : planes) {
        if (!b.active || &b == &a) continue;
        if (dist_nm(a, b) >= kn.blocker_radius_nm) continue;
        const auto [lo, hi] = occupied_span(b);
        if (level >= lo && level <= hi) return true;
    }
    return false;
}

int traffic_near_path_count(const Plane& a, const std::vector<Plane>& planes,
                            const ControllerKnobs& kn) {
    const double path_lo = std::min(static_cast<double>(a.cfl), static_cast<double>(a.xfl)) - 10.0;
    const double path_hi = std::max(static_cast<double>(a.cfl), static_cast<double>(a.xfl)) + 10.0;
    int count = 0;
    for (const auto& b : planes) {
        if (!b.active || &b == &a) continue;
        if (dist_nm(a, b) >= kn.caution_radius_nm) continue;
        const auto [lo, hi] = occupied_span(b);
        if (lo <= path_hi && path_lo <= hi) ++count;
    }
    return count;
}

void rotate_track(Plane& p, double deg) {
    const double rad = deg * kPi / 180.0;
    const double c = std::cos(rad), s = std::sin(rad);
    // Clockwise-positive rotation in the east/north plane (a right turn).
    const double nx = c * p.tx + s * p.ty;
    const double ny = -s * p.tx + c * p.ty;
    p.tx = nx;
    p.ty = ny;
}

// Closest-point-of-approach distance over the lookahead, NM. Returns a large
// value when the pair is not converging within the window.
double cpa_distance_nm(const Plane& a, const Plane& b, double lookahead_s) {
    const double dx = a.x - b.x, dy = a.y - b.y;
    const double dvx = (a.tx * a.gs - b.tx * b.gs) / 3600.0;  // NM per second
    const double dvy = (a.ty * a.gs - b.ty * b.gs) / 3600.0;
    const double dv2 = dvx * dvx + dvy * dvy;
    if (dv2 < 1e-12) return std::hypot(dx, dy);
    const double tstar = -(dx * dvx + dy * dvy) / dv2;
    if (tstar <= 0.0) return std::hypot(dx, dy);
    const double tc = std::min(tstar, lookahead_s);
    return std::hypot(dx + dvx * tc, dy + dvy * tc);
}

bool spans_overlap(const Plane& a, const Plane& b) {
    const auto [alo, ahi] = occupied_span(a);
    const auto [blo, bhi] = occupied_span(b);
    return alo <= bhi && blo <= ahi;
}

void controller_tick(const World& w, std::vector<Plane>& planes, double t,
                     const ControllerKnobs& kn, std::vector<ClearanceEvent>& events) {
    // Handoffs first: a handed-off aircraft receives no further clearances.
    for (auto& p : planes) {
        if (!p.active || p.handed_off) continue;
        if (plane_inside(w, p) && p.cfl == p.xfl && plane_tte(w, p) < kn.handoff_tte_s)
            p.handed_off = true;
    }

    // Level clearances. Climbs start as soon as the aircraft checks in;
    // descents are held until the exit is close enough that the aircraft
    // would otherwise miss its exit level.
    for (auto& a : planes) {
        if (!a.active || !in_comm(w, a)) continue;
        if (!level_reached(a) || a.cfl == a.xfl) continue;
        if (a.xfl < a.cfl && plane_tte(w, a) >= descend_window_for(a.callsign, kn)) continue;
        if (plane_tte(w, a) < kn.force_clear_tte_s) {
            // Out of room to wait: clear direct to the exit level.
            a.cfl = a.xfl;
            ++a.vcount;
            events.push_back({t, a.callsign, 'L'});
            continue;
        }
        const int dir = a.xfl > a.cfl ? 10 : -10;
        int target = a.cfl;
        for (int level = a.cfl + dir;; level += dir) {
            if (level_blocked(a, level, planes, kn)) break;
            target = level;
            if (level == a.xfl) break;
        }
        if (target == a.cfl) continue;  // boxed in, try again next tick
        // The busier the surroundings, the smaller each cleared increment:
        // alone it is direct to the exit level, with one aircraft near the
        // path steps are capped loosely, with two or more tightly.
        const int near = traffic_near_path_count(a, planes, kn);
        int cap = 0;
        if (near == 1)
            cap = 2 * kn.caution_step_fl;
        else if (near >= 2)
            cap = kn.caution_step_fl;
        if (cap > 0 && std::abs(target - a.cfl) > cap)
            target = a.cfl + (dir > 0 ? cap : -cap);
        a.cfl = target;
        ++a.vcount;
        events.push_back({t, a.callsign, 'L'});
    }

    // Heading clearances on converging pairs.
    for (std::size_t i = 0; i < planes.size(); ++i) {
        Plane& a = planes[i];
        if (!a.active) continue;
        for (std::size_t j = i + 1; j < planes.size(); ++j) {
            Plane& b = planes[j];
            if (!b.active) continue;
            if (!spans_overlap(a, b)) continue;
            const double cpa = cpa_distance_nm(a, b, kn.cpa_lookahead_s);
            if (cpa >= kn.cpa_threshold_nm) continue;
            const double dx = a.x - b.x, dy = a.y - b.y;
            const double dvx = a.tx * a.gs - b.tx * b.gs;
            const double dvy = a.ty * a.gs - b.ty * b.gs;
            if (dx * dvx + dy * dvy >= 0.0) continue;  // not converging
            // Vector the aircraft that will stay in the sector longer.
            Plane* pick = nullptr;
            const bool a_ok = in_comm(w, a) && !a.on_heading && t >= a.no_vector_until;
            const bool b_ok = in_comm(w, b) && !b.on_heading && t >= b.no_vector_until;
            if (a_ok && b_ok)
                pick = plane_tte(w, a) >= plane_tte(w, b) ? &a : &b;
            else if (a_ok)
                pick = &a;
            else if (b_ok)
                pick = &b;
            if (!pick) continue;
            Plane& other = (pick == &a) ? b : a;
            Plane right = *pick;
            rotate_track(right, kn.vector_turn_deg);
            Plane left = *pick;
            rotate_track(left, -kn.vector_turn_deg);
            const double cpa_right = cpa_distance_nm(right, other, kn.cpa_lookahead_s);
            const double cpa_left = cpa_distance_nm(left, other, kn.cpa_lookahead_s);
            rotate_track(*pick, cpa_right >= cpa_left ? kn.vector_turn_deg
                                                      : -kn.vector_turn_deg);
            pick->on_heading = true;
            pick->no_vector_until = t + kn.vector_cooldown_s;
            events.push_back({t, pick->callsign, 'H'});
        }
    }

    // Re-route vectored aircraft back toward the exit once clear. The
    // generator aims at the exact exit fix; the labeling re-simulation only
    // knows the filed exit side and sends the aircraft off in that direction.
    for (auto& a : planes) {
        if (!a.active || !a.on_heading) continue;
        if (!in_comm(w, a) || t < a.no_vector_until) continue;
        bool conflict = false;
        for (const auto& b : planes) {
            if (!b.active || &b == &a) continue;
            if (!spans_overlap(a, b)) continue;
            if (dist_nm(a, b) < kn.restore_clear_nm ||
                cpa_distance_nm(a, b, kn.cpa_lookahead_s) < kn.cpa_threshold_nm) {
                conflict = true;
                break;
            }
        }
        if (conflict) continue;
        double ex, ey;
        if (a.has_exit_fix) {
            ex = a.exit_x - a.x;
            ey = a.exit_y - a.y;
            if (std::hypot(ex, ey) < 1.0) continue;  // already on top of the fix
        } else {
            ex = a.exit_dir == ExitDirection::east ? 1.0
               : a.exit_dir == ExitDirection::west ? -1.0 : 0.0;
            ey = a.exit_dir == ExitDirection::north ? 1.0
               : a.exit_dir == ExitDirection::south ? -1.0 : 0.0;
        }
        const double norm = std::hypot(ex, ey);
        a.tx = ex / norm;
        a.ty = ey / norm;
        a.on_heading = false;
        // Returning the aircraft to own navigation is bookkeeping, not a
        // workload-bearing instruction, so it does not count as a clearance.
        a.no_vector_until = t + kn.vector_cooldown_s;
    }

    // Speed clearances on in-trail pairs.
    for (std::size_t i = 0; i < planes.size(); ++i) {
        Plane& a = planes[i];
        if (!a.active) continue;
        for (std::size_t j = i + 1; j < planes.size(); ++j) {
            Plane& b = planes[j];
            if (!b.active) continue;
            if (std::abs(a.fl - b.fl) > 10.0) continue;
            if (a.tx * b.tx + a.ty * b.ty < kn.intrail_track_dot) continue;
            const double relx = b.x - a.x, rely = b.y - a.y;
            const double along = relx * a.tx + rely * a.ty;
            const double lateral = std::abs(relx * a.ty - rely * a.tx);
            if (lateral > 3.0) continue;
            Plane& trailer = along > 0.0 ? a : b;
            Plane& leader = along > 0.0 ? b : a;
            const double gap = std::abs(along);
            if (gap <= 0.0 || gap >= kn.intrail_gap_nm) continue;
            if (trailer.gs <= leader.gs) continue;
            if (trailer.speed_control || !in_comm(w, trailer)) continue;
            trailer.speed_control = true;
            trailer.gs *= kn.speed_factor;
            events.push_back({t, trailer.callsign, 'S'});
        }
    }
}

std::map<std::string, int> closed_world_labels(const Scenario& s, const SectorGeometry& sector,
                                               double horizon_s, const ControllerKnobs& kn) {
    const World w(sector);
    std::vector<Plane> planes;
    planes.reserve(s.aircraft.size());
    for (const auto& a : s.aircraft) {
        Plane p;
        p.callsign = a.callsign;
        const auto [x, y] = w.frame.to_local(a.lat, a.lon);
        p.x = x;
        p.y = y;
        p.tx = a.track_east;
        p.ty = a.track_north;
        p.gs = a.ground_speed;
        p.fl = a.flight_level;
        p.cfl = a.cleared_fl;
        p.xfl = a.exit_fl;
        p.climb_fpm = climb_perf_fpm(a.callsign);
        p.engine = a.engine_type;
        p.wake = a.wake_category;
        p.exit_dir = a.exit_direction;
        p.on_heading = a.on_heading;
        p.speed_control = a.speed_control;
        p.handed_off = !a.comm_state && sector_contains(sector, a.lat, a.lon);
        p.has_exit_fix = false;
        p.seen = true;
        planes.push_back(std::move(p));
    }
    std::vector<ClearanceEvent> events;
    for (double t = kTickS; t <= horizon_s + 1e-9; t += kTickS) {
        advance_kinematics(planes, kTickS);
        retire_planes(w, planes);
        if (std::fmod(t, kControlTickS) < 1e-9)
            controller_tick(w, planes, t, kn, events);
    }
    std::map<std::string, int> labels;
    for (const auto& a : s.aircraft) labels[a.callsign] = 0;
    for (const auto& ev : events) ++labels[ev.callsign];
    if (std::getenv("ATCD_DEBUG_EVENTS")) {
        int l = 0, h = 0, sp = 0;
        for (const auto& ev : events) {
            if (ev.kind == 'L') ++l;
            if (ev.kind == 'H') ++h;
            if (ev.kind == 'S') ++sp;
        }
        std::fprintf(stderr, "events L=%d H=%d S=%d\n", l, h, sp);
    }
    return labels;
}

json state_to_json(const AircraftState& a) {
    return json{{"callsign", a.callsign},
                {"lat", a.lat},
                {"lon", a.lon},
                {"fl", a.flight_level},
                {"cfl", a.cleared_fl},
                {"xfl", a.exit_fl},
                {"gs", a.ground_speed},
                {"track_e", a.track_east},
                {"track_n", a.track_north},
                {"climb_rate", a.climb_rate},
                {"step_climb", a.step_climb},
                {"engine", to_string(a.engine_type)},
                {"wake", to_string(a.wake_category)},
                {"on_heading", a.on_heading},
                {"speed_control", a.speed_control},
                {"comm", a.comm_state},
                {"tte", a.time_to_exit},
                {"exit_dir", to_string(a.exit_direction)}};
}

AircraftState state_from_json(const json& j) {
    AircraftState a;
    a.callsign = j.at("callsign").get<std::string>();
    a.lat = j.at("lat").get<double>();
    a.lon = j.at("lon").get<double>();
    a.flight_level = j.at("fl").get<double>();
    a.cleared_fl = j.at("cfl").get<int>();
    a.exit_fl = j.at("xfl").get<int>();
    a.ground_speed = j.at("gs").get<double>();
    a.track_east = j.at("track_e").get<double>();
    a.track_north = j.at("track_n").get<double>();
    a.climb_rate = j.at("climb_rate").get<double>();
    a.step_climb = j.at("step_climb").get<bool>();
    a.engine_type = engine_type_from_string(j.at("engine").get<std::string>());
    a.wake_category = wake_category_from_string(j.at("wake").get<std::string>());
    a.on_heading = j.at("on_heading").get<bool>();
    a.speed_control = j.at("speed_control").get<bool>();
    a.comm_state = j.at("comm").get<bool>();
    a.time_to_exit = j.at("tte").get<double>();
    a.exit_direction = exit_direction_from_string(j.at("exit_dir").get<std::string>());

    if (a.lat < -90.0 || a.lat > 90.0) throw data_error("latitude out of range");
    if (a.lon < -180.0 || a.lon > 180.0) throw data_error("longitude out of range");
    // Flight levels are hundreds of feet; four-digit values mean someone
    // wrote raw feet.
    for (double v : {a.flight_level, static_cast<double>(a.cleared_fl),
                     static_cast<double>(a.exit_fl)})
        if (v <= 0.0 || v >= 1000.0)
            throw data_error("flight level " + std::to_string(v) + " outside plausible band");
    if (a.ground_speed < 0.0) throw data_error("negative ground speed");
    if (a.time_to_exit < 0.0) throw data_error("negative time to exit");
    return a;
}

}  // namespace

SectorGeometry default_sector() {
    SectorGeometry s;
    s.id = "SYNTH";
    // Roughly 180 x 190 NM upper-airspace box centred on 51N 1W, so a
    // typical transit takes two to three forecast horizons.
    s.polygon = {{49.5, -3.5}, {49.5, 1.5}, {52.5, 1.5}, {52.5, -3.5}};
    s.fl_band = {215, 305};
    s.buffer_deg = 0.3;
    return s;
}

std::vector<RouteTemplate> default_route_templates(const SectorGeometry& sector) {
    double lat_lo = 1e9, lat_hi = -1e9, lon_lo = 1e9, lon_hi = -1e9;
    for (const auto& [lat, lon] : sector.polygon) {
        lat_lo = std::min(lat_lo, lat);
        lat_hi = std::max(lat_hi, lat);
        lon_lo = std::min(lon_lo, lon);
        lon_hi = std::max(lon_hi, lon);
    }
    // A point u of the way along each side, sides named by compass direction.
    auto side_point = [&](ExitDirection side, double u) -> std::pair<double, double> {
        switch (side) {
            case ExitDirection::north: return {lat_hi, lon_lo + u * (lon_hi - lon_lo)};
            case ExitDirection::south: return {lat_lo, lon_lo + u * (lon_hi - lon_lo)};
            case ExitDirection::east: return {lat_lo + u * (lat_hi - lat_lo), lon_hi};
            case ExitDirection::west: return {lat_lo + u * (lat_hi - lat_lo), lon_lo};
        }
        throw std::invalid_argument("bad side");
    };
    const std::array<ExitDirection, 4> sides = {ExitDirection::north, ExitDirection::south,
                                                ExitDirection::east, ExitDirection::west};
    const std::array<double, 3> offsets = {0.3, 0.5, 0.7};
    std::vector<RouteTemplate> routes;
    for (ExitDirection in : sides)
        for (ExitDirection out : sides) {
            if (in == out) continue;
            for (double uin : offsets)
                for (double uout : offsets) {
                    RouteTemplate r;
                    std::tie(r.entry_lat, r.entry_lon) = side_point(in, uin);
                    std::tie(r.exit_lat, r.exit_lon) = side_point(out, uout);
                    r.exit_dir = out;
                    routes.push_back(r);
                }
        }
    return routes;
}

SynthConfig default_config(std::uint64_t seed) {
    SynthConfig cfg;
    cfg.sector = default_sector();
    cfg.routes = default_route_templates(cfg.sector);
    cfg.seed = seed;
    return cfg;
}

void validate_config(const SynthConfig& config) {
    const auto& poly = config.sector.polygon;
    if (poly.size() < 3) throw config_error("sector polygon needs at least 3 vertices");
    int sign = 0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const auto& a = poly[i];
        const auto& b = poly[(i + 1) % poly.size()];
        const auto& c = poly[(i + 2) % poly.size()];
        const double cross =
            (b.second - a.second) * (c.first - b.first) - (b.first - a.first) * (c.second - b.second);
        if (std::abs(cross) < 1e-12) continue;
        const int s = cross > 0.0 ? 1 : -1;
        if (sign != 0 && s != sign) throw config_error("sector polygon must be convex");
        sign = s;
    }
    if (sign == 0) throw config_error("sector polygon is degenerate");
    if (config.sector.fl_band.lo >= config.sector.fl_band.hi)
        throw config_error("sector FL band is inverted");
    if (config.arrival_rate_per_hour <= 0.0) throw config_error("arrival rate must be positive");
    if (config.duration_s <= 0.0) throw config_error("duration must be positive");
    if (config.snapshot_interval_s <= 0.0) throw config_error("snapshot interval must be positive");
    if (std::fmod(config.snapshot_interval_s, kTickS) > 1e-9)
        throw config_error("snapshot interval must be a multiple of the 5 s simulation tick");
    if (config.horizon_s <= 0.0) throw config_error("horizon must be positive");
    if (config.routes.empty()) throw config_error("no route templates configured");
}

std::vector<Scenario> generate_stream(const SynthConfig& config) {
    validate_config(config);
    const World w(config.sector);

    // Arrival times first, then per-aircraft draws from an indexed stream so
    // the sequence does not depend on simulation interleaving.
    Rng arrivals_rng = Rng::substream(config.seed, "arrivals");
    std::vector<double> arrival_times;
    double t_arr = 0.0;
    for (;;) {
        t_arr += -std::log(1.0 - arrivals_rng.uniform01()) * 3600.0 / config.arrival_rate_per_hour;
        if (t_arr >= config.duration_s) break;
        arrival_times.push_back(t_arr);
    }

    const int band_lo = config.sector.fl_band.lo + 10;
    const int band_hi = config.sector.fl_band.hi - 10;
    std::vector<int> levels;
    for (int fl = band_lo; fl <= band_hi; fl += 10) levels.push_back(fl);

    auto spawn_plane = [&](std::size_t k) {
        Rng rng = Rng::substream(config.seed, "traffic", k);
        Plane p;
        std::ostringstream cs;
        cs << "SYN";
        cs.width(4);
        cs.fill('0');
        cs << (k + 1);
        p.callsign = cs.str();
        const RouteTemplate& route = config.routes[rng.below(config.routes.size())];
        const auto [ex, ey] = w.frame.to_local(route.exit_lat, route.exit_lon);
        const auto [sx, sy] = w.frame.to_local(route.entry_lat, route.entry_lon);
        const double dx = ex - sx, dy = ey - sy;
        const double norm = std::hypot(dx, dy);
        p.tx = dx / norm;
        p.ty = dy / norm;
        // Spawn a little before the boundary so the buffer region is
        // populated.
        p.x = sx - p.tx * 10.0;
        p.y = sy - p.ty * 10.0;
        p.exit_x = ex;
        p.exit_y = ey;
        p.has_exit_fix = true;
        p.exit_dir = route.exit_dir;

        p.fl = static_cast<double>(levels[rng.below(levels.size())]);
        p.cfl = static_cast<int>(p.fl);
        if (rng.uniform01() < 0.35) {
            p.xfl = p.cfl;  // cruiser
        } else {
            const int delta = 20 + 10 * static_cast<int>(rng.below(6));
            const bool up_ok = p.cfl + delta <= band_hi;
            const bool down_ok = p.cfl - delta >= band_lo;
            if (up_ok && down_ok)
                p.xfl = rng.uniform01() < 0.5 ? p.cfl + delta : p.cfl - delta;
            else if (up_ok)
                p.xfl = p.cfl + delta;
            else if (down_ok)
                p.xfl = p.cfl - delta;
            else
                // Delta too large for either side; take the roomier one.
                p.xfl = band_hi - p.cfl >= p.cfl - band_lo ? band_hi : band_lo;
        }
        p.climb_fpm = climb_perf_fpm(p.callsign);
        const double u_engine = rng.uniform01();
        p.engine = u_engine < 0.70 ? EngineType::jet
                   : u_engine < 0.95 ? EngineType::turboprop
                                     : EngineType::piston;
        p.gs = p.engine == EngineType::jet ? rng.uniform(400.0, 460.0)
               : p.engine == EngineType::turboprop ? rng.uniform(250.0, 300.0)
                                                   : rng.uniform(170.0, 210.0);
        p.wake = static_cast<WakeCategory>(rng.below(3));
        return p;
    };

    std::vector<Plane> planes;
    std::vector<ClearanceEvent> events;
    std::vector<Scenario> stream;
    std::size_t next_arrival = 0;
    for (double t = 0.0; t <= config.duration_s + 1e-9; t += kTickS) {
        if (t > 0.0) advance_kinematics(planes, kTickS);
        while (next_arrival < arrival_times.size() && arrival_times[next_arrival] <= t)
            planes.push_back(spawn_plane(next_arrival++));
        retire_planes(w, planes);
        if (t > 0.0 && std::fmod(t, kControlTickS) < 1e-9)
            controller_tick(w, planes, t, config.knobs, events);
        if (std::fmod(t, config.snapshot_interval_s) < 1e-9) {
            Scenario s;
            s.timestamp = t;
            s.sector_id = config.sector.id;
            for (const auto& p : planes)
                if (p.active && plane_visible(w, p)) s.aircraft.push_back(make_state(w, p));
            if (!s.aircraft.empty()) stream.push_back(std::move(s));
        }
    }
    return stream;
}

std::vector<Scenario> oracle_controller(const std::vector<Scenario>& stream,
                                        const SectorGeometry& sector, double horizon_s,
                                        const ControllerKnobs& knobs) {
    std::vector<Scenario> labeled;
    labeled.reserve(stream.size());
    for (const auto& s : stream) {
        Scenario out = s;
        out.labels = closed_world_labels(s, sector, horizon_s, knobs);
        labeled.push_back(std::move(out));
    }
    return labeled;
}

void write_dataset(const std::filesystem::path& path, const std::vector<Scenario>& scenarios) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw data_error("cannot open dataset for writing: " + path.string());
    json header{{"schema", "atcd-scenarios-v1"},
                {"units",
                 {{"lat", "deg"}, {"lon", "deg"}, {"fl", "FL"}, {"gs", "kt"},
                  {"climb_rate", "ft/min"}, {"tte", "s"}}}};
    out << header.dump() << "\n";
    for (const auto& s : scenarios) {
        json line;
        line["timestamp"] = s.timestamp;
        line["sector_id"] = s.sector_id;
        json acs = json::array();
        for (const auto& a : s.aircraft) acs.push_back(state_to_json(a));
        line["aircraft"] = acs;
        if (s.labels) {
            json labels = json::object();
            for (const auto& [cs, count] : *s.labels) labels[cs] = count;
            line["labels"] = labels;
        }
        out << line.dump() << "\n";
    }
    if (!out) throw data_error("failed writing dataset: " + path.string());
}

std::vector<Scenario> read_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open dataset: " + path.string());
    std::string text;
    std::vector<Scenario> scenarios;
    long line_no = 0;
    while (std::getline(in, text)) {
        ++line_no;
        if (text.empty()) continue;
        json j;
        try {
            j = json::parse(text);
        } catch (const json::exception& e) {
            throw data_error("dataset line " + std::to_string(line_no) +
                             ": malformed JSON: " + e.what());
        }
        try {
            if (line_no == 1) {
                const std::string schema = j.at("schema").get<std::string>();
                if (schema != "atcd-scenarios-v1")
                    throw data_error("unsupported dataset schema: " + schema);
                continue;
            }
            Scenario s;
            s.timestamp = j.at("timestamp").get<double>();
            s.sector_id = j.at("sector_id").get<std::string>();
            for (const auto& aj : j.at("aircraft")) s.aircraft.push_back(state_from_json(aj));
            if (j.contains("labels")) {
                std::map<std::string, int> labels;
                for (const auto& [cs, count] : j.at("labels").items())
                    labels[cs] = count.get<int>();
                s.labels = std::move(labels);
            }
            validate_scenario(s);
            scenarios.push_back(std::move(s));
        } catch (const json::exception& e) {
            throw data_error("dataset line " + std::to_string(line_no) + ": " + e.what());
        } catch (const data_error& e) {
            throw data_error("dataset line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (line_no == 0) throw data_error("dataset is empty: " + path.string());
    return scenarios;
}

}  // namespace atcd::synth
