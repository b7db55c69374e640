#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "atcd/types.hpp"

// Synthetic traffic generation. A deterministic point-mass simulation moves
// aircraft along straight routes through the sector while a scripted
// controller issues level, heading and speed clearances. Labels come from a
// closed-world re-simulation of each snapshot over the following horizon, so
// every label is a deterministic function of the snapshot itself.

namespace atcd::synth {

struct RouteTemplate {
    double entry_lat = 0.0, entry_lon = 0.0;
    double exit_lat = 0.0, exit_lon = 0.0;
    ExitDirection exit_dir = ExitDirection::north;
};

// Scripted controller thresholds. Defaults are tuned so that interactions
// (blocked climbs, converging pairs, in-trail catches) produce a healthy
// share of the clearance labels.
struct ControllerKnobs {
    double blocker_radius_nm = 10.0;   // lateral radius inside which a level blocks
    double caution_radius_nm = 25.0;   // nearby traffic forces small climb steps
    int caution_step_fl = 10;          // tight step cap; tripled with one aircraft near
    double cpa_threshold_nm = 10.0;    // vector when predicted miss distance is below
    double cpa_lookahead_s = 360.0;
    double vector_turn_deg = 30.0;
    double vector_cooldown_s = 60.0;
    double restore_clear_nm = 12.0;    // re-route to the exit fix when this far apart
    double intrail_gap_nm = 15.0;
    double intrail_track_dot = 0.93;
    double speed_factor = 0.93;        // applied to the trailing aircraft
    double handoff_tte_s = 60.0;
    double force_clear_tte_s = 90.0;
    double descend_window_s = 420.0;   // descents wait until this close to the exit
};

struct SynthConfig {
    SectorGeometry sector;
    std::vector<RouteTemplate> routes;
    double arrival_rate_per_hour = 44.0;
    double duration_s = 4.0 * 3600.0;
    double snapshot_interval_s = 180.0;
    double horizon_s = 600.0;
    ControllerKnobs knobs;
    std::uint64_t seed = 0;
};

SectorGeometry default_sector();
std::vector<RouteTemplate> default_route_templates(const SectorGeometry& sector);
SynthConfig default_config(std::uint64_t seed);

// Throws config_error on an invalid configuration (non-convex polygon,
// non-positive rates or intervals, inverted band).
void validate_config(const SynthConfig& config);

// Unlabeled time-ordered snapshots every snapshot_interval_s; snapshots with
// no visible aircraft are dropped.
std::vector<Scenario> generate_stream(const SynthConfig& config);

// Attaches per-aircraft clearance-count labels by re-simulating each
// snapshot forward for horizon_s with the scripted controller.
std::vector<Scenario> oracle_controller(const std::vector<Scenario>& stream,
                                        const SectorGeometry& sector, double horizon_s = 600.0,
                                        const ControllerKnobs& knobs = ControllerKnobs{});

// Line-delimited JSON persistence with a schema-versioned header line.
void write_dataset(const std::filesystem::path& path, const std::vector<Scenario>& scenarios);
std::vector<Scenario> read_dataset(const std::filesystem::path& path);

}  // namespace atcd::synth
