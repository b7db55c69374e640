#pragma once

#include <string>
#include <vector>

#include "atcd/types.hpp"

// Node feature encoding and normalization. The feature manifest is fixed:
// slot order below, one column per slot, categoricals as 0-based integer
// class codes.

namespace atcd {

enum class NormKind { zscore, maxabs, integer_class, passthrough };

struct FeatureStat {
    std::string name;
    NormKind kind = NormKind::passthrough;
    double mean = 0.0;   // zscore
    double stdev = 0.0;  // zscore
    double bound = 0.0;  // maxabs
    int num_classes = 0;  // integer_class
};

// Node feature slot indices. Changing this order invalidates every
// checkpoint, so treat it as frozen.
namespace feat {
inline constexpr int lat = 0;
inline constexpr int lon = 1;
inline constexpr int flight_level = 2;
inline constexpr int ground_speed = 3;
inline constexpr int track_east = 4;
inline constexpr int track_north = 5;
inline constexpr int climb_rate = 6;
inline constexpr int step_climb = 7;
inline constexpr int delta_exit_fl = 8;
inline constexpr int engine_type = 9;
inline constexpr int wake_category = 10;
inline constexpr int on_heading = 11;
inline constexpr int speed_control = 12;
inline constexpr int comm_state = 13;
inline constexpr int time_to_exit = 14;
inline constexpr int exit_direction = 15;
inline constexpr int count = 16;
}  // namespace feat

inline constexpr int kNodeFeatureCount = feat::count;
inline constexpr int kEdgeFeatureCount = 2;

struct NormalizationStats {
    std::vector<FeatureStat> node;  // length kNodeFeatureCount, manifest order
    FeatureStat edge_separation;    // zscore over training-fold edges
    FeatureStat edge_closing;       // maxabs over training-fold edges
};

// Eq-style maximum absolute scaling: x / bound. Preserves zero and sign.
double max_abs_scale(double x, double bound);

// Fits node and edge feature statistics over the training scenarios. Edge
// statistics are collected from the pairs that the FL-overlap rule (with the
// given buffer) would connect. Throws data_error on empty input or a
// degenerate (zero-spread) feature.
NormalizationStats fit_normalization(const std::vector<Scenario>& training, int fl_buffer = 10);

// Encodes one aircraft into the fixed-order feature vector.
std::vector<double> encode_node_features(const AircraftState& a, const NormalizationStats& stats);

// Recovers the 0-based class code from an integer_class slot. Throws
// data_error if the value is not a valid code.
int decode_class_slot(double value, int num_classes);

// Raw (pre-normalization) value of one node feature slot; enums and booleans
// report their class code. Used by permutation-based analyses.
double raw_node_feature(const AircraftState& a, int slot);
// Writes a raw value back into the aircraft state. For delta_exit_fl the
// exit flight level is adjusted so the derived value matches.
void set_raw_node_feature(AircraftState& a, int slot, double value);

const std::vector<std::string>& node_feature_names();

// Structural manifest queries: how a slot is normalized and, for
// integer_class slots, how many codes it admits (0 otherwise).
NormKind node_feature_kind(int slot);
int node_feature_classes(int slot);

// Time in seconds until a straight-line constant-speed projection of the
// aircraft crosses the sector polygon boundary outbound. 0 when already
// outside and moving away. Throws data_error on zero ground speed.
double project_time_to_exit(const AircraftState& a, const SectorGeometry& sector);

}  // namespace atcd
