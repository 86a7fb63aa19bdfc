#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "aicp/cmr.hpp"
#include "aicp/vdu.hpp"

namespace aicp {

class InvalidConfig : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class AntennaType : std::uint8_t { Isotropic, FrontRear };
enum class FilterType : std::uint8_t { Cmr, HopDis, Hop };

const char* filter_name(FilterType f);

/// Manhattan-grid mobility: one-way axis-aligned roads, constant per-vehicle
/// speed, optional turn at each intersection, toroidal wrap at the area edge.
struct MobilityParams {
    int grid_cols = 4;  // north-south roads
    int grid_rows = 5;  // east-west roads
    double speed_min_mps = 1.0;
    double speed_max_mps = 2.0;
    double turn_probability = 0.25;
};

/// Gain envelope of the front-rear antenna: max along the heading axis (both
/// directions), min broadside, smooth sin^2 blend in between.
struct AntennaPattern {
    double max_gain_dbi = 5.0;
    double min_gain_dbi = -10.0;
};

struct SimConfig {
    double area_width_m = 4000.0;
    double area_height_m = 5000.0;
    double duration_s = 60.0;
    double beacon_rate_hz = 10.0;  // 1..10
    double bit_rate_bps = 6e6;
    double tx_power_dbm = 13.0;  // 20 mW
    double noise_floor_dbm = -98.0;
    AntennaType antenna = AntennaType::FrontRear;
    AntennaPattern pattern;
    int vehicle_count = 212;
    std::uint64_t seed = 1;
    FilterType filter = FilterType::Cmr;
    CmrConfig cmr;
    MobilityParams mobility;
    /// Per-vehicle beacon phase in ms; empty draws phases from the seed.
    std::vector<int> beacon_phase_ms;
};

struct Pose {
    double x = 0.0;
    double y = 0.0;
    double heading_deg = 0.0;
    double speed_mps = 0.0;
};

struct TrajectorySegment {
    double t_start = 0.0;
    double x = 0.0;
    double y = 0.0;
    double heading_deg = 0.0;
    double speed_mps = 0.0;
};

struct Trajectory {
    std::vector<TrajectorySegment> segments;  // ordered by t_start

    Pose sample(double t, double area_width_m, double area_height_m) const;
};

struct VehicleCounters {
    std::uint64_t generated_bsms = 0;
    std::uint64_t received_bsms = 0;
    std::uint64_t lost_packets = 0;
    double busy_time_s = 0.0;

    double loss_ratio() const {
        const auto total = received_bsms + lost_packets;
        return total ? static_cast<double>(lost_packets) /
                           static_cast<double>(total)
                     : 0.0;
    }
};

struct VehicleAgent {
    int id = 0;
    Pose pose;
    VehicleCounters metrics;
    std::vector<std::size_t> rx_queue;  // frames above threshold this tick
};

struct SimMetrics {
    std::vector<VehicleCounters> per_vehicle;
    std::uint64_t total_forwards = 0;

    double mean_generated() const;
    double mean_received() const;
    double mean_lost() const;
    double mean_busy_s() const;
    double mean_loss_ratio() const;

    /// One row per vehicle plus a trailing mean row.
    void write_metrics_csv(std::ostream& out) const;
    /// Sorted per-vehicle samples of each metric, for CDF plots.
    void write_cdf_csv(std::ostream& out) const;
};

/// dBi gain at angle theta from the vehicle heading.
double antenna_gain(double theta_deg, AntennaType type);
double antenna_gain(double theta_deg, AntennaType type,
                    const AntennaPattern& pattern);

/// Two-slope log-distance path loss, 5.9 GHz reference at 1 m, exponent 2 to
/// 100 m and 3.8 beyond.
double path_loss_db(double distance_m);

/// Received power in dBm over one link with both antenna gains applied.
double link_budget(const Pose& tx, const Pose& rx, const SimConfig& cfg);

double reception_threshold_dbm(const SimConfig& cfg);

/// Largest distance at which reception is possible under the most favorable
/// antenna alignment.
double max_reception_range_m(const SimConfig& cfg);

std::vector<Trajectory> generate_mobility(const MobilityParams& params,
                                          double area_width_m,
                                          double area_height_m,
                                          int vehicle_count,
                                          double duration_s,
                                          std::uint64_t seed);

/// 1 ms event loop: beacons every 1/rate seconds, same-tick frames above
/// threshold collide, surviving frames pass the configured filter and
/// rebroadcast after a 1-5 ms jitter. Fully deterministic for a given seed.
SimMetrics run_simulation(const SimConfig& cfg);

/// Variant over externally supplied trajectories (one per vehicle), for
/// scripted scenarios and trace replay.
SimMetrics run_simulation(const SimConfig& cfg,
                          std::span<const Trajectory> trajectories);

}  // namespace aicp
