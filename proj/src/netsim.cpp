#include "aicp/netsim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

namespace aicp {

namespace {

constexpr double kSnrMarginDb = 10.0;
constexpr double kPhyMacOverheadBytes = 58.0;
constexpr double kReferenceLossDb = 47.86;  // free space, 5.9 GHz, 1 m
constexpr double kBreakDistanceM = 100.0;
constexpr double kNearExponent = 2.0;
constexpr double kFarExponent = 3.8;
constexpr int kSyntheticObjects = 10;

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    return splitmix64(seed ^ splitmix64(salt));
}

double rand_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double positive_fmod(double a, double m) {
    double r = std::fmod(a, m);
    return r < 0.0 ? r + m : r;
}

struct Axis {
    double dx = 0.0;
    double dy = 0.0;
};

Axis axis_from_heading(double heading_deg) {
    if (heading_deg == 0.0) return {1.0, 0.0};
    if (heading_deg == 90.0) return {0.0, 1.0};
    if (heading_deg == 180.0) return {-1.0, 0.0};
    if (heading_deg == 270.0) return {0.0, -1.0};
    const double rad = heading_deg * 3.14159265358979323846 / 180.0;
    return {std::cos(rad), std::sin(rad)};
}

double bearing_deg(double from_x, double from_y, double to_x, double to_y) {
    return std::atan2(to_y - from_y, to_x - from_x) * 180.0 /
           3.14159265358979323846;
}

struct Road {
    bool vertical = false;  // runs north-south
    double coord = 0.0;     // x for vertical roads, y for horizontal
    double heading_deg = 0.0;
};

std::vector<Road> build_roads(const MobilityParams& p, double w, double h) {
    std::vector<Road> roads;
    for (int i = 0; i < p.grid_cols; ++i) {
        const double x = w * (i + 1) / (p.grid_cols + 1);
        roads.push_back({true, x, (i % 2 == 0) ? 90.0 : 270.0});
    }
    for (int j = 0; j < p.grid_rows; ++j) {
        const double y = h * (j + 1) / (p.grid_rows + 1);
        roads.push_back({false, y, (j % 2 == 0) ? 0.0 : 180.0});
    }
    return roads;
}

}  // namespace

const char* filter_name(FilterType f) {
    switch (f) {
        case FilterType::Cmr: return "cmr";
        case FilterType::HopDis: return "hopdis";
        case FilterType::Hop: return "hop";
    }
    return "unknown";
}

Pose Trajectory::sample(double t, double area_width_m,
                        double area_height_m) const {
    const TrajectorySegment* seg = &segments.front();
    for (const TrajectorySegment& s : segments) {
        if (s.t_start <= t) {
            seg = &s;
        } else {
            break;
        }
    }
    const Axis axis = axis_from_heading(seg->heading_deg);
    const double travelled = seg->speed_mps * (t - seg->t_start);
    Pose pose;
    pose.x = positive_fmod(seg->x + axis.dx * travelled, area_width_m);
    pose.y = positive_fmod(seg->y + axis.dy * travelled, area_height_m);
    pose.heading_deg = seg->heading_deg;
    pose.speed_mps = seg->speed_mps;
    return pose;
}

double SimMetrics::mean_generated() const {
    if (per_vehicle.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& v : per_vehicle) sum += double(v.generated_bsms);
    return sum / double(per_vehicle.size());
}

double SimMetrics::mean_received() const {
    if (per_vehicle.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& v : per_vehicle) sum += double(v.received_bsms);
    return sum / double(per_vehicle.size());
}

double SimMetrics::mean_lost() const {
    if (per_vehicle.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& v : per_vehicle) sum += double(v.lost_packets);
    return sum / double(per_vehicle.size());
}

double SimMetrics::mean_busy_s() const {
    if (per_vehicle.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& v : per_vehicle) sum += v.busy_time_s;
    return sum / double(per_vehicle.size());
}

double SimMetrics::mean_loss_ratio() const {
    if (per_vehicle.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& v : per_vehicle) sum += v.loss_ratio();
    return sum / double(per_vehicle.size());
}

void SimMetrics::write_metrics_csv(std::ostream& out) const {
    out << "vehicle_id,generated_bsms,received_bsms,lost_packets,busy_time_s\n";
    char buf[64];
    for (std::size_t i = 0; i < per_vehicle.size(); ++i) {
        const VehicleCounters& v = per_vehicle[i];
        std::snprintf(buf, sizeof(buf), "%.6f", v.busy_time_s);
        out << i << ',' << v.generated_bsms << ',' << v.received_bsms << ','
            << v.lost_packets << ',' << buf << '\n';
    }
    char gen[32], rec[32], lost[32], busy[32];
    std::snprintf(gen, sizeof(gen), "%.6f", mean_generated());
    std::snprintf(rec, sizeof(rec), "%.6f", mean_received());
    std::snprintf(lost, sizeof(lost), "%.6f", mean_lost());
    std::snprintf(busy, sizeof(busy), "%.6f", mean_busy_s());
    out << "mean," << gen << ',' << rec << ',' << lost << ',' << busy << '\n';
}

void SimMetrics::write_cdf_csv(std::ostream& out) const {
    out << "metric,value,cum_prob\n";
    const std::size_t n = per_vehicle.size();
    if (n == 0) return;
    char value[64], prob[32];

    auto dump = [&](const char* name, std::vector<double> samples) {
        std::sort(samples.begin(), samples.end());
        for (std::size_t i = 0; i < samples.size(); ++i) {
            std::snprintf(value, sizeof(value), "%.6f", samples[i]);
            std::snprintf(prob, sizeof(prob), "%.6f",
                          double(i + 1) / double(samples.size()));
            out << name << ',' << value << ',' << prob << '\n';
        }
    };

    std::vector<double> received, generated, loss_ratio, busy;
    for (const auto& v : per_vehicle) {
        received.push_back(double(v.received_bsms));
        generated.push_back(double(v.generated_bsms));
        loss_ratio.push_back(v.loss_ratio());
        busy.push_back(v.busy_time_s);
    }
    dump("received_bsms", std::move(received));
    dump("generated_bsms", std::move(generated));
    dump("loss_ratio", std::move(loss_ratio));
    dump("busy_time_s", std::move(busy));
}

double antenna_gain(double theta_deg, AntennaType type) {
    return antenna_gain(theta_deg, type, AntennaPattern{});
}

double antenna_gain(double theta_deg, AntennaType type,
                    const AntennaPattern& pattern) {
    if (type == AntennaType::Isotropic) {
        return 0.0;
    }
    const double s = std::sin(theta_deg * 3.14159265358979323846 / 180.0);
    return pattern.max_gain_dbi -
           (pattern.max_gain_dbi - pattern.min_gain_dbi) * s * s;
}

double path_loss_db(double distance_m) {
    const double d = std::max(distance_m, 1.0);
    if (d <= kBreakDistanceM) {
        return kReferenceLossDb + 10.0 * kNearExponent * std::log10(d);
    }
    const double at_break =
        kReferenceLossDb + 10.0 * kNearExponent * std::log10(kBreakDistanceM);
    return at_break + 10.0 * kFarExponent * std::log10(d / kBreakDistanceM);
}

double link_budget(const Pose& tx, const Pose& rx, const SimConfig& cfg) {
    const double d = planar_distance(tx.x, tx.y, rx.x, rx.y);
    const double to_rx = bearing_deg(tx.x, tx.y, rx.x, rx.y);
    const double to_tx = bearing_deg(rx.x, rx.y, tx.x, tx.y);
    const double tx_gain = antenna_gain(angular_diff(to_rx, tx.heading_deg),
                                        cfg.antenna, cfg.pattern);
    const double rx_gain = antenna_gain(angular_diff(to_tx, rx.heading_deg),
                                        cfg.antenna, cfg.pattern);
    return cfg.tx_power_dbm + tx_gain + rx_gain - path_loss_db(d);
}

double reception_threshold_dbm(const SimConfig& cfg) {
    return cfg.noise_floor_dbm + kSnrMarginDb;
}

double max_reception_range_m(const SimConfig& cfg) {
    const double best_gain =
        cfg.antenna == AntennaType::FrontRear ? 2.0 * cfg.pattern.max_gain_dbi
                                              : 0.0;
    const double budget =
        cfg.tx_power_dbm + best_gain - reception_threshold_dbm(cfg);
    if (budget <= kReferenceLossDb) {
        return 1.0;
    }
    const double at_break =
        kReferenceLossDb + 10.0 * kNearExponent * std::log10(kBreakDistanceM);
    if (budget <= at_break) {
        return std::pow(10.0, (budget - kReferenceLossDb) /
                                  (10.0 * kNearExponent));
    }
    return kBreakDistanceM *
           std::pow(10.0, (budget - at_break) / (10.0 * kFarExponent));
}

std::vector<Trajectory> generate_mobility(const MobilityParams& params,
                                          double area_width_m,
                                          double area_height_m,
                                          int vehicle_count,
                                          double duration_s,
                                          std::uint64_t seed) {
    std::vector<Trajectory> out;
    if (vehicle_count <= 0) return out;

    const std::vector<Road> roads =
        build_roads(params, area_width_m, area_height_m);
    std::vector<double> lengths;
    double total_length = 0.0;
    for (const Road& r : roads) {
        const double len = r.vertical ? area_height_m : area_width_m;
        lengths.push_back(len);
        total_length += len;
    }

    out.reserve(vehicle_count);
    for (int vid = 0; vid < vehicle_count; ++vid) {
        std::mt19937_64 rng(mix_seed(seed, 0x6D0B ^ std::uint64_t(vid)));

        double pick = rand_unit(rng) * total_length;
        std::size_t road_idx = 0;
        while (road_idx + 1 < roads.size() && pick >= lengths[road_idx]) {
            pick -= lengths[road_idx];
            ++road_idx;
        }
        const double speed =
            params.speed_min_mps +
            (params.speed_max_mps - params.speed_min_mps) * rand_unit(rng);

        Trajectory traj;
        const Road* road = &roads[road_idx];
        double along = rand_unit(rng) * lengths[road_idx];
        double t = 0.0;
        while (true) {
            TrajectorySegment seg;
            seg.t_start = t;
            seg.x = road->vertical ? road->coord : along;
            seg.y = road->vertical ? along : road->coord;
            seg.heading_deg = road->heading_deg;
            seg.speed_mps = speed;
            traj.segments.push_back(seg);
            if (speed <= 0.0) break;

            // Ring distance to the nearest intersection ahead; the road wraps
            // toroidally, so "ahead" is along the one-way direction.
            const double ring = road->vertical ? area_height_m : area_width_m;
            const bool forward = road->heading_deg == 0.0 ||
                                 road->heading_deg == 90.0;
            double best = std::numeric_limits<double>::infinity();
            const Road* crossing = nullptr;
            for (const Road& other : roads) {
                if (other.vertical == road->vertical) continue;
                double d = forward ? positive_fmod(other.coord - along, ring)
                                   : positive_fmod(along - other.coord, ring);
                if (d < 1e-6) d = ring;
                if (d < best) {
                    best = d;
                    crossing = &other;
                }
            }
            if (crossing == nullptr) {
                break;  // no intersections on this grid
            }
            t += best / speed;
            along = positive_fmod(along + (forward ? best : -best), ring);
            if (t >= duration_s) break;
            if (rand_unit(rng) < params.turn_probability) {
                const double junction = road->coord;
                road = crossing;
                along = junction;
            }
        }
        out.push_back(std::move(traj));
    }
    return out;
}

namespace {

struct Frame {
    int tx = 0;
    int origin = 0;
    CmrPacket packet;
};

Vdu make_beacon_payload(int vehicle_id, std::uint16_t seq, const Pose& pose,
                        double now_s) {
    Vdu v;
    v.msg_type = MessageType::Safety;
    v.timestamp = static_cast<std::uint16_t>(
        static_cast<std::uint64_t>(now_s * 10.0) & 0xFFFF);
    v.set_position(pose.x, pose.y);
    v.imu = ImuBlock::from_si(pose.speed_mps, pose.heading_deg, 1);
    v.objects.reserve(kSyntheticObjects);
    for (int k = 0; k < kSyntheticObjects; ++k) {
        DetectedObject o;
        o.id = static_cast<std::uint16_t>(vehicle_id * 37 + seq + k);
        o.position_x = static_cast<std::uint8_t>(20 * k);
        o.position_y = static_cast<std::uint8_t>(255 - 20 * k);
        o.velocity = static_cast<std::uint8_t>(10 + 2 * k);
        o.distance = static_cast<std::uint8_t>(5 + 10 * k);
        o.label = static_cast<std::uint8_t>(k % 4);
        o.confidence = 200;
        v.objects.push_back(o);
    }
    return v;
}

void validate_config(const SimConfig& cfg) {
    auto fail = [](const std::string& msg) { throw InvalidConfig(msg); };
    if (cfg.area_width_m <= 0 || cfg.area_height_m <= 0) {
        fail("area dimensions must be positive");
    }
    if (cfg.duration_s <= 0) fail("duration must be positive");
    if (cfg.beacon_rate_hz < 1.0 || cfg.beacon_rate_hz > 10.0) {
        fail("beacon rate must be between 1 and 10 Hz");
    }
    if (cfg.bit_rate_bps <= 0) fail("bit rate must be positive");
    if (cfg.vehicle_count < 0) fail("vehicle count must be non-negative");
    if (cfg.pattern.max_gain_dbi < cfg.pattern.min_gain_dbi) {
        fail("antenna pattern max gain below min gain");
    }
    if (cfg.cmr.ttl_initial < 1) fail("hop limit must be at least 1");
    if (cfg.cmr.direction_threshold_deg <= 0 ||
        cfg.cmr.direction_threshold_deg > 180) {
        fail("direction threshold must be in (0, 180]");
    }
    if (cfg.cmr.distance_threshold_m <= 0) {
        fail("distance threshold must be positive");
    }
    if (cfg.mobility.grid_cols < 0 || cfg.mobility.grid_rows < 0 ||
        cfg.mobility.grid_cols + cfg.mobility.grid_rows < 1) {
        fail("mobility grid needs at least one road");
    }
    if (cfg.mobility.speed_min_mps < 0 ||
        cfg.mobility.speed_max_mps < cfg.mobility.speed_min_mps) {
        fail("speed range is invalid");
    }
    if (cfg.mobility.turn_probability < 0 || cfg.mobility.turn_probability > 1) {
        fail("turn probability must be in [0, 1]");
    }
    if (!cfg.beacon_phase_ms.empty() &&
        cfg.beacon_phase_ms.size() != static_cast<std::size_t>(cfg.vehicle_count)) {
        fail("beacon phase override must list every vehicle");
    }
}

}  // namespace

SimMetrics run_simulation(const SimConfig& cfg) {
    validate_config(cfg);
    const std::vector<Trajectory> trajectories =
        generate_mobility(cfg.mobility, cfg.area_width_m, cfg.area_height_m,
                          cfg.vehicle_count, cfg.duration_s, cfg.seed);
    return run_simulation(cfg, trajectories);
}

SimMetrics run_simulation(const SimConfig& cfg,
                          std::span<const Trajectory> trajectories) {
    validate_config(cfg);
    if (trajectories.size() != static_cast<std::size_t>(cfg.vehicle_count)) {
        throw InvalidConfig("trajectory count does not match vehicle count");
    }

    SimMetrics metrics;
    metrics.per_vehicle.resize(cfg.vehicle_count);
    if (cfg.vehicle_count == 0) return metrics;

    const int n = cfg.vehicle_count;
    const auto duration_ms =
        static_cast<std::int64_t>(std::llround(cfg.duration_s * 1000.0));
    const auto interval_ms =
        static_cast<std::int64_t>(std::llround(1000.0 / cfg.beacon_rate_hz));

    std::vector<int> phase(n);
    if (cfg.beacon_phase_ms.empty()) {
        for (int v = 0; v < n; ++v) {
            std::mt19937_64 rng(mix_seed(cfg.seed, 0xBEAC ^ std::uint64_t(v)));
            phase[v] = static_cast<int>(rng() % std::uint64_t(interval_ms));
        }
    } else {
        phase = cfg.beacon_phase_ms;
        for (int p : phase) {
            if (p < 0 || p >= interval_ms) {
                throw InvalidConfig("beacon phase outside the interval");
            }
        }
    }

    // All frames carry the same 10-object payload size.
    const double frame_bytes =
        1.0 + Vdu::kHeaderBytes + Vdu::kObjectBytes * kSyntheticObjects;
    const double airtime_s =
        (frame_bytes + kPhyMacOverheadBytes) * 8.0 / cfg.bit_rate_bps;
    const double threshold_dbm = reception_threshold_dbm(cfg);
    const double max_range = max_reception_range_m(cfg);
    const double max_range2 = max_range * max_range;

    std::mt19937_64 jitter_rng(mix_seed(cfg.seed, 0x171E5));

    constexpr std::size_t kRing = 8;  // > max forward jitter of 5 ms
    std::array<std::vector<Frame>, kRing> ring;

    std::vector<VehicleAgent> agents(n);
    std::vector<std::uint16_t> seq(n, 0);
    for (int v = 0; v < n; ++v) agents[v].id = v;

    for (std::int64_t ms = 0; ms < duration_ms; ++ms) {
        const double now_s = double(ms) / 1000.0;
        for (int v = 0; v < n; ++v) {
            agents[v].pose =
                trajectories[v].sample(now_s, cfg.area_width_m,
                                       cfg.area_height_m);
        }

        std::vector<Frame>& bucket = ring[std::size_t(ms) % kRing];
        for (int v = 0; v < n; ++v) {
            if (ms < phase[v] || (ms - phase[v]) % interval_ms != 0) continue;
            Frame f;
            f.tx = v;
            f.origin = v;
            f.packet.ttl = static_cast<std::uint8_t>(cfg.cmr.ttl_initial);
            f.packet.payload =
                make_beacon_payload(v, seq[v]++, agents[v].pose, now_s);
            bucket.push_back(std::move(f));
        }
        if (bucket.empty()) continue;

        for (const Frame& f : bucket) {
            ++agents[f.tx].metrics.generated_bsms;
            if (f.origin != f.tx) ++metrics.total_forwards;
        }

        for (int rx = 0; rx < n; ++rx) {
            VehicleAgent& agent = agents[rx];
            agent.rx_queue.clear();
            for (std::size_t i = 0; i < bucket.size(); ++i) {
                const Frame& f = bucket[i];
                if (f.tx == rx) continue;
                const Pose& tp = agents[f.tx].pose;
                const double dx = tp.x - agent.pose.x;
                const double dy = tp.y - agent.pose.y;
                if (dx * dx + dy * dy > max_range2) continue;
                if (link_budget(tp, agent.pose, cfg) >= threshold_dbm) {
                    agent.rx_queue.push_back(i);
                }
            }
            if (agent.rx_queue.empty()) continue;

            // Same-tick frames share one airtime interval; the channel is
            // sensed busy once.
            agent.metrics.busy_time_s += airtime_s;

            if (agent.rx_queue.size() >= 2) {
                for (std::size_t i : agent.rx_queue) {
                    if (bucket[i].origin != rx) {
                        ++agent.metrics.lost_packets;
                    }
                }
                continue;
            }

            const Frame& f = bucket[agent.rx_queue.front()];
            if (f.origin == rx) continue;  // own packet echoed back
            ++agent.metrics.received_bsms;

            ReceiverState state;
            state.heading_deg = agent.pose.heading_deg;
            state.x = agent.pose.x;
            state.y = agent.pose.y;

            FilterResult decision;
            switch (cfg.filter) {
                case FilterType::Cmr:
                    decision = cmr_decide(f.packet, state, cfg.cmr);
                    break;
                case FilterType::HopDis:
                    decision = hopdis_decide(f.packet, state, cfg.cmr);
                    break;
                case FilterType::Hop:
                    decision = hop_decide(f.packet, cfg.cmr);
                    break;
            }
            if (decision.decision == RoutingDecision::ForwardAndProcess) {
                const std::int64_t delay = 1 + std::int64_t(jitter_rng() % 5);
                const std::int64_t when = ms + delay;
                if (when < duration_ms) {
                    Frame fwd;
                    fwd.tx = rx;
                    fwd.origin = f.origin;
                    fwd.packet.ttl = decision.forwarded_ttl;
                    fwd.packet.payload = f.packet.payload;
                    ring[std::size_t(when) % kRing].push_back(std::move(fwd));
                }
            }
        }
        bucket.clear();
    }

    for (int v = 0; v < n; ++v) {
        metrics.per_vehicle[v] = agents[v].metrics;
    }
    return metrics;
}

}  // namespace aicp
