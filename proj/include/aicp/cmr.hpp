#pragma once

#include <cstdint>

#include "aicp/vdu.hpp"

namespace aicp {

/// Routing filter thresholds. Defaults match the reference deployment:
/// two forwarding hops, 30 degrees of source heading deviation, 100 m of
/// source distance.
struct CmrConfig {
    int ttl_initial = 2;
    double direction_threshold_deg = 30.0;
    double distance_threshold_m = 100.0;
};

/// Pose of the vehicle making the routing decision. Coordinates are planar
/// meters by default; with `geodetic` set they are degrees and distances use
/// the haversine formula.
struct ReceiverState {
    double heading_deg = 0.0;  // [0, 360)
    double x = 0.0;
    double y = 0.0;
    bool geodetic = false;
};

enum class RoutingDecision : std::uint8_t {
    Drop,
    ForwardAndProcess,
};

struct FilterResult {
    RoutingDecision decision = RoutingDecision::Drop;
    std::uint8_t forwarded_ttl = 0;  // ttl written into the forwarded copy
};

/// Smallest angle between two headings, wrap-aware, in [0, 180].
double angular_diff(double a_deg, double b_deg);

double planar_distance(double x1, double y1, double x2, double y2);
double haversine_distance_m(double lat1, double lon1, double lat2,
                            double lon2);

/// Full directional filter: drop when the hop budget is spent, the source
/// heading deviates more than the threshold, or the source is too far away.
/// Source heading and position are read from the payload fields.
FilterResult cmr_decide(const CmrPacket& pkt, const ReceiverState& rx,
                        const CmrConfig& cfg);

/// Baseline filter applying only the hop and distance predicates.
FilterResult hopdis_decide(const CmrPacket& pkt, const ReceiverState& rx,
                           const CmrConfig& cfg);

/// Baseline filter applying only the hop predicate.
FilterResult hop_decide(const CmrPacket& pkt, const CmrConfig& cfg);

}  // namespace aicp
