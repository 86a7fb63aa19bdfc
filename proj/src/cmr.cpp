#include "aicp/cmr.hpp"

#include <cmath>

namespace aicp {

namespace {

constexpr double kEarthRadiusM = 6371000.0;
constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

double source_distance(const Vdu& payload, const ReceiverState& rx) {
    if (rx.geodetic) {
        return haversine_distance_m(payload.lat_deg(), payload.lon_deg(),
                                    rx.x, rx.y);
    }
    // Planar deployments store meters in the fixed-point coordinate fields.
    return planar_distance(payload.gps_lat / 1e5, payload.gps_lon / 1e5, rx.x,
                           rx.y);
}

}  // namespace

double angular_diff(double a_deg, double b_deg) {
    double diff = std::fmod(std::abs(a_deg - b_deg), 360.0);
    return diff > 180.0 ? 360.0 - diff : diff;
}

double planar_distance(double x1, double y1, double x2, double y2) {
    const double dx = x2 - x1;
    const double dy = y2 - y1;
    return std::sqrt(dx * dx + dy * dy);
}

double haversine_distance_m(double lat1, double lon1, double lat2,
                            double lon2) {
    const double phi1 = lat1 * kDegToRad;
    const double phi2 = lat2 * kDegToRad;
    const double dphi = (lat2 - lat1) * kDegToRad;
    const double dlambda = (lon2 - lon1) * kDegToRad;
    const double a = std::sin(dphi / 2) * std::sin(dphi / 2) +
                     std::cos(phi1) * std::cos(phi2) *
                         std::sin(dlambda / 2) * std::sin(dlambda / 2);
    return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(a)));
}

FilterResult cmr_decide(const CmrPacket& pkt, const ReceiverState& rx,
                        const CmrConfig& cfg) {
    const int ttl = static_cast<int>(pkt.ttl) - 1;
    if (ttl < 0) {
        return {RoutingDecision::Drop, 0};
    }
    const double heading_gap =
        angular_diff(pkt.payload.imu.direction_deg(), rx.heading_deg);
    if (heading_gap > cfg.direction_threshold_deg) {
        return {RoutingDecision::Drop, 0};
    }
    if (source_distance(pkt.payload, rx) > cfg.distance_threshold_m) {
        return {RoutingDecision::Drop, 0};
    }
    return {RoutingDecision::ForwardAndProcess, static_cast<std::uint8_t>(ttl)};
}

FilterResult hopdis_decide(const CmrPacket& pkt, const ReceiverState& rx,
                           const CmrConfig& cfg) {
    const int ttl = static_cast<int>(pkt.ttl) - 1;
    if (ttl < 0) {
        return {RoutingDecision::Drop, 0};
    }
    if (source_distance(pkt.payload, rx) > cfg.distance_threshold_m) {
        return {RoutingDecision::Drop, 0};
    }
    return {RoutingDecision::ForwardAndProcess, static_cast<std::uint8_t>(ttl)};
}

FilterResult hop_decide(const CmrPacket& pkt, const CmrConfig&) {
    const int ttl = static_cast<int>(pkt.ttl) - 1;
    if (ttl < 0) {
        return {RoutingDecision::Drop, 0};
    }
    return {RoutingDecision::ForwardAndProcess, static_cast<std::uint8_t>(ttl)};
}

}  // namespace aicp
