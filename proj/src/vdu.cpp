#include "aicp/vdu.hpp"

#include <algorithm>
#include <cmath>

namespace aicp {

namespace {

constexpr std::uint8_t kMsgTypeMask = 0x01;

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_i32(std::vector<std::uint8_t>& out, std::int32_t v) {
    auto u = static_cast<std::uint32_t>(v);
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<std::uint8_t>(u & 0xFF));
        u >>= 8;
    }
}

std::uint16_t get_u16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::int32_t get_i32(const std::uint8_t* p) {
    std::uint32_t u = static_cast<std::uint32_t>(p[0]) |
                      (static_cast<std::uint32_t>(p[1]) << 8) |
                      (static_cast<std::uint32_t>(p[2]) << 16) |
                      (static_cast<std::uint32_t>(p[3]) << 24);
    return static_cast<std::int32_t>(u);
}

}  // namespace

ImuBlock ImuBlock::from_si(double velocity_mps, double direction_deg,
                           std::uint8_t category) {
    ImuBlock b;
    double v = std::clamp(velocity_mps * 100.0, -32768.0, 32767.0);
    b.velocity = static_cast<std::int16_t>(std::lround(v));
    double d = direction_deg - 360.0 * std::floor(direction_deg / 360.0);
    b.direction = static_cast<std::uint16_t>(std::lround(d * 100.0) % 36000);
    b.category = category;
    return b;
}

void Vdu::set_position(double lat, double lon) {
    gps_lat = static_cast<std::int32_t>(std::llround(lat * 1e5));
    gps_lon = static_cast<std::int32_t>(std::llround(lon * 1e5));
}

std::vector<std::uint8_t> encode_vdu(const Vdu& v) {
    if (v.objects.size() > Vdu::kMaxObjects) {
        throw CodecError(CodecError::Kind::ObjectCountExceeded,
                         "object count " + std::to_string(v.objects.size()) +
                             " exceeds limit of " +
                             std::to_string(Vdu::kMaxObjects));
    }
    std::vector<std::uint8_t> out;
    out.reserve(v.encoded_size());

    put_u16(out, v.timestamp);
    put_i32(out, v.gps_lat);
    put_i32(out, v.gps_lon);

    put_u16(out, static_cast<std::uint16_t>(v.imu.velocity));
    put_u16(out, v.imu.direction);
    out.push_back(v.imu.category);
    std::uint8_t flags = static_cast<std::uint8_t>(
        (v.imu.reserved[0] & ~kMsgTypeMask) |
        (v.msg_type == MessageType::NonSafety ? kMsgTypeMask : 0));
    out.push_back(flags);
    for (std::size_t i = 1; i < v.imu.reserved.size(); ++i) {
        out.push_back(v.imu.reserved[i]);
    }

    for (const DetectedObject& o : v.objects) {
        put_u16(out, o.id);
        out.push_back(o.position_x);
        out.push_back(o.position_y);
        out.push_back(o.velocity);
        out.push_back(o.distance);
        out.push_back(o.label);
        out.push_back(o.confidence);
    }
    return out;
}

Vdu decode_vdu(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < Vdu::kHeaderBytes) {
        throw CodecError(CodecError::Kind::TruncatedFrame,
                         "frame is " + std::to_string(bytes.size()) +
                             " bytes, need at least " +
                             std::to_string(Vdu::kHeaderBytes));
    }
    const std::size_t tail = bytes.size() - Vdu::kHeaderBytes;
    if (tail % Vdu::kObjectBytes != 0) {
        throw CodecError(CodecError::Kind::MisalignedObjects,
                         "object region of " + std::to_string(tail) +
                             " bytes is not a multiple of " +
                             std::to_string(Vdu::kObjectBytes));
    }

    Vdu v;
    const std::uint8_t* p = bytes.data();
    v.timestamp = get_u16(p);
    v.gps_lat = get_i32(p + 2);
    v.gps_lon = get_i32(p + 6);
    v.imu.velocity = static_cast<std::int16_t>(get_u16(p + 10));
    v.imu.direction = get_u16(p + 12);
    v.imu.category = p[14];
    v.msg_type = (p[15] & kMsgTypeMask) ? MessageType::NonSafety
                                        : MessageType::Safety;
    v.imu.reserved[0] = static_cast<std::uint8_t>(p[15] & ~kMsgTypeMask);
    for (std::size_t i = 1; i < v.imu.reserved.size(); ++i) {
        v.imu.reserved[i] = p[15 + i];
    }

    const std::size_t count = tail / Vdu::kObjectBytes;
    v.objects.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint8_t* q = p + Vdu::kHeaderBytes + i * Vdu::kObjectBytes;
        DetectedObject o;
        o.id = get_u16(q);
        o.position_x = q[2];
        o.position_y = q[3];
        o.velocity = q[4];
        o.distance = q[5];
        o.label = q[6];
        o.confidence = q[7];
        v.objects.push_back(o);
    }
    return v;
}

std::vector<std::uint8_t> encode_packet(const CmrPacket& p) {
    std::vector<std::uint8_t> out;
    out.reserve(p.encoded_size());
    out.push_back(p.ttl);
    std::vector<std::uint8_t> payload = encode_vdu(p.payload);
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

CmrPacket decode_packet(const std::vector<std::uint8_t>& bytes) {
    if (bytes.empty()) {
        throw CodecError(CodecError::Kind::EmptyFrame, "empty frame");
    }
    CmrPacket p;
    p.ttl = bytes[0];
    p.payload = decode_vdu(
        std::vector<std::uint8_t>(bytes.begin() + 1, bytes.end()));
    return p;
}

}  // namespace aicp
