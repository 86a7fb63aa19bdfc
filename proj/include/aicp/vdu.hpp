#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace aicp {

/// Decode/encode failures carry a machine-checkable kind alongside the message.
class CodecError : public std::runtime_error {
  public:
    enum class Kind {
        EmptyFrame,
        TruncatedFrame,
        MisalignedObjects,
        ObjectCountExceeded,
    };

    CodecError(Kind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

  private:
    Kind kind_;
};

enum class MessageType : std::uint8_t {
    Safety = 0,
    NonSafety = 1,
};

/// One perceived road object as carried on the wire (8 bytes).
/// Quantization: velocity 0.5 m/s per step (0..127.5 m/s), distance 1 m per
/// step, confidence byte maps linearly onto [0,1].
struct DetectedObject {
    std::uint16_t id = 0;
    std::uint8_t position_x = 0;
    std::uint8_t position_y = 0;
    std::uint8_t velocity = 0;
    std::uint8_t distance = 0;
    std::uint8_t label = 0;
    std::uint8_t confidence = 0;

    double velocity_mps() const { return 0.5 * velocity; }
    double distance_m() const { return static_cast<double>(distance); }
    double confidence_unit() const { return confidence / 255.0; }

    bool operator==(const DetectedObject&) const = default;
};

/// Sender inertial state, fixed 12-byte block. Bit 0 of reserved[0] carries
/// the message TYPE flag; the remaining reserved bits must be zero in frames
/// we originate but are preserved through decode/encode.
struct ImuBlock {
    std::int16_t velocity = 0;    // m/s * 100
    std::uint16_t direction = 0;  // 0.01 degree steps, < 36000
    std::uint8_t category = 0;    // sender vehicle class
    std::array<std::uint8_t, 7> reserved{};

    double velocity_mps() const { return velocity / 100.0; }
    double direction_deg() const { return direction / 100.0; }

    static ImuBlock from_si(double velocity_mps, double direction_deg,
                            std::uint8_t category);

    bool operator==(const ImuBlock&) const = default;
};

/// Application payload: vehicle state plus the detected-object list.
/// Encoded length is 22 + 8 * objects.size() bytes; the frame budget caps the
/// object list at 34 entries.
struct Vdu {
    static constexpr std::size_t kHeaderBytes = 22;
    static constexpr std::size_t kObjectBytes = 8;
    static constexpr std::size_t kMaxObjects = 34;

    MessageType msg_type = MessageType::Safety;
    std::uint16_t timestamp = 0;  // truncated epoch deciseconds
    std::int32_t gps_lat = 0;     // fixed point, 1e-5 degree units
    std::int32_t gps_lon = 0;     // fixed point, 1e-5 degree units
    ImuBlock imu;
    std::vector<DetectedObject> objects;

    double lat_deg() const { return gps_lat / 1e5; }
    double lon_deg() const { return gps_lon / 1e5; }
    void set_position(double lat, double lon);

    std::size_t encoded_size() const {
        return kHeaderBytes + kObjectBytes * objects.size();
    }

    bool operator==(const Vdu&) const = default;
};

/// Routed frame: one TTL byte in front of the encoded VDU. The source GPS and
/// heading used by the routing filters live in the payload fields.
struct CmrPacket {
    std::uint8_t ttl = 0;
    Vdu payload;

    std::size_t encoded_size() const { return 1 + payload.encoded_size(); }

    bool operator==(const CmrPacket&) const = default;
};

// Little-endian, field order timestamp | gps | imu | objects.
std::vector<std::uint8_t> encode_vdu(const Vdu& v);
Vdu decode_vdu(const std::vector<std::uint8_t>& bytes);

std::vector<std::uint8_t> encode_packet(const CmrPacket& p);
CmrPacket decode_packet(const std::vector<std::uint8_t>& bytes);

}  // namespace aicp
