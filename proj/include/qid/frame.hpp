#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qid {

/// Wire frame: magic 0x51 0x49 ("QI"), version, type, 4-byte big-endian
/// payload length, payload. Payload formats are per-type; multi-field
/// payloads use the canonical length-prefixed part encoding.
enum class FrameType : uint8_t {
    QUBITS = 1,
    THETA_F = 2,
    G = 3,
    Z = 4,
    THETA_J_S_F = 5,
    T_G = 6,
    TEST_Z_TAG = 7,
    DECISION = 8,
    OTP_W = 9,
    ABORT = 10,
};

const char* frame_type_name(FrameType t);

struct Frame {
    FrameType type;
    std::vector<uint8_t> payload;

    bool operator==(const Frame&) const = default;
};

enum class DecodeError {
    Truncated,
    BadMagic,
    BadVersion,
    UnknownType,
    Oversize,
};

inline constexpr uint8_t kFrameMagic0 = 0x51, kFrameMagic1 = 0x49;
inline constexpr uint8_t kFrameVersion = 1;
inline constexpr size_t kFrameHeaderLen = 8;
inline constexpr size_t kMaxPayload = size_t(1) << 24;

std::vector<uint8_t> encode_frame(const Frame& f);

struct DecodeResult {
    std::optional<Frame> frame;
    DecodeError error;      // valid when !frame
    size_t consumed;        // bytes consumed on success, 0 on error
};

/// Never throws on arbitrary bytes; on error, zero bytes are consumed.
DecodeResult decode_frame(std::span<const uint8_t> data);

} // namespace qid
