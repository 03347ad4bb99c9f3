#include "qid/frame.hpp"

#include <stdexcept>

namespace qid {

const char* frame_type_name(FrameType t) {
    switch (t) {
        case FrameType::QUBITS: return "QUBITS";
        case FrameType::THETA_F: return "THETA_F";
        case FrameType::G: return "G";
        case FrameType::Z: return "Z";
        case FrameType::THETA_J_S_F: return "THETA_J_S_F";
        case FrameType::T_G: return "T_G";
        case FrameType::TEST_Z_TAG: return "TEST_Z_TAG";
        case FrameType::DECISION: return "DECISION";
        case FrameType::OTP_W: return "OTP_W";
        case FrameType::ABORT: return "ABORT";
    }
    return "?";
}

std::vector<uint8_t> encode_frame(const Frame& f) {
    if (f.payload.size() > kMaxPayload) throw std::length_error("encode_frame: oversize payload");
    std::vector<uint8_t> out;
    out.reserve(kFrameHeaderLen + f.payload.size());
    out.push_back(kFrameMagic0);
    out.push_back(kFrameMagic1);
    out.push_back(kFrameVersion);
    out.push_back(uint8_t(f.type));
    uint32_t len = uint32_t(f.payload.size());
    out.push_back(uint8_t(len >> 24));
    out.push_back(uint8_t(len >> 16));
    out.push_back(uint8_t(len >> 8));
    out.push_back(uint8_t(len));
    out.insert(out.end(), f.payload.begin(), f.payload.end());
    return out;
}

DecodeResult decode_frame(std::span<const uint8_t> data) {
    if (data.size() < kFrameHeaderLen) return {std::nullopt, DecodeError::Truncated, 0};
    if (data[0] != kFrameMagic0 || data[1] != kFrameMagic1)
        return {std::nullopt, DecodeError::BadMagic, 0};
    if (data[2] != kFrameVersion) return {std::nullopt, DecodeError::BadVersion, 0};
    uint8_t t = data[3];
    if (t < uint8_t(FrameType::QUBITS) || t > uint8_t(FrameType::ABORT))
        return {std::nullopt, DecodeError::UnknownType, 0};
    size_t len = (size_t(data[4]) << 24) | (size_t(data[5]) << 16) | (size_t(data[6]) << 8) |
                 size_t(data[7]);
    if (len > kMaxPayload) return {std::nullopt, DecodeError::Oversize, 0};
    if (data.size() - kFrameHeaderLen < len) return {std::nullopt, DecodeError::Truncated, 0};
    Frame f{FrameType(t), std::vector<uint8_t>(data.begin() + kFrameHeaderLen,
                                               data.begin() + long(kFrameHeaderLen + len))};
    return {std::move(f), DecodeError::Truncated, kFrameHeaderLen + len};
}

} // namespace qid
