#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qid/bits.hpp"

namespace qid {

/// Canonical framing shared by the MAC message and the wire payloads:
/// each part is a 4-byte big-endian *bit* length followed by the part packed
/// MSB-first, last byte zero-padded. The encoding is injective because every
/// part carries its exact length.

inline void append_u32_be(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(uint8_t(v >> 24));
    out.push_back(uint8_t(v >> 16));
    out.push_back(uint8_t(v >> 8));
    out.push_back(uint8_t(v));
}

inline std::vector<uint8_t> encode_parts(std::span<const BitVec> parts) {
    std::vector<uint8_t> out;
    for (const BitVec& p : parts) {
        append_u32_be(out, uint32_t(p.size()));
        const auto& bytes = p.packed();
        out.insert(out.end(), bytes.begin(), bytes.end());
    }
    return out;
}

inline std::vector<uint8_t> encode_parts(std::initializer_list<BitVec> parts) {
    return encode_parts(std::span<const BitVec>(parts.begin(), parts.size()));
}

/// Returns nullopt on any truncation or nonzero padding bit.
inline std::optional<std::vector<BitVec>> decode_parts(std::span<const uint8_t> data) {
    std::vector<BitVec> parts;
    size_t off = 0;
    while (off < data.size()) {
        if (data.size() - off < 4) return std::nullopt;
        uint32_t nbits = (uint32_t(data[off]) << 24) | (uint32_t(data[off + 1]) << 16) |
                         (uint32_t(data[off + 2]) << 8) | uint32_t(data[off + 3]);
        off += 4;
        size_t nbytes = (size_t(nbits) + 7) / 8;
        if (data.size() - off < nbytes) return std::nullopt;
        BitVec v = BitVec::from_packed(data.subspan(off, nbytes), nbits);
        // reject nonzero pad bits so the map stays injective
        if (nbits % 8 != 0) {
            uint8_t tail = data[off + nbytes - 1];
            uint8_t mask = uint8_t(0xFFu >> (nbits % 8));
            if (tail & mask) return std::nullopt;
        }
        off += nbytes;
        parts.push_back(std::move(v));
    }
    return parts;
}

/// The whole encoding viewed as one bit string (for MAC embedding).
inline BitVec parts_as_bits(std::span<const BitVec> parts) {
    std::vector<uint8_t> bytes = encode_parts(parts);
    return BitVec::from_packed(bytes, bytes.size() * 8);
}

} // namespace qid
