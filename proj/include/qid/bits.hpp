#pragma once

#include <cstdint>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qid {

/// Fixed-length bit string. Bit 0 is the leftmost / most significant bit;
/// packed byte layout puts bit i at bytes[i/8], mask 0x80 >> (i%8).
/// Every module shares this one convention.
class BitVec {
public:
    BitVec() = default;
    explicit BitVec(size_t nbits) : n_(nbits), bytes_((nbits + 7) / 8, 0) {}

    static BitVec from_string(const std::string& s) {
        BitVec v(s.size());
        for (size_t i = 0; i < s.size(); ++i) {
            if (s[i] == '1') v.set(i, true);
            else if (s[i] != '0') throw std::invalid_argument("BitVec: bad character in bit string");
        }
        return v;
    }

    /// Interprets the low `nbits` of `value` as the string, MSB first.
    static BitVec from_u64(uint64_t value, size_t nbits) {
        if (nbits > 64) throw std::invalid_argument("BitVec::from_u64: more than 64 bits");
        BitVec v(nbits);
        for (size_t i = 0; i < nbits; ++i)
            v.set(i, (value >> (nbits - 1 - i)) & 1);
        return v;
    }

    static BitVec from_packed(std::span<const uint8_t> bytes, size_t nbits) {
        if (bytes.size() != (nbits + 7) / 8)
            throw std::invalid_argument("BitVec::from_packed: byte count mismatch");
        BitVec v(nbits);
        v.bytes_.assign(bytes.begin(), bytes.end());
        v.mask_tail();
        return v;
    }

    size_t size() const { return n_; }
    bool empty() const { return n_ == 0; }

    bool get(size_t i) const {
        check_index(i);
        return (bytes_[i >> 3] >> (7 - (i & 7))) & 1;
    }
    void set(size_t i, bool b) {
        check_index(i);
        uint8_t m = uint8_t(0x80u >> (i & 7));
        if (b) bytes_[i >> 3] |= m; else bytes_[i >> 3] &= uint8_t(~m);
    }
    void flip(size_t i) { set(i, !get(i)); }

    BitVec& operator^=(const BitVec& o) {
        if (o.n_ != n_) throw std::invalid_argument("BitVec: xor length mismatch");
        for (size_t i = 0; i < bytes_.size(); ++i) bytes_[i] ^= o.bytes_[i];
        return *this;
    }
    friend BitVec operator^(BitVec a, const BitVec& b) { a ^= b; return a; }

    bool operator==(const BitVec& o) const { return n_ == o.n_ && bytes_ == o.bytes_; }
    bool operator!=(const BitVec& o) const { return !(*this == o); }

    BitVec slice(size_t from, size_t len) const {
        if (from + len > n_) throw std::out_of_range("BitVec::slice");
        BitVec v(len);
        for (size_t i = 0; i < len; ++i) v.set(i, get(from + i));
        return v;
    }

    void append(const BitVec& o) {
        size_t base = n_;
        resize(n_ + o.n_);
        for (size_t i = 0; i < o.n_; ++i) set(base + i, o.get(i));
    }
    void push_back(bool b) {
        resize(n_ + 1);
        set(n_ - 1, b);
    }

    /// Zero-pads on the right up to `nbits` (the protocol padding convention).
    BitVec padded_to(size_t nbits) const {
        if (nbits < n_) throw std::invalid_argument("BitVec::padded_to: target shorter than value");
        BitVec v = *this;
        v.resize(nbits);
        return v;
    }

    size_t weight() const {
        size_t w = 0;
        for (uint8_t b : bytes_) w += size_t(__builtin_popcount(b));
        return w;
    }
    size_t hamming(const BitVec& o) const {
        if (o.n_ != n_) throw std::invalid_argument("BitVec: hamming length mismatch");
        size_t w = 0;
        for (size_t i = 0; i < bytes_.size(); ++i)
            w += size_t(__builtin_popcount(uint8_t(bytes_[i] ^ o.bytes_[i])));
        return w;
    }

    uint64_t to_u64() const {
        if (n_ > 64) throw std::invalid_argument("BitVec::to_u64: too long");
        uint64_t v = 0;
        for (size_t i = 0; i < n_; ++i) v = (v << 1) | uint64_t(get(i));
        return v;
    }

    const std::vector<uint8_t>& packed() const { return bytes_; }

    std::string str() const {
        std::string s(n_, '0');
        for (size_t i = 0; i < n_; ++i) if (get(i)) s[i] = '1';
        return s;
    }

private:
    void check_index(size_t i) const {
        if (i >= n_) throw std::out_of_range("BitVec: index out of range");
    }
    void resize(size_t nbits) {
        n_ = nbits;
        bytes_.resize((nbits + 7) / 8, 0);
        mask_tail();
    }
    void mask_tail() {
        if (n_ & 7) bytes_.back() &= uint8_t(0xFF00u >> (n_ & 7));
    }

    size_t n_ = 0;
    std::vector<uint8_t> bytes_;
};

/// FNV-1a over bytes; used for payload digests and key-store fingerprints.
inline uint64_t fnv1a64(std::span<const uint8_t> data, uint64_t h = 0xcbf29ce484222325ull) {
    for (uint8_t b : data) {
        h ^= b;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline uint64_t fnv1a64(const std::string& s, uint64_t h = 0xcbf29ce484222325ull) {
    return fnv1a64(std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(s.data()), s.size()), h);
}

} // namespace qid
