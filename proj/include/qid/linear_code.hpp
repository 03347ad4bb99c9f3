#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qid/bits.hpp"

namespace qid {

/// Binary linear code described by its parity-check matrix, with exact
/// minimum distance and syndrome decoding.
///
/// Two flavours share the interface:
///  - table codes (length <= 20): random parity checks with a full coset
///    leader table; exact bounded-distance decoding at radius (d-1)/2.
///  - block codes (any length): a fixed concatenation of Hamming(7,4) over
///    triple-repetition groups, padded with repetition blocks. Decoding is
///    exact per block, so error bursts inside one block saturate early while
///    spread errors far beyond the worst-case radius still correct.
class LinearCode {
public:
    static LinearCode hamming74();
    static LinearCode repetition(size_t n);

    /// Seeded random (length, dim) code, length <= 20. Draws until the
    /// parity check has full row rank and min distance >= min_distance.
    static LinearCode random_table_code(size_t length, size_t dim, uint64_t seed,
                                        size_t min_distance = 3);

    /// Deterministic concatenation for lengths > 20 (see block layout in
    /// the implementation).
    static LinearCode hamming_repetition(size_t length);

    /// Explicit parity rows; length <= 20, exhaustively checked.
    static LinearCode from_parity_rows(std::vector<BitVec> rows);

    size_t length() const { return n_; }
    size_t dimension() const { return k_; }
    size_t syndrome_bits() const { return n_ - k_; }
    size_t min_distance() const { return d_; }
    /// Worst-case guaranteed correction count.
    size_t decode_radius() const { return radius_; }

    /// Parity-check rows, in the order syndrome bits are produced.
    std::vector<BitVec> parity_rows() const;

    /// H * y for |y| = length.
    BitVec syndrome(const BitVec& y) const;

    /// The unique y with syndrome s within the per-block (or global) radius
    /// of y_noisy, or nullopt when some coset leader exceeds it.
    std::optional<BitVec> decode(const BitVec& y_noisy, const BitVec& s) const;

    /// Text form: length, dimension, verified distance, hex parity rows.
    std::string describe() const;

private:
    LinearCode() = default;

    struct Block {
        enum class Kind { Rep, HamRep } kind;
        size_t offset;
        size_t len;
    };

    void init_table(std::vector<BitVec> rows, size_t min_distance_reject);
    void finish_common();

    size_t n_ = 0, k_ = 0, d_ = 0, radius_ = 0;

    bool is_block_ = false;
    std::vector<Block> blocks_;

    // table representation
    std::vector<uint32_t> columns_;       // syndrome mask per position
    std::vector<uint32_t> coset_leader_;  // syndrome -> min-weight error
    std::vector<uint8_t> leader_weight_;
};

/// Deterministic map j -> code with fixed length and dimension; the same j
/// always yields the same code. Lengths <= 20 draw seeded table codes, larger
/// lengths share the fixed Hamming/repetition concatenation.
class SyndromeFamily {
public:
    SyndromeFamily(size_t length, size_t dim_hint, uint64_t family_seed);

    size_t length() const { return nprime_; }
    uint64_t seed() const { return seed_; }

    const LinearCode& code_for(uint32_t j) const;

    /// Syndrome with the length convention: shorter strings are zero-padded,
    /// longer ones split as (syn of first n', remaining bits verbatim).
    BitVec syndrome(uint32_t j, const BitVec& y) const;
    size_t syndrome_len(size_t input_len) const;

    /// Inverse of the convention: recover y (of the given original length)
    /// from its noisy version and the syndrome, or nullopt.
    std::optional<BitVec> decode(uint32_t j, const BitVec& y_noisy, const BitVec& s) const;

private:
    size_t nprime_, dim_hint_;
    uint64_t seed_;
    mutable std::vector<std::pair<uint32_t, std::shared_ptr<const LinearCode>>> cache_;
};

} // namespace qid
