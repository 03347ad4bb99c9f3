#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qid/bits.hpp"

namespace qid {

/// Measurement basis of one BB84 qubit.
enum class Basis : uint8_t { Plus = 0, Times = 1 };

using BasisString = std::vector<Basis>;

inline BasisString bases_from_bits(const BitVec& v) {
    BasisString out(v.size());
    for (size_t i = 0; i < v.size(); ++i) out[i] = v.get(i) ? Basis::Times : Basis::Plus;
    return out;
}
inline BitVec bases_to_bits(const BasisString& b) {
    BitVec out(b.size());
    for (size_t i = 0; i < b.size(); ++i) out.set(i, b[i] == Basis::Times);
    return out;
}
inline std::string bases_str(const BasisString& b) {
    std::string s;
    for (Basis x : b) s += (x == Basis::Times) ? 'x' : '+';
    return s;
}

/// Password-to-basis-string encoding with an exhaustively verified minimum
/// pairwise Hamming distance. Codewords are stored as bit vectors
/// (0 = plus, 1 = times).
class BasisCode {
public:
    /// Recomputes and checks the minimum distance; all codewords distinct.
    BasisCode(std::vector<BitVec> codewords);

    size_t m() const { return codewords_.size(); }
    size_t n() const { return codewords_.empty() ? 0 : codewords_[0].size(); }
    size_t min_distance() const { return d_; }

    /// Codeword for password w in {1..m}, as basis values.
    BasisString encode(size_t w) const;
    const BitVec& codeword_bits(size_t w) const;

    /// I_w = positions where theta agrees with codeword w (0-based indices,
    /// ascending).
    std::vector<size_t> matching_positions(size_t w, const BasisString& theta) const;

    /// Text form: one line of metadata, then hex codeword rows.
    std::string describe() const;
    static BasisCode parse(const std::string& text);

private:
    std::vector<BitVec> codewords_;
    size_t d_;
};

/// Largest minimum distance the Gilbert-Varshamov asymptotics justify:
/// floor(n * h^{-1}(1 - log2(m)/n)). m > 2^n is an error.
size_t gv_feasible(size_t n, size_t m);

/// Seeded random search for a basis code with exact minimum distance >=
/// target_d (verified pairwise). m = 2 returns the complementary pair
/// directly. Throws std::invalid_argument for impossible targets (> n) and
/// std::runtime_error when the attempt budget runs out, reporting the best
/// distance reached.
BasisCode build_basis_code(size_t m, size_t n, size_t target_d, uint64_t seed,
                           size_t attempt_budget = 20000);

} // namespace qid
