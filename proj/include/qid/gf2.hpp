#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "qid/bits.hpp"

namespace qid {

/// GF(2^N) described by an irreducible modulus x^N + r(x), deg r < N.
/// Irreducibility is verified at construction (Rabin's test over the factor
/// degrees dividing N), for every degree, so a bad modulus cannot be used
/// silently. Moduli with all low taps at exponent <= N/2 get a fast
/// squaring path, which keeps verification of multi-kilobit fields cheap.
class FieldSpec {
public:
    /// Dense low part, limb 0 least significant. Throws if reducible.
    FieldSpec(unsigned degree, std::vector<uint64_t> reduction_limbs);

    /// Convenience for degree <= 63: low part as a single word.
    FieldSpec(unsigned degree, uint64_t reduction_low);

    /// The canonical field of each degree: lexicographically smallest
    /// irreducible modulus for degree <= 64 (found by deterministic search),
    /// smallest tabulated trinomial/pentanomial above that. Cached.
    static std::shared_ptr<const FieldSpec> standard(unsigned degree);

    unsigned degree() const { return degree_; }
    const std::vector<uint64_t>& reduction() const { return reduction_; }
    size_t limbs() const { return (degree_ + 63) / 64; }

    /// Exponents of the set bits of the low part, ascending; cached for the
    /// squaring fold. Usable only when the largest tap is <= degree/2.
    const std::vector<unsigned>& taps() const { return taps_; }
    bool sparse_foldable() const { return sparse_foldable_; }

    bool operator==(const FieldSpec& o) const {
        return degree_ == o.degree_ && reduction_ == o.reduction_;
    }

    /// Modulus as a polynomial bit vector (degree+1 bits), for tests.
    std::vector<uint64_t> modulus_poly() const;

private:
    unsigned degree_;
    std::vector<uint64_t> reduction_;
    std::vector<unsigned> taps_;
    bool sparse_foldable_ = false;
};

/// Element of GF(2^N). The bit-string view is MSB first: bit 0 of bits()
/// is the coefficient of x^(N-1). "Truncation to the l first bits" takes
/// the l most significant coefficients under this order.
class FieldElement {
public:
    FieldElement() = default;

    static FieldElement zero(std::shared_ptr<const FieldSpec> spec);
    static FieldElement one(std::shared_ptr<const FieldSpec> spec);

    /// Exact-length bit string (N bits).
    static FieldElement from_bits(std::shared_ptr<const FieldSpec> spec, const BitVec& bits);

    /// Bit string of length <= N, zero-padded on the right per the global
    /// padding convention.
    static FieldElement embed(std::shared_ptr<const FieldSpec> spec, const BitVec& bits);

    /// Low bits of `value` as the element's integer value (coefficient of
    /// x^j = bit j).
    static FieldElement from_value(std::shared_ptr<const FieldSpec> spec, uint64_t value);

    const FieldSpec& spec() const { return *spec_; }
    std::shared_ptr<const FieldSpec> spec_ptr() const { return spec_; }

    bool is_zero() const;
    uint64_t value_u64() const; // degree <= 64 only

    BitVec bits() const;
    /// l most significant bits; l > N pads with zeros on the right.
    BitVec truncate_msb(size_t l) const;

    FieldElement operator+(const FieldElement& o) const; // xor
    FieldElement operator*(const FieldElement& o) const;
    FieldElement squared() const;
    FieldElement pow2k(unsigned k) const; // x -> x^(2^k)
    FieldElement inverse() const;         // a^(2^N - 2); a != 0

    bool operator==(const FieldElement& o) const;
    bool operator!=(const FieldElement& o) const { return !(*this == o); }

private:
    friend class FieldSpec;
    void check_same_spec(const FieldElement& o) const;

    std::shared_ptr<const FieldSpec> spec_;
    std::vector<uint64_t> v_;
};

namespace gf2poly {
/// Utility polynomial arithmetic over GF(2) on limb vectors (bit j =
/// coefficient of x^j). Used by the irreducibility test and by the slow
/// reference multiplier in tests.
int degree(const std::vector<uint64_t>& p);
std::vector<uint64_t> shift_left(const std::vector<uint64_t>& p, unsigned k);
void xor_into(std::vector<uint64_t>& a, const std::vector<uint64_t>& b);
std::vector<uint64_t> mod(std::vector<uint64_t> a, const std::vector<uint64_t>& m);
std::vector<uint64_t> gcd(std::vector<uint64_t> a, std::vector<uint64_t> b);
bool is_one(const std::vector<uint64_t>& p);
bool is_irreducible(const std::vector<uint64_t>& modulus_poly);
/// Same test, modulus given as degree + low part (limb 0 least significant).
bool is_irreducible_limbs(unsigned degree, const std::vector<uint64_t>& low);
} // namespace gf2poly

/// Field product per the shared convention; throws on mismatched specs.
inline FieldElement gf_mul(const FieldElement& a, const FieldElement& b) { return a * b; }

/// Smallest degree with a standard modulus that is >= bits (contiguous
/// through 64, then the tabulated sparse ladder). Throws past the table.
unsigned standard_degree_at_least(size_t bits);

} // namespace qid
