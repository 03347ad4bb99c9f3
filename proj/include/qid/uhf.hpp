#pragma once

#include <memory>

#include "qid/bits.hpp"
#include "qid/gf2.hpp"
#include "qid/rng.hpp"

namespace qid {

/// f_a(y) = first l bits of a * embed(y) over GF(2^n). Universal-2: for
/// distinct padded inputs the collision probability over a uniform key is
/// exactly 2^-l.
class UhfF {
public:
    UhfF(FieldElement key, size_t output_len)
        : key_(std::move(key)), out_len_(output_len) {}

    static UhfF random(std::shared_ptr<const FieldSpec> spec, size_t output_len, SplitRng& rng) {
        return UhfF(FieldElement::from_bits(spec, rng.bits(spec->degree())), output_len);
    }

    /// |y| <= n; shorter inputs are zero-padded on the right.
    BitVec eval(const BitVec& y) const {
        if (y.size() > key_.spec().degree())
            throw std::invalid_argument("UhfF::eval: input longer than field degree");
        return (key_ * FieldElement::embed(key_.spec_ptr(), y)).truncate_msb(out_len_);
    }

    const FieldElement& key() const { return key_; }
    size_t output_len() const { return out_len_; }
    BitVec key_bits() const { return key_.bits(); }

private:
    FieldElement key_;
    size_t out_len_;
};

/// g_{a,b}(w) = (first l bits of a * embed(w)) xor b, with a drawn from
/// GF(2^r). Strongly universal-2 onto {0,1}^l requires r >= l as well as
/// r >= ceil(log2 m), so the key field degree is the larger of the two.
class UhfG {
public:
    UhfG(FieldElement key_a, BitVec mask_b, size_t password_count)
        : a_(std::move(key_a)), b_(std::move(mask_b)), m_(password_count) {
        if (required_degree(m_, b_.size()) > a_.spec().degree())
            throw std::invalid_argument("UhfG: key field degree too small");
    }

    static size_t required_degree(size_t m, size_t output_len) {
        size_t r = 1;
        while ((size_t(1) << r) < m) ++r;
        return std::max(r, output_len);
    }

    static UhfG random(size_t m, size_t output_len, SplitRng& rng) {
        auto spec = FieldSpec::standard(unsigned(required_degree(m, output_len)));
        return UhfG(FieldElement::from_bits(spec, rng.bits(spec->degree())),
                    rng.bits(output_len), m);
    }

    /// w in {1..m}; embedded as the field value w-1.
    BitVec eval(size_t w) const {
        if (w < 1 || w > m_)
            throw std::invalid_argument("UhfG::eval: password index out of range");
        FieldElement we = FieldElement::from_value(a_.spec_ptr(), uint64_t(w - 1));
        BitVec out = (a_ * we).truncate_msb(b_.size());
        out ^= b_;
        return out;
    }

    size_t output_len() const { return b_.size(); }
    size_t password_count() const { return m_; }
    const FieldElement& key_a() const { return a_; }
    const BitVec& mask_b() const { return b_; }

    /// Key material as one bit string: a's bits followed by b.
    BitVec key_bits() const {
        BitVec out = a_.bits();
        out.append(b_);
        return out;
    }
    static UhfG from_key_bits(std::shared_ptr<const FieldSpec> spec, const BitVec& kb,
                              size_t output_len, size_t m) {
        if (kb.size() != spec->degree() + output_len)
            throw std::invalid_argument("UhfG::from_key_bits: length mismatch");
        return UhfG(FieldElement::from_bits(spec, kb.slice(0, spec->degree())),
                    kb.slice(spec->degree(), output_len), m);
    }

private:
    FieldElement a_;
    BitVec b_;
    size_t m_;
};

} // namespace qid
