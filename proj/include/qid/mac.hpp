#pragma once

#include <memory>
#include <span>

#include "qid/bits.hpp"
#include "qid/gf2.hpp"
#include "qid/rng.hpp"
#include "qid/serial.hpp"

namespace qid {

/// Extractor MAC: tag = (first l bits of alpha * embed(message)) xor beta.
/// One field multiplication over GF(2^N_mac), no block chaining; messages
/// longer than the field degree are rejected outright, and the session
/// layer sizes the field for the worst-case transcript up front.
class MacKey {
public:
    MacKey(FieldElement alpha, BitVec beta)
        : alpha_(std::move(alpha)), beta_(std::move(beta)) {}

    static MacKey random(std::shared_ptr<const FieldSpec> spec, size_t tag_len, SplitRng& rng) {
        return MacKey(FieldElement::from_bits(spec, rng.bits(spec->degree())),
                      rng.bits(tag_len));
    }

    const FieldElement& alpha() const { return alpha_; }
    const BitVec& beta() const { return beta_; }
    size_t tag_len() const { return beta_.size(); }
    unsigned field_degree() const { return alpha_.spec().degree(); }

    BitVec key_bits() const {
        BitVec out = alpha_.bits();
        out.append(beta_);
        return out;
    }
    static MacKey from_key_bits(std::shared_ptr<const FieldSpec> spec, const BitVec& kb,
                                size_t tag_len) {
        if (kb.size() != spec->degree() + tag_len)
            throw std::invalid_argument("MacKey::from_key_bits: length mismatch");
        return MacKey(FieldElement::from_bits(spec, kb.slice(0, spec->degree())),
                      kb.slice(spec->degree(), tag_len));
    }

private:
    FieldElement alpha_;
    BitVec beta_;
};

inline BitVec mac_tag(const MacKey& k, const BitVec& message) {
    if (message.size() > k.field_degree())
        throw std::invalid_argument("mac_tag: message longer than the MAC field degree");
    FieldElement m = FieldElement::embed(k.alpha().spec_ptr(), message);
    BitVec tag = (k.alpha() * m).truncate_msb(k.tag_len());
    tag ^= k.beta();
    return tag;
}

inline bool mac_verify(const MacKey& k, const BitVec& message, const BitVec& tag) {
    if (tag.size() != k.tag_len()) return false;
    return mac_tag(k, message) == tag;
}

/// Canonical MAC message: the protocol fields in protocol order through the
/// shared length-prefixed encoding, viewed as one bit string.
inline BitVec mac_message(std::span<const BitVec> fields) {
    return parts_as_bits(fields);
}

} // namespace qid
