#include "qid/qchannel.hpp"

#include <stdexcept>

namespace qid {

std::vector<uint8_t> QubitBatch::pack() const {
    size_t n = size();
    BitVec packed(3 * n);
    for (size_t i = 0; i < n; ++i) {
        packed.set(3 * i, bit_.get(i));
        packed.set(3 * i + 1, basis_.get(i));
        packed.set(3 * i + 2, mp_.get(i));
    }
    return packed.packed();
}

QubitBatch QubitBatch::unpack(std::span<const uint8_t> payload, size_t n) {
    if (payload.size() != (3 * n + 7) / 8)
        throw std::invalid_argument("QubitBatch::unpack: payload size mismatch");
    BitVec packed = BitVec::from_packed(payload, 3 * n);
    QubitBatch b;
    b.bit_ = BitVec(n);
    b.basis_ = BitVec(n);
    b.mp_ = BitVec(n);
    b.pending_flip_ = BitVec(n);
    for (size_t i = 0; i < n; ++i) {
        b.bit_.set(i, packed.get(3 * i));
        b.basis_.set(i, packed.get(3 * i + 1));
        b.mp_.set(i, packed.get(3 * i + 2));
    }
    b.orig_bit_ = b.bit_;
    b.orig_basis_ = b.basis_;
    return b;
}

Channel::Channel(ChannelConfig cfg, uint64_t session_seed, const std::string& role)
    : cfg_(cfg), role_(role),
      eta_rng_(SplitRng(session_seed).child("channel.eta").seed()),
      phi_rng_(SplitRng(session_seed).child("channel.phi").seed()),
      outcome_rng_(SplitRng(session_seed).child("channel.outcome").child(role).seed()) {
    cfg_.validate();
}

QubitBatch Channel::prepare(const BitVec& x, const BasisString& theta) {
    if (x.size() != theta.size()) throw std::invalid_argument("Channel::prepare: length mismatch");
    size_t n = x.size();
    QubitBatch b;
    b.bit_ = x;
    b.basis_ = bases_to_bits(theta);
    b.mp_ = BitVec(n);
    b.pending_flip_ = BitVec(n);
    for (size_t i = 0; i < n; ++i)
        if (cfg_.eta > 0.0 && eta_rng_.bernoulli(cfg_.eta)) b.mp_.set(i, true);
    b.orig_bit_ = b.bit_;
    b.orig_basis_ = b.basis_;

    std::vector<uint8_t> payload = b.pack();
    log_.push_back({"prepare", role_, n, {}, fnv1a64(payload),
                    "bits=" + b.bit_.str() + " bases=" + b.basis_.str()});
    return b;
}

void Channel::transmit(QubitBatch& batch) {
    if (batch.delivered_) throw std::invalid_argument("Channel::transmit: already delivered");
    for (size_t i = 0; i < batch.size(); ++i)
        if (cfg_.phi > 0.0 && phi_rng_.bernoulli(cfg_.phi)) batch.pending_flip_.set(i, true);
    batch.delivered_ = true;
    log_.push_back({"transmit", role_, batch.size(), {}, 0, ""});
}

bool Channel::measure_one(QubitBatch& b, size_t i, Basis basis) {
    bool want_times = (basis == Basis::Times);
    if (b.basis_.get(i) == want_times) {
        bool out = b.bit_.get(i) ^ b.pending_flip_.get(i);
        b.pending_flip_.set(i, false);
        b.bit_.set(i, out); // post-measurement state
        return out;
    }
    bool out = outcome_rng_.bit();
    b.basis_.set(i, want_times); // collapse into the measured basis
    b.bit_.set(i, out);
    return out;
}

BitVec Channel::measure(QubitBatch& batch, const BasisString& bases) {
    if (!batch.delivered_) throw std::invalid_argument("Channel::measure: batch not delivered");
    if (batch.consumed_) throw std::invalid_argument("Channel::measure: batch already consumed");
    if (bases.size() != batch.size())
        throw std::invalid_argument("Channel::measure: bases length mismatch");
    BitVec out(batch.size());
    for (size_t i = 0; i < batch.size(); ++i) out.set(i, measure_one(batch, i, bases[i]));
    batch.consumed_ = true;
    log_.push_back({"measure", role_, batch.size(), {}, fnv1a64(out.packed()),
                    "outcome=" + out.str()});
    return out;
}

TapHandle::TapHandle(Channel& channel, QubitBatch& batch) : channel_(channel), batch_(batch) {}

std::vector<uint8_t> TapHandle::intercept_resend(const std::vector<size_t>& positions,
                                                 const BasisString& bases) {
    if (batch_.delivered_)
        throw std::invalid_argument("TapHandle::intercept_resend: tap after delivery");
    if (positions.size() != bases.size())
        throw std::invalid_argument("TapHandle::intercept_resend: positions/bases mismatch");
    std::vector<uint8_t> observed;
    observed.reserve(positions.size());
    for (size_t k = 0; k < positions.size(); ++k) {
        size_t i = positions[k];
        if (i >= batch_.size()) throw std::out_of_range("TapHandle: position out of range");
        bool out = channel_.measure_one(batch_, i, bases[k]);
        observed.push_back(uint8_t(out));
        // re-prepare in the attacker's basis with the observed bit
        batch_.basis_.set(i, bases[k] == Basis::Times);
        batch_.bit_.set(i, out);
    }
    BitVec obs(observed.size());
    for (size_t k = 0; k < observed.size(); ++k) obs.set(k, observed[k]);
    channel_.log_.push_back({"intercept_resend", "adversary", positions.size(), positions,
                             fnv1a64(obs.packed()), "observed=" + obs.str()});
    return observed;
}

std::vector<TapHandle::Leak> TapHandle::leak_multipulse() {
    std::vector<Leak> out;
    std::vector<size_t> pos;
    for (size_t i = 0; i < batch_.size(); ++i) {
        if (batch_.mp_.get(i)) {
            out.push_back({i, batch_.orig_bit_.get(i),
                           batch_.orig_basis_.get(i) ? Basis::Times : Basis::Plus});
            pos.push_back(i);
        }
    }
    channel_.log_.push_back({"leak_multipulse", "adversary", out.size(), pos, 0, ""});
    return out;
}

} // namespace qid
