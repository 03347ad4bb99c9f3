#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qid/basis_code.hpp"
#include "qid/bits.hpp"
#include "qid/rng.hpp"

namespace qid {

/// Channel imperfections: per-position flip rate phi, multi-pulse (full
/// leakage) rate eta. The same seed reproduces the same noise realization.
struct ChannelConfig {
    double phi = 0.0;
    double eta = 0.0;
    uint64_t rng_seed = 0;

    void validate() const {
        if (phi < 0.0 || phi >= 1.0) throw std::invalid_argument("ChannelConfig: phi out of [0,1)");
        if (eta < 0.0 || eta > 1.0) throw std::invalid_argument("ChannelConfig: eta out of [0,1]");
    }
};

/// One channel event for the transcript; hidden payloads are carried as a
/// digest plus an optional revealed string that serializers only emit when
/// the run is flagged for debugging.
struct ChannelEvent {
    std::string kind;
    std::string role;
    size_t count = 0;
    std::vector<size_t> positions;
    uint64_t hidden_digest = 0;
    std::string hidden;
};

/// Batch of simulated BB84 qubits. Hidden state (encoded bit, basis,
/// multi-pulse flag) is private; the only readers are Channel::measure and
/// the adversary tap, so honest role code cannot peek even by accident.
class QubitBatch {
public:
    QubitBatch() = default;

    size_t size() const { return bit_.size(); }
    bool delivered() const { return delivered_; }
    bool consumed() const { return consumed_; }
    size_t multipulse_count() const { return mp_.weight(); }

    /// 3 bits per position (bit, basis, multipulse), MSB-first packed.
    /// Simulation-trust payload: carries hidden state in cleartext by design.
    std::vector<uint8_t> pack() const;
    static QubitBatch unpack(std::span<const uint8_t> payload, size_t n);

private:
    friend class Channel;
    friend class TapHandle;

    BitVec bit_, basis_, mp_, pending_flip_;
    BitVec orig_bit_, orig_basis_; // as prepared, for the multi-pulse leak
    bool delivered_ = false;
    bool consumed_ = false;
};

/// Endpoint view of the quantum link. Preparation draws the multi-pulse
/// flags (sender side); measurement realizes the flip noise (receiver side).
class Channel {
public:
    Channel(ChannelConfig cfg, uint64_t session_seed, const std::string& role);

    const ChannelConfig& config() const { return cfg_; }
    const std::vector<ChannelEvent>& log() const { return log_; }

    QubitBatch prepare(const BitVec& x, const BasisString& theta);

    /// Hands the batch to the receiving side; draws the per-position flip
    /// noise, realized lazily at the first basis-matching measurement.
    void transmit(QubitBatch& batch);

    /// Measures every position; matching bases see the encoded bit (plus
    /// pending noise), mismatched bases collapse to a fresh uniform bit.
    /// Consumes the batch.
    BitVec measure(QubitBatch& batch, const BasisString& bases);

private:
    friend class TapHandle;
    bool measure_one(QubitBatch& b, size_t i, Basis basis);

    ChannelConfig cfg_;
    std::string role_;
    SplitRng eta_rng_, phi_rng_, outcome_rng_;
    std::vector<ChannelEvent> log_;
};

/// Adversary access point to an in-flight batch. Every interaction is
/// appended to the owning channel's log.
class TapHandle {
public:
    TapHandle(Channel& channel, QubitBatch& batch);

    /// Measures the chosen positions in the attacker's bases and re-prepares
    /// each qubit accordingly. Returns the observed bits, position-aligned
    /// with `positions`.
    std::vector<uint8_t> intercept_resend(const std::vector<size_t>& positions,
                                          const BasisString& bases);

    /// Exact (position, bit, basis) of every multi-pulse-flagged position,
    /// as originally prepared.
    struct Leak {
        size_t position;
        bool bit;
        Basis basis;
    };
    std::vector<Leak> leak_multipulse();

private:
    Channel& channel_;
    QubitBatch& batch_;
};

} // namespace qid
