#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qid/basis_code.hpp"
#include "qid/bits.hpp"
#include "qid/frame.hpp"
#include "qid/linear_code.hpp"
#include "qid/mac.hpp"
#include "qid/qchannel.hpp"
#include "qid/rng.hpp"
#include "qid/uhf.hpp"

namespace qid {

enum class Mode { QID, QID_NOISY, QIDPLUS, QKD, MUTUAL };
const char* mode_name(Mode m);
std::optional<Mode> mode_from_name(const std::string& s);

enum class Reason {
    OK,
    MAC_FAIL,
    TEST_MISMATCH,
    Z_MISMATCH,
    DECODE_FAIL,
    PROTOCOL_VIOLATION,
    ABORTED,
};
const char* reason_name(Reason r);

struct Decision {
    bool accept = false;
    Reason reason = Reason::ABORTED;

    bool operator==(const Decision&) const = default;
};

struct SessionParams {
    Mode mode = Mode::QID;
    size_t n = 0;
    size_t m = 0;
    size_t ell = 0;
    std::shared_ptr<const BasisCode> basis_code;
    std::shared_ptr<const SyndromeFamily> family;
    double delta_tolerance = 0.0;
    ChannelConfig channel;
    size_t sk_len = 0; // QKD output length including the confirmation pad
    double mutual_flip_prob = 0.0;
    double mutual_threshold = 0.0;

    bool needs_mac() const { return mode == Mode::QIDPLUS || mode == Mode::QKD; }
    bool needs_family() const {
        return mode == Mode::QID_NOISY || mode == Mode::QIDPLUS || mode == Mode::QKD;
    }
    bool has_test_round() const { return mode == Mode::QIDPLUS || mode == Mode::QKD; }

    size_t password_bits() const; // ceil(log2 m)
    size_t g_degree() const { return UhfG::required_degree(m, ell); }

    /// Worst-case canonical MAC message length in bits.
    size_t mac_message_capacity() const;
    /// Field degree the session sizes the MAC key for.
    unsigned mac_degree() const;
    size_t mac_key_bits() const { return mac_degree() + ell; }

    std::shared_ptr<const FieldSpec> f_field() const { return FieldSpec::standard(unsigned(n)); }
    std::shared_ptr<const FieldSpec> g_field() const {
        return FieldSpec::standard(unsigned(g_degree()));
    }
    std::shared_ptr<const FieldSpec> mac_field() const {
        return FieldSpec::standard(mac_degree());
    }

    /// Empty when the configuration is runnable.
    std::vector<std::string> validate() const;
};

/// Convenience builder: standard basis code and syndrome family for the
/// given sizes, deterministic in `seed`.
SessionParams make_params(Mode mode, size_t n, size_t m, size_t ell, uint64_t seed,
                          double phi = 0.0, double eta = 0.0, double delta_tolerance = 0.0);

/// The long-lived secrets: password index w, and the MAC key for the
/// authenticated modes. Sessions hold this by value and never write it.
struct KeyMaterial {
    size_t w = 0;
    std::optional<BitVec> mac_key;

    static KeyMaterial generate(const SessionParams& p, size_t w, uint64_t key_seed);
    uint64_t digest() const;
};

struct TranscriptEntry {
    bool user_to_server = true;
    FrameType type = FrameType::ABORT;
    uint64_t payload_digest = 0;
    size_t payload_bytes = 0;
};

struct Transcript {
    std::vector<TranscriptEntry> entries;
    std::vector<Frame> frames; // full frames, replayable

    void record(bool user_to_server, const Frame& f);
    uint64_t digest() const;
};

namespace detail {
struct SessionCommon;
}

class UserSession {
public:
    UserSession(SessionParams params, KeyMaterial keys, uint64_t session_seed);
    ~UserSession();
    UserSession(UserSession&&) noexcept;

    /// Emits the opening frames (qubits, then the basis/hash announcement).
    std::vector<Frame> start();
    std::vector<Frame> on_frame(const Frame& f);
    void abort_session();

    bool finished() const;
    Decision decision() const;
    std::optional<BitVec> session_key() const; // QKD, after the OTP check

    // instrumentation for experiments and audits
    const BitVec& x() const;
    BitVec theta_bits() const;
    const std::vector<size_t>& index_set() const;
    BitVec f_key_bits() const;
    BitVec z_sent() const;
    BitVec mutual_flips() const;
    const std::vector<ChannelEvent>& channel_log() const;

private:
    std::unique_ptr<detail::SessionCommon> s_;
};

class ServerSession {
public:
    ServerSession(SessionParams params, KeyMaterial keys, uint64_t session_seed);
    ~ServerSession();
    ServerSession(ServerSession&&) noexcept;

    std::vector<Frame> on_frame(const Frame& f);
    void abort_session();

    bool finished() const;
    Decision decision() const;
    std::optional<BitVec> session_key() const; // QKD

    // instrumentation
    const BitVec& outcome() const;          // x'
    BitVec measurement_bases_bits() const;  // c as measured
    const std::vector<size_t>& test_set() const;
    BitVec g_key_bits() const;
    std::optional<BitVec> recovered_substring() const;
    const std::vector<ChannelEvent>& channel_log() const;

private:
    std::unique_ptr<detail::SessionCommon> s_;
};

/// Frame-level attacker hook: maps each in-flight frame to the list of
/// frames actually delivered (empty = drop). Identity when absent.
using WireHook = std::function<std::vector<Frame>(bool user_to_server, const Frame&)>;

struct SessionResult {
    Decision server_decision;
    Decision user_decision;
    std::optional<BitVec> sk_user, sk_server;
    Transcript transcript;
    // copies of the values experiments audit
    BitVec x, theta_bits, f_key_bits, g_key_bits, server_outcome, server_c_bits;
    std::vector<size_t> index_set, test_set;
    BitVec z_sent;
    std::vector<ChannelEvent> user_channel_log, server_channel_log;
};

SessionResult run_session(const SessionParams& params, const KeyMaterial& user_keys,
                          const KeyMaterial& server_keys, uint64_t session_seed,
                          const WireHook& hook = {});

} // namespace qid
