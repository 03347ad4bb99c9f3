#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qid/session.hpp"

namespace qid {

/// Classically simulatable attack strategies. All quantum access goes
/// through the tap API; everything else manipulates frames.
enum class Strategy {
    HONEST,
    GUESS_USER,        // user runs honestly with a guessed password
    GUESS_SERVER,      // server measures under a guessed password
    INTERCEPT_RESEND,  // measure chosen in-flight qubits and re-emit
    BLOCK_ABORT,       // drop one frame type
    REPLAY,            // replay a recorded transcript at a fresh server
    BITFLIP,           // flip one payload bit of one frame type
};
const char* strategy_name(Strategy s);

struct AttackSpec {
    Strategy strategy = Strategy::HONEST;
    std::optional<size_t> guess;        // fixed guess; empty = uniform wrong
    std::vector<size_t> positions;      // intercept positions; empty = all
    enum class BasesRule { UniformRandom, FixedPlus } bases_rule = BasesRule::UniformRandom;
    FrameType target_frame = FrameType::Z; // BITFLIP / BLOCK_ABORT
    size_t bit_index = 0;                  // BITFLIP payload bit
};

/// Monte-Carlo experiment outcome with exact-binomial confidence material
/// and the per-candidate posterior audit.
struct ExperimentReport {
    std::string experiment;
    size_t trials = 0;
    size_t accepts = 0;
    size_t detections = 0;
    double acceptance_frequency = 0;
    double acceptance_upper99 = 0; // Clopper-Pearson upper bound
    double bound = 0;              // the cited bound compared against
    bool within_bound = true;

    // posterior audit: counts[w-1][0] on reject, [1] on accept
    std::vector<std::array<size_t, 2>> posterior_counts;
    double posterior_deviation = 0; // max |P(w|obs) - prior| over observations
    double posterior_sigma = 0;     // sampling sd of that estimate
    double statistic_tv = 0;        // server-observable statistic audit

    std::map<std::string, double> extra;
    std::vector<std::string> notes;

    std::string to_json() const;
    std::string to_csv_row() const;
};

/// Exact binomial (Clopper-Pearson) one-sided upper confidence bound.
double clopper_pearson_upper(size_t successes, size_t trials, double confidence = 0.99);

/// Def. 3 experiment: fresh uniform w each trial; the user identifies with
/// the attacked guess. Acceptance compared against m^2 / 2^l.
ExperimentReport run_impersonation_experiment(const SessionParams& params,
                                              const AttackSpec& attack, size_t trials,
                                              uint64_t seed);

/// Def. 2 experiment: dishonest server measures under a guess; reports the
/// total-variation audit of a protocol-visible statistic across w values.
ExperimentReport run_dishonest_server_experiment(const SessionParams& params,
                                                 const AttackSpec& attack, size_t trials,
                                                 uint64_t seed);

/// Def. 4 / man-in-the-middle experiments: intercept-resend, frame bit
/// flips, frame drops. Reports detection frequency and the accept/reject
/// conditioned posterior over passwords.
ExperimentReport run_mitm_experiment(const SessionParams& params, const AttackSpec& attack,
                                     size_t trials, uint64_t seed);

/// Replays the user half of a recorded honest transcript against a fresh
/// server with the same keys; counts accepts (expected: none).
ExperimentReport run_replay_experiment(const SessionParams& params, size_t trials,
                                       uint64_t seed);

/// Mixed schedule of honest, attacked and aborted sessions; verifies that
/// the long-lived keys never change and every honest session accepts.
struct ScheduleEntry {
    enum class Kind { Honest, Blocked, Tampered } kind = Kind::Honest;
};
ExperimentReport run_reuse_experiment(const SessionParams& params,
                                      const std::vector<ScheduleEntry>& schedule, uint64_t seed);

/// S_j collision audit: recomputes f(x|_{I_j}) xor g(j) for every j from
/// the instrumented honest run; frequency compared against m^2 / 2^(l+1).
ExperimentReport sj_distinctness_audit(const SessionParams& params, size_t trials,
                                       uint64_t seed);

/// Exact S_j collision probability for m = 2 by enumerating every hash key
/// at micro parameters (field degrees <= 12); returns (enumerated, exact).
std::pair<double, double> sj_collision_exact_micro(size_t n, size_t ell, uint64_t seed);

/// Frame hook implementing an AttackSpec for run_session.
WireHook make_attack_hook(const SessionParams& params, const AttackSpec& attack,
                          uint64_t attacker_seed, std::vector<std::string>* tap_log = nullptr);

} // namespace qid
