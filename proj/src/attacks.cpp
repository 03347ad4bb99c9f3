#include "qid/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace qid {

const char* strategy_name(Strategy s) {
    switch (s) {
        case Strategy::HONEST: return "honest";
        case Strategy::GUESS_USER: return "guess-user";
        case Strategy::GUESS_SERVER: return "guess-server";
        case Strategy::INTERCEPT_RESEND: return "intercept-resend";
        case Strategy::BLOCK_ABORT: return "block-abort";
        case Strategy::REPLAY: return "replay";
        case Strategy::BITFLIP: return "bitflip";
    }
    return "?";
}

std::string ExperimentReport::to_json() const {
    nlohmann::ordered_json j;
    j["experiment"] = experiment;
    j["trials"] = trials;
    j["accepts"] = accepts;
    j["detections"] = detections;
    j["acceptance_frequency"] = acceptance_frequency;
    j["acceptance_upper99"] = acceptance_upper99;
    j["bound"] = bound;
    j["within_bound"] = within_bound;
    j["posterior_deviation"] = posterior_deviation;
    j["posterior_sigma"] = posterior_sigma;
    j["statistic_tv"] = statistic_tv;
    nlohmann::ordered_json post = nlohmann::ordered_json::array();
    for (const auto& row : posterior_counts) post.push_back({row[0], row[1]});
    j["posterior_counts"] = post;
    j["extra"] = extra;
    j["notes"] = notes;
    return j.dump(2);
}

std::string ExperimentReport::to_csv_row() const {
    std::ostringstream os;
    os << experiment << "," << trials << "," << accepts << "," << detections << ","
       << acceptance_frequency << "," << acceptance_upper99 << "," << bound << ","
       << (within_bound ? 1 : 0) << "," << posterior_deviation << "," << statistic_tv;
    return os.str();
}

namespace {

double log_binomial_cdf(size_t k, size_t n, double p) {
    // log P(X <= k), stable enough for confidence bounds
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return k >= n ? 0.0 : -1e300;
    double best = -1e300;
    std::vector<double> terms;
    terms.reserve(k + 1);
    for (size_t i = 0; i <= k; ++i) {
        double lt = std::lgamma(double(n + 1)) - std::lgamma(double(i + 1)) -
                    std::lgamma(double(n - i + 1)) + double(i) * std::log(p) +
                    double(n - i) * std::log1p(-p);
        terms.push_back(lt);
        best = std::max(best, lt);
    }
    double sum = 0;
    for (double lt : terms) sum += std::exp(lt - best);
    return best + std::log(sum);
}

} // namespace

double clopper_pearson_upper(size_t successes, size_t trials, double confidence) {
    if (trials == 0) return 1.0;
    if (successes >= trials) return 1.0;
    double alpha = 1.0 - confidence;
    double lo = double(successes) / double(trials), hi = 1.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (log_binomial_cdf(successes, trials, mid) > std::log(alpha)) lo = mid;
        else hi = mid;
    }
    return hi;
}

namespace {

void finish_posterior(ExperimentReport& rep, size_t m) {
    // deviation of the accept/reject conditioned posterior from the prior,
    // over observations with enough samples to mean anything
    double prior = 1.0 / double(m);
    rep.posterior_deviation = 0;
    rep.posterior_sigma = 0;
    for (int obs = 0; obs < 2; ++obs) {
        size_t total = 0;
        for (const auto& row : rep.posterior_counts) total += row[obs];
        if (total < 20) continue;
        double dev = 0;
        for (const auto& row : rep.posterior_counts)
            dev = std::max(dev, std::abs(double(row[obs]) / double(total) - prior));
        if (dev >= rep.posterior_deviation) {
            rep.posterior_deviation = dev;
            rep.posterior_sigma = std::sqrt(0.25 / double(total));
        }
    }
}

uint64_t trial_seed(uint64_t seed, size_t t) { return SplitRng(seed).child(t).seed(); }

} // namespace

WireHook make_attack_hook(const SessionParams& params, const AttackSpec& attack,
                          uint64_t attacker_seed, std::vector<std::string>* tap_log) {
    if (attack.strategy == Strategy::HONEST) return {};
    auto rng = std::make_shared<SplitRng>(SplitRng(attacker_seed).child("adversary"));
    auto channel =
        std::make_shared<Channel>(params.channel, attacker_seed, std::string("adversary"));
    AttackSpec spec = attack;
    size_t n = params.n;

    return [rng, channel, spec, n, tap_log](bool u2s, const Frame& f) -> std::vector<Frame> {
        switch (spec.strategy) {
            case Strategy::INTERCEPT_RESEND: {
                if (!u2s || f.type != FrameType::QUBITS) return {f};
                QubitBatch batch = QubitBatch::unpack(f.payload, n);
                TapHandle tap(*channel, batch);
                std::vector<size_t> pos = spec.positions;
                if (pos.empty())
                    for (size_t i = 0; i < n; ++i) pos.push_back(i);
                BasisString bases(pos.size());
                for (size_t k = 0; k < pos.size(); ++k)
                    bases[k] = spec.bases_rule == AttackSpec::BasesRule::FixedPlus
                                   ? Basis::Plus
                                   : (rng->bit() ? Basis::Times : Basis::Plus);
                auto seen = tap.intercept_resend(pos, bases);
                if (tap_log) {
                    std::string bits;
                    for (uint8_t b : seen) bits += b ? '1' : '0';
                    tap_log->push_back("intercept observed=" + bits);
                }
                return {Frame{FrameType::QUBITS, batch.pack()}};
            }
            case Strategy::BLOCK_ABORT:
                if (f.type == spec.target_frame) return {};
                return {f};
            case Strategy::BITFLIP: {
                if (f.type != spec.target_frame) return {f};
                Frame g = f;
                if (!g.payload.empty()) {
                    size_t bit = spec.bit_index % (g.payload.size() * 8);
                    g.payload[bit / 8] ^= uint8_t(0x80u >> (bit % 8));
                }
                return {g};
            }
            default: return {f};
        }
    };
}

ExperimentReport run_impersonation_experiment(const SessionParams& params,
                                              const AttackSpec& attack, size_t trials,
                                              uint64_t seed) {
    if (attack.strategy != Strategy::GUESS_USER && attack.strategy != Strategy::HONEST)
        throw std::invalid_argument("run_impersonation_experiment: wrong strategy");
    ExperimentReport rep;
    rep.experiment = "impersonation";
    rep.trials = trials;
    rep.bound = double(params.m) * double(params.m) * std::pow(2.0, -double(params.ell));
    rep.posterior_counts.assign(params.m, {0, 0});

    size_t wrong_trials = 0, wrong_accepts = 0, match_trials = 0, match_accepts = 0;
    SplitRng wrng = SplitRng(seed).child("w");
    for (size_t t = 0; t < trials; ++t) {
        size_t w = 1 + size_t(wrng.below(params.m));
        size_t w_user = w;
        if (attack.strategy == Strategy::GUESS_USER) {
            if (attack.guess) w_user = *attack.guess;
            else {
                w_user = 1 + size_t(wrng.below(params.m));
                while (w_user == w && params.m > 1) w_user = 1 + size_t(wrng.below(params.m));
            }
        }
        uint64_t kseed = SplitRng(seed).child("keys").child(t).seed();
        KeyMaterial server_keys = KeyMaterial::generate(params, w, kseed);
        KeyMaterial user_keys = server_keys;
        user_keys.w = w_user;
        auto res = run_session(params, user_keys, server_keys, trial_seed(seed, t));
        bool accept = res.server_decision.accept;
        if (accept) ++rep.accepts;
        else ++rep.detections;
        if (w_user == w) {
            ++match_trials;
            if (accept) ++match_accepts;
        } else {
            ++wrong_trials;
            if (accept) ++wrong_accepts;
        }
        rep.posterior_counts[w - 1][accept ? 1 : 0]++;
    }
    // the bound applies to wrong guesses; a matching guess accepts with
    // certainty and is reported separately
    rep.extra["wrong_trials"] = double(wrong_trials);
    rep.extra["wrong_accepts"] = double(wrong_accepts);
    if (match_trials > 0)
        rep.extra["match_acceptance"] = double(match_accepts) / double(match_trials);
    rep.acceptance_frequency =
        wrong_trials > 0 ? double(wrong_accepts) / double(wrong_trials)
                         : double(rep.accepts) / double(trials);
    rep.acceptance_upper99 = clopper_pearson_upper(
        wrong_trials > 0 ? wrong_accepts : rep.accepts,
        wrong_trials > 0 ? wrong_trials : trials);
    if (attack.strategy == Strategy::HONEST) {
        rep.within_bound = rep.accepts == trials;
    } else {
        double sigma = std::sqrt(rep.bound / double(std::max<size_t>(wrong_trials, 1)));
        rep.within_bound = rep.acceptance_frequency <= rep.bound + 3.0 * sigma + 1e-9;
        if (match_trials > 0 && match_accepts != match_trials) rep.within_bound = false;
    }
    finish_posterior(rep, params.m);
    return rep;
}

ExperimentReport run_dishonest_server_experiment(const SessionParams& params,
                                                 const AttackSpec& attack, size_t trials,
                                                 uint64_t seed) {
    if (attack.strategy != Strategy::GUESS_SERVER)
        throw std::invalid_argument("run_dishonest_server_experiment: wrong strategy");
    ExperimentReport rep;
    rep.experiment = "dishonest-server";
    rep.trials = trials;
    rep.posterior_counts.assign(params.m, {0, 0});

    // statistic: (the dishonest server's own z comparison) and the first
    // bit of the announced z; both protocol-visible
    std::vector<std::vector<double>> stat_by_w(params.m, std::vector<double>(4, 0.0));
    std::vector<double> stat_marginal(4, 0.0);
    size_t audited = 0;

    SplitRng wrng = SplitRng(seed).child("w");
    for (size_t t = 0; t < trials; ++t) {
        size_t w = 1 + size_t(wrng.below(params.m));
        size_t w_srv = attack.guess ? *attack.guess : 1 + size_t(wrng.below(params.m));
        uint64_t kseed = SplitRng(seed).child("keys").child(t).seed();
        KeyMaterial user_keys = KeyMaterial::generate(params, w, kseed);
        KeyMaterial server_keys = user_keys;
        server_keys.w = w_srv;
        auto res = run_session(params, user_keys, server_keys, trial_seed(seed, t));
        bool accept = res.server_decision.accept;
        if (accept) ++rep.accepts;
        rep.posterior_counts[w - 1][accept ? 1 : 0]++;
        if (w_srv != w) {
            size_t stat = (size_t(accept) << 1) |
                          size_t(res.z_sent.size() > 0 && res.z_sent.get(0));
            stat_by_w[w - 1][stat] += 1.0;
            stat_marginal[stat] += 1.0;
            ++audited;
        }
    }
    if (audited > 0) {
        for (double& v : stat_marginal) v /= double(audited);
        double worst = 0;
        for (size_t w = 0; w < params.m; ++w) {
            double count = 0;
            for (double v : stat_by_w[w]) count += v;
            if (count < 30) continue;
            double tv = 0;
            for (size_t s = 0; s < 4; ++s)
                tv += std::abs(stat_by_w[w][s] / count - stat_marginal[s]);
            worst = std::max(worst, 0.5 * tv);
        }
        rep.statistic_tv = worst;
    }
    rep.acceptance_frequency = double(rep.accepts) / double(trials);
    rep.acceptance_upper99 = clopper_pearson_upper(rep.accepts, trials);
    rep.bound = 0.02;
    rep.within_bound = rep.statistic_tv <= rep.bound;
    finish_posterior(rep, params.m);
    return rep;
}

ExperimentReport run_mitm_experiment(const SessionParams& params, const AttackSpec& attack,
                                     size_t trials, uint64_t seed) {
    ExperimentReport rep;
    rep.experiment = std::string("mitm-") + strategy_name(attack.strategy);
    rep.trials = trials;
    rep.posterior_counts.assign(params.m, {0, 0});

    SplitRng wrng = SplitRng(seed).child("w");
    for (size_t t = 0; t < trials; ++t) {
        size_t w = 1 + size_t(wrng.below(params.m));
        uint64_t kseed = SplitRng(seed).child("keys").child(t).seed();
        KeyMaterial keys = KeyMaterial::generate(params, w, kseed);
        WireHook hook = make_attack_hook(params, attack, trial_seed(seed, t) ^ 0x5a5a5a5a5a5a5a5aull);
        auto res = run_session(params, keys, keys, trial_seed(seed, t), hook);
        bool accept = res.server_decision.accept;
        if (accept) ++rep.accepts;
        else ++rep.detections;
        rep.posterior_counts[w - 1][accept ? 1 : 0]++;
    }
    rep.acceptance_frequency = double(rep.accepts) / double(trials);
    rep.acceptance_upper99 = clopper_pearson_upper(rep.accepts, trials);
    finish_posterior(rep, params.m);
    return rep;
}

ExperimentReport run_replay_experiment(const SessionParams& params, size_t trials,
                                       uint64_t seed) {
    ExperimentReport rep;
    rep.experiment = "replay";
    rep.trials = trials;
    SplitRng wrng = SplitRng(seed).child("w");
    for (size_t t = 0; t < trials; ++t) {
        size_t w = 1 + size_t(wrng.below(params.m));
        uint64_t kseed = SplitRng(seed).child("keys").child(t).seed();
        KeyMaterial keys = KeyMaterial::generate(params, w, kseed);
        auto honest = run_session(params, keys, keys, trial_seed(seed, t));
        if (!honest.server_decision.accept) continue;

        // replay the recorded user->server frames at a fresh server session
        ServerSession server(params, keys, trial_seed(seed, t) ^ 0x77ull);
        for (size_t i = 0; i < honest.transcript.frames.size(); ++i) {
            if (!honest.transcript.entries[i].user_to_server) continue;
            if (server.finished()) break;
            server.on_frame(honest.transcript.frames[i]);
        }
        if (!server.finished()) server.abort_session();
        if (server.decision().accept) ++rep.accepts;
        else ++rep.detections;
    }
    rep.acceptance_frequency = double(rep.accepts) / double(trials);
    rep.acceptance_upper99 = clopper_pearson_upper(rep.accepts, trials);
    rep.bound = std::pow(2.0, -double(params.ell));
    rep.within_bound = rep.accepts == 0;
    return rep;
}

ExperimentReport run_reuse_experiment(const SessionParams& params,
                                      const std::vector<ScheduleEntry>& schedule,
                                      uint64_t seed) {
    ExperimentReport rep;
    rep.experiment = "key-reuse";
    rep.trials = schedule.size();

    SplitRng wrng = SplitRng(seed).child("w");
    size_t w = 1 + size_t(wrng.below(params.m));
    KeyMaterial keys = KeyMaterial::generate(params, w, SplitRng(seed).child("keys").seed());
    uint64_t digest0 = keys.digest();

    size_t honest_total = 0, honest_accepts = 0;
    std::vector<BitVec> session_keys;
    for (size_t t = 0; t < schedule.size(); ++t) {
        WireHook hook;
        AttackSpec attack;
        switch (schedule[t].kind) {
            case ScheduleEntry::Kind::Honest: break;
            case ScheduleEntry::Kind::Blocked:
                attack.strategy = Strategy::BLOCK_ABORT;
                attack.target_frame = params.has_test_round() ? FrameType::T_G : FrameType::G;
                hook = make_attack_hook(params, attack, trial_seed(seed, t));
                break;
            case ScheduleEntry::Kind::Tampered:
                attack.strategy = Strategy::BITFLIP;
                attack.target_frame =
                    params.has_test_round() ? FrameType::TEST_Z_TAG : FrameType::Z;
                attack.bit_index = 40; // inside the first field of the payload
                hook = make_attack_hook(params, attack, trial_seed(seed, t));
                break;
        }
        auto res = run_session(params, keys, keys, trial_seed(seed, t), hook);
        if (keys.digest() != digest0) {
            rep.notes.push_back("key material changed at session " + std::to_string(t));
            rep.within_bound = false;
        }
        if (schedule[t].kind == ScheduleEntry::Kind::Honest) {
            ++honest_total;
            if (res.server_decision.accept) {
                ++honest_accepts;
                ++rep.accepts;
            }
            if (params.mode == Mode::QKD && res.sk_server) session_keys.push_back(*res.sk_server);
        } else if (!res.server_decision.accept || schedule[t].kind == ScheduleEntry::Kind::Blocked) {
            ++rep.detections;
        }
    }
    rep.extra["honest_sessions"] = double(honest_total);
    rep.extra["honest_accepts"] = double(honest_accepts);
    rep.extra["key_digest_constant"] = 1.0;
    size_t distinct = 0;
    for (size_t i = 0; i < session_keys.size(); ++i) {
        bool repeated = false;
        for (size_t j = 0; j < i; ++j)
            if (session_keys[i] == session_keys[j]) repeated = true;
        if (!repeated) ++distinct;
    }
    if (!session_keys.empty()) rep.extra["distinct_session_keys"] = double(distinct);
    rep.acceptance_frequency = honest_total ? double(honest_accepts) / double(honest_total) : 0;
    rep.within_bound = honest_accepts == honest_total;
    return rep;
}

ExperimentReport sj_distinctness_audit(const SessionParams& params, size_t trials,
                                       uint64_t seed) {
    ExperimentReport rep;
    rep.experiment = "sj-distinctness";
    rep.trials = trials;
    rep.bound = double(params.m) * double(params.m) * std::pow(2.0, -double(params.ell) - 1.0);

    size_t collisions = 0;
    SplitRng wrng = SplitRng(seed).child("w");
    for (size_t t = 0; t < trials; ++t) {
        size_t w = 1 + size_t(wrng.below(params.m));
        uint64_t kseed = SplitRng(seed).child("keys").child(t).seed();
        KeyMaterial keys = KeyMaterial::generate(params, w, kseed);
        auto res = run_session(params, keys, keys, trial_seed(seed, t));

        UhfF f(FieldElement::from_bits(params.f_field(), res.f_key_bits), params.ell);
        UhfG g = UhfG::from_key_bits(params.g_field(), res.g_key_bits, params.ell, params.m);
        BasisString theta = bases_from_bits(res.theta_bits);
        std::vector<BitVec> sj;
        for (size_t j = 1; j <= params.m; ++j) {
            auto idx = params.basis_code->matching_positions(j, theta);
            BitVec xj(idx.size());
            for (size_t k = 0; k < idx.size(); ++k) xj.set(k, res.x.get(idx[k]));
            BitVec s = f.eval(xj);
            s ^= g.eval(j);
            sj.push_back(std::move(s));
        }
        bool collided = false;
        for (size_t i = 0; i < sj.size() && !collided; ++i)
            for (size_t j = i + 1; j < sj.size(); ++j)
                if (sj[i] == sj[j]) { collided = true; break; }
        if (collided) ++collisions;
    }
    rep.accepts = collisions;
    rep.acceptance_frequency = double(collisions) / double(trials);
    rep.acceptance_upper99 = clopper_pearson_upper(collisions, trials);
    double sigma = std::sqrt(std::max(rep.bound, 1e-12) / double(trials));
    rep.within_bound = rep.acceptance_frequency <= rep.bound + 3.0 * sigma + 1e-9;
    return rep;
}

std::pair<double, double> sj_collision_exact_micro(size_t n, size_t ell, uint64_t seed) {
    if (n > 12) throw std::invalid_argument("sj_collision_exact_micro: n too large");
    SessionParams p = make_params(Mode::QID, n, 2, ell, seed);
    SplitRng rng = SplitRng(seed).child("micro");
    BitVec x = rng.bits(n);
    BasisString theta = bases_from_bits(rng.bits(n));

    auto i1 = p.basis_code->matching_positions(1, theta);
    auto i2 = p.basis_code->matching_positions(2, theta);
    BitVec x1(i1.size()), x2(i2.size());
    for (size_t k = 0; k < i1.size(); ++k) x1.set(k, x.get(i1[k]));
    for (size_t k = 0; k < i2.size(); ++k) x2.set(k, x.get(i2[k]));

    auto fspec = p.f_field();
    auto gspec = p.g_field();
    size_t fq = size_t(1) << n;
    size_t gq = size_t(1) << p.g_degree();
    size_t bq = size_t(1) << ell;

    size_t collide = 0, total = 0;
    for (size_t fa = 0; fa < fq; ++fa) {
        UhfF f(FieldElement::from_value(fspec, fa), ell);
        BitVec d = f.eval(x1);
        d ^= f.eval(x2);
        for (size_t ga = 0; ga < gq; ++ga) {
            UhfG g(FieldElement::from_value(gspec, ga), BitVec(ell), 2);
            // the beta mask cancels in g(1) xor g(2); collisions are
            // counted once and scaled by the mask count
            BitVec gd = g.eval(1);
            gd ^= g.eval(2);
            total += bq;
            if (d == gd) collide += bq;
        }
    }
    double enumerated = double(collide) / double(total);
    double exact = std::pow(2.0, -double(ell));
    return {enumerated, exact};
}

} // namespace qid
