// Command-line front end: parameter reports, protocol runs (in-memory or
// networked), attack experiments, key agreement, and the verification
// sweeps for the analysis machinery.

#include <complex>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qid/attacks.hpp"
#include "qid/bounds.hpp"
#include "qid/config.hpp"
#include "qid/density.hpp"
#include "qid/distributions.hpp"
#include "qid/transport.hpp"

using namespace qid;

namespace {

int exit_usage(const std::string& msg) {
    std::cerr << "error: " << msg << "\n";
    return 2;
}

void add_session_flags(CLI::App* cmd, Config& cfg, std::string& config_path) {
    cmd->add_option("--config", config_path, "key = value configuration file");
    cmd->add_option("--mode", [&cfg](const std::vector<std::string>& v) {
        cfg.apply("mode", v.back());
        return true;
    }, "qid | qid-noisy | qidplus | qkd | mutual");
    cmd->add_option("--n", cfg.n, "qubit count");
    cmd->add_option("--m", cfg.m, "password count");
    cmd->add_option("--ell", cfg.ell, "hash / test length");
    cmd->add_option("--phi", cfg.phi, "channel flip rate");
    cmd->add_option("--eta", cfg.eta, "multi-pulse rate");
    cmd->add_option("--delta", cfg.delta_tolerance, "correctable error fraction");
    cmd->add_option("--seed", cfg.seed, "base seed");
    cmd->add_option("--w", cfg.w, "password index");
    cmd->add_option("--sk-len", cfg.sk_len, "session key length (qkd)");
    cmd->add_option("--flip-prob", cfg.flip_prob, "mutual mode flip probability");
    cmd->add_option("--threshold", cfg.threshold, "mutual mode closeness threshold");
    cmd->add_option("--keystore", cfg.keystore, "key store path");
    cmd->add_flag("--reveal", cfg.reveal, "include hidden channel fields in transcripts");
}

Config merge_config(const std::string& config_path, const Config& cli_values,
                    const Config& defaults) {
    if (config_path.empty()) return cli_values;
    Config cfg = Config::from_file(config_path);
    // CLI wins on conflict: replay every field that differs from defaults
    nlohmann::json d, c;
    auto snap = [](const Config& x) {
        nlohmann::json j;
        j["mode"] = int(x.mode);
        j["n"] = x.n; j["m"] = x.m; j["ell"] = x.ell;
        j["phi"] = x.phi; j["eta"] = x.eta; j["delta"] = x.delta_tolerance;
        j["seed"] = x.seed; j["w"] = x.w; j["sk_len"] = x.sk_len;
        j["flip"] = x.flip_prob; j["thr"] = x.threshold;
        j["keystore"] = x.keystore; j["reveal"] = x.reveal;
        return j;
    };
    d = snap(defaults);
    c = snap(cli_values);
    if (c["mode"] != d["mode"]) cfg.mode = cli_values.mode;
    if (c["n"] != d["n"]) cfg.n = cli_values.n;
    if (c["m"] != d["m"]) cfg.m = cli_values.m;
    if (c["ell"] != d["ell"]) cfg.ell = cli_values.ell;
    if (c["phi"] != d["phi"]) cfg.phi = cli_values.phi;
    if (c["eta"] != d["eta"]) cfg.eta = cli_values.eta;
    if (c["delta"] != d["delta"]) cfg.delta_tolerance = cli_values.delta_tolerance;
    if (c["seed"] != d["seed"]) cfg.seed = cli_values.seed;
    if (c["w"] != d["w"]) cfg.w = cli_values.w;
    if (c["sk_len"] != d["sk_len"]) cfg.sk_len = cli_values.sk_len;
    if (c["flip"] != d["flip"]) cfg.flip_prob = cli_values.flip_prob;
    if (c["thr"] != d["thr"]) cfg.threshold = cli_values.threshold;
    if (c["keystore"] != d["keystore"]) cfg.keystore = cli_values.keystore;
    if (c["reveal"] != d["reveal"]) cfg.reveal = cli_values.reveal;
    return cfg;
}

KeyMaterial keys_for(const Config& cfg, const SessionParams& params) {
    if (!cfg.keystore.empty()) {
        std::ifstream probe(cfg.keystore);
        if (probe.good()) {
            KeyStore ks = KeyStore::load(cfg.keystore);
            return ks.material();
        }
        KeyStore ks;
        ks.w = cfg.w;
        KeyMaterial km = KeyMaterial::generate(params, cfg.w, SplitRng(cfg.seed).child("keys").seed());
        ks.mac_key = km.mac_key;
        ks.save(cfg.keystore);
        return km;
    }
    return KeyMaterial::generate(params, cfg.w, SplitRng(cfg.seed).child("keys").seed());
}

void write_transcript(const std::string& path, const SessionResult& res, bool reveal) {
    std::ofstream out(path);
    for (size_t i = 0; i < res.transcript.entries.size(); ++i) {
        const auto& e = res.transcript.entries[i];
        nlohmann::ordered_json j;
        j["dir"] = e.user_to_server ? "user->server" : "server->user";
        j["type"] = frame_type_name(e.type);
        j["payload_bytes"] = e.payload_bytes;
        j["digest"] = e.payload_digest;
        out << j.dump() << "\n";
    }
    auto dump_channel = [&](const char* who, const std::vector<ChannelEvent>& log) {
        for (const auto& ev : log) {
            nlohmann::ordered_json j;
            j["channel"] = who;
            j["kind"] = ev.kind;
            j["role"] = ev.role;
            j["count"] = ev.count;
            if (!ev.positions.empty()) j["positions"] = ev.positions;
            j["digest"] = ev.hidden_digest;
            if (reveal && !ev.hidden.empty()) j["hidden"] = ev.hidden;
            out << j.dump() << "\n";
        }
    };
    dump_channel("user", res.user_channel_log);
    dump_channel("server", res.server_channel_log);
}

// small local samplers for the verification sweeps
std::vector<double> dirichlet(SplitRng& rng, size_t atoms) {
    std::vector<double> p(atoms);
    double sum = 0;
    for (double& v : p) {
        v = -std::log(1.0 - rng.real());
        sum += v;
    }
    for (double& v : p) v /= sum;
    return p;
}

std::vector<cplx> haar_state(SplitRng& rng, size_t dim) {
    std::vector<cplx> v(dim);
    double norm = 0;
    for (auto& a : v) {
        a = {rng.gaussian(), rng.gaussian()};
        norm += std::norm(a);
    }
    norm = std::sqrt(norm);
    for (auto& a : v) a /= norm;
    return v;
}

struct SweepLog {
    std::ofstream csv;
    bool enabled = false;
    void open(const std::string& path) {
        if (path.empty()) return;
        csv.open(path);
        csv << "instance,inputs,value,bound,margin\n";
        enabled = true;
    }
    void row(const std::string& id, const std::string& inputs, double value, double bound) {
        if (enabled) csv << id << "," << inputs << "," << value << "," << bound << ","
                         << (bound - value) << "\n";
    }
};

int cmd_verify_lemmas(bool quick, const std::string& csv_path) {
    SweepLog log;
    log.open(csv_path);
    bool ok = true;
    SplitRng rng(20240517);

    // entropy splitting sweep
    {
        size_t instances = quick ? 150 : 1000;
        size_t violations = 0, ran = 0;
        for (size_t inst = 0; inst < instances; ++inst) {
            size_t m = 2 + size_t(rng.below(2));
            size_t as = 2 + size_t(rng.below(3));
            size_t zs = 1 + size_t(rng.below(3));
            std::vector<std::string> names;
            std::vector<size_t> sizes;
            for (size_t i = 0; i < m; ++i) {
                names.push_back("X" + std::to_string(i + 1));
                sizes.push_back(as);
            }
            names.push_back("Z");
            sizes.push_back(zs);
            size_t atoms = 1;
            for (size_t s : sizes) atoms *= s;
            JointDistribution d(names, sizes, dirichlet(rng, atoms));
            std::vector<std::string> xn(names.begin(), names.end() - 1);
            for (double eps : {0.0, 0.05}) {
                double alpha = 1e9;
                for (size_t i = 0; i < m; ++i)
                    for (size_t j = i + 1; j < m; ++j)
                        alpha = std::min(alpha, hmin_smooth(d, {xn[i], xn[j]}, {"Z"}, eps));
                auto rep = verify_entropy_splitting(d, xn, "Z", alpha, eps,
                                                    std::vector<double>(m, 1.0 / double(m)));
                ++ran;
                if (!rep.applicable || !rep.holds) ++violations;
                log.row("splitting-" + std::to_string(inst) + "-" + std::to_string(eps),
                        "m=" + std::to_string(m), rep.actual, rep.bound);
            }
        }
        std::cout << (violations == 0 ? "[PASS] " : "[FAIL] ") << "entropy splitting: "
                  << ran << " instances, " << violations << " violations\n";
        ok = ok && violations == 0;
    }

    // privacy amplification sweep plus the two hand anchors
    {
        size_t instances = quick ? 40 : 100;
        size_t violations = 0;
        for (size_t inst = 0; inst < instances; ++inst) {
            size_t nbits = 3 + size_t(rng.below(2));
            size_t l = 1 + size_t(rng.below(2));
            size_t zs = 1 + size_t(rng.below(2));
            JointDistribution xz({"X", "Z"}, {size_t(1) << nbits, zs},
                                 dirichlet(rng, (size_t(1) << nbits) * zs));
            auto fam = (inst % 2) ? family_multiply(nbits, l) : family_multiply_masked(nbits, l);
            double dval = pa_exact_distance(xz, "X", "Z", fam);
            double bound = pa_bound(hmin(xz, {"X"}, {"Z"}), 0.0, 0.0, double(l));
            if (dval > bound + 1e-12) ++violations;
            log.row("pa-" + std::to_string(inst), "nbits=" + std::to_string(nbits), dval, bound);
        }
        JointDistribution xdet = JointDistribution::from_function(
            {"X", "Z"}, {16, 1},
            [](const std::vector<size_t>& idx) { return idx[0] == 5 ? 1.0 : 0.0; });
        double anchor1 = pa_exact_distance(xdet, "X", "Z", family_multiply_masked(4, 1));
        JointDistribution xu = JointDistribution::from_function(
            {"X", "Z"}, {16, 1}, [](const std::vector<size_t>&) { return 1.0 / 16.0; });
        double anchor2 = pa_exact_distance(xu, "X", "Z", family_mask_only(4, 2));
        bool anchors = std::abs(anchor1 - 0.5) <= 1e-12 && std::abs(anchor2) <= 1e-12;
        std::cout << ((violations == 0 && anchors) ? "[PASS] " : "[FAIL] ")
                  << "privacy amplification: " << instances << " instances, " << violations
                  << " violations, anchors " << (anchors ? "exact" : "WRONG") << "\n";
        ok = ok && violations == 0 && anchors;
    }

    // measurement uncertainty sweep
    {
        size_t instances = quick ? 200 : 1000;
        size_t violations = 0;
        for (size_t inst = 0; inst < instances; ++inst) {
            size_t n = 1 + size_t(rng.below(4));
            auto psi = haar_state(rng, size_t(1) << n);
            for (double lambda : {0.05, 0.1, 0.2}) {
                auto [needed, eps] = uncertainty_bound(n, lambda);
                auto me = exact_measurement_entropy(psi, std::min(eps, 1.0 - 1e-9));
                if (me.hmin_smooth < needed - 1e-9) ++violations;
                log.row("uncertainty-" + std::to_string(inst), "n=" + std::to_string(n),
                        me.hmin_smooth, needed);
            }
        }
        std::cout << (violations == 0 ? "[PASS] " : "[FAIL] ")
                  << "uncertainty relation (weak regime, eps near 1 at these sizes): "
                  << instances << " states, " << violations << " violations\n";
        ok = ok && violations == 0;
    }

    // conditional-independence decompositions
    {
        size_t instances = quick ? 40 : 100;
        size_t bad = 0;
        for (size_t inst = 0; inst < instances; ++inst) {
            MarkovInput in;
            auto p = dirichlet(rng, 4);
            in.p_xy = {{p[0], p[1]}, {p[2], p[3]}};
            for (int y = 0; y < 2; ++y) {
                std::vector<cplx> a(4);
                for (auto& v : a) v = {rng.gaussian(), rng.gaussian()};
                std::vector<cplx> rho(4, 0.0);
                for (size_t r = 0; r < 2; ++r)
                    for (size_t c = 0; c < 2; ++c)
                        for (size_t k = 0; k < 2; ++k)
                            rho[r * 2 + c] += a[r * 2 + k] * std::conj(a[c * 2 + k]);
                double tr = (rho[0] + rho[3]).real();
                for (auto& v : rho) v /= tr;
                rho[1] = std::conj(rho[2]);
                in.rho_y.push_back(DensityMatrix(2, rho));
            }
            bool indep = inst % 2 == 0;
            if (indep) in.event_given = {{0.5, 0.5}, {0.5, 0.5}};
            else in.event_given = {{rng.real(), rng.real()}, {rng.real(), rng.real()}};
            auto rep = markov_decompose_check(in);
            if (!rep.ok) ++bad;
            log.row("markov-" + std::to_string(inst), indep ? "independent" : "correlated",
                    rep.max_residual, 1e-9);
        }
        std::cout << (bad == 0 ? "[PASS] " : "[FAIL] ") << "markov decomposition: " << instances
                  << " instances, " << bad << " failures\n";
        ok = ok && bad == 0;
    }

    return ok ? 0 : 1;
}

int cmd_audit(bool quick, uint64_t seed) {
    bool ok = true;

    // exhaustive MAC forgery audit at field degree 4, two tag bits
    {
        auto spec = FieldSpec::standard(4);
        double worst = 0;
        std::vector<std::vector<uint64_t>> tag(64, std::vector<uint64_t>(16));
        for (uint64_t a = 0; a < 16; ++a)
            for (uint64_t b = 0; b < 4; ++b) {
                MacKey k(FieldElement::from_value(spec, a), BitVec::from_u64(b, 2));
                for (uint64_t msg = 0; msg < 16; ++msg)
                    tag[a * 4 + b][msg] = mac_tag(k, BitVec::from_u64(msg, 4)).to_u64();
            }
        for (uint64_t msg = 0; msg < 16; ++msg)
            for (uint64_t t = 0; t < 4; ++t)
                for (uint64_t msg2 = 0; msg2 < 16; ++msg2) {
                    if (msg2 == msg) continue;
                    for (uint64_t t2 = 0; t2 < 4; ++t2) {
                        size_t seen = 0, both = 0;
                        for (size_t key = 0; key < 64; ++key) {
                            if (tag[key][msg] == t) {
                                ++seen;
                                if (tag[key][msg2] == t2) ++both;
                            }
                        }
                        if (seen) worst = std::max(worst, double(both) / double(seen));
                    }
                }
        std::cout << (worst <= 0.25 ? "[PASS] " : "[FAIL] ")
                  << "MAC forgery audit: worst substitution probability " << worst << " <= 0.25\n";
        ok = ok && worst <= 0.25;
    }

    // exact extractor distance at t <= 10
    {
        auto spec = FieldSpec::standard(10);
        bool all = true;
        for (size_t l : {1u, 2u, 4u}) {
            for (size_t t : {6u, 8u, 10u}) {
                double total = 0;
                for (uint64_t a = 0; a < 1024; ++a) {
                    MacKey k(FieldElement::from_value(spec, a), BitVec(l));
                    std::vector<double> hist(size_t(1) << l, 0.0);
                    for (uint64_t x = 0; x < (uint64_t(1) << t); ++x)
                        hist[mac_tag(k, BitVec::from_u64(x, t)).to_u64()] +=
                            1.0 / double(1ull << t);
                    double tv = 0;
                    for (double p : hist) tv += std::abs(p - 1.0 / double(size_t(1) << l));
                    total += tv / 2.0;
                }
                double distance = total / 1024.0;
                double bound = 0.5 * std::pow(2.0, -0.5 * (double(t) - double(l)));
                if (distance > bound + 1e-12) all = false;
            }
        }
        std::cout << (all ? "[PASS] " : "[FAIL] ") << "extractor MAC distance within bound\n";
        ok = ok && all;
    }

    // S_j distinctness
    {
        SessionParams p = make_params(Mode::QID, 64, 8, 16, seed);
        auto rep = sj_distinctness_audit(p, quick ? 1000 : 10000, seed);
        std::cout << (rep.within_bound ? "[PASS] " : "[FAIL] ")
                  << "S_j distinctness: frequency " << rep.acceptance_frequency << " vs bound "
                  << rep.bound << "\n";
        auto [enumerated, exact] = sj_collision_exact_micro(4, 1, seed);
        bool micro = std::abs(enumerated - exact) <= 1e-12 && enumerated <= 0.5;
        std::cout << (micro ? "[PASS] " : "[FAIL] ") << "S_j micro enumeration: " << enumerated
                  << " == " << exact << "\n";
        ok = ok && rep.within_bound && micro;
    }
    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"bounded-quantum-storage identification toolkit"};
    app.require_subcommand(1);

    Config cfg, defaults;
    std::string config_path;

    // params
    auto* params_cmd = app.add_subcommand("params", "evaluate the security parameter formulas");
    size_t pn = 10000, pm = 256;
    double pq = 100, plambda = 0.01;
    std::optional<double> pell;
    params_cmd->add_option("--n", pn);
    params_cmd->add_option("--m", pm);
    params_cmd->add_option("--q", pq);
    params_cmd->add_option("--lambda", plambda);
    double pell_value = -1;
    params_cmd->add_option("--ell", pell_value, "override the derived ell");

    // run / qkd
    auto* run_cmd = app.add_subcommand("run", "execute an honest session");
    add_session_flags(run_cmd, cfg, config_path);
    std::string listen_ep, connect_ep, role = "both", transcript_path;
    run_cmd->add_option("--role", role, "both | user | server | proxy");
    run_cmd->add_option("--listen", listen_ep, "endpoint to listen on");
    run_cmd->add_option("--connect", connect_ep, "endpoint to connect to");
    run_cmd->add_option("--transcript", transcript_path, "JSON-lines transcript output");

    auto* qkd_cmd = app.add_subcommand("qkd", "run the key-agreement mode");
    Config qcfg;
    std::string qconfig_path;
    add_session_flags(qkd_cmd, qcfg, qconfig_path);

    // attack
    auto* attack_cmd = app.add_subcommand("attack", "drive an adversary experiment");
    Config acfg;
    std::string aconfig_path;
    add_session_flags(attack_cmd, acfg, aconfig_path);
    std::string strategy = "intercept-resend";
    size_t trials = 1000;
    int guess = -1;
    std::string target_frame = "Z";
    size_t bit_index = 0;
    bool fixed_plus = false;
    std::vector<size_t> positions;
    std::string csv_path;
    attack_cmd->add_option("--attack,--strategy", strategy,
                           "honest | guess-user | guess-server | intercept-resend | "
                           "block-abort | replay | bitflip");
    attack_cmd->add_option("--trials", trials);
    attack_cmd->add_option("--guess", guess, "fixed password guess");
    attack_cmd->add_option("--target-frame", target_frame, "frame type for bitflip/block");
    attack_cmd->add_option("--bit-index", bit_index);
    attack_cmd->add_flag("--fixed-plus", fixed_plus, "intercept in the + basis");
    attack_cmd->add_option("--positions", positions, "intercept positions (default all)");
    attack_cmd->add_option("--csv", csv_path, "append a CSV row to this path");

    // verify-lemmas / audit
    auto* verify_cmd = app.add_subcommand("verify-lemmas", "run the analysis verification sweeps");
    bool quick = false;
    std::string sweep_csv;
    verify_cmd->add_flag("--quick", quick);
    verify_cmd->add_option("--csv", sweep_csv, "sweep results CSV");
    auto* audit_cmd = app.add_subcommand("audit", "hash, MAC and S_j audits");
    bool aquick = false;
    uint64_t aseed = 7;
    audit_cmd->add_flag("--quick", aquick);
    audit_cmd->add_option("--seed", aseed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (params_cmd->parsed()) {
            auto imp = impersonation_epsilon(pn, pm, pq, plambda);
            auto plus = pell_value > 0 ? qidplus_epsilon(pn, pm, pq, plambda, pell_value)
                                       : qidplus_epsilon(pn, pm, pq, plambda);
            std::cout << imp.to_json() << "\n" << plus.to_json() << "\n";
            return 0;
        }

        if (run_cmd->parsed() || qkd_cmd->parsed()) {
            Config base = run_cmd->parsed() ? cfg : qcfg;
            std::string cpath = run_cmd->parsed() ? config_path : qconfig_path;
            Config merged = merge_config(cpath, base, defaults);
            if (qkd_cmd->parsed()) merged.mode = Mode::QKD;
            if (merged.mode == Mode::QKD && merged.sk_len == 0)
                merged.sk_len = std::min<size_t>(merged.n, merged.ell + merged.m);
            SessionParams params = merged.session_params();
            KeyMaterial keys = keys_for(merged, params);

            if (role == "server" || role == "user" || role == "proxy") {
                if (role == "server") {
                    if (listen_ep.empty()) return exit_usage("--listen required for the server");
                    int lfd = tcp_listen(listen_ep);
                    auto stream = tcp_accept(lfd, 30000);
                    if (!stream) return exit_usage("no connection arrived");
                    ServerSession server(params, keys, merged.seed);
                    Decision d = drive_server(server, *stream);
                    std::cout << (d.accept ? "accept" : "reject") << " " << reason_name(d.reason)
                              << "\n";
                    return d.accept ? 0 : 1;
                }
                if (role == "user") {
                    if (connect_ep.empty()) return exit_usage("--connect required for the user");
                    auto stream = tcp_connect(connect_ep, 5000);
                    UserSession user(params, keys, merged.seed);
                    Decision d = drive_user(user, *stream);
                    std::cout << (d.accept ? "accept" : "reject") << " " << reason_name(d.reason)
                              << "\n";
                    return d.accept ? 0 : 1;
                }
                if (listen_ep.empty() || connect_ep.empty())
                    return exit_usage("proxy needs --listen and --connect");
                int lfd = tcp_listen(listen_ep);
                auto user_side = tcp_accept(lfd, 30000);
                if (!user_side) return exit_usage("no connection arrived");
                auto server_side = tcp_connect(connect_ep, 5000);
                run_proxy(*user_side, *server_side, {});
                return 0;
            }

            auto res = run_session(params, keys, keys, merged.seed);
            if (!transcript_path.empty()) write_transcript(transcript_path, res, merged.reveal);
            std::cout << "server: " << (res.server_decision.accept ? "accept" : "reject") << " "
                      << reason_name(res.server_decision.reason) << "\n";
            std::cout << "user:   " << (res.user_decision.accept ? "accept" : "reject") << " "
                      << reason_name(res.user_decision.reason) << "\n";
            if (params.mode == Mode::QKD && res.sk_user) {
                std::cout << "session key: " << bits_to_hex(*res.sk_user) << " ("
                          << res.sk_user->size() << " bits)\n";
                if (!merged.keystore.empty()) {
                    KeyStore ks = KeyStore::load(merged.keystore);
                    ks.session_keys.push_back(*res.sk_user);
                    ks.save(merged.keystore);
                }
            }
            return res.server_decision.accept && res.user_decision.accept ? 0 : 1;
        }

        if (attack_cmd->parsed()) {
            Config merged = merge_config(aconfig_path, acfg, defaults);
            SessionParams params = merged.session_params();
            AttackSpec spec;
            if (strategy == "honest") spec.strategy = Strategy::HONEST;
            else if (strategy == "guess-user") spec.strategy = Strategy::GUESS_USER;
            else if (strategy == "guess-server") spec.strategy = Strategy::GUESS_SERVER;
            else if (strategy == "intercept-resend") spec.strategy = Strategy::INTERCEPT_RESEND;
            else if (strategy == "block-abort") spec.strategy = Strategy::BLOCK_ABORT;
            else if (strategy == "replay") spec.strategy = Strategy::REPLAY;
            else if (strategy == "bitflip") spec.strategy = Strategy::BITFLIP;
            else return exit_usage("unknown strategy " + strategy);
            if (guess > 0) spec.guess = size_t(guess);
            spec.positions = positions;
            if (fixed_plus) spec.bases_rule = AttackSpec::BasesRule::FixedPlus;
            spec.bit_index = bit_index;
            for (FrameType t : {FrameType::QUBITS, FrameType::THETA_F, FrameType::G, FrameType::Z,
                                FrameType::THETA_J_S_F, FrameType::T_G, FrameType::TEST_Z_TAG,
                                FrameType::DECISION, FrameType::OTP_W})
                if (target_frame == frame_type_name(t)) spec.target_frame = t;

            ExperimentReport rep;
            switch (spec.strategy) {
                case Strategy::HONEST:
                case Strategy::GUESS_USER:
                    rep = run_impersonation_experiment(params, spec, trials, merged.seed);
                    break;
                case Strategy::GUESS_SERVER:
                    rep = run_dishonest_server_experiment(params, spec, trials, merged.seed);
                    break;
                case Strategy::REPLAY:
                    rep = run_replay_experiment(params, trials, merged.seed);
                    break;
                default:
                    rep = run_mitm_experiment(params, spec, trials, merged.seed);
            }
            std::cout << rep.to_json() << "\n";
            if (!csv_path.empty()) {
                std::ofstream out(csv_path, std::ios::app);
                out << rep.to_csv_row() << "\n";
            }
            return rep.within_bound ? 0 : 1;
        }

        if (verify_cmd->parsed()) return cmd_verify_lemmas(quick, sweep_csv);
        if (audit_cmd->parsed()) return cmd_audit(aquick, aseed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
