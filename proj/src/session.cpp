#include "qid/session.hpp"

#include <algorithm>
#include <stdexcept>

#include "qid/serial.hpp"

namespace qid {

const char* mode_name(Mode m) {
    switch (m) {
        case Mode::QID: return "qid";
        case Mode::QID_NOISY: return "qid-noisy";
        case Mode::QIDPLUS: return "qidplus";
        case Mode::QKD: return "qkd";
        case Mode::MUTUAL: return "mutual";
    }
    return "?";
}

std::optional<Mode> mode_from_name(const std::string& s) {
    for (Mode m : {Mode::QID, Mode::QID_NOISY, Mode::QIDPLUS, Mode::QKD, Mode::MUTUAL})
        if (s == mode_name(m)) return m;
    return std::nullopt;
}

const char* reason_name(Reason r) {
    switch (r) {
        case Reason::OK: return "OK";
        case Reason::MAC_FAIL: return "MAC_FAIL";
        case Reason::TEST_MISMATCH: return "TEST_MISMATCH";
        case Reason::Z_MISMATCH: return "Z_MISMATCH";
        case Reason::DECODE_FAIL: return "DECODE_FAIL";
        case Reason::PROTOCOL_VIOLATION: return "PROTOCOL_VIOLATION";
        case Reason::ABORTED: return "ABORTED";
    }
    return "?";
}

size_t SessionParams::password_bits() const {
    size_t b = 1;
    while ((size_t(1) << b) < m) ++b;
    return b;
}

size_t SessionParams::mac_message_capacity() const {
    size_t syn_max = family ? family->syndrome_len(n) : 0;
    size_t parts = 9;
    size_t sum = n + 32 + syn_max + n + (g_degree() + ell) + n + ell + ell + n;
    if (mode == Mode::QKD) {
        sum += n;
        parts += 1;
    }
    return sum + 32 * parts;
}

unsigned SessionParams::mac_degree() const {
    return standard_degree_at_least(mac_message_capacity());
}

std::vector<std::string> SessionParams::validate() const {
    std::vector<std::string> errs;
    if (m < 2) errs.push_back("m must be at least 2");
    if (n < 2) errs.push_back("n must be at least 2");
    if (ell < 1) errs.push_back("ell must be at least 1");
    if (!basis_code) errs.push_back("basis code missing");
    else {
        if (basis_code->m() != m) errs.push_back("basis code password count mismatch");
        if (basis_code->n() != n) errs.push_back("basis code length mismatch");
    }
    if (has_test_round() && ell > n) errs.push_back("test set larger than n");
    if (needs_family()) {
        if (!family) errs.push_back("syndrome family missing");
        else if (family->length() != n / 2) errs.push_back("syndrome family length must be n/2");
        if (n % 2 != 0 || n < 4) errs.push_back("noisy modes need even n >= 4");
    }
    try {
        channel.validate();
    } catch (const std::exception& e) {
        errs.push_back(e.what());
    }
    if (delta_tolerance < 0.0 || delta_tolerance >= 0.5)
        errs.push_back("delta_tolerance out of [0, 0.5)");
    if (mode == Mode::QKD) {
        if (sk_len <= password_bits()) errs.push_back("sk_len must exceed the password pad");
        if (sk_len > n) errs.push_back("sk_len larger than n");
    }
    if (mode == Mode::MUTUAL) {
        if (mutual_flip_prob < 0.0 || mutual_flip_prob >= 0.5)
            errs.push_back("mutual_flip_prob out of [0, 0.5)");
        if (mutual_threshold < mutual_flip_prob || mutual_threshold >= 0.5)
            errs.push_back("mutual_threshold must lie in [flip_prob, 0.5)");
    }
    if (needs_mac()) {
        try {
            (void)mac_degree();
        } catch (const std::exception& e) {
            errs.push_back(std::string("MAC field: ") + e.what());
        }
    }
    return errs;
}

SessionParams make_params(Mode mode, size_t n, size_t m, size_t ell, uint64_t seed, double phi,
                          double eta, double delta_tolerance) {
    SessionParams p;
    p.mode = mode;
    p.n = n;
    p.m = m;
    p.ell = ell;
    p.channel.phi = phi;
    p.channel.eta = eta;
    p.delta_tolerance = delta_tolerance;
    size_t target = m == 2 ? n : std::max<size_t>(1, gv_feasible(n, m));
    p.basis_code = std::make_shared<BasisCode>(build_basis_code(m, n, target, seed));
    if (p.needs_family())
        p.family = std::make_shared<SyndromeFamily>(n / 2, 0, SplitRng(seed).child("family").seed());
    return p;
}

KeyMaterial KeyMaterial::generate(const SessionParams& p, size_t w, uint64_t key_seed) {
    KeyMaterial k;
    k.w = w;
    if (p.needs_mac()) {
        SplitRng rng = SplitRng(key_seed).child("mac_key");
        k.mac_key = rng.bits(p.mac_key_bits());
    }
    return k;
}

uint64_t KeyMaterial::digest() const {
    uint64_t h = fnv1a64(std::to_string(w));
    if (mac_key) h = fnv1a64(mac_key->packed(), h);
    return h;
}

void Transcript::record(bool user_to_server, const Frame& f) {
    entries.push_back({user_to_server, f.type, fnv1a64(f.payload), f.payload.size()});
    frames.push_back(f);
}

uint64_t Transcript::digest() const {
    uint64_t h = 0xcbf29ce484222325ull;
    for (const auto& e : entries) {
        h = fnv1a64(std::to_string(int(e.user_to_server)) + frame_type_name(e.type), h);
        h ^= e.payload_digest;
        h *= 0x100000001b3ull;
    }
    return h;
}

namespace {

Frame make_parts_frame(FrameType t, std::initializer_list<BitVec> parts) {
    return Frame{t, encode_parts(parts)};
}

Frame abort_frame(Reason r) {
    return make_parts_frame(FrameType::ABORT, {BitVec::from_u64(uint64_t(r), 8)});
}

BitVec subvector(const BitVec& v, const std::vector<size_t>& idx) {
    BitVec out(idx.size());
    for (size_t k = 0; k < idx.size(); ++k) out.set(k, v.get(idx[k]));
    return out;
}

} // namespace

namespace detail {

struct SessionCommon {
    enum UserPhase { U_START, U_AWAIT_G, U_AWAIT_DECISION, U_AWAIT_OTP, U_DONE };
    enum ServerPhase { S_AWAIT_QUBITS, S_AWAIT_THETA, S_AWAIT_Z, S_AWAIT_USER_DECISION, S_DONE };

    SessionParams p;
    KeyMaterial keys;
    SplitRng rng;
    Channel channel;
    int phase;
    bool is_user;

    Decision decision{false, Reason::ABORTED};
    bool done = false;
    bool verdict_set = false;
    std::optional<BitVec> sk;

    // user state
    BitVec x;
    BasisString theta;
    std::vector<size_t> i_w;
    std::optional<UhfF> f, extract;
    uint32_t j = 0;
    BitVec s;
    BitVec z_sent, true_flips;

    // server state
    BitVec xprime, testprime;
    BasisString c;
    std::vector<size_t> T;
    std::optional<UhfG> g;
    BitVec theta_bits_rx, f_key_rx, e_key_rx, s_rx, test_rx, z_rx, tag_rx;
    uint32_t j_rx = 0;
    std::optional<BitVec> recovered;

    SessionCommon(SessionParams params, KeyMaterial k, uint64_t session_seed, bool user)
        : p(std::move(params)), keys(std::move(k)),
          rng(SplitRng(session_seed).child(user ? "user" : "server").seed()),
          channel(p.channel, session_seed, user ? "user" : "server"),
          phase(user ? int(U_START) : int(S_AWAIT_QUBITS)), is_user(user) {
        auto errs = p.validate();
        if (!errs.empty()) throw std::invalid_argument("SessionParams: " + errs.front());
        if (keys.w < 1 || keys.w > p.m)
            throw std::invalid_argument("KeyMaterial: password index out of range");
        if (p.needs_mac()) {
            if (!keys.mac_key || keys.mac_key->size() != p.mac_key_bits())
                throw std::invalid_argument("KeyMaterial: MAC key missing or mis-sized");
        }
    }

    std::vector<Frame> fail(Reason r) {
        decision = {false, r};
        verdict_set = true;
        done = true;
        if (r == Reason::ABORTED) return {};
        if (is_user) return {abort_frame(r)};
        // the server announces reject through a normal decision frame
        return {decision_frame()};
    }

    void abort_now() {
        if (!done) {
            // keep a verdict that was already reached (the mutual server
            // decides before the user's closing frame arrives)
            if (!verdict_set) decision = {false, Reason::ABORTED};
            done = true;
        }
    }

    Frame decision_frame(const std::optional<BitVec>& flips = std::nullopt) {
        std::vector<BitVec> parts{BitVec::from_u64(decision.accept ? 1 : 0, 1),
                                  BitVec::from_u64(uint64_t(decision.reason), 8)};
        if (flips) parts.push_back(*flips);
        return Frame{FrameType::DECISION, encode_parts(parts)};
    }

    MacKey mac_key() const {
        return MacKey::from_key_bits(p.mac_field(), *keys.mac_key, p.ell);
    }

    BitVec mac_msg(const BitVec& theta_b, uint32_t jv, const BitVec& sv, const BitVec& f_key,
                   const std::optional<BitVec>& e_key, const BitVec& g_key, const BitVec& t_map,
                   const BitVec& test, const BitVec& z, const BitVec& x_iw) const {
        std::vector<BitVec> parts{theta_b, BitVec::from_u64(jv, 32), sv, f_key};
        if (e_key) parts.push_back(*e_key);
        parts.push_back(g_key);
        parts.push_back(t_map);
        parts.push_back(test);
        parts.push_back(z);
        parts.push_back(x_iw);
        return mac_message(parts);
    }

    // ---- user side ----

    std::vector<Frame> user_start() {
        x = rng.bits(p.n);
        theta = bases_from_bits(rng.bits(p.n));
        QubitBatch batch = channel.prepare(x, theta);
        Frame qubits{FrameType::QUBITS, batch.pack()};

        i_w = p.basis_code->matching_positions(keys.w, theta);
        f = UhfF(FieldElement::from_bits(p.f_field(), rng.bits(p.n)), p.ell);

        Frame announce;
        if (p.needs_family()) {
            j = uint32_t(rng.next() & 0xFFFFFFFFu);
            s = p.family->syndrome(j, subvector(x, i_w));
            std::vector<BitVec> parts{bases_to_bits(theta), BitVec::from_u64(j, 32), s,
                                      f->key_bits()};
            if (p.mode == Mode::QKD) {
                extract = UhfF(FieldElement::from_bits(p.f_field(), rng.bits(p.n)), p.sk_len);
                parts.push_back(extract->key_bits());
            }
            announce = Frame{FrameType::THETA_J_S_F, encode_parts(parts)};
        } else {
            announce = make_parts_frame(FrameType::THETA_F, {bases_to_bits(theta), f->key_bits()});
        }
        phase = U_AWAIT_G;
        return {std::move(qubits), std::move(announce)};
    }

    std::vector<Frame> user_on_frame(const Frame& fr) {
        if (done) return {};
        if (fr.type == FrameType::ABORT) return fail(Reason::ABORTED);
        switch (phase) {
            case U_AWAIT_G: return user_handle_g(fr);
            case U_AWAIT_DECISION: return user_handle_decision(fr);
            case U_AWAIT_OTP: return user_handle_otp(fr);
            default: return fail(Reason::PROTOCOL_VIOLATION);
        }
    }

    std::vector<Frame> user_handle_g(const Frame& fr) {
        FrameType want = p.has_test_round() ? FrameType::T_G : FrameType::G;
        if (fr.type != want) return fail(Reason::PROTOCOL_VIOLATION);
        auto parts = decode_parts(fr.payload);
        if (!parts) return fail(Reason::PROTOCOL_VIOLATION);

        BitVec t_map;
        size_t gi = 0;
        if (p.has_test_round()) {
            if (parts->size() != 3) return fail(Reason::PROTOCOL_VIOLATION);
            t_map = (*parts)[0];
            if (t_map.size() != p.n || t_map.weight() != p.ell)
                return fail(Reason::PROTOCOL_VIOLATION);
            gi = 1;
        } else if (parts->size() != 2) {
            return fail(Reason::PROTOCOL_VIOLATION);
        }
        const BitVec& ga = (*parts)[gi];
        const BitVec& gb = (*parts)[gi + 1];
        if (ga.size() != p.g_degree() || gb.size() != p.ell)
            return fail(Reason::PROTOCOL_VIOLATION);
        UhfG guser(FieldElement::from_bits(p.g_field(), ga), gb, p.m);

        BitVec z = f->eval(subvector(x, i_w));
        z ^= guser.eval(keys.w);

        std::vector<Frame> out;
        if (p.has_test_round()) {
            std::vector<size_t> t_positions;
            for (size_t i = 0; i < p.n; ++i)
                if (t_map.get(i)) t_positions.push_back(i);
            BitVec test = subvector(x, t_positions);
            BitVec gkey = ga;
            gkey.append(gb);
            std::optional<BitVec> ekey;
            if (extract) ekey = extract->key_bits();
            BitVec msg = mac_msg(bases_to_bits(theta), j, s, f->key_bits(), ekey, gkey, t_map,
                                 test, z, subvector(x, i_w));
            BitVec tag = mac_tag(mac_key(), msg);
            z_sent = z;
            out.push_back(make_parts_frame(FrameType::TEST_Z_TAG, {test, z, tag}));
        } else if (p.mode == Mode::MUTUAL) {
            true_flips = BitVec(p.ell);
            for (size_t i = 0; i < p.ell; ++i)
                if (p.mutual_flip_prob > 0.0 && rng.bernoulli(p.mutual_flip_prob))
                    true_flips.set(i, true);
            BitVec ztilde = z ^ true_flips;
            z_sent = ztilde;
            out.push_back(make_parts_frame(FrameType::Z, {ztilde}));
        } else {
            z_sent = z;
            out.push_back(make_parts_frame(FrameType::Z, {z}));
        }
        phase = U_AWAIT_DECISION;
        return out;
    }

    std::vector<Frame> user_handle_decision(const Frame& fr) {
        if (fr.type != FrameType::DECISION) return fail(Reason::PROTOCOL_VIOLATION);
        auto parts = decode_parts(fr.payload);
        size_t expected = p.mode == Mode::MUTUAL ? 3 : 2;
        if (!parts || (parts->size() != 2 && parts->size() != expected))
            return fail(Reason::PROTOCOL_VIOLATION);
        if ((*parts)[0].size() != 1 || (*parts)[1].size() != 8)
            return fail(Reason::PROTOCOL_VIOLATION);
        bool accept = (*parts)[0].get(0);
        uint64_t rcode = (*parts)[1].to_u64();
        if (rcode > uint64_t(Reason::ABORTED)) return fail(Reason::PROTOCOL_VIOLATION);
        Reason server_reason = Reason(rcode);
        if (accept != (server_reason == Reason::OK)) return fail(Reason::PROTOCOL_VIOLATION);

        if (p.mode == Mode::MUTUAL) {
            if (!accept) {
                decision = {false, server_reason};
                done = true;
                return {decision_frame()};
            }
            if (parts->size() != 3 || (*parts)[2].size() != p.ell)
                return fail(Reason::PROTOCOL_VIOLATION);
            // the server proves knowledge of w by naming the exact flip set
            bool match = (*parts)[2] == true_flips;
            decision = match ? Decision{true, Reason::OK} : Decision{false, Reason::Z_MISMATCH};
            verdict_set = true;
            done = true;
            return {decision_frame()};
        }
        if (p.mode == Mode::QKD) {
            if (!accept) {
                decision = {false, server_reason};
                done = true;
                return {};
            }
            phase = U_AWAIT_OTP;
            return {};
        }
        decision = {accept, server_reason};
        verdict_set = true;
        done = true;
        return {};
    }

    std::vector<Frame> user_handle_otp(const Frame& fr) {
        if (fr.type != FrameType::OTP_W) return fail(Reason::PROTOCOL_VIOLATION);
        auto parts = decode_parts(fr.payload);
        size_t pb = p.password_bits();
        if (!parts || parts->size() != 1 || (*parts)[0].size() != pb)
            return fail(Reason::PROTOCOL_VIOLATION);
        BitVec my_sk = extract->eval(subvector(x, i_w));
        BitVec pad = my_sk.slice(0, pb);
        BitVec claimed = (*parts)[0] ^ pad;
        if (claimed.to_u64() != uint64_t(keys.w - 1)) {
            decision = {false, Reason::Z_MISMATCH};
            verdict_set = true;
            done = true;
            return {};
        }
        sk = my_sk.slice(pb, p.sk_len - pb);
        decision = {true, Reason::OK};
        verdict_set = true;
        done = true;
        return {};
    }

    // ---- server side ----

    std::vector<Frame> server_on_frame(const Frame& fr) {
        if (done) return {};
        if (fr.type == FrameType::ABORT) return fail(Reason::ABORTED);
        switch (phase) {
            case S_AWAIT_QUBITS: return server_handle_qubits(fr);
            case S_AWAIT_THETA: return server_handle_theta(fr);
            case S_AWAIT_Z: return server_handle_z(fr);
            case S_AWAIT_USER_DECISION: return server_handle_user_decision(fr);
            default: return fail(Reason::PROTOCOL_VIOLATION);
        }
    }

    std::vector<Frame> server_handle_qubits(const Frame& fr) {
        if (fr.type != FrameType::QUBITS) return fail(Reason::PROTOCOL_VIOLATION);
        if (fr.payload.size() != (3 * p.n + 7) / 8) return fail(Reason::PROTOCOL_VIOLATION);
        QubitBatch batch = QubitBatch::unpack(fr.payload, p.n);
        channel.transmit(batch);

        c = p.basis_code->encode(keys.w);
        if (p.has_test_round()) {
            // uniform l-subset by seeded shuffle prefix
            std::vector<size_t> idx(p.n);
            for (size_t i = 0; i < p.n; ++i) idx[i] = i;
            for (size_t i = p.n - 1; i > 0; --i)
                std::swap(idx[i], idx[rng.below(i + 1)]);
            T.assign(idx.begin(), idx.begin() + long(p.ell));
            std::sort(T.begin(), T.end());
            for (size_t i : T) c[i] = rng.bit() ? Basis::Times : Basis::Plus;
        }
        xprime = channel.measure(batch, c);
        if (p.has_test_round()) testprime = subvector(xprime, T);
        phase = S_AWAIT_THETA;
        return {};
    }

    std::vector<Frame> server_handle_theta(const Frame& fr) {
        FrameType want = p.needs_family() ? FrameType::THETA_J_S_F : FrameType::THETA_F;
        if (fr.type != want) return fail(Reason::PROTOCOL_VIOLATION);
        auto parts = decode_parts(fr.payload);
        if (!parts) return fail(Reason::PROTOCOL_VIOLATION);

        size_t expected = 2;
        if (p.needs_family()) expected = p.mode == Mode::QKD ? 5 : 4;
        if (parts->size() != expected) return fail(Reason::PROTOCOL_VIOLATION);

        theta_bits_rx = (*parts)[0];
        if (theta_bits_rx.size() != p.n) return fail(Reason::PROTOCOL_VIOLATION);
        i_w = p.basis_code->matching_positions(keys.w, bases_from_bits(theta_bits_rx));

        if (p.needs_family()) {
            if ((*parts)[1].size() != 32) return fail(Reason::PROTOCOL_VIOLATION);
            j_rx = uint32_t((*parts)[1].to_u64());
            s_rx = (*parts)[2];
            if (s_rx.size() != p.family->syndrome_len(i_w.size()))
                return fail(Reason::PROTOCOL_VIOLATION);
            f_key_rx = (*parts)[3];
            if (p.mode == Mode::QKD) {
                e_key_rx = (*parts)[4];
                if (e_key_rx.size() != p.n) return fail(Reason::PROTOCOL_VIOLATION);
            }
        } else {
            f_key_rx = (*parts)[1];
        }
        if (f_key_rx.size() != p.n) return fail(Reason::PROTOCOL_VIOLATION);

        g = UhfG::random(p.m, p.ell, rng);
        phase = S_AWAIT_Z;
        if (p.has_test_round()) {
            BitVec t_map(p.n);
            for (size_t i : T) t_map.set(i, true);
            return {make_parts_frame(FrameType::T_G, {t_map, g->key_a().bits(), g->mask_b()})};
        }
        return {make_parts_frame(FrameType::G, {g->key_a().bits(), g->mask_b()})};
    }

    std::vector<Frame> server_handle_z(const Frame& fr) {
        FrameType want = p.has_test_round() ? FrameType::TEST_Z_TAG : FrameType::Z;
        if (fr.type != want) return fail(Reason::PROTOCOL_VIOLATION);
        auto parts = decode_parts(fr.payload);
        if (!parts) return fail(Reason::PROTOCOL_VIOLATION);

        UhfF fsrv(FieldElement::from_bits(p.f_field(), f_key_rx), p.ell);

        if (p.mode == Mode::QID || p.mode == Mode::MUTUAL) {
            if (parts->size() != 1 || (*parts)[0].size() != p.ell)
                return fail(Reason::PROTOCOL_VIOLATION);
            z_rx = (*parts)[0];
            BitVec zprime = fsrv.eval(subvector(xprime, i_w));
            zprime ^= g->eval(keys.w);
            if (p.mode == Mode::QID) {
                decision = z_rx == zprime ? Decision{true, Reason::OK}
                                          : Decision{false, Reason::Z_MISMATCH};
                verdict_set = true;
                done = true;
                return {decision_frame()};
            }
            // mutual: accept when the announced word is close, then prove
            // knowledge of w by returning the flip positions
            size_t dist = z_rx.hamming(zprime);
            bool close = double(dist) <= p.mutual_threshold * double(p.ell) + 1e-9;
            decision = close ? Decision{true, Reason::OK} : Decision{false, Reason::Z_MISMATCH};
            verdict_set = true;
            phase = S_AWAIT_USER_DECISION;
            if (!close) return {decision_frame()};
            return {decision_frame(z_rx ^ zprime)};
        }

        if (p.mode == Mode::QID_NOISY) {
            if (parts->size() != 1 || (*parts)[0].size() != p.ell)
                return fail(Reason::PROTOCOL_VIOLATION);
            z_rx = (*parts)[0];
            recovered = p.family->decode(j_rx, subvector(xprime, i_w), s_rx);
            if (!recovered) {
                decision = {false, Reason::DECODE_FAIL};
                verdict_set = true;
                done = true;
                return {decision_frame()};
            }
            BitVec zprime = fsrv.eval(*recovered);
            zprime ^= g->eval(keys.w);
            decision = z_rx == zprime ? Decision{true, Reason::OK}
                                      : Decision{false, Reason::Z_MISMATCH};
            verdict_set = true;
            done = true;
            return {decision_frame()};
        }

        // QIDPLUS / QKD
        if (parts->size() != 3) return fail(Reason::PROTOCOL_VIOLATION);
        test_rx = (*parts)[0];
        z_rx = (*parts)[1];
        tag_rx = (*parts)[2];
        if (test_rx.size() != p.ell || z_rx.size() != p.ell || tag_rx.size() != p.ell)
            return fail(Reason::PROTOCOL_VIOLATION);

        // recover x|_Iw: wrong-basis test positions come from test, the rest
        // is syndrome-decoded
        BitVec y = subvector(xprime, i_w);
        BasisString theta_bases = bases_from_bits(theta_bits_rx);
        for (size_t k = 0, ti = 0; k < i_w.size(); ++k) {
            size_t i = i_w[k];
            while (ti < T.size() && T[ti] < i) ++ti;
            if (ti < T.size() && T[ti] == i && c[i] != theta_bases[i])
                y.set(k, test_rx.get(ti));
        }
        recovered = p.family->decode(j_rx, y, s_rx);
        if (!recovered) {
            decision = {false, Reason::DECODE_FAIL};
            verdict_set = true;
            done = true;
            return {decision_frame()};
        }

        // (1) the tag covers everything announced plus the recovered string
        BitVec t_map(p.n);
        for (size_t i : T) t_map.set(i, true);
        BitVec gkey = g->key_a().bits();
        gkey.append(g->mask_b());
        std::optional<BitVec> ekey;
        if (p.mode == Mode::QKD) ekey = e_key_rx;
        BitVec msg = mac_msg(theta_bits_rx, j_rx, s_rx, f_key_rx, ekey, gkey, t_map, test_rx,
                             z_rx, *recovered);
        if (!mac_verify(mac_key(), msg, tag_rx)) {
            decision = {false, Reason::MAC_FAIL};
            verdict_set = true;
            done = true;
            return {decision_frame()};
        }

        // (2) test vs test' wherever the bases coincide
        size_t compared = 0, mismatches = 0;
        for (size_t ti = 0; ti < T.size(); ++ti) {
            size_t i = T[ti];
            if (c[i] == theta_bases[i]) {
                ++compared;
                if (test_rx.get(ti) != testprime.get(ti)) ++mismatches;
            }
        }
        bool test_ok;
        if (p.channel.phi == 0.0) test_ok = mismatches == 0;
        else test_ok = compared == 0 ||
                       double(mismatches) <= 0.5 * p.delta_tolerance * double(compared) + 1e-9;
        if (!test_ok) {
            decision = {false, Reason::TEST_MISMATCH};
            verdict_set = true;
            done = true;
            return {decision_frame()};
        }

        // (3) z against the recovered string
        BitVec zprime = fsrv.eval(*recovered);
        zprime ^= g->eval(keys.w);
        if (z_rx != zprime) {
            decision = {false, Reason::Z_MISMATCH};
            verdict_set = true;
            done = true;
            return {decision_frame()};
        }

        decision = {true, Reason::OK};

        verdict_set = true;
        done = true;
        if (p.mode == Mode::QKD) {
            UhfF esrv(FieldElement::from_bits(p.f_field(), e_key_rx), p.sk_len);
            BitVec full = esrv.eval(*recovered);
            size_t pb = p.password_bits();
            BitVec cipher = full.slice(0, pb) ^ BitVec::from_u64(uint64_t(keys.w - 1), pb);
            sk = full.slice(pb, p.sk_len - pb);
            return {decision_frame(), make_parts_frame(FrameType::OTP_W, {cipher})};
        }
        return {decision_frame()};
    }

    std::vector<Frame> server_handle_user_decision(const Frame& fr) {
        if (fr.type != FrameType::DECISION) return fail(Reason::PROTOCOL_VIOLATION);
        done = true; // mutual mode: own verdict already fixed
        return {};
    }
};

} // namespace detail

// ---------------------------------------------------------------------------

UserSession::UserSession(SessionParams params, KeyMaterial keys, uint64_t session_seed)
    : s_(std::make_unique<detail::SessionCommon>(std::move(params), std::move(keys), session_seed,
                                                 true)) {}
UserSession::~UserSession() = default;
UserSession::UserSession(UserSession&&) noexcept = default;

std::vector<Frame> UserSession::start() {
    if (s_->phase != detail::SessionCommon::U_START)
        throw std::logic_error("UserSession::start called twice");
    return s_->user_start();
}
std::vector<Frame> UserSession::on_frame(const Frame& f) { return s_->user_on_frame(f); }
void UserSession::abort_session() { s_->abort_now(); }
bool UserSession::finished() const { return s_->done; }
Decision UserSession::decision() const { return s_->decision; }
std::optional<BitVec> UserSession::session_key() const { return s_->sk; }
const BitVec& UserSession::x() const { return s_->x; }
BitVec UserSession::theta_bits() const { return bases_to_bits(s_->theta); }
const std::vector<size_t>& UserSession::index_set() const { return s_->i_w; }
BitVec UserSession::f_key_bits() const { return s_->f ? s_->f->key_bits() : BitVec(); }
BitVec UserSession::z_sent() const { return s_->z_sent; }
BitVec UserSession::mutual_flips() const { return s_->true_flips; }
const std::vector<ChannelEvent>& UserSession::channel_log() const { return s_->channel.log(); }

ServerSession::ServerSession(SessionParams params, KeyMaterial keys, uint64_t session_seed)
    : s_(std::make_unique<detail::SessionCommon>(std::move(params), std::move(keys), session_seed,
                                                 false)) {}
ServerSession::~ServerSession() = default;
ServerSession::ServerSession(ServerSession&&) noexcept = default;

std::vector<Frame> ServerSession::on_frame(const Frame& f) { return s_->server_on_frame(f); }
void ServerSession::abort_session() { s_->abort_now(); }
bool ServerSession::finished() const { return s_->done; }
Decision ServerSession::decision() const { return s_->decision; }
std::optional<BitVec> ServerSession::session_key() const { return s_->sk; }
const BitVec& ServerSession::outcome() const { return s_->xprime; }
BitVec ServerSession::measurement_bases_bits() const { return bases_to_bits(s_->c); }
const std::vector<size_t>& ServerSession::test_set() const { return s_->T; }
BitVec ServerSession::g_key_bits() const {
    if (!s_->g) return BitVec();
    BitVec out = s_->g->key_a().bits();
    out.append(s_->g->mask_b());
    return out;
}
std::optional<BitVec> ServerSession::recovered_substring() const { return s_->recovered; }
const std::vector<ChannelEvent>& ServerSession::channel_log() const { return s_->channel.log(); }

SessionResult run_session(const SessionParams& params, const KeyMaterial& user_keys,
                          const KeyMaterial& server_keys, uint64_t session_seed,
                          const WireHook& hook) {
    UserSession user(params, user_keys, session_seed);
    ServerSession server(params, server_keys, session_seed);
    SessionResult res;

    std::vector<std::pair<bool, Frame>> queue; // (user_to_server, frame)
    for (Frame& f : user.start()) queue.emplace_back(true, std::move(f));

    size_t guard = 0;
    while (!queue.empty()) {
        if (++guard > 64) break; // a session exchanges a handful of frames
        auto [u2s, frame] = std::move(queue.front());
        queue.erase(queue.begin());

        std::vector<Frame> delivered;
        if (hook) delivered = hook(u2s, frame);
        else delivered = {frame};

        for (Frame& d : delivered) {
            res.transcript.record(u2s, d);
            std::vector<Frame> replies = u2s ? server.on_frame(d) : user.on_frame(d);
            for (Frame& r : replies) queue.emplace_back(!u2s, std::move(r));
        }
    }
    if (!user.finished()) user.abort_session();
    if (!server.finished()) server.abort_session();

    res.server_decision = server.decision();
    res.user_decision = user.decision();
    res.sk_user = user.session_key();
    res.sk_server = server.session_key();
    res.x = user.x();
    res.theta_bits = user.theta_bits();
    res.f_key_bits = user.f_key_bits();
    res.g_key_bits = server.g_key_bits();
    res.server_outcome = server.outcome();
    res.server_c_bits = server.measurement_bases_bits();
    res.index_set = user.index_set();
    res.test_set = server.test_set();
    res.z_sent = user.z_sent();
    res.user_channel_log = user.channel_log();
    res.server_channel_log = server.channel_log();
    return res;
}

} // namespace qid
