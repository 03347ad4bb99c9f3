#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <map>
#include <vector>

#include "qid/bits.hpp"
#include "qid/gf2.hpp"
#include "qid/mac.hpp"
#include "qid/rng.hpp"
#include "qid/serial.hpp"
#include "qid/uhf.hpp"

using namespace qid;

namespace {

// slow reference product: schoolbook carry-less multiply, then long division
// by the modulus; shares nothing with the xtime path under test
FieldElement slow_mul(const FieldElement& a, const FieldElement& b) {
    unsigned N = a.spec().degree();
    std::vector<uint64_t> wide(2 * ((N + 63) / 64) + 1, 0);
    BitVec ab = a.bits(), bb = b.bits();
    for (unsigned i = 0; i < N; ++i) {
        if (!ab.get(N - 1 - i)) continue; // coefficient of x^i
        for (unsigned j = 0; j < N; ++j) {
            if (!bb.get(N - 1 - j)) continue;
            wide[(i + j) / 64] ^= 1ull << ((i + j) % 64);
        }
    }
    auto rem = gf2poly::mod(std::move(wide), a.spec().modulus_poly());
    rem.resize((N + 63) / 64, 0);
    BitVec out(N);
    for (unsigned i = 0; i < N; ++i)
        if ((rem[(N - 1 - i) / 64] >> ((N - 1 - i) % 64)) & 1) out.set(i, true);
    return FieldElement::from_bits(a.spec_ptr(), out);
}

} // namespace

TEST_CASE("BitVec basics") {
    BitVec v = BitVec::from_string("10110");
    CHECK(v.size() == 5);
    CHECK(v.get(0));
    CHECK(!v.get(1));
    CHECK(v.weight() == 3);
    CHECK(v.to_u64() == 0b10110u);
    CHECK(v.str() == "10110");
    CHECK(BitVec::from_u64(0b10110, 5) == v);

    BitVec w = v;
    w.flip(4);
    CHECK(v.hamming(w) == 1);

    CHECK(v.slice(1, 3) == BitVec::from_string("011"));
    BitVec p = v.padded_to(8);
    CHECK(p.str() == "10110000");

    auto packed = p.packed();
    CHECK(packed.size() == 1);
    CHECK(BitVec::from_packed(packed, 8) == p);
}

TEST_CASE("SplitRng determinism and child independence") {
    SplitRng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
    SplitRng c = SplitRng(42).child(7);
    SplitRng d = SplitRng(42).child(7);
    CHECK(c.next() == d.next());
    CHECK(SplitRng(42).child(7).next() != SplitRng(42).child(8).next());

    // below() stays in range and covers the range
    SplitRng r(1);
    std::array<int, 5> seen{};
    for (int i = 0; i < 500; ++i) seen[r.below(5)]++;
    for (int count : seen) CHECK(count > 50);
}

TEST_CASE("standard moduli are lexicographically smallest") {
    CHECK(FieldSpec::standard(3)->reduction()[0] == 0b011);
    CHECK(FieldSpec::standard(4)->reduction()[0] == 0b0011);
    CHECK(FieldSpec::standard(8)->reduction()[0] == 0x1B);
    for (unsigned deg : {2u, 3u, 4u, 5u, 8u, 12u, 16u}) {
        auto spec = FieldSpec::standard(deg);
        uint64_t low = spec->reduction()[0];
        CHECK(gf2poly::is_irreducible(spec->modulus_poly()));
        for (uint64_t cand = 1; cand < low; cand += 2)
            CHECK(!gf2poly::is_irreducible_limbs(deg, {cand}));
    }
}

TEST_CASE("reducible modulus is rejected") {
    CHECK_THROWS_AS(FieldSpec(4, uint64_t(0b0001)), std::invalid_argument); // x^4+1
    CHECK_THROWS_AS(FieldSpec(3, uint64_t(0b010)), std::invalid_argument);  // even constant term
}

TEST_CASE("gf_mul worked example in GF(2^3)") {
    auto spec = FieldSpec::standard(3); // x^3 + x + 1
    auto x = FieldElement::from_bits(spec, BitVec::from_string("010"));
    auto x2 = FieldElement::from_bits(spec, BitVec::from_string("100"));
    CHECK(gf_mul(x, x2).bits().str() == "011"); // x * x^2 = x^3 = x + 1
}

TEST_CASE("multiplicative identity and absorbing zero, all of GF(2^3)") {
    auto spec = FieldSpec::standard(3);
    auto one = FieldElement::one(spec);
    auto zero = FieldElement::zero(spec);
    for (uint64_t v = 0; v < 8; ++v) {
        auto a = FieldElement::from_value(spec, v);
        CHECK(gf_mul(a, one) == a);
        CHECK(gf_mul(zero, a) == zero);
    }
}

TEST_CASE("mismatched specs rejected") {
    auto a = FieldElement::one(FieldSpec::standard(3));
    auto b = FieldElement::one(FieldSpec::standard(4));
    CHECK_THROWS_AS(gf_mul(a, b), std::invalid_argument);
}

TEST_CASE("field axioms exhaustively for degree <= 8") {
    for (unsigned deg : {2u, 3u, 4u, 6u, 8u}) {
        auto spec = FieldSpec::standard(deg);
        size_t q = size_t(1) << deg;
        std::vector<std::vector<uint16_t>> mul(q, std::vector<uint16_t>(q));
        for (size_t a = 0; a < q; ++a)
            for (size_t b = a; b < q; ++b) {
                auto prod = FieldElement::from_value(spec, a) * FieldElement::from_value(spec, b);
                mul[a][b] = mul[b][a] = uint16_t(prod.value_u64()); // commutativity built in
            }
        // spot-check commutativity against direct evaluation
        for (size_t a = 0; a < q; a += 3)
            for (size_t b = 0; b < q; b += 5) {
                auto ab = FieldElement::from_value(spec, a) * FieldElement::from_value(spec, b);
                auto ba = FieldElement::from_value(spec, b) * FieldElement::from_value(spec, a);
                REQUIRE(ab == ba);
            }
        size_t assoc_bad = 0, dist_bad = 0;
        for (size_t a = 0; a < q; ++a)
            for (size_t b = 0; b < q; ++b)
                for (size_t c = 0; c < q; ++c) {
                    if (mul[mul[a][b]][c] != mul[a][mul[b][c]]) ++assoc_bad;
                    if (mul[a][b ^ c] != (mul[a][b] ^ mul[a][c])) ++dist_bad;
                }
        REQUIRE(assoc_bad == 0);
        REQUIRE(dist_bad == 0);
        // unique inverses for nonzero elements
        for (size_t a = 1; a < q; ++a) {
            size_t inv_count = 0;
            for (size_t b = 1; b < q; ++b)
                if (mul[a][b] == 1) ++inv_count;
            REQUIRE(inv_count == 1);
            auto inv = FieldElement::from_value(spec, a).inverse();
            REQUIRE(mul[a][inv.value_u64()] == 1);
        }
    }
}

TEST_CASE("fast multiply matches slow polynomial reference") {
    for (unsigned deg : {3u, 4u, 7u}) {
        auto spec = FieldSpec::standard(deg);
        size_t q = size_t(1) << deg;
        for (size_t a = 0; a < q; ++a)
            for (size_t b = 0; b < q; ++b) {
                auto fa = FieldElement::from_value(spec, a);
                auto fb = FieldElement::from_value(spec, b);
                REQUIRE(fa * fb == slow_mul(fa, fb));
            }
    }
    // wide field: random pairs against the reference, plus squaring
    auto spec = FieldSpec::standard(192);
    SplitRng rng(11);
    for (int i = 0; i < 20; ++i) {
        auto a = FieldElement::from_bits(spec, rng.bits(192));
        auto b = FieldElement::from_bits(spec, rng.bits(192));
        REQUIRE(a * b == slow_mul(a, b));
        REQUIRE(a.squared() == slow_mul(a, a));
    }
    auto a = FieldElement::from_bits(spec, rng.bits(192));
    REQUIRE((a * a.inverse()) == FieldElement::one(spec));
}

TEST_CASE("tabulated wide moduli verify") {
    for (unsigned deg : {96u, 127u, 128u, 512u, 1024u}) {
        auto spec = FieldSpec::standard(deg);
        CHECK(spec->degree() == deg);
        CHECK(spec->sparse_foldable());
    }
}

TEST_CASE("uhf_f zero key and padding convention") {
    auto spec = FieldSpec::standard(8);
    UhfF f0(FieldElement::zero(spec), 3);
    CHECK(f0.eval(BitVec::from_string("10110101")) == BitVec(3));
    CHECK(f0.eval(BitVec::from_string("1")) == BitVec(3));

    SplitRng rng(5);
    UhfF f = UhfF::random(spec, 3, rng);
    CHECK(f.eval(BitVec::from_string("101")) == f.eval(BitVec::from_string("10100")));
    CHECK(f.eval(BitVec::from_string("101")) == f.eval(BitVec::from_string("10100000")));
    CHECK_THROWS_AS(f.eval(BitVec(9)), std::invalid_argument);
}

TEST_CASE("uhf_f universal-2 audit over GF(2^4), l = 2") {
    auto spec = FieldSpec::standard(4);
    double worst = 0;
    for (uint64_t y = 0; y < 16; ++y)
        for (uint64_t yp = y + 1; yp < 16; ++yp) {
            int collisions = 0;
            for (uint64_t a = 0; a < 16; ++a) {
                UhfF f(FieldElement::from_value(spec, a), 2);
                if (f.eval(BitVec::from_u64(y, 4)) == f.eval(BitVec::from_u64(yp, 4)))
                    ++collisions;
            }
            worst = std::max(worst, collisions / 16.0);
        }
    CHECK(worst <= 0.25);
}

TEST_CASE("uhf_g additive mask and determinism") {
    auto spec = FieldSpec::standard(2);
    SplitRng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        BitVec b = rng.bits(2);
        UhfG g(FieldElement::zero(spec), b, 4);
        for (size_t w = 1; w <= 4; ++w) {
            CHECK(g.eval(w) == b);
            CHECK(g.eval(w) == g.eval(w)); // determinism
        }
    }
    UhfG g = UhfG::random(4, 2, rng);
    CHECK_THROWS_AS(g.eval(0), std::invalid_argument);
    CHECK_THROWS_AS(g.eval(5), std::invalid_argument);
}

TEST_CASE("uhf_g strongly universal-2, exhaustive over the key space") {
    struct Cfg { size_t m, l; };
    for (Cfg cfg : {Cfg{4, 2}, Cfg{8, 4}, Cfg{5, 3}, Cfg{2, 1}}) {
        size_t r = UhfG::required_degree(cfg.m, cfg.l);
        auto spec = FieldSpec::standard(unsigned(r));
        size_t key_count = (size_t(1) << r) * (size_t(1) << cfg.l);
        for (size_t w = 1; w <= cfg.m; ++w)
            for (size_t wp = 1; wp <= cfg.m; ++wp) {
                if (w == wp) continue;
                std::map<std::pair<uint64_t, uint64_t>, size_t> joint;
                for (uint64_t a = 0; a < (uint64_t(1) << r); ++a)
                    for (uint64_t b = 0; b < (uint64_t(1) << cfg.l); ++b) {
                        UhfG g(FieldElement::from_value(spec, a), BitVec::from_u64(b, cfg.l),
                               cfg.m);
                        joint[{g.eval(w).to_u64(), g.eval(wp).to_u64()}]++;
                    }
                size_t expected = key_count >> (2 * cfg.l);
                REQUIRE(joint.size() == (size_t(1) << (2 * cfg.l)));
                for (auto& [pair, count] : joint) REQUIRE(count == expected);
            }
    }
}

TEST_CASE("mac_tag worked example in GF(2^3)") {
    auto spec = FieldSpec::standard(3);
    MacKey k(FieldElement::from_bits(spec, BitVec::from_string("010")),
             BitVec::from_string("10"));
    BitVec tag = mac_tag(k, BitVec::from_string("100"));
    CHECK(tag.str() == "11"); // [x * x^2]_2 = 01, xor 10
}

TEST_CASE("mac zero key, round trip, bit flips") {
    auto spec = FieldSpec::standard(8);
    SplitRng rng(9);
    BitVec beta = rng.bits(4);
    MacKey k0(FieldElement::zero(spec), beta);
    for (int i = 0; i < 10; ++i) CHECK(mac_tag(k0, rng.bits(8)) == beta);

    MacKey k = MacKey::random(spec, 4, rng);
    BitVec msg = rng.bits(8);
    BitVec tag = mac_tag(k, msg);
    CHECK(mac_verify(k, msg, tag));
    for (size_t i = 0; i < tag.size(); ++i) {
        BitVec bad = tag;
        bad.flip(i);
        CHECK(!mac_verify(k, msg, bad));
    }
    CHECK_THROWS_AS(mac_tag(k, BitVec(9)), std::invalid_argument);
}

TEST_CASE("mac forgery audit, exhaustive at N = 4, l = 2") {
    auto spec = FieldSpec::standard(4);
    const size_t q = 16, lq = 4;
    // tag table for all keys x messages
    std::vector<std::vector<uint64_t>> tag(q * lq, std::vector<uint64_t>(q));
    for (uint64_t a = 0; a < q; ++a)
        for (uint64_t b = 0; b < lq; ++b) {
            MacKey k(FieldElement::from_value(spec, a), BitVec::from_u64(b, 2));
            for (uint64_t m = 0; m < q; ++m)
                tag[a * lq + b][m] = mac_tag(k, BitVec::from_u64(m, 4)).to_u64();
        }
    double worst = 0;
    for (uint64_t m = 0; m < q; ++m)
        for (uint64_t t = 0; t < lq; ++t)
            for (uint64_t mp = 0; mp < q; ++mp) {
                if (mp == m) continue;
                for (uint64_t tp = 0; tp < lq; ++tp) {
                    size_t match_m = 0, match_both = 0;
                    for (size_t key = 0; key < q * lq; ++key) {
                        if (tag[key][m] == t) {
                            ++match_m;
                            if (tag[key][mp] == tp) ++match_both;
                        }
                    }
                    if (match_m > 0) worst = std::max(worst, double(match_both) / double(match_m));
                }
            }
    CHECK(worst <= 0.25); // substitution probability <= 2^-l

    // single message-bit flip with the old tag survives for at most
    // 2^(N-l) keys with nonzero alpha
    for (uint64_t m = 0; m < q; ++m)
        for (size_t bitpos = 0; bitpos < 4; ++bitpos) {
            uint64_t mp = m ^ (1ull << (3 - bitpos));
            size_t surviving = 0;
            for (uint64_t a = 1; a < q; ++a)
                for (uint64_t b = 0; b < lq; ++b)
                    if (tag[a * lq + b][m] == tag[a * lq + b][mp]) ++surviving;
            CHECK(surviving <= (q / 4) * lq); // 2^(N-l) alphas x all betas
        }
}

TEST_CASE("mac extractor distance, exact at t <= 10") {
    // X uniform on a t-bit domain; exact distance of (tag, key) from
    // (uniform, key). The beta mask permutes tags per key, so averaging the
    // per-alpha distance over alpha is the full key average.
    auto spec = FieldSpec::standard(10);
    for (size_t l : {1u, 2u, 4u}) {
        for (size_t t : {4u, 7u, 10u}) {
            double total = 0;
            for (uint64_t a = 0; a < 1024; ++a) {
                MacKey k(FieldElement::from_value(spec, a), BitVec(l));
                std::vector<double> hist(size_t(1) << l, 0.0);
                for (uint64_t x = 0; x < (uint64_t(1) << t); ++x)
                    hist[mac_tag(k, BitVec::from_u64(x, t)).to_u64()] += 1.0 / double(1ull << t);
                double tv = 0;
                for (double p : hist) tv += std::abs(p - 1.0 / double(size_t(1) << l));
                total += tv / 2.0;
            }
            double distance = total / 1024.0;
            double bound = 0.5 * std::pow(2.0, -0.5 * (double(t) - double(l)));
            CHECK(distance <= bound + 1e-12);
        }
    }
}

TEST_CASE("canonical serialization round trip and injectivity") {
    SplitRng rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        size_t nparts = 1 + rng.below(5);
        std::vector<BitVec> parts;
        for (size_t i = 0; i < nparts; ++i) parts.push_back(rng.bits(rng.below(40)));
        auto bytes = encode_parts(parts);
        auto back = decode_parts(bytes);
        REQUIRE(back.has_value());
        REQUIRE(back->size() == parts.size());
        for (size_t i = 0; i < nparts; ++i) REQUIRE((*back)[i] == parts[i]);
    }
    // distinct part lists map to distinct encodings
    auto e1 = encode_parts({BitVec::from_string("10"), BitVec::from_string("1")});
    auto e2 = encode_parts({BitVec::from_string("101")});
    auto e3 = encode_parts({BitVec::from_string("1"), BitVec::from_string("01")});
    CHECK(e1 != e2);
    CHECK(e1 != e3);
    CHECK(e2 != e3);
    // nonzero pad bits rejected
    auto bytes = encode_parts({BitVec::from_string("1")});
    bytes.back() |= 0x01;
    CHECK(!decode_parts(bytes).has_value());
    // truncation rejected
    bytes = encode_parts({BitVec::from_string("10101010101")});
    bytes.pop_back();
    CHECK(!decode_parts(bytes).has_value());
}

TEST_CASE("truncation pads beyond the field degree") {
    auto spec = FieldSpec::standard(3);
    auto a = FieldElement::from_bits(spec, BitVec::from_string("101"));
    CHECK(a.truncate_msb(2).str() == "10");
    CHECK(a.truncate_msb(5).str() == "10100");
}
