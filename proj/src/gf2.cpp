#include "qid/gf2.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <stdexcept>

namespace qid {
namespace detail {

std::vector<unsigned> prime_divisors(unsigned n) {
    std::vector<unsigned> out;
    for (unsigned p = 2; p * p <= n; ++p) {
        if (n % p == 0) {
            out.push_back(p);
            while (n % p == 0) n /= p;
        }
    }
    if (n > 1) out.push_back(n);
    return out;
}

inline uint64_t spread_half(uint32_t x) {
    // interleave a zero bit above each input bit
    uint64_t v = x;
    v = (v | (v << 16)) & 0x0000FFFF0000FFFFull;
    v = (v | (v << 8)) & 0x00FF00FF00FF00FFull;
    v = (v | (v << 4)) & 0x0F0F0F0F0F0F0F0Full;
    v = (v | (v << 2)) & 0x3333333333333333ull;
    v = (v | (v << 1)) & 0x5555555555555555ull;
    return v;
}

// Squares an N-bit value modulo x^N + low(x). Uses a two-round tap fold when
// every low exponent is <= N/2, plain polynomial division otherwise (only
// small degrees take that path).
std::vector<uint64_t> square_mod_limbs(const std::vector<uint64_t>& v, unsigned N,
                                       const std::vector<uint64_t>& low,
                                       const std::vector<unsigned>& taps, bool foldable) {
    size_t L = (N + 63) / 64;
    size_t wideL = 2 * L + 1;
    std::vector<uint64_t> wide(wideL, 0);
    for (size_t i = 0; i < L; ++i) {
        wide[2 * i] = spread_half(uint32_t(v[i] & 0xFFFFFFFFull));
        wide[2 * i + 1] = spread_half(uint32_t(v[i] >> 32));
    }

    if (foldable) {
        unsigned limb_shift = N / 64, bit_shift = N % 64;
        std::vector<uint64_t> hi(wideL, 0);
        for (int round = 0; round < 2; ++round) {
            bool any = false;
            for (size_t i = 0; i < wideL; ++i) {
                uint64_t w = 0;
                if (i + limb_shift < wideL) {
                    w = wide[i + limb_shift] >> bit_shift;
                    if (bit_shift && i + limb_shift + 1 < wideL)
                        w |= wide[i + limb_shift + 1] << (64 - bit_shift);
                }
                hi[i] = w;
                if (w) any = true;
            }
            if (!any) break;
            // clear everything at and above bit N
            for (size_t i = limb_shift + 1; i < wideL; ++i) wide[i] = 0;
            if (bit_shift) wide[limb_shift] &= (~0ull) >> (64 - bit_shift);
            else wide[limb_shift] = 0;
            for (unsigned t : taps) {
                unsigned ls = t / 64, bs = t % 64;
                for (size_t i = wideL; i-- > 0;) {
                    if (!hi[i] || i + ls >= wideL) continue;
                    wide[i + ls] ^= hi[i] << bs;
                    if (bs && i + ls + 1 < wideL) wide[i + ls + 1] ^= hi[i] >> (64 - bs);
                }
            }
        }
        std::vector<uint64_t> out(wide.begin(), wide.begin() + long(L));
        if (N % 64) out.back() &= (~0ull) >> (64 - N % 64);
        return out;
    }

    std::vector<uint64_t> m(N / 64 + 1, 0);
    for (size_t i = 0; i < low.size() && i < m.size(); ++i) m[i] ^= low[i];
    m[N / 64] |= 1ull << (N % 64);
    auto r = gf2poly::mod(std::move(wide), m);
    r.resize(L, 0);
    return r;
}

} // namespace detail

namespace gf2poly {

int degree(const std::vector<uint64_t>& p) {
    for (size_t i = p.size(); i-- > 0;) {
        if (p[i]) return int(i * 64 + 63 - unsigned(__builtin_clzll(p[i])));
    }
    return -1;
}

std::vector<uint64_t> shift_left(const std::vector<uint64_t>& p, unsigned k) {
    int d = degree(p);
    if (d < 0) return {0};
    size_t out_limbs = size_t(d + int(k)) / 64 + 1;
    std::vector<uint64_t> out(out_limbs, 0);
    unsigned limb_shift = k / 64, bit_shift = k % 64;
    for (size_t i = 0; i < p.size(); ++i) {
        if (!p[i]) continue;
        out[i + limb_shift] ^= p[i] << bit_shift;
        if (bit_shift && i + limb_shift + 1 < out_limbs)
            out[i + limb_shift + 1] ^= p[i] >> (64 - bit_shift);
    }
    return out;
}

void xor_into(std::vector<uint64_t>& a, const std::vector<uint64_t>& b) {
    if (a.size() < b.size()) a.resize(b.size(), 0);
    for (size_t i = 0; i < b.size(); ++i) a[i] ^= b[i];
}

std::vector<uint64_t> mod(std::vector<uint64_t> a, const std::vector<uint64_t>& m) {
    int dm = degree(m);
    if (dm < 0) throw std::invalid_argument("gf2poly::mod: zero modulus");
    int da = degree(a);
    while (da >= dm) {
        xor_into(a, shift_left(m, unsigned(da - dm)));
        da = degree(a);
    }
    a.resize(size_t(std::max(dm, 1) - 1) / 64 + 1, 0);
    return a;
}

std::vector<uint64_t> gcd(std::vector<uint64_t> a, std::vector<uint64_t> b) {
    while (degree(b) >= 0) {
        auto r = mod(a, b);
        a = std::move(b);
        b = std::move(r);
    }
    return a;
}

bool is_one(const std::vector<uint64_t>& p) {
    if (p.empty() || p[0] != 1) return false;
    for (size_t i = 1; i < p.size(); ++i)
        if (p[i]) return false;
    return true;
}

bool is_irreducible_limbs(unsigned N, const std::vector<uint64_t>& low) {
    if (N == 0) return false;
    if (N == 1) return true;
    if (low.empty() || !(low[0] & 1)) return false; // divisible by x

    int dr = degree(low);
    if (dr >= int(N)) return false;
    std::vector<unsigned> taps;
    for (unsigned j = 0; j <= unsigned(std::max(dr, 0)); ++j)
        if ((low[j / 64] >> (j % 64)) & 1) taps.push_back(j);
    bool foldable = unsigned(dr) <= N / 2 && taps.size() <= 8;

    size_t L = (N + 63) / 64;
    std::vector<uint64_t> lowL = low;
    lowL.resize(L, 0);
    std::vector<uint64_t> m(N / 64 + 1, 0);
    for (size_t i = 0; i < low.size() && i < m.size(); ++i) m[i] ^= low[i];
    m[N / 64] |= 1ull << (N % 64);

    std::vector<uint64_t> x(L, 0);
    x[0] = 2;

    // Rabin: irreducible iff x^(2^N) = x mod f and, for each prime p | N,
    // gcd(x^(2^(N/p)) - x, f) = 1.
    std::vector<unsigned> targets;
    for (unsigned p : detail::prime_divisors(N)) targets.push_back(N / p);
    std::sort(targets.begin(), targets.end());

    unsigned done = 0;
    std::vector<uint64_t> cur = x;
    for (unsigned t : targets) {
        for (unsigned i = done; i < t; ++i)
            cur = detail::square_mod_limbs(cur, N, lowL, taps, foldable);
        done = t;
        auto diff = cur;
        xor_into(diff, x);
        auto g = gcd(m, diff);
        if (!is_one(g)) return false;
    }
    for (unsigned i = done; i < N; ++i)
        cur = detail::square_mod_limbs(cur, N, lowL, taps, foldable);
    return cur == x;
}

bool is_irreducible(const std::vector<uint64_t>& modulus_poly) {
    int dN = degree(modulus_poly);
    if (dN < 1) return false;
    unsigned N = unsigned(dN);
    std::vector<uint64_t> low = modulus_poly;
    low[N / 64] &= ~(1ull << (N % 64));
    low.resize((N + 63) / 64, 0);
    if (low.empty()) low.push_back(0);
    return is_irreducible_limbs(N, low);
}

} // namespace gf2poly

namespace {

// Tabulated sparse moduli for degrees above 64 that sessions commonly use:
// the smallest irreducible trinomial x^N + x^k + 1 with k <= N/2, else the
// smallest such pentanomial, matching the deterministic search order below.
// Re-verified by Rabin's test on first use.
struct SparseEntry {
    unsigned degree;
    unsigned taps[3];
    unsigned ntaps;
};

constexpr SparseEntry kSparseTable[] = {
    {96, {10, 9, 6}, 3},    {127, {1, 0, 0}, 1},     {128, {7, 2, 1}, 3},
    {192, {7, 2, 1}, 3},    {256, {10, 5, 2}, 3},    {320, {4, 3, 1}, 3},
    {384, {12, 3, 2}, 3},   {512, {8, 5, 2}, 3},     {768, {19, 17, 4}, 3},
    {1024, {19, 6, 1}, 3},  {1536, {21, 6, 2}, 3},   {2048, {19, 14, 13}, 3},
    {3072, {11, 10, 5}, 3}, {4096, {27, 15, 1}, 3},  {6144, {26, 7, 1}, 3},
    {8192, {9, 5, 2}, 3},   {12288, {25, 9, 7}, 3},  {16384, {43, 13, 6}, 3},
};

std::vector<uint64_t> low_from_taps(std::initializer_list<unsigned> taps) {
    unsigned max_tap = *taps.begin();
    std::vector<uint64_t> low(max_tap / 64 + 1, 0);
    low[0] |= 1;
    for (unsigned t : taps) low[t / 64] |= 1ull << (t % 64);
    return low;
}

} // namespace

FieldSpec::FieldSpec(unsigned degree, std::vector<uint64_t> reduction_limbs)
    : degree_(degree), reduction_(std::move(reduction_limbs)) {
    if (degree_ == 0) throw std::invalid_argument("FieldSpec: degree must be positive");
    int dr = gf2poly::degree(reduction_);
    if (dr >= int(degree_)) throw std::invalid_argument("FieldSpec: reduction degree too high");
    if (!gf2poly::is_irreducible_limbs(degree_, reduction_.empty()
                                                    ? std::vector<uint64_t>{0}
                                                    : reduction_))
        throw std::invalid_argument("FieldSpec: modulus is reducible");
    reduction_.resize(limbs(), 0);
    for (unsigned j = 0; j <= unsigned(std::max(dr, 0)); ++j)
        if ((reduction_[j / 64] >> (j % 64)) & 1) taps_.push_back(j);
    sparse_foldable_ = dr >= 0 && unsigned(dr) <= degree_ / 2 && taps_.size() <= 8;
}

FieldSpec::FieldSpec(unsigned degree, uint64_t reduction_low)
    : FieldSpec(degree, std::vector<uint64_t>{reduction_low}) {}

std::vector<uint64_t> FieldSpec::modulus_poly() const {
    std::vector<uint64_t> m(degree_ / 64 + 1, 0);
    for (size_t i = 0; i < reduction_.size() && i < m.size(); ++i) m[i] ^= reduction_[i];
    m[degree_ / 64] |= 1ull << (degree_ % 64);
    return m;
}

std::shared_ptr<const FieldSpec> FieldSpec::standard(unsigned degree) {
    static std::mutex mu;
    static std::map<unsigned, std::shared_ptr<const FieldSpec>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(degree);
    if (it != cache.end()) return it->second;

    std::shared_ptr<const FieldSpec> spec;
    if (degree <= 64) {
        // lexicographically smallest irreducible modulus: smallest low part
        // as an integer; the constant term must be 1, so odd candidates only
        for (uint64_t low = 1;; low += 2) {
            if (degree < 64 && (low >> degree))
                throw std::logic_error("FieldSpec: no irreducible modulus found");
            if (gf2poly::is_irreducible_limbs(degree, {low})) {
                spec = std::make_shared<FieldSpec>(degree, low);
                break;
            }
        }
    } else {
        for (const SparseEntry& e : kSparseTable) {
            if (e.degree == degree && e.ntaps > 0) {
                std::vector<uint64_t> low(e.taps[0] / 64 + 1, 0);
                low[0] |= 1;
                for (unsigned i = 0; i < e.ntaps; ++i)
                    low[e.taps[i] / 64] |= 1ull << (e.taps[i] % 64);
                spec = std::make_shared<FieldSpec>(degree, std::move(low));
                break;
            }
        }
        if (!spec) {
            // smallest trinomial x^N + x^k + 1 with k <= N/2, then smallest
            // pentanomial with all taps <= N/2; deterministic order
            for (unsigned k = 1; !spec && k <= degree / 2; ++k) {
                if (gf2poly::is_irreducible_limbs(degree, low_from_taps({k})))
                    spec = std::make_shared<FieldSpec>(degree, low_from_taps({k}));
            }
            for (unsigned a = 3; !spec && a <= degree / 2; ++a)
                for (unsigned b = 2; !spec && b < a; ++b)
                    for (unsigned c = 1; !spec && c < b; ++c)
                        if (gf2poly::is_irreducible_limbs(degree, low_from_taps({a, b, c})))
                            spec = std::make_shared<FieldSpec>(degree, low_from_taps({a, b, c}));
            if (!spec) throw std::runtime_error("FieldSpec: no sparse modulus found for degree");
        }
    }
    cache[degree] = spec;
    return spec;
}

unsigned standard_degree_at_least(size_t bits) {
    if (bits == 0) bits = 1;
    if (bits <= 64) return unsigned(bits);
    for (const SparseEntry& e : kSparseTable)
        if (e.ntaps > 0 && e.degree >= bits) return e.degree;
    throw std::invalid_argument("standard_degree_at_least: beyond the tabulated ladder");
}

// ---------------------------------------------------------------------------

FieldElement FieldElement::zero(std::shared_ptr<const FieldSpec> spec) {
    FieldElement e;
    e.spec_ = std::move(spec);
    e.v_.assign(e.spec_->limbs(), 0);
    return e;
}

FieldElement FieldElement::one(std::shared_ptr<const FieldSpec> spec) {
    FieldElement e = zero(std::move(spec));
    e.v_[0] = 1;
    return e;
}

FieldElement FieldElement::from_bits(std::shared_ptr<const FieldSpec> spec, const BitVec& bits) {
    if (bits.size() != spec->degree())
        throw std::invalid_argument("FieldElement::from_bits: length must equal degree");
    unsigned N = spec->degree();
    FieldElement e = zero(std::move(spec));
    for (size_t i = 0; i < bits.size(); ++i) {
        if (bits.get(i)) {
            unsigned j = N - 1 - unsigned(i);
            e.v_[j / 64] |= 1ull << (j % 64);
        }
    }
    return e;
}

FieldElement FieldElement::embed(std::shared_ptr<const FieldSpec> spec, const BitVec& bits) {
    if (bits.size() > spec->degree())
        throw std::invalid_argument("FieldElement::embed: input longer than degree");
    unsigned N = spec->degree();
    return from_bits(std::move(spec), bits.padded_to(N));
}

FieldElement FieldElement::from_value(std::shared_ptr<const FieldSpec> spec, uint64_t value) {
    if (spec->degree() < 64 && (value >> spec->degree()))
        throw std::invalid_argument("FieldElement::from_value: value out of range");
    FieldElement e = zero(std::move(spec));
    e.v_[0] = value;
    return e;
}

bool FieldElement::is_zero() const {
    for (uint64_t w : v_)
        if (w) return false;
    return true;
}

uint64_t FieldElement::value_u64() const {
    if (spec_->degree() > 64) throw std::invalid_argument("FieldElement::value_u64: degree > 64");
    return v_[0];
}

BitVec FieldElement::bits() const {
    unsigned N = spec_->degree();
    BitVec out(N);
    for (unsigned i = 0; i < N; ++i) {
        unsigned j = N - 1 - i;
        if ((v_[j / 64] >> (j % 64)) & 1) out.set(i, true);
    }
    return out;
}

BitVec FieldElement::truncate_msb(size_t l) const {
    BitVec all = bits();
    if (l <= all.size()) return all.slice(0, l);
    return all.padded_to(l);
}

void FieldElement::check_same_spec(const FieldElement& o) const {
    if (!spec_ || !o.spec_ || !(*spec_ == *o.spec_))
        throw std::invalid_argument("FieldElement: mismatched field specs");
}

FieldElement FieldElement::operator+(const FieldElement& o) const {
    check_same_spec(o);
    FieldElement r = *this;
    for (size_t i = 0; i < v_.size(); ++i) r.v_[i] ^= o.v_[i];
    return r;
}

namespace {

// multiply by x with reduction, in place
inline void xtime(std::vector<uint64_t>& v, const FieldSpec& spec) {
    unsigned N = spec.degree();
    unsigned top_limb = (N - 1) / 64, top_bit = (N - 1) % 64;
    bool carry_out = (v[top_limb] >> top_bit) & 1;
    v[top_limb] &= ~(1ull << top_bit);
    uint64_t carry = 0;
    for (size_t i = 0; i < v.size(); ++i) {
        uint64_t nc = v[i] >> 63;
        v[i] = (v[i] << 1) | carry;
        carry = nc;
    }
    if (carry_out) {
        const auto& red = spec.reduction();
        for (size_t i = 0; i < red.size(); ++i) v[i] ^= red[i];
    }
}

} // namespace

FieldElement FieldElement::operator*(const FieldElement& o) const {
    check_same_spec(o);
    unsigned N = spec_->degree();
    FieldElement acc = zero(spec_);
    std::vector<uint64_t> cur = v_;
    for (unsigned j = 0; j < N; ++j) {
        if ((o.v_[j / 64] >> (j % 64)) & 1)
            for (size_t i = 0; i < cur.size(); ++i) acc.v_[i] ^= cur[i];
        if (j + 1 < N) xtime(cur, *spec_);
    }
    return acc;
}

FieldElement FieldElement::squared() const {
    FieldElement r = zero(spec_);
    r.v_ = detail::square_mod_limbs(v_, spec_->degree(), spec_->reduction(), spec_->taps(),
                                    spec_->sparse_foldable());
    return r;
}

FieldElement FieldElement::pow2k(unsigned k) const {
    FieldElement r = *this;
    for (unsigned i = 0; i < k; ++i) r = r.squared();
    return r;
}

FieldElement FieldElement::inverse() const {
    if (is_zero()) throw std::invalid_argument("FieldElement::inverse: zero has no inverse");
    unsigned N = spec_->degree();
    // a^(2^N - 2) = prod_{i=1}^{N-1} a^(2^i)
    FieldElement result = one(spec_);
    FieldElement cur = *this;
    for (unsigned i = 1; i < N; ++i) {
        cur = cur.squared();
        result = result * cur;
    }
    return result;
}

bool FieldElement::operator==(const FieldElement& o) const {
    if (!spec_ || !o.spec_) return spec_ == o.spec_;
    return *spec_ == *o.spec_ && v_ == o.v_;
}

} // namespace qid
