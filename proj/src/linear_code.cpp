#include "qid/linear_code.hpp"

#include <algorithm>
#include <array>
#include <sstream>
#include <stdexcept>

#include "qid/rng.hpp"

namespace qid {

namespace {

// Hamming(7,4) parity check with column i+1 in binary at position i, so a
// nonzero syndrome names the error position directly.
std::array<uint32_t, 7> ham_columns() {
    std::array<uint32_t, 7> cols{};
    for (uint32_t i = 0; i < 7; ++i) cols[i] = i + 1;
    return cols;
}

const std::array<uint8_t, 16>& ham_codewords() {
    static const std::array<uint8_t, 16> words = [] {
        std::array<uint8_t, 16> out{};
        auto cols = ham_columns();
        size_t cnt = 0;
        for (uint32_t v = 0; v < 128; ++v) {
            uint32_t s = 0;
            for (uint32_t i = 0; i < 7; ++i)
                if ((v >> i) & 1) s ^= cols[i];
            if (s == 0) out[cnt++] = uint8_t(v);
        }
        return out;
    }();
    return words;
}

size_t rank_gf2(std::vector<BitVec> rows) {
    size_t rank = 0;
    size_t n = rows.empty() ? 0 : rows[0].size();
    for (size_t col = 0; col < n && rank < rows.size(); ++col) {
        size_t pivot = rank;
        while (pivot < rows.size() && !rows[pivot].get(col)) ++pivot;
        if (pivot == rows.size()) continue;
        std::swap(rows[rank], rows[pivot]);
        for (size_t r = 0; r < rows.size(); ++r)
            if (r != rank && rows[r].get(col)) rows[r] ^= rows[rank];
        ++rank;
    }
    return rank;
}

} // namespace

void LinearCode::finish_common() {
    radius_ = d_ >= 1 ? (d_ - 1) / 2 : 0;
}

void LinearCode::init_table(std::vector<BitVec> rows, size_t min_distance_reject) {
    n_ = rows.empty() ? 0 : rows[0].size();
    if (n_ == 0 || n_ > 20) throw std::invalid_argument("LinearCode: table codes need 1..20 bits");
    size_t r = rows.size();
    if (r >= n_) throw std::invalid_argument("LinearCode: parity rows must number < length");
    for (const auto& row : rows)
        if (row.size() != n_) throw std::invalid_argument("LinearCode: ragged parity rows");
    if (rank_gf2(rows) != r) throw std::invalid_argument("LinearCode: parity check not full rank");
    k_ = n_ - r;

    columns_.assign(n_, 0);
    for (size_t i = 0; i < n_; ++i)
        for (size_t j = 0; j < r; ++j)
            if (rows[j].get(i)) columns_[i] |= 1u << j;

    // exact minimum distance: Gray walk over all vectors, tracking weight
    // and syndrome incrementally
    d_ = n_;
    {
        uint32_t syn = 0;
        size_t weight = 0;
        std::vector<uint8_t> state(n_, 0);
        uint64_t total = uint64_t(1) << n_;
        for (uint64_t step = 1; step < total; ++step) {
            size_t bit = size_t(__builtin_ctzll(step));
            syn ^= columns_[bit];
            if (state[bit]) { --weight; state[bit] = 0; }
            else { ++weight; state[bit] = 1; }
            if (syn == 0 && weight < d_) d_ = weight;
        }
    }
    if (d_ < min_distance_reject) throw std::invalid_argument("LinearCode: distance below floor");
    finish_common();

    // full coset leader table by breadth-first weight sweep
    size_t syn_count = size_t(1) << r;
    coset_leader_.assign(syn_count, 0);
    leader_weight_.assign(syn_count, 0xFF);
    leader_weight_[0] = 0;
    size_t filled = 1;
    for (size_t w = 1; w <= n_ && filled < syn_count; ++w) {
        // enumerate weight-w patterns via combination walking
        std::vector<size_t> idx(w);
        for (size_t i = 0; i < w; ++i) idx[i] = i;
        while (true) {
            uint32_t syn = 0, pat = 0;
            for (size_t i : idx) { syn ^= columns_[i]; pat |= 1u << i; }
            if (leader_weight_[syn] == 0xFF) {
                leader_weight_[syn] = uint8_t(w);
                coset_leader_[syn] = pat;
                ++filled;
            }
            // next combination
            size_t i = w;
            while (i > 0 && idx[i - 1] == n_ - w + i - 1) --i;
            if (i == 0) break;
            ++idx[i - 1];
            for (size_t j = i; j < w; ++j) idx[j] = idx[j - 1] + 1;
        }
    }
    if (filled != syn_count) throw std::logic_error("LinearCode: coset table incomplete");
}

LinearCode LinearCode::from_parity_rows(std::vector<BitVec> rows) {
    LinearCode c;
    c.init_table(std::move(rows), 1);
    return c;
}

LinearCode LinearCode::hamming74() {
    std::vector<BitVec> rows(3, BitVec(7));
    auto cols = ham_columns();
    for (size_t i = 0; i < 7; ++i)
        for (size_t j = 0; j < 3; ++j)
            if ((cols[i] >> j) & 1) rows[j].set(i, true);
    return from_parity_rows(std::move(rows));
}

LinearCode LinearCode::repetition(size_t n) {
    if (n < 2) throw std::invalid_argument("LinearCode::repetition: length >= 2");
    if (n <= 20) {
        std::vector<BitVec> rows(n - 1, BitVec(n));
        for (size_t j = 0; j + 1 < n; ++j) {
            rows[j].set(0, true);
            rows[j].set(j + 1, true);
        }
        return from_parity_rows(std::move(rows));
    }
    LinearCode c;
    c.is_block_ = true;
    c.blocks_.push_back({Block::Kind::Rep, 0, n});
    c.n_ = n;
    c.k_ = 1;
    c.d_ = n;
    c.finish_common();
    return c;
}

LinearCode LinearCode::random_table_code(size_t length, size_t dim, uint64_t seed,
                                         size_t min_distance) {
    if (length > 20) throw std::invalid_argument("random_table_code: length <= 20");
    if (dim == 0 || dim >= length) throw std::invalid_argument("random_table_code: bad dimension");
    SplitRng rng = SplitRng(seed).child("table_code");
    for (int attempt = 0; attempt < 4096; ++attempt) {
        std::vector<BitVec> rows(length - dim, BitVec(length));
        for (size_t j = 0; j < rows.size(); ++j)
            for (size_t i = 0; i < length; ++i) rows[j].set(i, rng.bit());
        try {
            LinearCode c;
            c.init_table(std::move(rows), min_distance);
            return c;
        } catch (const std::invalid_argument&) {}
    }
    throw std::runtime_error("random_table_code: no code met the distance floor");
}

LinearCode LinearCode::hamming_repetition(size_t length) {
    if (length <= 20)
        throw std::invalid_argument("hamming_repetition: use table codes at this length");
    LinearCode c;
    c.is_block_ = true;
    c.n_ = length;

    size_t big = length / 21;
    size_t rem = length % 21;
    if (rem == 1 || rem == 2) { // a bare 1- or 2-bit tail cannot carry parity
        big -= 1;
        rem += 21;
    }
    size_t off = 0;
    for (size_t b = 0; b < big; ++b) {
        c.blocks_.push_back({Block::Kind::HamRep, off, 21});
        off += 21;
    }
    if (rem > 0) {
        size_t reps = rem / 3, tail = rem % 3;
        if (tail > 0) --reps; // last repetition block absorbs the tail
        for (size_t b = 0; b < reps; ++b) {
            c.blocks_.push_back({Block::Kind::Rep, off, 3});
            off += 3;
        }
        if (tail > 0) {
            c.blocks_.push_back({Block::Kind::Rep, off, 3 + tail});
            off += 3 + tail;
        }
    }
    if (off != length) throw std::logic_error("hamming_repetition: layout mismatch");

    c.k_ = 0;
    size_t min_block_d = SIZE_MAX;
    for (const Block& b : c.blocks_) {
        if (b.kind == Block::Kind::HamRep) {
            c.k_ += 4;
            min_block_d = std::min(min_block_d, size_t(9)); // 3 (Hamming) x 3 (repetition)
        } else {
            c.k_ += 1;
            min_block_d = std::min(min_block_d, b.len);
        }
    }
    c.d_ = min_block_d;
    c.finish_common();
    return c;
}

std::vector<BitVec> LinearCode::parity_rows() const {
    std::vector<BitVec> rows;
    if (!is_block_) {
        size_t r = n_ - k_;
        rows.assign(r, BitVec(n_));
        for (size_t i = 0; i < n_; ++i)
            for (size_t j = 0; j < r; ++j)
                if ((columns_[i] >> j) & 1) rows[j].set(i, true);
        return rows;
    }
    for (const Block& b : blocks_) {
        if (b.kind == Block::Kind::Rep) {
            for (size_t j = 1; j < b.len; ++j) {
                BitVec row(n_);
                row.set(b.offset, true);
                row.set(b.offset + j, true);
                rows.push_back(std::move(row));
            }
        } else {
            for (size_t g = 0; g < 7; ++g)
                for (size_t j = 1; j < 3; ++j) {
                    BitVec row(n_);
                    row.set(b.offset + 3 * g, true);
                    row.set(b.offset + 3 * g + j, true);
                    rows.push_back(std::move(row));
                }
            auto cols = ham_columns();
            for (size_t j = 0; j < 3; ++j) {
                BitVec row(n_);
                for (size_t g = 0; g < 7; ++g)
                    if ((cols[g] >> j) & 1) row.set(b.offset + 3 * g, true);
                rows.push_back(std::move(row));
            }
        }
    }
    return rows;
}

BitVec LinearCode::syndrome(const BitVec& y) const {
    if (y.size() != n_) throw std::invalid_argument("LinearCode::syndrome: length mismatch");
    BitVec s(syndrome_bits());
    if (!is_block_) {
        uint32_t syn = 0;
        for (size_t i = 0; i < n_; ++i)
            if (y.get(i)) syn ^= columns_[i];
        for (size_t j = 0; j < syndrome_bits(); ++j) s.set(j, (syn >> j) & 1);
        return s;
    }
    size_t pos = 0;
    for (const Block& b : blocks_) {
        if (b.kind == Block::Kind::Rep) {
            bool first = y.get(b.offset);
            for (size_t j = 1; j < b.len; ++j) s.set(pos++, first ^ y.get(b.offset + j));
        } else {
            for (size_t g = 0; g < 7; ++g) {
                bool first = y.get(b.offset + 3 * g);
                for (size_t j = 1; j < 3; ++j) s.set(pos++, first ^ y.get(b.offset + 3 * g + j));
            }
            auto cols = ham_columns();
            for (size_t j = 0; j < 3; ++j) {
                bool bit = false;
                for (size_t g = 0; g < 7; ++g)
                    if ((cols[g] >> j) & 1) bit ^= y.get(b.offset + 3 * g);
                s.set(pos++, bit);
            }
        }
    }
    return s;
}

std::optional<BitVec> LinearCode::decode(const BitVec& y_noisy, const BitVec& s) const {
    if (y_noisy.size() != n_) throw std::invalid_argument("LinearCode::decode: length mismatch");
    if (s.size() != syndrome_bits()) throw std::invalid_argument("LinearCode::decode: bad syndrome");
    BitVec delta = syndrome(y_noisy);
    delta ^= s; // syndrome of the error vector

    if (!is_block_) {
        uint32_t syn = 0;
        for (size_t j = 0; j < delta.size(); ++j)
            if (delta.get(j)) syn |= 1u << j;
        if (leader_weight_[syn] > radius_) return std::nullopt;
        BitVec y = y_noisy;
        uint32_t pat = coset_leader_[syn];
        for (size_t i = 0; i < n_; ++i)
            if ((pat >> i) & 1) y.flip(i);
        return y;
    }

    // per-block exact coset leaders; fail when a block's leader exceeds its
    // own radius
    BitVec y = y_noisy;
    size_t pos = 0;
    for (const Block& b : blocks_) {
        if (b.kind == Block::Kind::Rep) {
            size_t L = b.len;
            // error block is e0, e0 ^ s1, ..., e0 ^ s_{L-1}; pick the lighter e0
            size_t ones = 0;
            for (size_t j = 1; j < L; ++j) ones += delta.get(pos + j - 1);
            size_t w0 = ones, w1 = L - ones;
            bool e0 = w1 < w0;
            size_t w = std::min(w0, w1);
            if (w > (b.len - 1) / 2) return std::nullopt;
            if (e0) y.flip(b.offset);
            for (size_t j = 1; j < L; ++j)
                if (e0 ^ delta.get(pos + j - 1)) y.flip(b.offset + j);
            pos += L - 1;
        } else {
            // equality syndromes per group, then Hamming syndrome on firsts
            uint8_t eq[7][2];
            for (size_t g = 0; g < 7; ++g)
                for (size_t j = 0; j < 2; ++j) eq[g][j] = delta.get(pos + 2 * g + j);
            pos += 14;
            uint32_t sham = 0;
            for (size_t j = 0; j < 3; ++j)
                if (delta.get(pos + j)) sham |= 1u << j;
            pos += 3;
            // particular solution for the firsts, then scan the 16 codewords
            uint8_t b0 = sham == 0 ? 0 : uint8_t(1u << (sham - 1));
            size_t best_w = SIZE_MAX;
            uint8_t best_firsts = 0;
            for (uint8_t cw : ham_codewords()) {
                uint8_t firsts = b0 ^ cw;
                size_t w = 0;
                for (size_t g = 0; g < 7; ++g) {
                    uint8_t e0 = (firsts >> g) & 1;
                    w += e0 + (e0 ^ eq[g][0]) + (e0 ^ eq[g][1]);
                }
                if (w < best_w) { best_w = w; best_firsts = firsts; }
            }
            if (best_w > 4) return std::nullopt; // (9-1)/2
            for (size_t g = 0; g < 7; ++g) {
                uint8_t e0 = (best_firsts >> g) & 1;
                if (e0) y.flip(b.offset + 3 * g);
                if (e0 ^ eq[g][0]) y.flip(b.offset + 3 * g + 1);
                if (e0 ^ eq[g][1]) y.flip(b.offset + 3 * g + 2);
            }
        }
    }
    return y;
}

std::string LinearCode::describe() const {
    std::ostringstream os;
    os << "linear_code n=" << n_ << " k=" << k_ << " d=" << d_ << " radius=" << radius_ << "\n";
    static const char* hex = "0123456789abcdef";
    for (const BitVec& row : parity_rows()) {
        for (uint8_t byte : row.packed()) os << hex[byte >> 4] << hex[byte & 0xF];
        os << "\n";
    }
    return os.str();
}

// ---------------------------------------------------------------------------

SyndromeFamily::SyndromeFamily(size_t length, size_t dim_hint, uint64_t family_seed)
    : nprime_(length), dim_hint_(dim_hint), seed_(family_seed) {
    if (length < 2) throw std::invalid_argument("SyndromeFamily: length >= 2");
    if (dim_hint_ == 0) {
        // default policy: repetition at tiny lengths, rate-1/2 table codes
        // up to 20, the fixed block concatenation above
        if (length > 6 && length <= 20) dim_hint_ = length / 2;
        else if (length <= 6) dim_hint_ = 1;
    }
    if (length <= 20 && dim_hint_ >= length)
        throw std::invalid_argument("SyndromeFamily: bad dimension for table codes");
}

const LinearCode& SyndromeFamily::code_for(uint32_t j) const {
    for (auto& [jj, code] : cache_)
        if (jj == j) return *code;
    std::shared_ptr<const LinearCode> code;
    if (nprime_ <= 6) {
        code = std::make_shared<LinearCode>(LinearCode::repetition(nprime_));
    } else if (nprime_ <= 20) {
        uint64_t code_seed = SplitRng(seed_).child(j).seed();
        code = std::make_shared<LinearCode>(
            LinearCode::random_table_code(nprime_, dim_hint_, code_seed));
    } else {
        code = std::make_shared<LinearCode>(LinearCode::hamming_repetition(nprime_));
    }
    cache_.emplace_back(j, code);
    return *cache_.back().second;
}

size_t SyndromeFamily::syndrome_len(size_t input_len) const {
    const LinearCode& c = code_for(0);
    size_t base = c.syndrome_bits();
    return input_len > nprime_ ? base + (input_len - nprime_) : base;
}

BitVec SyndromeFamily::syndrome(uint32_t j, const BitVec& y) const {
    const LinearCode& c = code_for(j);
    if (y.size() == nprime_) return c.syndrome(y);
    if (y.size() < nprime_) return c.syndrome(y.padded_to(nprime_));
    BitVec out = c.syndrome(y.slice(0, nprime_));
    out.append(y.slice(nprime_, y.size() - nprime_));
    return out;
}

std::optional<BitVec> SyndromeFamily::decode(uint32_t j, const BitVec& y_noisy,
                                             const BitVec& s) const {
    const LinearCode& c = code_for(j);
    if (s.size() != syndrome_len(y_noisy.size()))
        throw std::invalid_argument("SyndromeFamily::decode: syndrome length mismatch");
    if (y_noisy.size() <= nprime_) {
        auto fixed = c.decode(y_noisy.padded_to(nprime_), s);
        if (!fixed) return std::nullopt;
        return fixed->slice(0, y_noisy.size());
    }
    size_t base = c.syndrome_bits();
    auto fixed = c.decode(y_noisy.slice(0, nprime_), s.slice(0, base));
    if (!fixed) return std::nullopt;
    BitVec out = *fixed;
    out.append(s.slice(base, s.size() - base)); // verbatim tail
    return out;
}

} // namespace qid
