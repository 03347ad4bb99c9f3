#include "qid/basis_code.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "qid/entropy_math.hpp"
#include "qid/rng.hpp"

namespace qid {

namespace {

size_t exact_min_distance(const std::vector<BitVec>& words) {
    size_t d = words.empty() ? 0 : words[0].size();
    for (size_t i = 0; i < words.size(); ++i)
        for (size_t j = i + 1; j < words.size(); ++j)
            d = std::min(d, words[i].hamming(words[j]));
    return d;
}

} // namespace

BasisCode::BasisCode(std::vector<BitVec> codewords) : codewords_(std::move(codewords)) {
    if (codewords_.size() < 2) throw std::invalid_argument("BasisCode: need at least 2 codewords");
    size_t n = codewords_[0].size();
    for (const auto& c : codewords_)
        if (c.size() != n) throw std::invalid_argument("BasisCode: unequal codeword lengths");
    for (size_t i = 0; i < codewords_.size(); ++i)
        for (size_t j = i + 1; j < codewords_.size(); ++j)
            if (codewords_[i] == codewords_[j])
                throw std::invalid_argument("BasisCode: duplicate codewords");
    d_ = exact_min_distance(codewords_);
}

BasisString BasisCode::encode(size_t w) const {
    return bases_from_bits(codeword_bits(w));
}

const BitVec& BasisCode::codeword_bits(size_t w) const {
    if (w < 1 || w > codewords_.size())
        throw std::invalid_argument("BasisCode: password index out of range");
    return codewords_[w - 1];
}

std::vector<size_t> BasisCode::matching_positions(size_t w, const BasisString& theta) const {
    const BitVec& c = codeword_bits(w);
    if (theta.size() != c.size())
        throw std::invalid_argument("BasisCode: theta length mismatch");
    std::vector<size_t> out;
    for (size_t i = 0; i < theta.size(); ++i)
        if ((theta[i] == Basis::Times) == c.get(i)) out.push_back(i);
    return out;
}

std::string BasisCode::describe() const {
    std::ostringstream os;
    os << "basis_code m=" << m() << " n=" << n() << " d=" << d_ << "\n";
    for (const auto& c : codewords_) {
        static const char* hex = "0123456789abcdef";
        for (uint8_t byte : c.packed()) {
            os << hex[byte >> 4] << hex[byte & 0xF];
        }
        os << "\n";
    }
    return os.str();
}

BasisCode BasisCode::parse(const std::string& text) {
    std::istringstream is(text);
    std::string tag;
    is >> tag;
    if (tag != "basis_code") throw std::invalid_argument("BasisCode::parse: bad header");
    size_t m = 0, n = 0, d = 0;
    std::string kv;
    while (is >> kv && kv.find('=') != std::string::npos) {
        auto eq = kv.find('=');
        size_t val = std::stoul(kv.substr(eq + 1));
        if (kv.substr(0, eq) == "m") m = val;
        else if (kv.substr(0, eq) == "n") n = val;
        else if (kv.substr(0, eq) == "d") d = val;
        if (kv.substr(0, eq) == "d") break;
    }
    auto nib = [](char ch) -> unsigned {
        if (ch >= '0' && ch <= '9') return unsigned(ch - '0');
        if (ch >= 'a' && ch <= 'f') return unsigned(ch - 'a' + 10);
        throw std::invalid_argument("BasisCode::parse: bad hex");
    };
    std::vector<BitVec> words;
    std::string row;
    while (is >> row && words.size() < m) {
        if (row.size() % 2) throw std::invalid_argument("BasisCode::parse: odd hex row");
        std::vector<uint8_t> bytes;
        for (size_t i = 0; i < row.size(); i += 2)
            bytes.push_back(uint8_t((nib(row[i]) << 4) | nib(row[i + 1])));
        words.push_back(BitVec::from_packed(bytes, n));
    }
    if (words.size() != m) throw std::invalid_argument("BasisCode::parse: row count mismatch");
    BasisCode code(std::move(words));
    if (code.min_distance() != d)
        throw std::invalid_argument("BasisCode::parse: stored distance disagrees with recomputation");
    return code;
}

size_t gv_feasible(size_t n, size_t m) {
    if (m < 2) throw std::invalid_argument("gv_feasible: m must be at least 2");
    if (n < 64 && m > (size_t(1) << n)) throw std::invalid_argument("gv_feasible: m exceeds 2^n");
    double rate = std::log2(double(m)) / double(n);
    if (rate >= 1.0) return 0;
    return size_t(std::floor(double(n) * binary_entropy_inv(1.0 - rate)));
}

BasisCode build_basis_code(size_t m, size_t n, size_t target_d, uint64_t seed,
                           size_t attempt_budget) {
    if (m < 2) throw std::invalid_argument("build_basis_code: m must be at least 2");
    size_t min_n = 0;
    while ((size_t(1) << min_n) < m) ++min_n;
    if (n < min_n) throw std::invalid_argument("build_basis_code: n too small for m codewords");
    if (target_d > n)
        throw std::invalid_argument("build_basis_code: target distance exceeds code length");

    if (m == 2) {
        // complementary pair, distance n, optimal for two codewords
        BitVec all_plus(n), all_times(n);
        for (size_t i = 0; i < n; ++i) all_times.set(i, true);
        return BasisCode({all_plus, all_times});
    }

    SplitRng rng = SplitRng(seed).child("basis_code_search");
    size_t best_d = 0;
    for (size_t attempt = 0; attempt < attempt_budget; ++attempt) {
        std::vector<BitVec> words;
        bool distinct = true;
        for (size_t i = 0; i < m && distinct; ++i) {
            BitVec w = rng.bits(n);
            for (const auto& prev : words)
                if (prev == w) { distinct = false; break; }
            if (distinct) words.push_back(std::move(w));
        }
        if (!distinct) continue;
        size_t d = exact_min_distance(words);
        best_d = std::max(best_d, d);
        if (d >= target_d) return BasisCode(std::move(words));
    }
    throw std::runtime_error("build_basis_code: budget exhausted, best distance " +
                             std::to_string(best_d) + " < " + std::to_string(target_d));
}

} // namespace qid
