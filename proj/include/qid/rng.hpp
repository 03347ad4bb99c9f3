#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "qid/bits.hpp"

namespace qid {

/// Counter-based splitmix64 stream. Children are derived from the parent's
/// seed (not its consumed state), so the derivation tree is stable no matter
/// how many values each node has drawn. Parallel and serial experiment runs
/// therefore see identical per-trial streams.
class SplitRng {
public:
    explicit SplitRng(uint64_t seed) : seed_(seed) {}

    uint64_t next() {
        uint64_t z = (seed_ + (++ctr_) * 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    SplitRng child(uint64_t tag) const {
        uint64_t z = seed_ ^ (tag + 0x9e3779b97f4a7c15ull + (seed_ << 6) + (seed_ >> 2));
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return SplitRng(z ^ (z >> 31));
    }
    SplitRng child(const std::string& tag) const { return child(fnv1a64(tag)); }

    bool bit() { return next() >> 63; }

    BitVec bits(size_t n) {
        BitVec v(n);
        for (size_t i = 0; i < n; ++i) v.set(i, bit());
        return v;
    }

    /// Uniform in [0, bound) by rejection; bound > 0.
    uint64_t below(uint64_t bound) {
        uint64_t limit = bound * (UINT64_MAX / bound);
        uint64_t v;
        do { v = next(); } while (v >= limit);
        return v % bound;
    }

    /// Uniform double in [0, 1).
    double real() { return double(next() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return real() < p; }

    double gaussian() {
        if (have_spare_) { have_spare_ = false; return spare_; }
        double u, v, s;
        do {
            u = 2.0 * real() - 1.0;
            v = 2.0 * real() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    uint64_t seed() const { return seed_; }

private:
    uint64_t seed_;
    uint64_t ctr_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace qid
