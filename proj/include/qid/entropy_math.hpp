#pragma once

#include <cmath>
#include <stdexcept>

namespace qid {

/// Binary entropy h(p) = -p log2 p - (1-p) log2 (1-p). All logarithms in
/// this codebase are base 2.
inline double binary_entropy(double p) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("binary_entropy: p out of [0,1]");
    if (p == 0.0 || p == 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

/// Inverse of h restricted to (0, 1/2]; bisection to |h(p) - y| <= 1e-9.
inline double binary_entropy_inv(double y) {
    if (y < 0.0 || y > 1.0) throw std::invalid_argument("binary_entropy_inv: y out of [0,1]");
    if (y == 0.0) return 0.0;
    if (y == 1.0) return 0.5;
    double lo = 0.0, hi = 0.5;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (binary_entropy(mid) < y) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

/// sigma(lambda) = lambda^2 log2(e) / (32 (2 - log2 lambda)^2), the error
/// exponent of the measurement uncertainty relation.
inline double sigma_lambda(double lambda) {
    if (lambda <= 0.0) throw std::invalid_argument("sigma_lambda: lambda must be positive");
    double denom = 2.0 - std::log2(lambda);
    return lambda * lambda * std::log2(std::exp(1.0)) / (32.0 * denom * denom);
}

} // namespace qid
