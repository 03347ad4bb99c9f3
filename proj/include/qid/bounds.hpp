#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qid/distributions.hpp"
#include "qid/entropy_math.hpp"

namespace qid {

/// Evaluated security-parameter formula with every input echoed and every
/// term reported separately; bit-reproducible from the inputs.
struct BoundReport {
    std::string formula;
    std::map<std::string, double> inputs;
    std::map<std::string, double> values;
    std::vector<std::string> flags;
    bool feasible = true;

    std::string to_json() const;
};

/// Measurement uncertainty: Hmin^eps(X | Theta) >= (1/2 - 2 lambda) n with
/// eps <= 2^(-sigma(lambda) n). Returns (entropy bound, eps).
std::pair<double, double> uncertainty_bound(size_t n, double lambda);

/// Privacy amplification: (1/2) 2^(-(hmin - q - l)/2) + 2 eps.
double pa_bound(double hmin_eps_value, double eps, double q, double l);

/// Dishonest-user acceptance bound m^2 / 2^l.
double impersonation_acceptance_bound(size_t m, double l);

/// User-security error of the basic scheme at explicit code distance d.
BoundReport user_security_epsilon(double d, size_t m, double q, double l, double lambda);

/// Impersonation security with the Gilbert-Varshamov distance plugged in:
/// mu = h^{-1}(1 - log2(m)/n), d = n mu - 1, the recommended l, and both
/// error terms separately. Infeasible exponents are flagged, not clamped.
BoundReport impersonation_epsilon(size_t n, size_t m, double q, double lambda);

/// Man-in-the-middle / authenticated-mode exponent arguments, the default
/// l choice, and the syndrome-leakage exponent (t - 2q)/4 (reported under
/// the code-family bias assumption).
BoundReport qidplus_epsilon(size_t n, size_t m, double q, double lambda,
                            std::optional<double> ell_override = std::nullopt);

/// Enumerable hash family as explicit tables: maps[key][x] = output value
/// below 2^out_bits. Keys are uniform.
struct HashFamilyTable {
    size_t out_bits = 0;
    std::vector<std::vector<uint32_t>> maps;
};

/// Family f_a(x) = first l bits of a * x over GF(2^nbits), all 2^nbits keys.
HashFamilyTable family_multiply(size_t nbits, size_t out_bits);
/// Same with an additive mask: keys (a, b).
HashFamilyTable family_multiply_masked(size_t nbits, size_t out_bits);
/// Mask-only family f_b(x) = first l bits of x, xor b.
HashFamilyTable family_mask_only(size_t nbits, size_t out_bits);

/// Exact total-variation distance of (F(X), F, Z) from (uniform, F, Z) for
/// a classical (X, Z) joint; the q = 0 instance of the privacy-amplification
/// statement. Enumerates every key.
double pa_exact_distance(const JointDistribution& xz, const std::string& x_name,
                         const std::string& z_name, const HashFamilyTable& family);

} // namespace qid
