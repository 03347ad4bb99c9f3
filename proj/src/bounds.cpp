#include "qid/bounds.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "qid/gf2.hpp"

#include <json.hpp>

namespace qid {

std::string BoundReport::to_json() const {
    nlohmann::ordered_json j;
    j["formula"] = formula;
    j["feasible"] = feasible;
    j["inputs"] = inputs;
    j["values"] = values;
    j["flags"] = flags;
    return j.dump(2);
}

std::pair<double, double> uncertainty_bound(size_t n, double lambda) {
    if (lambda <= 0.0) throw std::invalid_argument("uncertainty_bound: lambda must be positive");
    double entropy = (0.5 - 2.0 * lambda) * double(n);
    double eps = std::pow(2.0, -sigma_lambda(lambda) * double(n));
    return {entropy, eps};
}

double pa_bound(double hmin_eps_value, double eps, double q, double l) {
    return 0.5 * std::pow(2.0, -0.5 * (hmin_eps_value - q - l)) + 2.0 * eps;
}

double impersonation_acceptance_bound(size_t m, double l) {
    return double(m) * double(m) * std::pow(2.0, -l);
}

BoundReport user_security_epsilon(double d, size_t m, double q, double l, double lambda) {
    if (lambda <= 0.0 || lambda >= 0.25)
        throw std::invalid_argument("user_security_epsilon: lambda out of (0, 1/4)");
    BoundReport rep;
    rep.formula = "user_security";
    double logm = std::log2(double(m));
    rep.inputs = {{"d", d}, {"m", double(m)}, {"q", q}, {"l", l}, {"lambda", lambda}};
    double e1 = 0.5 * ((0.25 - lambda) * d - logm - q - l - 1.0);
    double e2 = sigma_lambda(lambda) * d - logm - 3.0;
    // the statement's exponent and the proof's (d/4 - lambda d) spelling
    // agree term by term; both are logged
    rep.values["exponent1"] = e1;
    rep.values["exponent1_proof_form"] = 0.5 * (d / 4.0 - lambda * d - logm - 1.0 - q - l);
    rep.values["exponent2"] = e2;
    rep.values["eps1"] = std::pow(2.0, -e1);
    rep.values["eps2"] = std::pow(2.0, -e2);
    rep.values["eps"] = rep.values["eps1"] + rep.values["eps2"];
    rep.feasible = e1 > 0 && e2 > 0;
    if (!rep.feasible) rep.flags.push_back("infeasible");
    return rep;
}

BoundReport impersonation_epsilon(size_t n, size_t m, double q, double lambda) {
    if (lambda <= 0.0 || lambda >= 0.25)
        throw std::invalid_argument("impersonation_epsilon: lambda out of (0, 1/4)");
    if (m < 2) throw std::invalid_argument("impersonation_epsilon: m >= 2");
    double logm = std::log2(double(m));
    if (logm > double(n)) throw std::invalid_argument("impersonation_epsilon: m > 2^n");

    BoundReport rep;
    rep.formula = "impersonation";
    rep.inputs = {{"n", double(n)}, {"m", double(m)}, {"q", q}, {"lambda", lambda}};

    double mu = binary_entropy_inv(1.0 - logm / double(n));
    double d = double(n) * mu - 1.0;
    double ell = (1.0 / 3.0) * ((0.25 - lambda) * d + 3.0 * logm - q - 1.0);
    double e1 = (1.0 / 3.0) * ((0.25 - lambda) * double(n) * mu - 3.0 * logm - q - 2.0);
    double e2 = sigma_lambda(lambda) * double(n) * mu - logm - 4.0;

    rep.values["mu"] = mu;
    rep.values["d"] = d;
    rep.values["ell_recommended"] = ell;
    rep.values["exponent1"] = e1;
    rep.values["exponent2"] = e2;
    rep.values["eps1"] = std::pow(2.0, -e1);
    rep.values["eps2"] = std::pow(2.0, -e2);
    rep.values["eps"] = rep.values["eps1"] + rep.values["eps2"];
    if (ell >= 1.0)
        rep.values["server_eps"] = impersonation_acceptance_bound(m, std::floor(ell));
    // the sigma term is asymptotic: it only turns positive at n in the
    // hundreds of millions, so it is reported and flagged rather than
    // deciding feasibility at desk scale
    rep.feasible = e1 > 0 && ell >= 1.0;
    if (e2 <= 0) rep.flags.push_back("sigma-term exponent nonpositive at this scale");
    if (!rep.feasible) rep.flags.push_back("infeasible");
    return rep;
}

BoundReport qidplus_epsilon(size_t n, size_t m, double q, double lambda,
                            std::optional<double> ell_override) {
    if (lambda <= 0.0 || lambda >= 0.25)
        throw std::invalid_argument("qidplus_epsilon: lambda out of (0, 1/4)");
    if (m < 2) throw std::invalid_argument("qidplus_epsilon: m >= 2");
    double logm = std::log2(double(m));
    if (logm > double(n)) throw std::invalid_argument("qidplus_epsilon: m > 2^n");

    BoundReport rep;
    rep.formula = "qidplus";
    rep.inputs = {{"n", double(n)}, {"m", double(m)}, {"q", q}, {"lambda", lambda}};

    double mu = binary_entropy_inv(1.0 - logm / double(n));
    double d = double(n) * mu - 1.0;
    double ell_default = std::floor(0.25 * ((0.25 - lambda) * d + logm - 2.0 * q));
    double ell = ell_override.value_or(ell_default);
    double t = (0.25 - lambda) * d - logm - 3.0 * ell;

    rep.values["mu"] = mu;
    rep.values["d"] = d;
    rep.values["ell_default"] = ell_default;
    rep.values["ell"] = ell;
    rep.values["t"] = t;
    // negl(.) arguments of the closing theorem; absolute constants are not
    // part of the statement, so only the exponents are reported
    rep.values["arg_main"] = (0.25 - lambda) * mu * double(n) - 7.0 * logm - 2.0 * q;
    rep.values["arg_sigma"] = sigma_lambda(lambda) * mu * double(n) - logm;
    rep.values["arg_mitm"] = (0.25 - lambda) * d - logm - 2.0 * q - 3.0 * ell;
    rep.values["arg_sigma_d"] = sigma_lambda(lambda) * d - logm;
    rep.values["arg_ell"] = ell;
    rep.values["syndrome_exponent"] = (t - 2.0 * q) / 4.0;

    rep.flags.push_back("syndrome leakage bound conditional on code-family bias assumption");
    rep.flags.push_back("negl arguments reported, absolute constants are not");
    rep.feasible = rep.values["arg_main"] > 0 && rep.values["arg_mitm"] > 0 && ell >= 1.0 &&
                   rep.values["syndrome_exponent"] > 0;
    if (rep.values["arg_sigma"] <= 0)
        rep.flags.push_back("sigma-term argument nonpositive at this scale");
    if (!rep.feasible) rep.flags.push_back("infeasible");
    return rep;
}

HashFamilyTable family_multiply(size_t nbits, size_t out_bits) {
    if (nbits > 16) throw std::invalid_argument("family_multiply: nbits too large to enumerate");
    auto spec = FieldSpec::standard(unsigned(nbits));
    size_t q = size_t(1) << nbits;
    HashFamilyTable fam;
    fam.out_bits = out_bits;
    fam.maps.assign(q, std::vector<uint32_t>(q, 0));
    for (size_t a = 0; a < q; ++a) {
        auto fa = FieldElement::from_value(spec, a);
        for (size_t x = 0; x < q; ++x) {
            auto prod = fa * FieldElement::from_value(spec, x);
            fam.maps[a][x] = uint32_t(prod.truncate_msb(out_bits).to_u64());
        }
    }
    return fam;
}

HashFamilyTable family_multiply_masked(size_t nbits, size_t out_bits) {
    HashFamilyTable base = family_multiply(nbits, out_bits);
    size_t q = size_t(1) << nbits;
    size_t masks = size_t(1) << out_bits;
    HashFamilyTable fam;
    fam.out_bits = out_bits;
    fam.maps.reserve(q * masks);
    for (size_t a = 0; a < q; ++a)
        for (size_t b = 0; b < masks; ++b) {
            std::vector<uint32_t> row(q);
            for (size_t x = 0; x < q; ++x) row[x] = base.maps[a][x] ^ uint32_t(b);
            fam.maps.push_back(std::move(row));
        }
    return fam;
}

HashFamilyTable family_mask_only(size_t nbits, size_t out_bits) {
    if (out_bits > nbits) throw std::invalid_argument("family_mask_only: out_bits > nbits");
    size_t q = size_t(1) << nbits;
    size_t masks = size_t(1) << out_bits;
    HashFamilyTable fam;
    fam.out_bits = out_bits;
    for (size_t b = 0; b < masks; ++b) {
        std::vector<uint32_t> row(q);
        for (size_t x = 0; x < q; ++x)
            row[x] = uint32_t((x >> (nbits - out_bits)) ^ b); // l most significant bits
        fam.maps.push_back(std::move(row));
    }
    return fam;
}

double pa_exact_distance(const JointDistribution& xz, const std::string& x_name,
                         const std::string& z_name, const HashFamilyTable& family) {
    JointDistribution m = xz.marginal({x_name, z_name});
    size_t xsize = m.sizes()[0], zsize = m.sizes()[1];
    size_t outs = size_t(1) << family.out_bits;
    if (family.maps.empty() || family.maps[0].size() < xsize)
        throw std::invalid_argument("pa_exact_distance: family domain too small");
    if (xsize * family.maps.size() * outs > (size_t(1) << 24))
        throw std::invalid_argument("pa_exact_distance: enumeration too large");

    std::vector<double> pz(zsize, 0.0);
    std::vector<std::vector<double>> pxz(xsize, std::vector<double>(zsize, 0.0));
    m.for_each([&](const std::vector<size_t>& idx, double p) {
        pxz[idx[0]][idx[1]] = p;
        pz[idx[1]] += p;
    });

    double key_p = 1.0 / double(family.maps.size());
    double distance = 0;
    std::vector<double> bucket(outs);
    for (const auto& map : family.maps) {
        for (size_t z = 0; z < zsize; ++z) {
            std::fill(bucket.begin(), bucket.end(), 0.0);
            for (size_t x = 0; x < xsize; ++x) bucket[map[x]] += pxz[x][z];
            double tv = 0;
            for (size_t t = 0; t < outs; ++t) tv += std::abs(bucket[t] - pz[z] / double(outs));
            distance += key_p * 0.5 * tv;
        }
    }
    return distance;
}

} // namespace qid
