#include "qid/density.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qid {

namespace {

void check_density(const std::vector<cplx>& a, size_t dim) {
    if (a.size() != dim * dim) throw std::invalid_argument("DensityMatrix: size mismatch");
    if (dim == 0 || dim > 64) throw std::invalid_argument("DensityMatrix: dimension out of range");
    double trace = 0;
    for (size_t r = 0; r < dim; ++r) {
        trace += a[r * dim + r].real();
        if (std::abs(a[r * dim + r].imag()) > 1e-10)
            throw std::invalid_argument("DensityMatrix: complex diagonal");
        for (size_t c = r + 1; c < dim; ++c) {
            cplx d = a[r * dim + c] - std::conj(a[c * dim + r]);
            if (std::abs(d) > 1e-10) throw std::invalid_argument("DensityMatrix: not Hermitian");
        }
    }
    if (std::abs(trace - 1.0) > 1e-10) throw std::invalid_argument("DensityMatrix: trace not 1");
    auto eig = hermitian_eigenvalues(a, dim);
    if (eig.front() < -1e-9) throw std::invalid_argument("DensityMatrix: not positive semidefinite");
}

} // namespace

DensityMatrix::DensityMatrix(size_t dim, std::vector<cplx> entries)
    : dim_(dim), a_(std::move(entries)) {
    check_density(a_, dim_);
}

DensityMatrix DensityMatrix::from_pure(const std::vector<cplx>& state) {
    size_t dim = state.size();
    double norm = 0;
    for (const cplx& v : state) norm += std::norm(v);
    if (std::abs(norm - 1.0) > 1e-10)
        throw std::invalid_argument("DensityMatrix::from_pure: state not normalized");
    std::vector<cplx> a(dim * dim);
    for (size_t r = 0; r < dim; ++r)
        for (size_t c = 0; c < dim; ++c) a[r * dim + c] = state[r] * std::conj(state[c]);
    return DensityMatrix(dim, std::move(a));
}

DensityMatrix DensityMatrix::maximally_mixed(size_t dim) {
    std::vector<cplx> a(dim * dim, 0.0);
    for (size_t r = 0; r < dim; ++r) a[r * dim + r] = 1.0 / double(dim);
    return DensityMatrix(dim, std::move(a));
}

std::vector<double> hermitian_eigenvalues(const std::vector<cplx>& h, size_t dim) {
    if (h.size() != dim * dim) throw std::invalid_argument("hermitian_eigenvalues: size mismatch");
    // real-symmetric embedding [[Re, -Im], [Im, Re]]; each eigenvalue of h
    // appears twice
    size_t n = 2 * dim;
    std::vector<double> s(n * n, 0.0);
    for (size_t r = 0; r < dim; ++r)
        for (size_t c = 0; c < dim; ++c) {
            double re = h[r * dim + c].real(), im = h[r * dim + c].imag();
            s[r * n + c] = re;
            s[(r + dim) * n + (c + dim)] = re;
            s[r * n + (c + dim)] = -im;
            s[(r + dim) * n + c] = im;
        }

    // cyclic Jacobi
    for (int sweep = 0; sweep < 128; ++sweep) {
        double off = 0;
        for (size_t r = 0; r < n; ++r)
            for (size_t c = r + 1; c < n; ++c) off += s[r * n + c] * s[r * n + c];
        if (off < 1e-26) break;
        for (size_t p = 0; p < n - 1; ++p)
            for (size_t q = p + 1; q < n; ++q) {
                double apq = s[p * n + q];
                if (std::abs(apq) < 1e-300) continue;
                double app = s[p * n + p], aqq = s[q * n + q];
                double theta = 0.5 * (aqq - app) / apq;
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double cth = 1.0 / std::sqrt(t * t + 1.0);
                double sth = t * cth;
                for (size_t k = 0; k < n; ++k) {
                    double skp = s[k * n + p], skq = s[k * n + q];
                    s[k * n + p] = cth * skp - sth * skq;
                    s[k * n + q] = sth * skp + cth * skq;
                }
                for (size_t k = 0; k < n; ++k) {
                    double spk = s[p * n + k], sqk = s[q * n + k];
                    s[p * n + k] = cth * spk - sth * sqk;
                    s[q * n + k] = sth * spk + cth * sqk;
                }
            }
    }
    std::vector<double> all(n);
    for (size_t r = 0; r < n; ++r) all[r] = s[r * n + r];
    std::sort(all.begin(), all.end());
    // collapse the doubled spectrum
    std::vector<double> eig(dim);
    for (size_t i = 0; i < dim; ++i) eig[i] = 0.5 * (all[2 * i] + all[2 * i + 1]);
    return eig;
}

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
    if (rho.dim() != sigma.dim()) throw std::invalid_argument("trace_distance: dimension mismatch");
    size_t dim = rho.dim();
    std::vector<cplx> diff(dim * dim);
    for (size_t k = 0; k < dim * dim; ++k) diff[k] = rho.entries()[k] - sigma.entries()[k];
    auto eig = hermitian_eigenvalues(diff, dim);
    double sum = 0;
    for (double v : eig) sum += std::abs(v);
    return 0.5 * sum;
}

MeasurementEntropy exact_measurement_entropy(const std::vector<cplx>& state, double eps) {
    size_t dim = state.size();
    size_t n = 0;
    while ((size_t(1) << n) < dim) ++n;
    if ((size_t(1) << n) != dim || n == 0 || n > 5)
        throw std::invalid_argument("exact_measurement_entropy: need 2^n amplitudes, n in 1..5");
    double norm = 0;
    for (const cplx& v : state) norm += std::norm(v);
    if (std::abs(norm - 1.0) > 1e-10)
        throw std::invalid_argument("exact_measurement_entropy: state not normalized");

    size_t bases = size_t(1) << n;
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

    // joint P(theta, x) = 2^-n |<x_theta | psi>|^2
    std::vector<double> joint(bases * dim);
    for (size_t theta = 0; theta < bases; ++theta) {
        std::vector<cplx> amp = state;
        for (size_t qb = 0; qb < n; ++qb) {
            if (!((theta >> (n - 1 - qb)) & 1)) continue; // + basis: identity
            size_t stride = size_t(1) << (n - 1 - qb);
            for (size_t base = 0; base < dim; ++base) {
                if (base & stride) continue;
                cplx lo = amp[base], hi = amp[base | stride];
                amp[base] = (lo + hi) * inv_sqrt2;
                amp[base | stride] = (lo - hi) * inv_sqrt2;
            }
        }
        for (size_t x = 0; x < dim; ++x) joint[theta * dim + x] = std::norm(amp[x]) / double(bases);
    }
    // tidy tiny numerical residue so the table normalizes exactly
    double total = 0;
    for (double v : joint) total += v;
    for (double& v : joint) v /= total;

    JointDistribution dist({"Theta", "X"}, {bases, dim}, std::move(joint));
    MeasurementEntropy out;
    out.hmin = hmin(dist, {"X"}, {"Theta"});
    out.hmin_smooth = eps > 0 ? hmin_smooth(dist, {"X"}, {"Theta"}, eps) : out.hmin;
    return out;
}

MarkovReport markov_decompose_check(const MarkovInput& in) {
    MarkovReport rep;
    size_t nx = in.p_xy.size();
    if (nx == 0) throw std::invalid_argument("markov_decompose_check: empty P(x,y)");
    size_t ny = in.p_xy[0].size();
    if (in.rho_y.size() != ny) throw std::invalid_argument("markov_decompose_check: rho per y");
    size_t dim = in.rho_y[0].dim();
    if (nx * ny * dim > 4096)
        throw std::invalid_argument("markov_decompose_check: dimensions too large");
    double psum = 0;
    for (size_t x = 0; x < nx; ++x) {
        if (in.p_xy[x].size() != ny || in.event_given[x].size() != ny)
            throw std::invalid_argument("markov_decompose_check: ragged tables");
        for (size_t y = 0; y < ny; ++y) psum += in.p_xy[x][y];
    }
    if (std::abs(psum - 1.0) > 1e-10)
        throw std::invalid_argument("markov_decompose_check: P(x,y) must sum to 1");

    double pe = 0;
    for (size_t x = 0; x < nx; ++x)
        for (size_t y = 0; y < ny; ++y) pe += in.p_xy[x][y] * in.event_given[x][y];
    rep.event_prob = pe;

    rep.event_independent = true;
    for (size_t x = 0; x < nx && rep.event_independent; ++x)
        for (size_t y = 0; y < ny; ++y)
            if (std::abs(in.event_given[x][y] - in.event_given[0][0]) > 1e-12) {
                rep.event_independent = false;
                break;
            }

    // block (x, y) of rho_{X<->Y<->E} is P(x,y) rho_y; conditioned on the
    // event the weight becomes P(x,y|E). Given y the E-state is unchanged
    // because the chain makes E independent of (X, event) there.
    auto coeff_cond = [&](size_t x, size_t y) {
        return pe > 0 ? in.p_xy[x][y] * in.event_given[x][y] / pe : 0.0;
    };
    auto coeff_cond_bar = [&](size_t x, size_t y) {
        return pe < 1 ? in.p_xy[x][y] * (1.0 - in.event_given[x][y]) / (1.0 - pe) : 0.0;
    };

    rep.max_residual = 0;
    rep.split_residual = 0;
    rep.tau_trace = 0;
    rep.tau_min_eigenvalue = 0;

    if (pe >= 1.0 - 1e-15) {
        // conditioning on a sure event changes nothing; both identities
        // collapse to rho = rho
        rep.ok = true;
        rep.tau_trace = 1.0;
        rep.note = "event almost sure, tau unconstrained";
        return rep;
    }

    double min_eig = 1e9;
    for (size_t x = 0; x < nx; ++x)
        for (size_t y = 0; y < ny; ++y) {
            double w = in.p_xy[x][y];
            double wc = coeff_cond(x, y);
            // tau block from the P[E]^2 identity
            double tau_coeff = (w - pe * pe * wc) / (1.0 - pe * pe);
            rep.tau_trace += tau_coeff;
            std::vector<cplx> block(dim * dim);
            for (size_t k = 0; k < dim * dim; ++k)
                block[k] = tau_coeff * in.rho_y[y].entries()[k];
            auto eig = hermitian_eigenvalues(block, dim);
            min_eig = std::min(min_eig, eig.front());
            // reassemble the block from the two components
            for (size_t k = 0; k < dim * dim; ++k) {
                cplx lhs = w * in.rho_y[y].entries()[k];
                cplx rhs = pe * pe * wc * in.rho_y[y].entries()[k] + (1.0 - pe * pe) * block[k];
                rep.max_residual = std::max(rep.max_residual, std::abs(lhs - rhs));
            }
            if (rep.event_independent && pe > 0) {
                for (size_t k = 0; k < dim * dim; ++k) {
                    cplx lhs = w * in.rho_y[y].entries()[k];
                    cplx rhs = (pe * wc + (1.0 - pe) * coeff_cond_bar(x, y)) *
                               in.rho_y[y].entries()[k];
                    rep.split_residual = std::max(rep.split_residual, std::abs(lhs - rhs));
                }
            }
        }
    rep.tau_min_eigenvalue = min_eig;
    rep.ok = rep.max_residual <= 1e-9 && std::abs(rep.tau_trace - 1.0) <= 1e-9 &&
             min_eig >= -1e-9 && (!rep.event_independent || rep.split_residual <= 1e-9);
    return rep;
}

} // namespace qid
