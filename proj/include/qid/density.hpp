#pragma once

#include <complex>
#include <vector>

#include "qid/distributions.hpp"

namespace qid {

using cplx = std::complex<double>;

/// Small complex density matrix (dimension <= 64), row-major. Construction
/// checks Hermiticity, unit trace and positive semidefiniteness.
class DensityMatrix {
public:
    DensityMatrix(size_t dim, std::vector<cplx> entries);

    static DensityMatrix from_pure(const std::vector<cplx>& state);
    static DensityMatrix maximally_mixed(size_t dim);

    size_t dim() const { return dim_; }
    const cplx& at(size_t r, size_t c) const { return a_[r * dim_ + c]; }
    const std::vector<cplx>& entries() const { return a_; }

private:
    size_t dim_;
    std::vector<cplx> a_;
};

/// Eigenvalues of a Hermitian matrix (row-major, dim x dim), ascending.
/// Cyclic Jacobi on the doubled real-symmetric embedding.
std::vector<double> hermitian_eigenvalues(const std::vector<cplx>& h, size_t dim);

/// Half the trace norm of rho - sigma.
double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma);

struct MeasurementEntropy {
    double hmin;        // Hmin(X | Theta)
    double hmin_smooth; // at the requested eps
};

/// Exact conditional (smooth) min-entropy of the outcome of measuring an
/// n-qubit pure state in a uniformly random +/x basis string; n <= 5, all
/// 2^n basis choices enumerated. Qubit 0 is the most significant index bit.
MeasurementEntropy exact_measurement_entropy(const std::vector<cplx>& state, double eps);

struct MarkovInput {
    std::vector<std::vector<double>> p_xy;         // P(x, y)
    std::vector<DensityMatrix> rho_y;              // E-state per y value
    std::vector<std::vector<double>> event_given;  // P(event | x, y)
};

struct MarkovReport {
    bool ok = false;
    double event_prob = 0;
    bool event_independent = false;
    double tau_trace = 0;
    double tau_min_eigenvalue = 0;
    double max_residual = 0;      // decomposition identity, entrywise
    double split_residual = 0;    // convex split, when independent
    std::string note;
};

/// Verifies the conditional-independence decomposition on a concrete
/// classical-classical-quantum state: the P(event)^2 identity yields a
/// valid density matrix tau, and an (x,y)-independent event splits the
/// state convexly. All checks entrywise to 1e-9.
MarkovReport markov_decompose_check(const MarkovInput& in);

} // namespace qid
