// qcore.hpp — density matrices, Bloch vectors, partial trace, entanglement and collective spin operators
#pragma once

#include <complex>
#include <stdexcept>
#include <Eigen/Dense>

namespace oqs {

using cd = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Raised by solvers and quadratures that fail to converge or produce
// out-of-tolerance states; the CLI maps it to a dedicated exit code.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DensityMatrix {
    Matrix m; // dim x dim, unit trace, Hermitian, positive within tolerance

    int dim() const { return static_cast<int>(m.rows()); }

    // Validates trace (1e-9), Hermiticity (1e-9) and eigenvalue floor (-1e-7).
    // Throws numeric_error with the offending numbers instead of clamping.
    void check(const char* where = "DensityMatrix") const;

    static DensityMatrix from_matrix(const Matrix& m);   // validating constructor
    static DensityMatrix unchecked(Matrix m);            // for solver-internal states
};

struct BlochVector {
    double px{0.0}, py{0.0}, pz{0.0};
    double norm() const;
};

struct CollectiveSpinOps {
    int N{1};              // number of two-level systems, maximal-spin sector j = N/2
    Matrix Jx, Jy, Jz;     // (N+1) x (N+1), Jz diagonal with entries -N/2 ... +N/2
};

// Pauli matrices in the sigma_z eigenbasis ordered (|0> = spin up).
const Matrix& pauli_x();
const Matrix& pauli_y();
const Matrix& pauli_z();

BlochVector bloch_from_dm(const DensityMatrix& rho);
DensityMatrix dm_from_bloch(const BlochVector& p);

// Traces out one factor of a dA x dB bipartition; keep = 0 keeps the first.
DensityMatrix partial_trace(const DensityMatrix& rho, int keep, int dA, int dB);

// Wootters concurrence of a two-qubit state.
double concurrence(const DensityMatrix& rho);

double purity(const DensityMatrix& rho);
double von_neumann_entropy(const DensityMatrix& rho); // base-2 logarithm

CollectiveSpinOps collective_ops(int N);

// exp(i a n.sigma) = cos(a) I + i sin(a) n.sigma for a unit vector n.
Matrix pauli_exponential(double a, double nx, double ny, double nz);

} // namespace oqs
