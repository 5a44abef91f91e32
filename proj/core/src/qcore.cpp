// qcore.cpp — state containers, entanglement measures and collective spin algebra
#include "oqs/qcore.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace oqs {

namespace {
constexpr double trace_tol = 1e-9;
constexpr double herm_tol = 1e-9;
constexpr double eig_floor = -1e-7;

Matrix make_pauli(int which) {
    Matrix s(2, 2);
    const cd I(0.0, 1.0);
    switch (which) {
        case 0: s << 0, 1, 1, 0; break;
        case 1: s << 0, -I, I, 0; break;
        default: s << 1, 0, 0, -1; break;
    }
    return s;
}
} // namespace

const Matrix& pauli_x() { static const Matrix s = make_pauli(0); return s; }
const Matrix& pauli_y() { static const Matrix s = make_pauli(1); return s; }
const Matrix& pauli_z() { static const Matrix s = make_pauli(2); return s; }

void DensityMatrix::check(const char* where) const {
    if (m.rows() != m.cols() || m.rows() < 1)
        throw std::invalid_argument(std::string(where) + ": matrix is not square");
    const double tr_err = std::abs(m.trace() - cd(1.0, 0.0));
    if (tr_err > trace_tol) {
        std::ostringstream os;
        os << where << ": trace deviates from 1 by " << tr_err;
        throw numeric_error(os.str());
    }
    const double herm = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (herm > herm_tol) {
        std::ostringstream os;
        os << where << ": Hermiticity violated by " << herm;
        throw numeric_error(os.str());
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
    const double lam_min = es.eigenvalues().minCoeff();
    if (lam_min < eig_floor) {
        std::ostringstream os;
        os << where << ": eigenvalue " << lam_min << " below floor " << eig_floor;
        throw numeric_error(os.str());
    }
}

DensityMatrix DensityMatrix::from_matrix(const Matrix& m) {
    DensityMatrix rho{m};
    rho.check();
    return rho;
}

DensityMatrix DensityMatrix::unchecked(Matrix m) { return DensityMatrix{std::move(m)}; }

double BlochVector::norm() const { return std::sqrt(px * px + py * py + pz * pz); }

BlochVector bloch_from_dm(const DensityMatrix& rho) {
    if (rho.dim() != 2) throw std::invalid_argument("bloch_from_dm: dimension must be 2");
    return BlochVector{(rho.m * pauli_x()).trace().real(),
                       (rho.m * pauli_y()).trace().real(),
                       (rho.m * pauli_z()).trace().real()};
}

DensityMatrix dm_from_bloch(const BlochVector& p) {
    if (p.norm() > 1.0 + 1e-9)
        throw std::invalid_argument("dm_from_bloch: |p| > 1, not a state");
    Matrix m = 0.5 * (Matrix::Identity(2, 2) + p.px * pauli_x() + p.py * pauli_y() + p.pz * pauli_z());
    return DensityMatrix::unchecked(std::move(m));
}

DensityMatrix partial_trace(const DensityMatrix& rho, int keep, int dA, int dB) {
    if (dA < 1 || dB < 1 || dA * dB != rho.dim())
        throw std::invalid_argument("partial_trace: dimension does not factor as dA*dB");
    if (keep != 0 && keep != 1)
        throw std::invalid_argument("partial_trace: keep must be 0 or 1");
    const int dK = keep == 0 ? dA : dB;
    const int dT = keep == 0 ? dB : dA;
    Matrix out = Matrix::Zero(dK, dK);
    for (int i = 0; i < dK; ++i)
        for (int j = 0; j < dK; ++j)
            for (int k = 0; k < dT; ++k) {
                // composite index (a,b) -> a*dB + b
                const int r = keep == 0 ? i * dB + k : k * dB + i;
                const int c = keep == 0 ? j * dB + k : k * dB + j;
                out(i, j) += rho.m(r, c);
            }
    return DensityMatrix::unchecked(std::move(out));
}

double concurrence(const DensityMatrix& rho) {
    if (rho.dim() != 4) throw std::invalid_argument("concurrence: dimension must be 4");
    Matrix yy = Matrix::Zero(4, 4);
    const Matrix& sy = pauli_y();
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c)
                for (int d = 0; d < 2; ++d)
                    yy(a * 2 + b, c * 2 + d) = sy(a, c) * sy(b, d);
    Matrix R = rho.m * yy * rho.m.conjugate() * yy;
    Eigen::ComplexEigenSolver<Matrix> es(R, false);
    std::array<double, 4> lam{};
    for (int i = 0; i < 4; ++i) lam[i] = std::max(0.0, es.eigenvalues()(i).real());
    std::sort(lam.begin(), lam.end(), std::greater<>());
    const double c = std::sqrt(lam[0]) - std::sqrt(lam[1]) - std::sqrt(lam[2]) - std::sqrt(lam[3]);
    return std::clamp(c, 0.0, 1.0);
}

double purity(const DensityMatrix& rho) { return (rho.m * rho.m).trace().real(); }

double von_neumann_entropy(const DensityMatrix& rho) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho.m + rho.m.adjoint()), Eigen::EigenvaluesOnly);
    double S = 0.0;
    for (int i = 0; i < rho.dim(); ++i) {
        const double lam = es.eigenvalues()(i);
        if (lam > 1e-15) S -= lam * std::log2(lam);
    }
    return std::max(0.0, S);
}

CollectiveSpinOps collective_ops(int N) {
    if (N < 1) throw std::invalid_argument("collective_ops: N must be >= 1");
    const int d = N + 1;
    const double j = 0.5 * N;
    Matrix Jp = Matrix::Zero(d, d); // raising operator in the basis m = -j ... +j
    for (int k = 0; k + 1 < d; ++k) {
        const double mlow = -j + k;
        Jp(k + 1, k) = std::sqrt(j * (j + 1) - mlow * (mlow + 1));
    }
    CollectiveSpinOps ops;
    ops.N = N;
    Matrix Jm = Jp.adjoint();
    ops.Jx = 0.5 * (Jp + Jm);
    ops.Jy = cd(0.0, -0.5) * (Jp - Jm);
    ops.Jz = Matrix::Zero(d, d);
    for (int k = 0; k < d; ++k) ops.Jz(k, k) = -j + k;
    return ops;
}

Matrix pauli_exponential(double a, double nx, double ny, double nz) {
    const double n = std::sqrt(nx * nx + ny * ny + nz * nz);
    if (std::abs(n - 1.0) > 1e-9)
        throw std::invalid_argument("pauli_exponential: axis must be a unit vector");
    const cd I(0.0, 1.0);
    return std::cos(a) * Matrix::Identity(2, 2) +
           I * std::sin(a) * (nx * pauli_x() + ny * pauli_y() + nz * pauli_z());
}

} // namespace oqs
