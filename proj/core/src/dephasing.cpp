// dephasing.cpp — exact pure-dephasing solution in the J_z eigenbasis
#include "oqs/dephasing.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace oqs::dephasing {

namespace {

struct Factors {
    double gamma{0.0};
    double delta{0.0};
    double phi{0.0};
    double c{0.0};
};

Factors bath_factors(const DephasingRun& run, double t) {
    Factors f;
    f.gamma = bath::gamma_decoherence(run.bath, t, run.quad);
    f.delta = bath::delta_indirect(run.bath, t);
    f.phi = bath::phi_shift(run.bath, t);
    f.c = bath::c_factor(run.bath);
    return f;
}

int index_of(int n, double u, const char* where) {
    const double two = 2.0 * u;
    const long r = std::lround(two);
    if (std::abs(two - r) > 1e-9 || r < -n || r > n || ((r + n) % 2 != 0))
        throw std::invalid_argument(std::string(where) +
                                    ": u, v must be J_z eigenvalues in {-N/2, ..., N/2}");
    return static_cast<int>((r + n) / 2);
}

// Boltzmann-style level weights e^{beta (-eps l + c l^2)}, shifted so the
// largest becomes 1; at beta = inf only the maximizing levels survive.
std::vector<double> level_weights(int n, double eps, double c, double beta) {
    std::vector<double> q(n + 1);
    for (int k = 0; k <= n; ++k) {
        const double l = k - 0.5 * n;
        q[k] = -eps * l + c * l * l;
    }
    const double qmax = *std::max_element(q.begin(), q.end());
    std::vector<double> w(n + 1);
    if (std::isinf(beta)) {
        const double scale = std::max(1.0, std::abs(qmax));
        for (int k = 0; k <= n; ++k) w[k] = (qmax - q[k] <= 1e-14 * scale) ? 1.0 : 0.0;
    } else {
        for (int k = 0; k <= n; ++k) w[k] = std::exp(beta * (q[k] - qmax));
    }
    return w;
}

// Per-level preparation data: occupation n_l = <l|T^dag T|l> and the bracket
// b_l(u, v) = <l|T^dag P_uv T|l> with P_uv = |v><u|.
struct PrepData {
    bool identity{false};
    std::vector<double> occupation;
    Matrix columns;                  // unitary pulse, T|l> stored as columns
    std::vector<double> weights;     // projective list
    std::vector<Vector> normalized;  // projective states scaled to unit norm

    cd bracket(int iu, int iv, int k) const {
        if (identity) return (k == iu && k == iv) ? cd{1.0, 0.0} : cd{0.0, 0.0};
        if (!normalized.empty()) {
            cd acc{0.0, 0.0};
            for (std::size_t i = 0; i < weights.size(); ++i)
                acc += weights[i] * std::norm(normalized[i](k)) * normalized[i](iu) *
                       std::conj(normalized[i](iv));
            return acc;
        }
        return columns(iu, k) * std::conj(columns(iv, k));
    }
};

PrepData prep_data(const DephasingRun& run) {
    PrepData pd;
    const int n = run.N;
    if (std::holds_alternative<UncorrelatedPrep>(run.prep)) {
        pd.identity = true;
        pd.occupation.assign(n + 1, 1.0);
        return pd;
    }
    if (const auto* pp = std::get_if<ProjectivePrep>(&run.prep)) {
        pd.weights = pp->weights;
        pd.occupation.assign(n + 1, 0.0);
        for (std::size_t i = 0; i < pp->states.size(); ++i) {
            Vector psi = pp->states[i];
            psi /= psi.norm();
            pd.normalized.push_back(std::move(psi));
            for (int k = 0; k <= n; ++k)
                pd.occupation[k] += pd.weights[i] * std::norm(pd.normalized[i](k));
        }
        return pd;
    }
    pd.columns = pulse_matrix(n);
    pd.occupation.assign(n + 1, 1.0);
    return pd;
}

Matrix matrix_core(const DephasingRun& run, double t, bool correlated) {
    run.validate();
    if (!(t >= 0.0)) throw std::invalid_argument("dephasing: t must be >= 0");
    if (correlated && std::holds_alternative<UncorrelatedPrep>(run.prep))
        throw std::invalid_argument("dephasing: the correlated solution requires a preparation");

    const int n = run.N;
    const Factors f = bath_factors(run, t);
    const double c_eff = correlated ? f.c : 0.0;
    const std::vector<double> w = level_weights(n, run.eps, c_eff, run.bath.beta);
    const PrepData pd = prep_data(run);

    double den = 0.0;
    for (int k = 0; k <= n; ++k) den += pd.occupation[k] * w[k];

    Matrix rho(n + 1, n + 1);
    for (int a = 0; a <= n; ++a)
        for (int b = 0; b <= n; ++b) {
            const double u = a - 0.5 * n;
            const double v = b - 0.5 * n;
            cd num{0.0, 0.0};
            for (int k = 0; k <= n; ++k) {
                if (w[k] == 0.0) continue;
                cd term = pd.bracket(a, b, k) * w[k];
                if (correlated) {
                    // Sign fixed against exact diagonalization of the joint
                    // spin-boson model; see the Fock-space oracle test.
                    const double l = k - 0.5 * n;
                    term *= std::exp(cd(0.0, 2.0 * l * (u - v) * f.phi));
                }
                num += term;
            }
            const cd phase =
                std::exp(cd(0.0, -run.eps * (u - v) * t - f.delta * (u * u - v * v)));
            rho(a, b) = phase * std::exp(-f.gamma * (u - v) * (u - v)) * num / den;
        }
    return rho;
}

}  // namespace

void DephasingRun::validate() const {
    if (N < 1) throw std::invalid_argument("DephasingRun: N must be >= 1");
    if (!std::isfinite(eps)) throw std::invalid_argument("DephasingRun: eps must be finite");
    bath.validate();
    quad.validate();
    if (const auto* pp = std::get_if<ProjectivePrep>(&prep)) {
        if (pp->weights.empty() || pp->weights.size() != pp->states.size())
            throw std::invalid_argument(
                "DephasingRun: projective preparation needs matching, nonempty weight and "
                "state lists");
        double total = 0.0;
        for (double wi : pp->weights) {
            if (!(wi >= 0.0) || !std::isfinite(wi))
                throw std::invalid_argument(
                    "DephasingRun: projective weights must be finite and nonnegative");
            total += wi;
        }
        if (!(total > 0.0))
            throw std::invalid_argument("DephasingRun: projective weights are not normalizable");
        for (const Vector& psi : pp->states) {
            if (psi.size() != N + 1)
                throw std::invalid_argument(
                    "DephasingRun: projective states must have length N + 1");
            if (!(psi.norm() > 0.0))
                throw std::invalid_argument(
                    "DephasingRun: projective states must have positive norm");
        }
    }
}

cd element_uncorrelated(const DephasingRun& run, double u, double v, double t) {
    const int iu = index_of(run.N, u, "element_uncorrelated");
    const int iv = index_of(run.N, v, "element_uncorrelated");
    return matrix_core(run, t, false)(iu, iv);
}

cd element_prepared(const DephasingRun& run, double u, double v, double t) {
    const int iu = index_of(run.N, u, "element_prepared");
    const int iv = index_of(run.N, v, "element_prepared");
    return matrix_core(run, t, true)(iu, iv);
}

cd correlation_factor(const DephasingRun& run, double u, double v, double t) {
    run.validate();
    if (!(t >= 0.0)) throw std::invalid_argument("dephasing: t must be >= 0");
    if (std::holds_alternative<UncorrelatedPrep>(run.prep))
        throw std::invalid_argument("dephasing: the correlation factor requires a preparation");
    const int n = run.N;
    const int iu = index_of(n, u, "correlation_factor");
    const int iv = index_of(n, v, "correlation_factor");

    const Factors f = bath_factors(run, t);
    const std::vector<double> w = level_weights(n, run.eps, f.c, run.bath.beta);
    const PrepData pd = prep_data(run);

    double den = 0.0;
    for (int k = 0; k <= n; ++k) den += pd.occupation[k] * w[k];
    cd base{0.0, 0.0};
    cd phased{0.0, 0.0};
    for (int k = 0; k <= n; ++k) {
        if (w[k] == 0.0) continue;
        const cd b = pd.bracket(iu, iv, k) * w[k];
        const double l = k - 0.5 * n;
        base += b;
        phased += b * std::exp(cd(0.0, 2.0 * l * (u - v) * f.phi));
    }
    if (std::abs(base / den) < 1e-12) {
        std::ostringstream msg;
        msg << "correlation_factor: the normalizing sum vanishes at u = " << u << ", v = " << v;
        throw std::invalid_argument(msg.str());
    }
    return phased / base;
}

double jx_expectation(const DephasingRun& run, double t, bool correlated) {
    const Matrix rho = state_matrix(run, t, correlated);
    const CollectiveSpinOps ops = collective_ops(run.N);
    return 2.0 / run.N * (rho * ops.Jx).trace().real();
}

double jx_expectation(const DephasingRun& run, double t) {
    return jx_expectation(run, t, !std::holds_alternative<UncorrelatedPrep>(run.prep));
}

Matrix state_matrix(const DephasingRun& run, double t, bool correlated) {
    return matrix_core(run, t, correlated);
}

std::vector<JzMatrixElement> all_elements(const DephasingRun& run, double t, bool correlated) {
    const Matrix rho = matrix_core(run, t, correlated);
    std::vector<JzMatrixElement> out;
    out.reserve(static_cast<std::size_t>(run.N + 1) * (run.N + 1));
    for (int a = 0; a <= run.N; ++a)
        for (int b = 0; b <= run.N; ++b)
            out.push_back({a - 0.5 * run.N, b - 0.5 * run.N, rho(a, b)});
    return out;
}

Vector plus_x_amplitudes(int N) {
    if (N < 1) throw std::invalid_argument("plus_x_amplitudes: N must be >= 1");
    Vector a(N + 1);
    for (int k = 0; k <= N; ++k) {
        const double logc =
            std::lgamma(N + 1.0) - std::lgamma(k + 1.0) - std::lgamma(N - k + 1.0);
        a(k) = std::exp(0.5 * (logc - N * std::log(2.0)));
    }
    return a;
}

Matrix pulse_matrix(int N) {
    if (N < 1) throw std::invalid_argument("pulse_matrix: N must be >= 1");
    const CollectiveSpinOps ops = collective_ops(N);
    Eigen::SelfAdjointEigenSolver<Matrix> es(ops.Jy);
    Vector ph(N + 1);
    for (int k = 0; k <= N; ++k)
        ph(k) = std::exp(cd(0.0, 0.5 * M_PI * es.eigenvalues()(k)));
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace oqs::dephasing
