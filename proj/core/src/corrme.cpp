// corrme.cpp — correlation-aware master equation: initial state, alpha algebra, memory kernel, propagation
#include "oqs/corrme.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "oqs/dephasing.hpp"

namespace oqs::corrme {
namespace {

// quadrature request for the correlator evaluations feeding the lambda
// integrals, tight enough that doubling the node count is not dominated by
// inner quadrature noise
bath::QuadratureSettings corr_quad() {
    bath::QuadratureSettings qs;
    qs.rel_tol = 1e-10;
    return qs;
}

template <typename F>
Matrix hermitian_fn(const Matrix& h, F&& f) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    Matrix out = Matrix::Zero(h.rows(), h.cols());
    for (int k = 0; k < h.rows(); ++k)
        out += f(es.eigenvalues()(k)) * es.eigenvectors().col(k) * es.eigenvectors().col(k).adjoint();
    return out;
}

// Gauss-Legendre nodes and weights on [0, 1] from the eigendecomposition of
// the Jacobi matrix; weights sum to one
struct GlRule {
    std::vector<double> x;
    std::vector<double> w;
};

GlRule gl_rule(int n) {
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double b = k / std::sqrt(4.0 * k * k - 1.0);
        jac(k, k - 1) = jac(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
    GlRule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int k = 0; k < n; ++k) {
        r.x[k] = 0.5 * (es.eigenvalues()(k) + 1.0);
        const double v0 = es.eigenvectors()(0, k);
        r.w[k] = v0 * v0;
    }
    return r;
}

struct SystemOps {
    CollectiveSpinOps J;
    Matrix r;    // pi/2 pulse about Jy
    Matrix hs0;  // preparation Hamiltonian
};

SystemOps system_ops(const MasterEqSetup& s) {
    SystemOps ops{collective_ops(s.N), dephasing::pulse_matrix(s.N), {}};
    ops.hs0 = s.eps0 * ops.J.Jz + s.delta0 * ops.J.Jx;
    return ops;
}

double mean_of(const Matrix& h, const Matrix& e, double beta, double lambda) {
    Matrix rho = hermitian_fn(h, [&](double v) { return std::exp(cd(-beta * v)); });
    rho /= rho.trace();
    const Matrix disp = hermitian_fn(h, [&](double v) { return std::exp(cd(lambda * v)); }) * e *
                        hermitian_fn(h, [&](double v) { return std::exp(cd(-lambda * v)); });
    return std::abs((rho * disp).trace());
}

// thermal mean of the displaced coupling operator on a one-mode matrix model;
// the master equation drops its first-order term on the strength of this
double mean_coupling(const bath::BathSpec& spec) {
    const double beta = std::min(spec.beta, 8.0);
    const double w = spec.omega_c;
    const double lambda = 0.5 * std::min(beta, 1.0);
    if (spec.kind == bath::BathKind::Spin) {
        Matrix h(2, 2), e(2, 2);
        h << 0.0, 0.5 * w, 0.5 * w, 0.0;
        e << 1.0, 0.0, 0.0, -1.0;
        return mean_of(h, e, beta, lambda);
    }
    const int nf = 24;
    Matrix h = Matrix::Zero(nf, nf), e = Matrix::Zero(nf, nf);
    for (int n = 0; n < nf; ++n) {
        h(n, n) = w * n;
        if (n + 1 < nf) e(n, n + 1) = e(n + 1, n) = std::sqrt(n + 1.0);
    }
    return mean_of(h, e, beta, lambda);
}

// closed-form expansion coefficients for the quench propagator
AlphaCoeffs alpha_closed(double eps0, double delta0, double eps, double delta, double lambda, double t) {
    const double dp2 = eps0 * eps0 + delta0 * delta0;
    const double dt2 = eps * eps + delta * delta;

    cd ax, ay, az;
    if (dp2 == 0.0) {
        ax = ay = 0.0;
        az = 1.0;
    } else {
        const double dp = std::sqrt(dp2);
        ax = (eps0 * delta0 / dp2) * (1.0 - std::cosh(lambda * dp));
        ay = cd(0.0, -delta0 / dp) * std::sinh(lambda * dp);
        az = (eps0 * eps0 + delta0 * delta0 * std::cosh(lambda * dp)) / dp2;
    }

    double bx, by, bz, cx, cy, cz, dx, dy, dz;
    if (dt2 == 0.0) {
        bx = 1.0; by = 0.0; bz = 0.0;
        cx = 0.0; cy = 1.0; cz = 0.0;
        dx = 0.0; dy = 0.0; dz = 1.0;
    } else {
        const double dtl = std::sqrt(dt2);
        const double ct = std::cos(dtl * t), st = std::sin(dtl * t);
        bx = (delta * delta + eps * eps * ct) / dt2;
        by = (eps / dtl) * st;
        bz = (eps * delta / dt2) * (1.0 - ct);
        cx = -(eps / dtl) * st;
        cy = ct;
        cz = (delta / dtl) * st;
        dx = (eps * delta / dt2) * (1.0 - ct);
        dy = -(delta / dtl) * st;
        dz = 1.0 + (delta * delta / dt2) * (ct - 1.0);
    }

    AlphaCoeffs out;
    out.a1 = ax * dx + ay * cx - az * bx;
    out.a2 = ax * dy + ay * cy - az * by;
    out.a3 = ax * dz + ay * cz - az * bz;
    return out;
}

void scale_rows(Matrix& m, const Eigen::VectorXcd& ph) {
    for (int i = 0; i < m.rows(); ++i) m.row(i) *= ph(i);
}

// closed-form quench propagator U_S(t) through the eigenbasis of H_S
struct QuenchProp {
    Eigen::SelfAdjointEigenSolver<Matrix> es;

    explicit QuenchProp(const Matrix& hs) : es(hs) {}

    Matrix at(double t) const {
        const int dim = int(es.eigenvalues().size());
        Eigen::VectorXcd ph(dim);
        for (int k = 0; k < dim; ++k) ph(k) = std::exp(cd(0.0, -t * es.eigenvalues()(k)));
        return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
    }
};

// one split-operator step for the ramped Hamiltonian, bias frozen at the
// interval midpoint between the two half-kicks about Jz
struct SplitStepper {
    const MasterEqSetup* s;
    Eigen::VectorXd jz_diag;
    Eigen::SelfAdjointEigenSolver<Matrix> es_x;
    double h{-1.0};
    Matrix mx;

    SplitStepper(const MasterEqSetup& setup, const CollectiveSpinOps& J)
        : s(&setup), jz_diag(J.Jz.diagonal().real()), es_x(J.Jx) {}

    void set_h(double hh) {
        if (hh == h) return;
        h = hh;
        const int dim = int(jz_diag.size());
        Eigen::VectorXcd ph(dim);
        for (int k = 0; k < dim; ++k) ph(k) = std::exp(cd(0.0, -s->delta * h * es_x.eigenvalues()(k)));
        mx = es_x.eigenvectors() * ph.asDiagonal() * es_x.eigenvectors().adjoint();
    }

    void advance(Matrix& u, double t0) const {
        const double e = s->eps_at(t0 + 0.5 * h);
        const int dim = int(jz_diag.size());
        Eigen::VectorXcd ph(dim);
        for (int k = 0; k < dim; ++k) ph(k) = std::exp(cd(0.0, -0.5 * e * h * jz_diag(k)));
        scale_rows(u, ph);
        u = mx * u;
        scale_rows(u, ph);
    }
};

// lambda integral with the closed-form alpha coefficients (quench route)
CorrOperator j_corr_closed(const MasterEqSetup& setup, double t, const GlRule& gl) {
    const double beta = setup.bath.beta;
    const auto qs = corr_quad();
    CorrOperator out;
    for (size_t k = 0; k < gl.x.size(); ++k) {
        const double lambda = beta * gl.x[k];
        const AlphaCoeffs a = alpha_closed(setup.eps0, setup.delta0, setup.eps, setup.delta, lambda, t);
        const cd e = beta * gl.w[k] * bath::e_corr_mixed(setup.bath, lambda, t, qs);
        out.P += a.a1 * e;
        out.Q += a.a2 * e;
        out.Rc += a.a3 * e;
    }
    return out;
}

// lambda integral through an explicitly supplied propagator (ramped route);
// the conjugated operator stays in the {Jx, Jy, Jz} span, so projections
// recover the three coefficients exactly
CorrOperator j_corr_from_u(const MasterEqSetup& setup, const SystemOps& ops, const Matrix& u, double t,
                           const GlRule& gl) {
    const double beta = setup.bath.beta;
    const auto qs = corr_quad();
    Eigen::SelfAdjointEigenSolver<Matrix> es0(ops.hs0);
    const Matrix jz_e = es0.eigenvectors().adjoint() * ops.J.Jz * es0.eigenvectors();
    const int dim = setup.N + 1;
    const double jnorm = (ops.J.Jz * ops.J.Jz).trace().real();

    CorrOperator out;
    for (size_t k = 0; k < gl.x.size(); ++k) {
        const double lambda = beta * gl.x[k];
        Matrix s_e(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j)
                s_e(i, j) = jz_e(i, j) * std::exp(lambda * (es0.eigenvalues()(i) - es0.eigenvalues()(j)));
        const Matrix slam = es0.eigenvectors() * s_e * es0.eigenvectors().adjoint();
        const Matrix m = u * ops.r * slam * ops.r.adjoint() * u.adjoint();
        const cd e = beta * gl.w[k] * bath::e_corr_mixed(setup.bath, lambda, t, qs);
        out.P += e * (ops.J.Jx * m).trace() / jnorm;
        out.Q += e * (ops.J.Jy * m).trace() / jnorm;
        out.Rc += e * (ops.J.Jz * m).trace() / jnorm;
    }
    return out;
}

Matrix corr_term_impl(const MasterEqSetup& setup, const SystemOps& ops, double t, const Matrix& rho) {
    const Matrix jc = j_corr(setup, t).matrix(setup.N);
    const Matrix rj = rho * jc;
    const Matrix b = rj * ops.J.Jz - ops.J.Jz * rj;
    return cd(0.0, -0.5) * (b - b.adjoint());
}

// memory integral for a one-shot derivative evaluation, trapezoid over an
// internal s-grid fine enough for the qualitative rhs contracts
Matrix memory_term(const MasterEqSetup& setup, const SystemOps& ops, double t, const Matrix& rho) {
    const int dim = setup.N + 1;
    if (t == 0.0) return Matrix::Zero(dim, dim);

    const int n = std::max(8, int(std::ceil(t / 2e-3)));
    const double h = t / n;
    Matrix acc = Matrix::Zero(dim, dim);
    Matrix u_t(dim, dim);

    if (!setup.ramp) {
        const QuenchProp prop(setup.eps * ops.J.Jz + setup.delta * ops.J.Jx);
        for (int j = 0; j <= n; ++j) {
            const Matrix u = prop.at(j * h);
            const double coeff = (j == 0 || j == n) ? 0.5 : 1.0;
            acc += (coeff * bath::c_ts(setup.bath, t - j * h)) * (u.adjoint() * ops.J.Jz * u);
        }
        u_t = prop.at(t);
    } else {
        SplitStepper stepper(setup, ops.J);
        stepper.set_h(h);
        Matrix u = Matrix::Identity(dim, dim);
        for (int j = 0; j <= n; ++j) {
            const double coeff = (j == 0 || j == n) ? 0.5 : 1.0;
            acc += (coeff * bath::c_ts(setup.bath, t - j * h)) * (u.adjoint() * ops.J.Jz * u);
            if (j < n) stepper.advance(u, j * h);
        }
        u_t = u;
    }

    const Matrix lam = u_t * (h * acc) * u_t.adjoint();
    const Matrix lr = lam * rho;
    const Matrix d = lr * ops.J.Jz - ops.J.Jz * lr;
    return d + d.adjoint();
}

// everything the stepper needs, tabulated once per trajectory: the s-grid is
// four times finer than the quarter grid visited by the Runge-Kutta stages,
// which keeps the trapezoid error of the memory integral under the
// dt-halving contract
struct Workspace {
    int nq{0};  // quarter intervals (stage grid)
    double hq{0.0};
    int refine{4};  // fine s-grid points per quarter interval
    int nf{0};
    double hf{0.0};
    SystemOps ops;
    std::vector<Matrix> h_q;
    std::vector<Matrix> lam_q;
    std::vector<Matrix> jc_q;
    bool with_corr{false};
};

Workspace make_workspace(const MasterEqSetup& setup, int n_steps, double dt, bool ramped) {
    Workspace w;
    w.ops = system_ops(setup);
    w.nq = 4 * n_steps;
    w.hq = dt / 4.0;
    w.nf = w.refine * w.nq;
    w.hf = w.hq / w.refine;
    w.with_corr = setup.include_corr;
    const int dim = setup.N + 1;

    std::vector<Matrix> ws_f(w.nf + 1);
    std::vector<Matrix> u_q(w.nq + 1);
    std::vector<cd> c_f(w.nf + 1);
    for (int j = 0; j <= w.nf; ++j) c_f[j] = bath::c_ts(setup.bath, j * w.hf);

    if (!ramped) {
        const QuenchProp prop(setup.eps * w.ops.J.Jz + setup.delta * w.ops.J.Jx);
        for (int j = 0; j <= w.nf; ++j) {
            const Matrix u = prop.at(j * w.hf);
            ws_f[j] = u.adjoint() * w.ops.J.Jz * u;
            if (j % w.refine == 0) u_q[j / w.refine] = u;
        }
    } else {
        SplitStepper stepper(setup, w.ops.J);
        stepper.set_h(w.hf);
        Matrix u = Matrix::Identity(dim, dim);
        for (int j = 0; j <= w.nf; ++j) {
            ws_f[j] = u.adjoint() * w.ops.J.Jz * u;
            if (j % w.refine == 0) u_q[j / w.refine] = u;
            if (j < w.nf) stepper.advance(u, j * w.hf);
        }
    }

    w.h_q.resize(w.nq + 1);
    w.lam_q.resize(w.nq + 1);
    const GlRule gl = gl_rule(64);
    if (w.with_corr) w.jc_q.resize(w.nq + 1);

    for (int k = 0; k <= w.nq; ++k) {
        const double t = k * w.hq;
        w.h_q[k] = setup.eps_at(t) * w.ops.J.Jz + setup.delta * w.ops.J.Jx;

        const int m = w.refine * k;
        if (m == 0) {
            w.lam_q[k] = Matrix::Zero(dim, dim);
        } else {
            Matrix acc = 0.5 * (c_f[m] * ws_f[0] + c_f[0] * ws_f[m]);
            for (int j = 1; j < m; ++j) acc += c_f[m - j] * ws_f[j];
            w.lam_q[k] = u_q[k] * (w.hf * acc) * u_q[k].adjoint();
        }

        if (w.with_corr) {
            const CorrOperator jc = ramped ? j_corr_from_u(setup, w.ops, u_q[k], t, gl)
                                           : j_corr_closed(setup, t, gl);
            w.jc_q[k] = jc.matrix(setup.N);
        }
    }
    return w;
}

Matrix ws_rhs(const Workspace& w, int q, const Matrix& rho) {
    const Matrix& h = w.h_q[q];
    const Matrix& s = w.ops.J.Jz;
    Matrix out = cd(0.0, 1.0) * (rho * h - h * rho);
    const Matrix lr = w.lam_q[q] * rho;
    const Matrix d = lr * s - s * lr;
    out += d + d.adjoint();
    if (w.with_corr) {
        const Matrix rj = rho * w.jc_q[q];
        const Matrix b = rj * s - s * rj;
        out += cd(0.0, -0.5) * (b - b.adjoint());
    }
    return out;
}

Matrix rk4_step(const Workspace& w, int q0, const Matrix& rho, int stride) {
    const double h = 2.0 * stride * w.hq;
    const Matrix k1 = ws_rhs(w, q0, rho);
    const Matrix k2 = ws_rhs(w, q0 + stride, rho + (0.5 * h) * k1);
    const Matrix k3 = ws_rhs(w, q0 + stride, rho + (0.5 * h) * k2);
    const Matrix k4 = ws_rhs(w, q0 + 2 * stride, rho + h * k3);
    return rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void record_state(Trajectory& tr, const Matrix& m, double t) {
    const double tr_err = std::abs(m.trace() - cd(1.0));
    const double herm = (m - m.adjoint()).cwiseAbs().maxCoeff();
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
    const double mn = es.eigenvalues().minCoeff();
    if (tr_err > 1e-9 || herm > 1e-9 || mn < -1e-7) {
        std::ostringstream msg;
        msg << "propagate: state invariants violated at t = " << t << " (trace error " << tr_err
            << ", hermiticity " << herm << ", min eigenvalue " << mn << ")";
        throw numeric_error(msg.str());
    }
    tr.min_eigenvalue = std::min(tr.min_eigenvalue, mn);
    tr.times.push_back(t);
    tr.states.push_back(DensityMatrix::unchecked(m));
}

Trajectory propagate_impl(const MasterEqSetup& setup, double t_end, double dt, bool ramped) {
    setup.validate();
    if (ramped && !setup.ramp)
        throw std::invalid_argument("propagate_ramped: setup has no ramp");
    if (!ramped && setup.ramp)
        throw std::invalid_argument("propagate: setup has a ramp, use propagate_ramped");
    if (!(dt > 0.0)) throw std::invalid_argument("propagate: dt must be positive");
    if (t_end < 0.0) throw std::invalid_argument("propagate: negative horizon");

    const DensityMatrix rho0 = setup.include_corr ? initial_state_second_order(setup)
                                                  : initial_state_uncorrelated(setup);
    Trajectory tr;
    Eigen::SelfAdjointEigenSolver<Matrix> es0(rho0.m, Eigen::EigenvaluesOnly);
    tr.min_eigenvalue = es0.eigenvalues().minCoeff();
    tr.times.push_back(0.0);
    tr.states.push_back(rho0);
    if (t_end == 0.0) return tr;

    const int n_steps = std::max(1, int(std::llround(t_end / dt)));
    const double dt_eff = t_end / n_steps;
    const Workspace w = make_workspace(setup, n_steps, dt_eff, ramped);

    Matrix rho = rho0.m;
    for (int i = 0; i < n_steps; ++i) {
        const int q0 = 4 * i;
        const Matrix full = rk4_step(w, q0, rho, 2);
        Matrix half = rk4_step(w, q0, rho, 1);
        half = rk4_step(w, q0 + 2, half, 1);
        const double err = (full - half).cwiseAbs().maxCoeff() / 15.0;
        tr.max_local_error = std::max(tr.max_local_error, err);
        rho = full;
        record_state(tr, rho, (i + 1) * dt_eff);
    }
    return tr;
}

}  // namespace

void MasterEqSetup::validate() const {
    if (N < 1) throw std::invalid_argument("MasterEqSetup: N must be at least 1");
    for (double v : {eps0, eps, delta0, delta})
        if (!std::isfinite(v)) throw std::invalid_argument("MasterEqSetup: nonfinite Hamiltonian parameter");
    bath.validate();
    if (ramp && !(ramp->t_eps > 0.0))
        throw std::invalid_argument("MasterEqSetup: ramp timescale must be positive");
    if (mean_coupling(bath) > 1e-12)
        throw numeric_error("MasterEqSetup: bath coupling operator has a nonzero thermal mean");
}

double MasterEqSetup::eps_at(double t) const {
    if (!ramp) return eps;
    return (eps0 - eps) * std::exp(-t / ramp->t_eps) + eps;
}

Matrix CorrOperator::matrix(int N) const {
    const CollectiveSpinOps J = collective_ops(N);
    return P * J.Jx + Q * J.Jy + Rc * J.Jz;
}

DensityMatrix initial_state_uncorrelated(const MasterEqSetup& setup) {
    setup.validate();
    const SystemOps ops = system_ops(setup);
    const int dim = setup.N + 1;
    Eigen::SelfAdjointEigenSolver<Matrix> es(ops.hs0);
    const double dmin = es.eigenvalues().minCoeff();

    Matrix rho = Matrix::Zero(dim, dim);
    if (setup.bath.zero_temperature()) {
        // ground-space projector, spread over degenerate levels
        int count = 0;
        for (int k = 0; k < dim; ++k)
            if (es.eigenvalues()(k) - dmin <= 1e-12 * std::max(1.0, std::abs(dmin))) ++count;
        for (int k = 0; k < dim; ++k)
            if (es.eigenvalues()(k) - dmin <= 1e-12 * std::max(1.0, std::abs(dmin)))
                rho += (1.0 / count) * es.eigenvectors().col(k) * es.eigenvectors().col(k).adjoint();
    } else {
        double z = 0.0;
        for (int k = 0; k < dim; ++k) z += std::exp(-setup.bath.beta * (es.eigenvalues()(k) - dmin));
        for (int k = 0; k < dim; ++k)
            rho += (std::exp(-setup.bath.beta * (es.eigenvalues()(k) - dmin)) / z) *
                   es.eigenvectors().col(k) * es.eigenvectors().col(k).adjoint();
    }
    rho = ops.r * rho * ops.r.adjoint();
    rho = 0.5 * (rho + rho.adjoint());
    return DensityMatrix::from_matrix(rho);
}

DensityMatrix initial_state_second_order(const MasterEqSetup& setup, const EnvCorrFn& env_corr) {
    setup.validate();
    if (setup.bath.zero_temperature())
        throw numeric_error("initial_state_second_order: imaginary-time integral diverges at zero temperature");

    const double beta = setup.bath.beta;
    const SystemOps ops = system_ops(setup);
    const int dim = setup.N + 1;

    Eigen::SelfAdjointEigenSolver<Matrix> es(ops.hs0);
    const Eigen::VectorXd d = es.eigenvalues();
    const Matrix v = es.eigenvectors();
    const Matrix jz_e = v.adjoint() * ops.J.Jz * v;

    Eigen::VectorXd gw(dim);
    const double dmin = d.minCoeff();
    for (int i = 0; i < dim; ++i) gw(i) = std::exp(-beta * (d(i) - dmin));
    const double z = gw.sum();

    auto s_e = [&](double lambda) {
        Matrix m(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) m(i, j) = jz_e(i, j) * std::exp(lambda * (d(i) - d(j)));
        return m;
    };

    // double integral over the time-ordered triangle 0 <= lambda' <= lambda
    const GlRule gl = gl_rule(64);
    const int n = int(gl.x.size());
    Matrix k = Matrix::Zero(dim, dim);
    for (int a = 0; a < n; ++a) {
        const double lam = beta * gl.x[a];
        const Matrix sa = s_e(lam);
        Matrix inner = Matrix::Zero(dim, dim);
        for (int b = 0; b < n; ++b)
            inner += (lam * gl.w[b] * env_corr(lam * (1.0 - gl.x[b]))) * s_e(lam * gl.x[b]);
        k += (beta * gl.w[a]) * (sa * inner);
    }

    double tk = 0.0;
    for (int i = 0; i < dim; ++i) tk += gw(i) * k(i, i).real();
    const double zprime = 1.0 + tk / z;

    Matrix rho_e = (Matrix::Identity(dim, dim) + k) / zprime;
    for (int i = 0; i < dim; ++i) rho_e.row(i) *= gw(i) / z;
    Matrix rho = ops.r * (v * rho_e * v.adjoint()) * ops.r.adjoint();
    rho = 0.5 * (rho + rho.adjoint());
    return DensityMatrix::from_matrix(rho);
}

DensityMatrix initial_state_second_order(const MasterEqSetup& setup) {
    const bath::BathSpec spec = setup.bath;
    const auto qs = corr_quad();
    return initial_state_second_order(
        setup, [spec, qs](double u) { return bath::e_corr_mixed(spec, u, 0.0, qs).real(); });
}

AlphaCoeffs alpha_coeffs(const MasterEqSetup& setup, double lambda, double t) {
    setup.validate();
    if (lambda < 0.0 || lambda > setup.bath.beta)
        throw std::invalid_argument("alpha_coeffs: lambda must lie in [0, beta]");
    return alpha_closed(setup.eps0, setup.delta0, setup.eps, setup.delta, lambda, t);
}

CorrOperator j_corr(const MasterEqSetup& setup, double t, int lambda_nodes) {
    setup.validate();
    if (!setup.include_corr)
        throw std::invalid_argument("j_corr: include_corr is disabled in this setup");
    if (lambda_nodes < 2) throw std::invalid_argument("j_corr: need at least two lambda nodes");
    if (t < 0.0) throw std::invalid_argument("j_corr: negative time");
    if (setup.bath.zero_temperature())
        throw numeric_error("j_corr: lambda integral unbounded at zero temperature");

    const GlRule gl = gl_rule(lambda_nodes);
    if (!setup.ramp) return j_corr_closed(setup, t, gl);

    const SystemOps ops = system_ops(setup);
    const int dim = setup.N + 1;
    Matrix u = Matrix::Identity(dim, dim);
    if (t > 0.0) {
        SplitStepper stepper(setup, ops.J);
        const int nsub = std::max(1, int(std::ceil(t / 5e-4)));
        stepper.set_h(t / nsub);
        for (int j = 0; j < nsub; ++j) stepper.advance(u, j * (t / nsub));
    }
    return j_corr_from_u(setup, ops, u, t, gl);
}

Matrix corr_term(const MasterEqSetup& setup, double t, const Matrix& rho) {
    setup.validate();
    if (!setup.include_corr)
        throw std::invalid_argument("corr_term: include_corr is disabled in this setup");
    if (rho.rows() != setup.N + 1 || rho.cols() != setup.N + 1)
        throw std::invalid_argument("corr_term: state dimension does not match N");
    return corr_term_impl(setup, system_ops(setup), t, rho);
}

Matrix rhs(const MasterEqSetup& setup, double t, const Matrix& rho) {
    setup.validate();
    if (t < 0.0) throw std::invalid_argument("rhs: negative time");
    if (rho.rows() != setup.N + 1 || rho.cols() != setup.N + 1)
        throw std::invalid_argument("rhs: state dimension does not match N");

    const SystemOps ops = system_ops(setup);
    const Matrix h = setup.eps_at(t) * ops.J.Jz + setup.delta * ops.J.Jx;
    Matrix out = cd(0.0, 1.0) * (rho * h - h * rho);
    out += memory_term(setup, ops, t, rho);
    if (setup.include_corr) out += corr_term_impl(setup, ops, t, rho);
    return out;
}

Trajectory propagate(const MasterEqSetup& setup, double t_end, double dt) {
    return propagate_impl(setup, t_end, dt, false);
}

Trajectory propagate_ramped(const MasterEqSetup& setup, double t_end, double dt) {
    return propagate_impl(setup, t_end, dt, true);
}

}  // namespace oqs::corrme
