// test_corrme.cpp — correlation-aware master equation against dense-matrix, joint-Gibbs and exact-dephasing oracles
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "oqs/bath.hpp"
#include "oqs/corrme.hpp"
#include "oqs/dephasing.hpp"
#include "oqs/qcore.hpp"

using namespace oqs;
using namespace oqs::corrme;

namespace {

std::mt19937 rng(905173246u);

double urand(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// f(H) for Hermitian H through its eigendecomposition
template <typename F>
Matrix hermitian_fn(const Matrix& h, F&& f) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    Matrix out = Matrix::Zero(h.rows(), h.cols());
    for (int k = 0; k < h.rows(); ++k)
        out += f(es.eigenvalues()(k)) * es.eigenvectors().col(k) * es.eigenvectors().col(k).adjoint();
    return out;
}

// pi/2 rotation about Jy, built from scratch so the library path is not trusted
Matrix pulse(int n) {
    const CollectiveSpinOps J = collective_ops(n);
    return hermitian_fn(J.Jy, [](double v) { return std::exp(cd(0.0, M_PI / 2.0) * v); });
}

double jx_of(const Matrix& rho, const Matrix& Jx, int N) {
    return 2.0 * (rho * Jx).trace().real() / N;
}

std::vector<double> jx_curve(const Trajectory& tr, int N) {
    const CollectiveSpinOps J = collective_ops(N);
    std::vector<double> out;
    out.reserve(tr.states.size());
    for (const auto& st : tr.states) out.push_back(jx_of(st.m, J.Jx, N));
    return out;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    REQUIRE(a.size() == b.size());
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// Tr{rho E(a) E(b)} for one environment spin with H = (w/2) sx and coupling
// sz; complex displacements cover imaginary-time and real-time orderings
cd spin_mode_corr(double w, double beta, cd a, cd b) {
    Eigen::Matrix2cd sx, sz;
    sx << 0, 1, 1, 0;
    sz << 1, 0, 0, -1;
    auto exp_h = [&](cd s) -> Eigen::Matrix2cd {
        return std::cosh(0.5 * s * w) * Eigen::Matrix2cd::Identity() + std::sinh(0.5 * s * w) * sx;
    };
    Eigen::Matrix2cd rho = exp_h(-beta);
    rho /= rho.trace();
    auto e_at = [&](cd z) -> Eigen::Matrix2cd { return exp_h(z) * sz * exp_h(-z); };
    return (rho * e_at(a) * e_at(b)).trace();
}

bath::BathSpec fig_bath(double beta = 1.0, double s = 1.0, bath::BathKind kind = bath::BathKind::Bosonic) {
    bath::BathSpec spec;
    spec.kind = kind;
    spec.G = 0.05;
    spec.s = s;
    spec.omega_c = 5.0;
    spec.beta = beta;
    return spec;
}

MasterEqSetup pure_dephasing_setup(int N) {
    MasterEqSetup s;
    s.N = N;
    s.eps0 = s.eps = 4.0;
    s.delta0 = s.delta = 0.0;
    s.bath = fig_bath();
    return s;
}

MasterEqSetup beyond_dephasing_setup(int N) {
    MasterEqSetup s;
    s.N = N;
    s.eps0 = 4.0;
    s.eps = 2.5;
    s.delta0 = s.delta = 0.5;
    s.bath = fig_bath();
    return s;
}

// expansion coefficients of U_S(t) R e^{lambda H_S0} Jz e^{-lambda H_S0} R^dag U_S^dag(t)
// in {Jx, Jy, Jz}, all factors dense so no printed formula is reused
std::array<cd, 3> alpha_oracle(const MasterEqSetup& s, double lambda, double t, double* residual = nullptr) {
    const CollectiveSpinOps J = collective_ops(s.N);
    const Matrix hs0 = s.eps0 * J.Jz + s.delta0 * J.Jx;
    const Matrix hs = s.eps * J.Jz + s.delta * J.Jx;
    const Matrix r = pulse(s.N);
    const Matrix slam = hermitian_fn(hs0, [&](double v) { return std::exp(cd(lambda * v)); }) * J.Jz *
                        hermitian_fn(hs0, [&](double v) { return std::exp(cd(-lambda * v)); });
    const Matrix u = hermitian_fn(hs, [&](double v) { return std::exp(cd(0.0, -t * v)); });
    const Matrix m = u * r * slam * r.adjoint() * u.adjoint();

    std::array<cd, 3> c{};
    const Matrix basis[3] = {J.Jx, J.Jy, J.Jz};
    const double norm = (J.Jz * J.Jz).trace().real();
    Matrix rebuilt = Matrix::Zero(s.N + 1, s.N + 1);
    for (int k = 0; k < 3; ++k) {
        c[k] = (basis[k] * m).trace() / norm;
        rebuilt += c[k] * basis[k];
    }
    if (residual) *residual = (m - rebuilt).cwiseAbs().maxCoeff() / std::max(1.0, m.cwiseAbs().maxCoeff());
    return c;
}

// N = 1 system plus three environment spins, the full 16-dimensional Gibbs
// state of H_tot rotated by R and traced down to the qubit
DensityMatrix joint_gibbs_oracle(const MasterEqSetup& s, const std::array<double, 3>& w,
                                 const std::array<double, 3>& g) {
    const CollectiveSpinOps J = collective_ops(1);
    const Matrix i2 = Matrix::Identity(2, 2);
    Matrix sx(2, 2), sz(2, 2);
    sx << 0, 1, 1, 0;
    sz << 1, 0, 0, -1;

    Matrix h_env = Matrix::Zero(8, 8);
    Matrix e_env = Matrix::Zero(8, 8);
    for (int k = 0; k < 3; ++k) {
        Matrix hk = kron(kron(k == 0 ? sx : i2, k == 1 ? sx : i2), k == 2 ? sx : i2);
        Matrix ek = kron(kron(k == 0 ? sz : i2, k == 1 ? sz : i2), k == 2 ? sz : i2);
        h_env += 0.5 * w[k] * hk;
        e_env += g[k] * ek;
    }
    const Matrix hs0 = s.eps0 * J.Jz + s.delta0 * J.Jx;
    const Matrix h_tot = kron(hs0, Matrix::Identity(8, 8)) + kron(Matrix::Identity(2, 2), h_env) +
                         kron(J.Jz, e_env);
    Matrix gibbs = hermitian_fn(h_tot, [&](double v) { return std::exp(cd(-s.bath.beta * v)); });
    gibbs /= gibbs.trace();
    const Matrix r_full = kron(pulse(1), Matrix::Identity(8, 8));
    const DensityMatrix joint = DensityMatrix::from_matrix(r_full * gibbs * r_full.adjoint());
    return partial_trace(joint, 0, 2, 8);
}

Matrix random_hermitian_unit_trace(int dim) {
    Matrix a(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) a(i, j) = cd(urand(-1.0, 1.0), urand(-1.0, 1.0));
    Matrix h = 0.5 * (a + a.adjoint());
    h += ((1.0 - h.trace()) / double(dim)) * Matrix::Identity(dim, dim);
    return h;
}

} // namespace

TEST_CASE("setup validation and the ramped bias profile") {
    MasterEqSetup s = beyond_dephasing_setup(2);
    s.validate();

    MasterEqSetup bad = s;
    bad.N = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = s;
    bad.bath.G = -0.1;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = s;
    bad.ramp = Ramp{0.0};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    CHECK(s.eps_at(0.0) == s.eps);
    CHECK(s.eps_at(7.3) == s.eps);

    MasterEqSetup r = s;
    r.ramp = Ramp{0.5};
    CHECK(r.eps_at(0.0) == doctest::Approx(r.eps0).epsilon(1e-14));
    CHECK(r.eps_at(0.5) == doctest::Approx(r.eps + (r.eps0 - r.eps) * std::exp(-1.0)).epsilon(1e-14));
    CHECK(r.eps_at(50.0) == doctest::Approx(r.eps).epsilon(1e-12));
}

TEST_CASE("kubo-corrected initial state reduces to its known limits") {
    const CollectiveSpinOps J = collective_ops(3);
    MasterEqSetup s = beyond_dephasing_setup(3);

    // zero coupling leaves the rotated system Gibbs state
    MasterEqSetup free = s;
    free.bath.G = 0.0;
    const DensityMatrix got = initial_state_second_order(free);
    const Matrix hs0 = free.eps0 * J.Jz + free.delta0 * J.Jx;
    Matrix gibbs = hermitian_fn(hs0, [&](double v) { return std::exp(cd(-free.bath.beta * v)); });
    gibbs /= gibbs.trace();
    const Matrix r = pulse(3);
    CHECK((got.m - r * gibbs * r.adjoint()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((got.m - initial_state_uncorrelated(free).m).cwiseAbs().maxCoeff() <= 1e-12);

    // infinite temperature forgets everything
    MasterEqSetup hot = s;
    hot.bath.beta = 1e-6;
    const DensityMatrix mixed = initial_state_second_order(hot);
    CHECK((mixed.m - Matrix::Identity(4, 4) / 4.0).cwiseAbs().maxCoeff() <= 1e-5);

    const DensityMatrix full = initial_state_second_order(s);
    CHECK(std::abs(full.m.trace() - cd(1.0)) <= 1e-12);
    CHECK((full.m - full.m.adjoint()).cwiseAbs().maxCoeff() <= 1e-12);

    MasterEqSetup cold = s;
    cold.bath.beta = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(initial_state_second_order(cold), numeric_error);
}

TEST_CASE("initial state matches joint-gibbs diagonalization to third order") {
    MasterEqSetup s;
    s.N = 1;
    s.eps0 = 1.1;
    s.delta0 = 0.7;
    s.eps = s.eps0;
    s.delta = s.delta0;
    s.bath = fig_bath(1.3, 1.0, bath::BathKind::Spin);

    const std::array<double, 3> w{0.9, 1.7, 2.6};
    const std::array<double, 3> shape{1.0, 0.8, 0.6};

    auto error_at = [&](double gs) {
        std::array<double, 3> g{};
        for (int k = 0; k < 3; ++k) g[k] = gs * shape[k];
        // correlator of the three-mode environment from single-spin traces
        EnvCorrFn env = [&, g](double u) {
            double acc = 0.0;
            for (int k = 0; k < 3; ++k)
                acc += g[k] * g[k] * spin_mode_corr(w[k], s.bath.beta, cd(u), cd(0.0)).real();
            return acc;
        };
        const DensityMatrix second = initial_state_second_order(s, env);
        const DensityMatrix exact = joint_gibbs_oracle(s, w, g);
        return (second.m - exact.m).cwiseAbs().maxCoeff();
    };

    const double e1 = error_at(0.12);
    const double e2 = error_at(0.06);
    CHECK(e1 > 1e-8); // the third-order remainder must be visible, not noise
    const double ratio = e1 / e2;
    CHECK(ratio >= 6.0);
    CHECK(ratio <= 10.0);
}

TEST_CASE("alpha coefficients reproduce the conjugated coupling operator") {
    // boundary value: the pulse turns Jz into -Jx
    MasterEqSetup s = beyond_dephasing_setup(2);
    const AlphaCoeffs a0 = alpha_coeffs(s, 0.0, 0.0);
    CHECK(std::abs(a0.a1 - cd(-1.0)) <= 1e-14);
    CHECK(std::abs(a0.a2) <= 1e-14);
    CHECK(std::abs(a0.a3) <= 1e-14);

    for (int trial = 0; trial < 20; ++trial) {
        MasterEqSetup t;
        t.N = trial % 2 == 0 ? 1 : 3;
        t.eps0 = urand(0.3, 4.0);
        t.delta0 = urand(0.3, 4.0);
        t.eps = urand(0.3, 4.0);
        t.delta = urand(0.3, 4.0);
        t.bath = fig_bath(2.0);
        const double lambda = urand(0.0, 2.0);
        const double time = urand(0.0, 3.0);

        double residual = 0.0;
        const std::array<cd, 3> want = alpha_oracle(t, lambda, time, &residual);
        CHECK(residual <= 1e-12); // the operator stays inside the {Jx,Jy,Jz} span
        const AlphaCoeffs got = alpha_coeffs(t, lambda, time);
        const double scale = std::max({1.0, std::abs(want[0]), std::abs(want[1]), std::abs(want[2])});
        CHECK(std::abs(got.a1 - want[0]) <= 1e-10 * scale);
        CHECK(std::abs(got.a2 - want[1]) <= 1e-10 * scale);
        CHECK(std::abs(got.a3 - want[2]) <= 1e-10 * scale);
    }

    // free system Hamiltonians, both generators degenerate at zero
    MasterEqSetup z;
    z.N = 2;
    z.eps0 = z.delta0 = z.eps = z.delta = 0.0;
    z.bath = fig_bath(2.0);
    const std::array<cd, 3> wz = alpha_oracle(z, 1.3, 0.8);
    const AlphaCoeffs gz = alpha_coeffs(z, 1.3, 0.8);
    CHECK(std::abs(gz.a1 - wz[0]) <= 1e-12);
    CHECK(std::abs(gz.a2 - wz[1]) <= 1e-12);
    CHECK(std::abs(gz.a3 - wz[2]) <= 1e-12);

    // with no tunneling the operator just precesses about z
    MasterEqSetup pd = pure_dephasing_setup(2);
    for (double lambda : {0.0, 0.4, 1.0}) {
        const AlphaCoeffs g = alpha_coeffs(pd, lambda, 0.9);
        CHECK(std::abs(g.a1 - cd(-std::cos(pd.eps * 0.9))) <= 1e-12);
        CHECK(std::abs(g.a2 - cd(-std::sin(pd.eps * 0.9))) <= 1e-12);
        CHECK(std::abs(g.a3) <= 1e-12);
    }

    CHECK_THROWS_AS(alpha_coeffs(s, -0.1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(alpha_coeffs(s, s.bath.beta + 0.1, 0.0), std::invalid_argument);
}

TEST_CASE("lambda integral of the correlation operator converges and vanishes correctly") {
    MasterEqSetup s = beyond_dephasing_setup(4);

    for (double t : {0.5, 2.0}) {
        const CorrOperator c64 = j_corr(s, t, 64);
        const CorrOperator c128 = j_corr(s, t, 128);
        CHECK(std::abs(c64.P - c128.P) <= 1e-9);
        CHECK(std::abs(c64.Q - c128.Q) <= 1e-9);
        CHECK(std::abs(c64.Rc - c128.Rc) <= 1e-9);
    }

    MasterEqSetup free = s;
    free.bath.G = 0.0;
    const CorrOperator zero = j_corr(free, 1.0);
    CHECK(std::abs(zero.P) == 0.0);
    CHECK(std::abs(zero.Q) == 0.0);
    CHECK(std::abs(zero.Rc) == 0.0);

    auto norm_of = [](const CorrOperator& c) {
        return std::sqrt(std::norm(c.P) + std::norm(c.Q) + std::norm(c.Rc));
    };
    // the interval [0, beta] shrinks while a spin-bath correlator stays
    // bounded, so the operator must die linearly with beta; a bosonic bath
    // has no such limit because its thermal occupation grows like 1/beta
    MasterEqSetup spin_kind = s;
    spin_kind.bath.kind = bath::BathKind::Spin;
    MasterEqSetup hot = spin_kind;
    hot.bath.beta = 1e-6;
    const double n_hot = norm_of(j_corr(hot, 1.0));
    const double n_ref = norm_of(j_corr(spin_kind, 1.0));
    CHECK(n_hot <= 1e-5 * n_ref);

    MasterEqSetup off = s;
    off.include_corr = false;
    CHECK_THROWS_AS(j_corr(off, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(corr_term(off, 1.0, Matrix::Identity(5, 5)), std::invalid_argument);
}

TEST_CASE("master equation derivative is traceless hermitian and decomposes cleanly") {
    std::vector<MasterEqSetup> setups;
    setups.push_back(pure_dephasing_setup(1));
    setups.push_back(beyond_dephasing_setup(2));
    MasterEqSetup spin = beyond_dephasing_setup(2);
    spin.bath.kind = bath::BathKind::Spin;
    setups.push_back(spin);

    int done = 0;
    while (done < 100) {
        MasterEqSetup& s = setups[done % setups.size()];
        s.include_corr = done % 2 == 0;
        const double t = done % 3 == 0 ? 0.3 : 1.2;
        const Matrix rho = random_hermitian_unit_trace(s.N + 1);
        const Matrix d = rhs(s, t, rho);
        CHECK(std::abs(d.trace()) <= 1e-12);
        CHECK((d - d.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, d.cwiseAbs().maxCoeff()));
        ++done;
    }

    // the correlation term is exactly the difference between the two paths
    MasterEqSetup on = beyond_dephasing_setup(2);
    MasterEqSetup offp = on;
    offp.include_corr = false;
    const Matrix rho = random_hermitian_unit_trace(3);
    const Matrix d_on = rhs(on, 0.8, rho);
    const Matrix d_off = rhs(offp, 0.8, rho);
    const Matrix extra = corr_term(on, 0.8, rho);
    CHECK(((d_off + extra) - d_on).cwiseAbs().maxCoeff() == 0.0);

    // no coupling leaves the bare von Neumann commutator
    MasterEqSetup free = beyond_dephasing_setup(2);
    free.bath.G = 0.0;
    const CollectiveSpinOps J = collective_ops(2);
    const Matrix hs = free.eps * J.Jz + free.delta * J.Jx;
    const Matrix want = cd(0.0, 1.0) * (rho * hs - hs * rho);
    CHECK((rhs(free, 0.7, rho) - want).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("pure dephasing trajectories track the exact solution") {
    const double t_end = 3.0;

    for (int n : {1, 4}) {
        MasterEqSetup s = pure_dephasing_setup(n);
        dephasing::DephasingRun run;
        run.N = n;
        run.eps = s.eps;
        run.bath = s.bath;
        run.prep = dephasing::UnitaryPrep{};

        for (bool corr : {false, true}) {
            if (n == 4 && !corr) continue; // the N = 1 pair already pins the uncorrelated path
            s.include_corr = corr;
            const Trajectory tr = propagate(s, t_end);
            const std::vector<double> me = jx_curve(tr, n);
            double worst = 0.0;
            for (size_t i = 0; i < tr.times.size(); i += 10) {
                const double exact = dephasing::jx_expectation(run, tr.times[i], corr);
                worst = std::max(worst, std::abs(me[i] - exact));
            }
            CHECK(worst <= 0.05);
        }
    }
}

TEST_CASE("off-diagonal decay rate matches the dephasing influence derivative") {
    MasterEqSetup s = pure_dephasing_setup(1);
    s.include_corr = false;
    const Trajectory tr = propagate(s, 2.5);

    // numerical log-derivative of |rho_01| at t = 2 from the stored states
    const int i0 = 400;
    const double dt = tr.times[1] - tr.times[0];
    const int span = 10;
    const double lo = std::abs(tr.states[i0 - span].m(0, 1));
    const double hi = std::abs(tr.states[i0 + span].m(0, 1));
    const double rate = -(std::log(hi) - std::log(lo)) / (2.0 * span * dt);

    const double h = 1e-3;
    const double want =
        (bath::gamma_decoherence(s.bath, 2.0 + h) - bath::gamma_decoherence(s.bath, 2.0 - h)) / (2.0 * h);
    CHECK(std::abs(rate - want) <= 2e-3 * std::abs(want));
}

TEST_CASE("propagation conserves what the flow must conserve") {
    // free flow keeps purity
    MasterEqSetup free = beyond_dephasing_setup(2);
    free.bath.G = 0.0;
    const Trajectory tf = propagate(free, 1.0);
    CHECK(std::abs(purity(tf.states.back()) - purity(tf.states.front())) <= 1e-9);

    // zero horizon returns exactly the initial state
    MasterEqSetup s = beyond_dephasing_setup(3);
    const Trajectory t0 = propagate(s, 0.0);
    REQUIRE(t0.states.size() == 1);
    CHECK((t0.states[0].m - initial_state_second_order(s).m).cwiseAbs().maxCoeff() == 0.0);

    // trajectory states stay physical and the monitor stays quiet
    const Trajectory tr = propagate(s, 2.0, 0.01);
    REQUIRE(tr.times.size() == tr.states.size());
    for (size_t i = 0; i < tr.states.size(); ++i) {
        CHECK(std::abs(tr.states[i].m.trace() - cd(1.0)) <= 1e-9);
        CHECK((tr.states[i].m - tr.states[i].m.adjoint()).cwiseAbs().maxCoeff() <= 1e-9);
    }
    CHECK(tr.min_eigenvalue >= -1e-7);
    CHECK(tr.max_local_error <= 1e-7);

    // halving the step leaves the observable unchanged at the contract level
    MasterEqSetup h = beyond_dephasing_setup(2);
    const Trajectory c1 = propagate(h, 1.0, 0.005);
    const Trajectory c2 = propagate(h, 1.0, 0.0025);
    const CollectiveSpinOps J = collective_ops(2);
    const double a = jx_of(c1.states.back().m, J.Jx, 2);
    const double b = jx_of(c2.states.back().m, J.Jx, 2);
    CHECK(std::abs(a - b) <= 1e-6);

    CHECK_THROWS_AS(propagate(s, -1.0, 0.005), std::invalid_argument);
    CHECK_THROWS_AS(propagate(s, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("long-time populations relax toward the lower level") {
    // a wrong time direction in the memory kernel inverts the populations,
    // so the thermal ordering of the late-time state pins the convention
    MasterEqSetup s;
    s.N = 1;
    s.eps0 = s.eps = 1.0;
    s.delta0 = s.delta = 1.0;
    s.bath = fig_bath(2.0);
    s.include_corr = false;

    const Trajectory tr = propagate(s, 30.0, 0.01);
    const CollectiveSpinOps J = collective_ops(1);
    const Matrix hs = s.eps * J.Jz + s.delta * J.Jx;
    Eigen::SelfAdjointEigenSolver<Matrix> es(hs);
    const Vector gnd = es.eigenvectors().col(0);
    const Vector exc = es.eigenvectors().col(1);
    const double p_gnd = (gnd.adjoint() * tr.states.back().m * gnd)(0).real();
    const double p_exc = (exc.adjoint() * tr.states.back().m * exc)(0).real();
    CHECK(p_gnd > 0.8);
    CHECK(p_gnd > 4.0 * p_exc);
}

TEST_CASE("initial correlations grow with spin count temperature and bath memory") {
    auto deviation = [](MasterEqSetup s, double t_end, double dt) {
        s.include_corr = true;
        const std::vector<double> with = jx_curve(propagate(s, t_end, dt), s.N);
        s.include_corr = false;
        const std::vector<double> without = jx_curve(propagate(s, t_end, dt), s.N);
        return max_abs_diff(with, without);
    };

    // a spin environment also shows a visible correlation effect
    MasterEqSetup spin = beyond_dephasing_setup(4);
    spin.bath.kind = bath::BathKind::Spin;
    CHECK(deviation(spin, 6.0, 0.01) > 0.01);

    // colder preparation means stronger correlations
    MasterEqSetup base = beyond_dephasing_setup(10);
    std::vector<double> devs;
    for (double beta : {0.5, 1.0, 1.5}) {
        MasterEqSetup s = base;
        s.bath.beta = beta;
        devs.push_back(deviation(s, 3.0, 0.01));
    }
    CHECK(devs[0] < devs[1]);
    CHECK(devs[1] < devs[2]);

    // longer bath memory at sub-ohmic exponents amplifies the effect
    MasterEqSetup ohmic = beyond_dephasing_setup(4);
    MasterEqSetup sub = ohmic;
    sub.bath.s = 0.5;
    CHECK(deviation(sub, 3.0, 0.01) > deviation(ohmic, 3.0, 0.01));
}

TEST_CASE("ramped bias interpolates between the quench and frozen limits") {
    MasterEqSetup s;
    s.N = 2;
    s.eps0 = 4.0;
    s.eps = 2.0;
    s.delta0 = s.delta = 1.0;
    s.bath = fig_bath();

    const double t_end = 3.0;
    const double dt = 0.01;
    const std::vector<double> quench = jx_curve(propagate(s, t_end, dt), s.N);

    auto ramped = [&](double t_eps) {
        MasterEqSetup r = s;
        r.ramp = Ramp{t_eps};
        return jx_curve(propagate_ramped(r, t_end, dt), s.N);
    };

    const double d_fast = max_abs_diff(ramped(1e-4), quench);
    CHECK(d_fast <= 0.02);

    // a ramp far slower than the horizon freezes the bias at its initial value
    MasterEqSetup frozen = s;
    frozen.eps = frozen.eps0;
    const std::vector<double> eps0_run = jx_curve(propagate(frozen, t_end, dt), s.N);
    CHECK(max_abs_diff(ramped(1e4), eps0_run) <= 0.02);

    const double d_mid = max_abs_diff(ramped(0.1), quench);
    const double d_slow = max_abs_diff(ramped(1.0), quench);
    CHECK(d_fast < d_mid);
    CHECK(d_mid < d_slow);

    CHECK_THROWS_AS(propagate_ramped(s, 1.0, dt), std::invalid_argument);
}
