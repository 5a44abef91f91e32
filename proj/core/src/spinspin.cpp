// spinspin.cpp — configuration sums, weight classes and closed-form central-spin propagation
#include "oqs/spinspin.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace oqs::spinspin {

namespace {

constexpr int exhaustive_cap = 24;

// One group of environment configurations with equal eigenvalues.
struct TermClass {
    double count = 1.0;
    std::uint32_t rep = 0;
    double e = 0.0;
    double eps = 0.0;
    double lambda = 0.0;
};

int bond_count(const SpinEnvConfig& env) {
    return env.chain == ChainTopology::Periodic ? env.N : env.N - 1;
}

void spin_sums(const SpinEnvConfig& env, std::uint32_t mask, double& e, double& eps,
               double& lam) {
    e = eps = lam = 0.0;
    for (int i = 0; i < env.N; ++i) {
        const double sign = (mask >> i) & 1u ? -1.0 : 1.0;
        e += sign * env.g[i];
        eps += sign * env.eps_env[i];
    }
    const int bonds = bond_count(env);
    for (int i = 0; i < bonds; ++i) {
        const int j = (i + 1) % env.N;
        const double si = (mask >> i) & 1u ? -1.0 : 1.0;
        const double sj = (mask >> j) & 1u ? -1.0 : 1.0;
        lam += env.alpha[i] * si * sj;
    }
}

double binom(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    k = std::min(k, n - k);
    double res = 1.0;
    for (int i = 1; i <= k; ++i) {
        res = res * static_cast<double>(n - k + i) / static_cast<double>(i);
        if (res < 9.0e15) res = std::round(res);
    }
    return res;
}

// Pattern with the given down-spin and up-spin run lengths, interleaved from
// bit 0 upwards; bit set means spin down.
std::uint32_t mask_from_runs(const std::vector<int>& down_runs, const std::vector<int>& up_runs,
                             bool down_first) {
    std::uint32_t mask = 0;
    int pos = 0;
    std::size_t di = 0, ui = 0;
    bool down = down_first;
    while (di < down_runs.size() || ui < up_runs.size()) {
        const int len = down ? down_runs[di++] : up_runs[ui++];
        if (down)
            for (int k = 0; k < len; ++k) mask |= 1u << (pos + k);
        pos += len;
        down = !down;
    }
    return mask;
}

std::vector<int> run_lengths(int total, int runs) {
    std::vector<int> out(runs, 1);
    if (runs > 0) out[0] = total - runs + 1;
    return out;
}

// Weight classes of a uniform environment. With alpha = 0 these are the N+1
// binomial classes over the down-spin count m; otherwise configurations are
// further keyed by the number of anti-aligned bonds.
std::vector<TermClass> collapsed_classes(const SpinEnvConfig& env) {
    const double g = env.g[0];
    const double epsi = env.eps_env[0];
    const double alpha = env.alpha[0];
    const int n = env.N;
    const bool periodic = env.chain == ChainTopology::Periodic;
    std::vector<TermClass> out;

    auto low_bits = [](int m) { return m == 0 ? 0u : (1u << m) - 1u; };

    if (alpha == 0.0) {
        for (int m = 0; m <= n; ++m)
            out.push_back({binom(n, m), low_bits(m), g * (n - 2 * m), epsi * (n - 2 * m), 0.0});
        return out;
    }

    const double full_chain = alpha * static_cast<double>(periodic ? n : n - 1);
    out.push_back({1.0, 0u, g * n, epsi * n, full_chain});
    if (n == 1) {
        out.push_back({1.0, 1u, -g, -epsi, full_chain});
        return out;
    }
    out.push_back({1.0, low_bits(n), -g * n, -epsi * n, full_chain});

    for (int m = 1; m <= n - 1; ++m) {
        const int u = n - m;
        const double e = g * (n - 2 * m);
        const double eps = epsi * (n - 2 * m);
        if (periodic) {
            // j down-runs force j up-runs and 2j anti-aligned bonds on the ring
            for (int j = 1; j <= std::min(m, u); ++j) {
                const double count =
                    static_cast<double>(n) / j * binom(m - 1, j - 1) * binom(u - 1, j - 1);
                const std::uint32_t rep =
                    mask_from_runs(run_lengths(m, j), run_lengths(u, j), true);
                out.push_back({count, rep, e, eps, alpha * (n - 4 * j)});
            }
        } else {
            // open chain: j down-runs with z up-runs give j + z - 1 walls
            for (int j = 1; j <= m; ++j) {
                const double ones = binom(m - 1, j - 1);
                if (ones == 0.0) continue;
                if (j - 1 >= 1 && j - 1 <= u) {
                    const double count = ones * binom(u - 1, j - 2);
                    if (count > 0.0) {
                        const int walls = 2 * (j - 1);
                        const std::uint32_t rep =
                            mask_from_runs(run_lengths(m, j), run_lengths(u, j - 1), true);
                        out.push_back({count, rep, e, eps, alpha * (n - 1 - 2 * walls)});
                    }
                }
                if (j <= u) {
                    const double count = ones * binom(u - 1, j - 1);
                    if (count > 0.0) {
                        const int walls = 2 * j - 1;
                        const std::uint32_t down_first =
                            mask_from_runs(run_lengths(m, j), run_lengths(u, j), true);
                        const std::uint32_t up_first =
                            mask_from_runs(run_lengths(m, j), run_lengths(u, j), false);
                        out.push_back({count, down_first, e, eps, alpha * (n - 1 - 2 * walls)});
                        out.push_back({count, up_first, e, eps, alpha * (n - 1 - 2 * walls)});
                    }
                }
                if (j + 1 <= u) {
                    const double count = ones * binom(u - 1, j);
                    if (count > 0.0) {
                        const int walls = 2 * j;
                        const std::uint32_t rep =
                            mask_from_runs(run_lengths(m, j), run_lengths(u, j + 1), false);
                        out.push_back({count, rep, e, eps, alpha * (n - 1 - 2 * walls)});
                    }
                }
            }
        }
    }
    return out;
}

SumMode resolve_mode(const SpinEnvConfig& env, SumMode mode) {
    if (mode == SumMode::Auto)
        mode = env.identical() ? SumMode::Collapsed : SumMode::Exhaustive;
    if (mode == SumMode::Collapsed && !env.identical())
        throw std::invalid_argument(
            "collapsed configuration sums require identical environment parameters");
    if (mode == SumMode::Exhaustive && env.N > exhaustive_cap)
        throw std::invalid_argument(
            "exhaustive enumeration is capped at N = 24; use collapse_identical for identical "
            "parameters or evolve_bloch_sampled otherwise");
    return mode;
}

template <class F>
void for_each_class(const SpinEnvConfig& env, SumMode resolved, F&& f) {
    if (resolved == SumMode::Collapsed) {
        for (const TermClass& c : collapsed_classes(env)) f(c);
        return;
    }
    const std::uint32_t total = 1u << env.N;
    for (std::uint32_t mask = 0; mask < total; ++mask) {
        TermClass c;
        c.count = 1.0;
        c.rep = mask;
        spin_sums(env, mask, c.e, c.eps, c.lambda);
        f(c);
    }
}

double half_splitting(double bias, double delta) {
    return 0.5 * std::hypot(bias, delta);
}

// log Tr exp(-beta h) for the 2x2 central Hamiltonian with splitting +-d
double log_pair_trace(double beta, double d) {
    return beta * d + std::log1p(std::exp(-2.0 * beta * d));
}

using Eigen::Matrix2cd;
using Eigen::Matrix3d;
using Eigen::Matrix4cd;
using Eigen::Matrix4d;
using Eigen::Vector3d;
using Eigen::Vector4d;

// (eps_n/2) sigma_z + (delta/2) sigma_x as a real 2x2 block
Eigen::Matrix2d central_block(double eps_n, double delta) {
    Eigen::Matrix2d h;
    h << 0.5 * eps_n, 0.5 * delta, 0.5 * delta, -0.5 * eps_n;
    return h;
}

Matrix4cd kron2(const Matrix2cd& a, const Matrix2cd& b) {
    Matrix4cd out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return out;
}

Matrix4d kron2d(const Eigen::Matrix2d& a, const Eigen::Matrix2d& b) {
    Matrix4d out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return out;
}

Matrix4d two_qubit_hamiltonian(double eps_n, double delta, double kappa) {
    const Eigen::Matrix2d h2 = central_block(eps_n, delta);
    const Eigen::Matrix2d id = Eigen::Matrix2d::Identity();
    Eigen::Matrix2d sz;
    sz << 1.0, 0.0, 0.0, -1.0;
    return kron2d(h2, id) + kron2d(id, h2) + kappa * kron2d(sz, sz);
}

// controlled-phase in the sigma_x eigenbasis: exp(i pi/4) (1 - 2 |mm><mm|)
// with |m> the lower sigma_x eigenvector
Matrix4cd cz_matrix() {
    Vector4d v;
    v << 0.5, -0.5, -0.5, 0.5;
    Matrix4d real_part = Matrix4d::Identity() - 2.0 * (v * v.transpose());
    return std::exp(cd(0.0, M_PI / 4.0)) * real_part.cast<cd>();
}

// cos(d t) - i sin(d t) h / d for the 2x2 central block with splitting d
Matrix2cd evolution2(const Eigen::Matrix2d& h, double d, double t) {
    if (d == 0.0) return Matrix2cd::Identity();
    const double c = std::cos(d * t), s = std::sin(d * t);
    return c * Matrix2cd::Identity() - cd(0.0, s / d) * h.cast<cd>();
}

// normalized 2x2 Gibbs state of the central block
Matrix2cd gibbs2(const Eigen::Matrix2d& h, double d, double beta) {
    if (d == 0.0) return 0.5 * Matrix2cd::Identity();
    const double th = std::tanh(beta * d);
    return 0.5 * (Matrix2cd::Identity() - (th / d) * h.cast<cd>());
}

Vector3d bloch_as_vec(const BlochVector& p) { return Vector3d(p.px, p.py, p.pz); }

BlochVector vec_as_bloch(const Vector3d& v) { return {v(0), v(1), v(2)}; }

Matrix3d axis_rotation(double ax, double az, double theta) {
    const double norm = std::hypot(ax, az);
    if (norm == 0.0) return Matrix3d::Identity();
    return Eigen::AngleAxisd(theta, Vector3d(ax / norm, 0.0, az / norm)).toRotationMatrix();
}

void require_single_qubit(const CentralParams& central, const char* op) {
    if (central.prep != Prep::PiHalfY)
        throw std::invalid_argument(std::string(op) +
                                    " is the single-qubit path; use evolve_two_qubit for CZ runs");
}

void require_times(const std::vector<double>& ts) {
    for (double t : ts)
        if (!(t >= 0.0)) throw std::invalid_argument("evolution times must be nonnegative");
}

double corr_weight(const SpinEnvConfig& env, const CentralParams& central, double e) {
    const double d0 = half_splitting(central.eps0 + e, central.delta0);
    if (central.prep == Prep::PiHalfY) return 2.0 * std::cosh(env.beta * d0);
    if (central.kappa == 0.0) {
        const double c = 2.0 * std::cosh(env.beta * d0);
        return c * c;
    }
    const Matrix4d h = two_qubit_hamiltonian(central.eps0 + e, central.delta0, central.kappa);
    Eigen::SelfAdjointEigenSolver<Matrix4d> es(h);
    return (-env.beta * es.eigenvalues().array()).exp().sum();
}

// log of the correlation weight, with the class multiplicity and Boltzmann
// factor folded in; used to shift all exponentials before accumulating
double log_class_weight(const SpinEnvConfig& env, const CentralParams& central, bool correlated,
                        const TermClass& c) {
    double s = std::log(c.count) - env.beta * (0.5 * c.eps + c.lambda);
    if (!correlated) return s;
    const double d0 = half_splitting(central.eps0 + c.e, central.delta0);
    if (central.prep == Prep::PiHalfY) return s + log_pair_trace(env.beta, d0);
    if (central.kappa == 0.0) return s + 2.0 * log_pair_trace(env.beta, d0);
    const Matrix4d h = two_qubit_hamiltonian(central.eps0 + c.e, central.delta0, central.kappa);
    Eigen::SelfAdjointEigenSolver<Matrix4d> es(h);
    const double mu0 = es.eigenvalues().minCoeff();
    return s - env.beta * mu0 +
           std::log((-env.beta * (es.eigenvalues().array() - mu0)).exp().sum());
}

// prepared correlated single-qubit Bloch vector for one configuration class
Vector3d prepared_vector(const SpinEnvConfig& env, const CentralParams& central, double e) {
    const double d0 = half_splitting(central.eps0 + e, central.delta0);
    if (d0 == 0.0) return Vector3d::Zero();
    const double fac = std::tanh(env.beta * d0) / (2.0 * d0);
    return fac * Vector3d(central.eps0 + e, 0.0, -central.delta0);
}

std::vector<BlochVector> bloch_core(const SpinEnvConfig& env, const CentralParams& central,
                                    bool correlated, const std::vector<double>& ts, SumMode mode) {
    env.validate();
    require_single_qubit(central, "evolve_bloch");
    require_times(ts);
    const SumMode resolved = resolve_mode(env, mode);

    double smax = -std::numeric_limits<double>::infinity();
    for_each_class(env, resolved, [&](const TermClass& c) {
        smax = std::max(smax, log_class_weight(env, central, correlated, c));
    });

    const Vector3d p0 = bloch_as_vec(initial_bloch(env, central, false));
    std::vector<Matrix3d> msum;
    std::vector<Vector3d> vsum;
    if (correlated)
        vsum.assign(ts.size(), Vector3d::Zero());
    else
        msum.assign(ts.size(), Matrix3d::Zero());
    double denom = 0.0;

    for_each_class(env, resolved, [&](const TermClass& c) {
        const double w = std::exp(log_class_weight(env, central, correlated, c) - smax);
        denom += w;
        const double eps_n = central.eps + c.e;
        const double omega = std::hypot(eps_n, central.delta0);
        const Vector3d q = correlated ? prepared_vector(env, central, c.e) : Vector3d::Zero();
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const Matrix3d r = axis_rotation(central.delta0, eps_n, omega * ts[i]);
            if (correlated)
                vsum[i] += w * (r * q);
            else
                msum[i] += w * r;
        }
    });

    std::vector<BlochVector> out(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i)
        out[i] = vec_as_bloch(correlated ? Vector3d(vsum[i] / denom) : Vector3d((msum[i] / denom) * p0));
    return out;
}

std::vector<DensityMatrix> two_qubit_core(const SpinEnvConfig& env, const CentralParams& central,
                                          bool correlated, const std::vector<double>& ts,
                                          TwoQubitRoute route, SumMode mode) {
    env.validate();
    if (central.prep != Prep::CZ)
        throw std::invalid_argument("evolve_two_qubit requires the CZ preparation");
    require_times(ts);
    const SumMode resolved = resolve_mode(env, mode);
    if (route == TwoQubitRoute::Auto)
        route = central.kappa == 0.0 ? TwoQubitRoute::Product : TwoQubitRoute::General;
    if (route == TwoQubitRoute::Product && central.kappa != 0.0)
        throw std::invalid_argument("the product route requires kappa = 0");

    const Matrix4cd cz = cz_matrix();

    // uncorrelated preparation: central Gibbs state, entangled by the pulse
    Matrix4cd rho0 = Matrix4cd::Zero();
    {
        const Matrix4d h0 = two_qubit_hamiltonian(central.eps0, central.delta0, central.kappa);
        Eigen::SelfAdjointEigenSolver<Matrix4d> es(h0);
        const Eigen::Array4d w =
            (-env.beta * (es.eigenvalues().array() - es.eigenvalues().minCoeff())).exp();
        Matrix4d gibbs = es.eigenvectors() * (w / w.sum()).matrix().asDiagonal() *
                         es.eigenvectors().transpose();
        rho0 = cz * gibbs.cast<cd>() * cz.adjoint();
    }

    double smax = -std::numeric_limits<double>::infinity();
    for_each_class(env, resolved, [&](const TermClass& c) {
        smax = std::max(smax, log_class_weight(env, central, correlated, c));
    });

    std::vector<Matrix4cd> acc(ts.size(), Matrix4cd::Zero());
    double denom = 0.0;

    for_each_class(env, resolved, [&](const TermClass& c) {
        const double w = std::exp(log_class_weight(env, central, correlated, c) - smax);
        denom += w;
        const double eps_n = central.eps + c.e;

        // per-configuration prepared state
        Matrix4cd state;
        if (!correlated) {
            state = rho0;
        } else {
            const double eps0_n = central.eps0 + c.e;
            Matrix4cd gibbs;
            if (central.kappa == 0.0) {
                const Eigen::Matrix2d h02 = central_block(eps0_n, central.delta0);
                const double d0 = half_splitting(eps0_n, central.delta0);
                const Matrix2cd rho2 = gibbs2(h02, d0, env.beta);
                gibbs = kron2(rho2, rho2);
            } else {
                const Matrix4d h0 = two_qubit_hamiltonian(eps0_n, central.delta0, central.kappa);
                Eigen::SelfAdjointEigenSolver<Matrix4d> es(h0);
                const Eigen::Array4d bw =
                    (-env.beta * (es.eigenvalues().array() - es.eigenvalues().minCoeff())).exp();
                gibbs = (es.eigenvectors() * (bw / bw.sum()).matrix().asDiagonal() *
                         es.eigenvectors().transpose())
                            .cast<cd>();
            }
            state = cz * gibbs * cz.adjoint();
        }

        if (route == TwoQubitRoute::Product) {
            const Eigen::Matrix2d h2 = central_block(eps_n, central.delta0);
            const double d = half_splitting(eps_n, central.delta0);
            for (std::size_t i = 0; i < ts.size(); ++i) {
                const Matrix2cd u2 = evolution2(h2, d, ts[i]);
                const Matrix4cd u4 = kron2(u2, u2);
                acc[i] += w * (u4 * state * u4.adjoint());
            }
        } else {
            const Matrix4d h4 = two_qubit_hamiltonian(eps_n, central.delta0, central.kappa);
            Eigen::SelfAdjointEigenSolver<Matrix4d> es(h4);
            const Matrix4cd vc = es.eigenvectors().cast<cd>();
            for (std::size_t i = 0; i < ts.size(); ++i) {
                const Eigen::Vector4cd phases =
                    (cd(0.0, -ts[i]) * es.eigenvalues().array()).exp().matrix();
                const Matrix4cd u4 = vc * phases.asDiagonal() * vc.adjoint();
                acc[i] += w * (u4 * state * u4.adjoint());
            }
        }
    });

    std::vector<DensityMatrix> out;
    out.reserve(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i)
        out.push_back(DensityMatrix::from_matrix(acc[i] / denom));
    return out;
}

}  // namespace

void SpinEnvConfig::validate() const {
    if (N < 1) throw std::invalid_argument("environment needs at least one spin");
    const auto n = static_cast<std::size_t>(N);
    if (g.size() != n || eps_env.size() != n || alpha.size() != n)
        throw std::invalid_argument("environment parameter arrays must have length N");
    if (!(beta > 0.0) || !std::isfinite(beta))
        throw std::invalid_argument("inverse temperature must be positive and finite");
}

bool SpinEnvConfig::identical() const {
    auto uniform = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
    };
    return uniform(g) && uniform(eps_env) && uniform(alpha);
}

void enumerate_terms(const SpinEnvConfig& env, const CentralParams& central, bool correlated,
                     const std::function<void(const EnvConfigTerm&)>& sink) {
    env.validate();
    if (env.N > exhaustive_cap)
        throw std::invalid_argument(
            "exhaustive enumeration is capped at N = 24; use collapse_identical for identical "
            "parameters or evolve_bloch_sampled otherwise");
    const std::uint32_t total = 1u << env.N;
    for (std::uint32_t mask = 0; mask < total; ++mask) {
        EnvConfigTerm term;
        term.n = mask;
        spin_sums(env, mask, term.e_n, term.eps_n, term.lambda_n);
        term.k_n = std::exp(-env.beta * (0.5 * term.eps_n + term.lambda_n));
        term.A_n = correlated ? corr_weight(env, central, term.e_n) : 1.0;
        sink(term);
    }
}

std::vector<EnvConfigTerm> enumerate_terms(const SpinEnvConfig& env, const CentralParams& central,
                                           bool correlated) {
    std::vector<EnvConfigTerm> out;
    out.reserve(std::size_t{1} << std::min(env.N, 20));
    enumerate_terms(env, central, correlated,
                    [&](const EnvConfigTerm& term) { out.push_back(term); });
    return out;
}

std::vector<CollapsedTerm> collapse_identical(const SpinEnvConfig& env,
                                              const CentralParams& central, bool correlated) {
    env.validate();
    if (!env.identical())
        throw std::invalid_argument(
            "collapse_identical requires uniform couplings, biases and chain couplings");
    std::vector<CollapsedTerm> out;
    for (const TermClass& c : collapsed_classes(env)) {
        CollapsedTerm ct;
        ct.multiplicity = c.count;
        ct.term.n = c.rep;
        ct.term.e_n = c.e;
        ct.term.eps_n = c.eps;
        ct.term.lambda_n = c.lambda;
        ct.term.k_n = std::exp(-env.beta * (0.5 * c.eps + c.lambda));
        ct.term.A_n = correlated ? corr_weight(env, central, c.e) : 1.0;
        out.push_back(ct);
    }
    return out;
}

BlochVector initial_bloch(const SpinEnvConfig& env, const CentralParams& central,
                          bool correlated) {
    env.validate();
    require_single_qubit(central, "initial_bloch");
    if (!correlated) {
        const double d0 = half_splitting(central.eps0, central.delta0);
        if (d0 == 0.0) return {0.0, 0.0, 0.0};
        const double fac = std::tanh(env.beta * d0) / (2.0 * d0);
        return {fac * central.eps0, 0.0, -fac * central.delta0};
    }
    return bloch_core(env, central, true, {0.0}, SumMode::Auto).front();
}

BlochVector evolve_bloch(const SpinEnvConfig& env, const CentralParams& central, bool correlated,
                         double t, SumMode mode) {
    return bloch_core(env, central, correlated, {t}, mode).front();
}

std::vector<BlochVector> bloch_series(const SpinEnvConfig& env, const CentralParams& central,
                                      bool correlated, const std::vector<double>& t_grid,
                                      SumMode mode) {
    return bloch_core(env, central, correlated, t_grid, mode);
}

DensityMatrix evolve_two_qubit(const SpinEnvConfig& env, const CentralParams& central,
                               bool correlated, double t, TwoQubitRoute route, SumMode mode) {
    return two_qubit_core(env, central, correlated, {t}, route, mode).front();
}

std::vector<DensityMatrix> two_qubit_series(const SpinEnvConfig& env, const CentralParams& central,
                                            bool correlated, const std::vector<double>& t_grid,
                                            TwoQubitRoute route, SumMode mode) {
    return two_qubit_core(env, central, correlated, t_grid, route, mode);
}

std::vector<std::pair<double, double>> concurrence_curve(const SpinEnvConfig& env,
                                                         const CentralParams& central,
                                                         bool correlated,
                                                         const std::vector<double>& t_grid) {
    const auto states = two_qubit_core(env, central, correlated, t_grid, TwoQubitRoute::Auto,
                                       SumMode::Auto);
    std::vector<std::pair<double, double>> out;
    out.reserve(t_grid.size());
    for (std::size_t i = 0; i < t_grid.size(); ++i)
        out.emplace_back(t_grid[i], concurrence(states[i]));
    return out;
}

SampledBloch evolve_bloch_sampled(const SpinEnvConfig& env, const CentralParams& central,
                                  bool correlated, double t, int samples, std::uint64_t seed) {
    env.validate();
    require_single_qubit(central, "evolve_bloch_sampled");
    if (!(t >= 0.0)) throw std::invalid_argument("evolution times must be nonnegative");
    if (samples < 100) throw std::invalid_argument("sampled evolution needs at least 100 samples");

    // draw each spin from the bias part of its Boltzmann weight; the chain and
    // correlation factors become importance weights
    std::vector<double> p_down(env.N);
    for (int i = 0; i < env.N; ++i) p_down[i] = 1.0 / (1.0 + std::exp(-env.beta * env.eps_env[i]));

    // upper bound on the log importance weight keeps exponentials from overflowing
    double bound = 0.0;
    for (double a : env.alpha) bound += env.beta * std::abs(a);
    if (correlated) {
        double reach = std::abs(central.eps0);
        for (double gi : env.g) reach += std::abs(gi);
        bound += env.beta * 0.5 * std::hypot(reach, central.delta0) + std::log(2.0);
    }

    const Vector3d p0 = bloch_as_vec(initial_bloch(env, central, false));
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    const int n_batches = 10;
    const int per_batch = samples / n_batches;
    std::vector<Vector3d> batch_vals;
    Vector3d num_total = Vector3d::Zero();
    double den_total = 0.0;

    for (int b = 0; b < n_batches; ++b) {
        Vector3d num = Vector3d::Zero();
        double den = 0.0;
        for (int s = 0; s < per_batch; ++s) {
            std::uint32_t mask = 0;
            for (int i = 0; i < env.N; ++i)
                if (unif(gen) < p_down[i]) mask |= 1u << i;
            double e = 0.0, lam = 0.0;
            for (int i = 0; i < env.N; ++i)
                e += ((mask >> i) & 1u ? -1.0 : 1.0) * env.g[i];
            const int bonds = bond_count(env);
            for (int i = 0; i < bonds; ++i) {
                const int j = (i + 1) % env.N;
                const double si = (mask >> i) & 1u ? -1.0 : 1.0;
                const double sj = (mask >> j) & 1u ? -1.0 : 1.0;
                lam += env.alpha[i] * si * sj;
            }
            double logw = -env.beta * lam - bound;
            if (correlated)
                logw += log_pair_trace(env.beta, half_splitting(central.eps0 + e, central.delta0));
            const double w = std::exp(logw);
            const double eps_n = central.eps + e;
            const double omega = std::hypot(eps_n, central.delta0);
            const Matrix3d r = axis_rotation(central.delta0, eps_n, omega * t);
            const Vector3d q = correlated ? prepared_vector(env, central, e) : p0;
            num += w * (r * q);
            den += w;
        }
        batch_vals.push_back(den > 0.0 ? Vector3d(num / den) : Vector3d::Zero());
        num_total += num;
        den_total += den;
    }

    SampledBloch out;
    out.value = vec_as_bloch(num_total / den_total);
    Vector3d mean = Vector3d::Zero();
    for (const auto& v : batch_vals) mean += v;
    mean /= static_cast<double>(n_batches);
    Vector3d var = Vector3d::Zero();
    for (const auto& v : batch_vals) var += (v - mean).cwiseProduct(v - mean);
    var /= static_cast<double>(n_batches - 1);
    out.std_error = std::sqrt(var.maxCoeff() / n_batches);
    return out;
}

}  // namespace oqs::spinspin
