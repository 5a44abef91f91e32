// corrme.hpp — second-order time-local master equation keeping the initial system-environment correlations
#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "oqs/bath.hpp"
#include "oqs/qcore.hpp"

namespace oqs::corrme {

// Exponential switching of the bias, eps(t) = (eps0 - eps) e^{-t/t_eps} + eps.
struct Ramp {
    double t_eps{1.0};  // switching timescale, > 0
};

// The system is prepared with H_S0 = eps0 Jz + delta0 Jx in contact with the
// bath, kicked by the pi/2 pulse R = exp(i pi Jy / 2) at t = 0, and then
// evolved under H_S = eps Jz + delta Jx with coupling operator S = Jz.
struct MasterEqSetup {
    int N{1};            // spin count; dynamics close in the maximal-spin sector (N+1 levels)
    double eps0{1.0};    // bias before the quench
    double eps{1.0};     // bias after the quench
    double delta0{0.0};  // tunneling before the quench
    double delta{0.0};   // tunneling after the quench
    bath::BathSpec bath{};
    bool include_corr{true};   // keep the correlation pieces: corrected state and extra operator
    std::optional<Ramp> ramp{};

    void validate() const;
    double eps_at(double t) const;  // ramped bias profile, plain eps when no ramp is set
};

// Expansion of the twice-conjugated coupling operator in the {Jx, Jy, Jz}
// basis, S^R(lambda, t) = a1 Jx + a2 Jy + a3 Jz.
struct AlphaCoeffs {
    cd a1{0.0, 0.0};
    cd a2{0.0, 0.0};
    cd a3{0.0, 0.0};
};

// lambda integral of the alpha coefficients weighted by the mixed correlation,
// J_corr(t) = P Jx + Q Jy + Rc Jz.
struct CorrOperator {
    cd P{0.0, 0.0};
    cd Q{0.0, 0.0};
    cd Rc{0.0, 0.0};

    Matrix matrix(int N) const;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<DensityMatrix> states;
    double min_eigenvalue{0.0};   // most negative state eigenvalue seen along the run
    double max_local_error{0.0};  // largest step-doubling error estimate
};

// Environment correlation <E(u) E> at imaginary-time separation u >= 0.
// Injectable so exact few-mode references can drive the same construction.
using EnvCorrFn = std::function<double(double)>;

// Joint thermal state expanded to second order in the coupling and pushed
// through the pulse. Throws numeric_error at zero temperature, where the
// imaginary-time integral diverges.
DensityMatrix initial_state_second_order(const MasterEqSetup& setup);
DensityMatrix initial_state_second_order(const MasterEqSetup& setup, const EnvCorrFn& env_corr);

// Zeroth-order preparation, the pulsed system Gibbs state.
DensityMatrix initial_state_uncorrelated(const MasterEqSetup& setup);

// Coefficients of U_S(t) R e^{lambda H_S0} Jz e^{-lambda H_S0} R^dag U_S^dag(t);
// requires 0 <= lambda <= beta. Uses the quench propagator (no ramp).
AlphaCoeffs alpha_coeffs(const MasterEqSetup& setup, double lambda, double t);

// Gauss-Legendre lambda integral of the alpha coefficients against the mixed
// correlation; honors the ramp through a time-ordered propagator. Requires
// include_corr.
CorrOperator j_corr(const MasterEqSetup& setup, double t, int lambda_nodes = 64);

// The -(i/2) ([rho J_corr, S] - H.c.) piece alone; requires include_corr.
Matrix corr_term(const MasterEqSetup& setup, double t, const Matrix& rho);

// Full derivative of rho at time t: free commutator, memory integral over
// [0, t], and (when include_corr) the correlation term. Accepts any Hermitian
// unit-trace matrix, not only positive ones.
Matrix rhs(const MasterEqSetup& setup, double t, const Matrix& rho);

// Fixed-step fourth-order Runge-Kutta with a step-doubling error monitor.
// States are validated along the way (trace and Hermiticity to 1e-9,
// eigenvalues above -1e-7); a violation throws numeric_error naming the time.
Trajectory propagate(const MasterEqSetup& setup, double t_end, double dt = 0.005);

// Same propagation with the ramped bias; requires the ramp to be set. The
// propagator is built by time-ordered split-operator stepping.
Trajectory propagate_ramped(const MasterEqSetup& setup, double t_end, double dt = 0.005);

}  // namespace oqs::corrme
