// dephasing.hpp — exact pure-dephasing dynamics of N two-level systems in a common bosonic bath
#pragma once

#include <variant>
#include <vector>

#include "oqs/bath.hpp"
#include "oqs/qcore.hpp"

namespace oqs::dephasing {

// Preparation operator applied to the thermal state at t = 0.
struct UncorrelatedPrep {};  // no operation, the system keeps its own Gibbs state
struct ProjectivePrep {      // weighted projector list sum_i P_i |psi_i><psi_i|
    std::vector<double> weights;  // nonnegative, not all zero
    std::vector<Vector> states;   // J_z-basis amplitudes, length N+1, index 0 <-> m = -N/2
};
enum class PulseTag { PiHalfJy };  // R = exp(i pi J_y / 2), spins-down -> +x
struct UnitaryPrep {
    PulseTag tag{PulseTag::PiHalfJy};
};
using Prep = std::variant<UncorrelatedPrep, ProjectivePrep, UnitaryPrep>;

struct DephasingRun {
    int N{1};         // spin count; the dynamics close in the maximal-spin sector (N+1 levels)
    double eps{1.0};  // energy bias of H_S = eps J_z
    bath::BathSpec bath{};
    Prep prep{UncorrelatedPrep{}};
    bath::QuadratureSettings quad{};

    void validate() const;
};

// One J_z-basis matrix element <u| rho_S(t) |v>, u and v in {-N/2, ..., N/2}.
struct JzMatrixElement {
    double u{0.0};
    double v{0.0};
    cd value{0.0, 0.0};
};

// Product initial state: the prepared system Gibbs state times the bath Gibbs
// state. Elements evolve as rho_uv(0) e^{-i eps (u-v) t} e^{-i Delta(t) (u^2 -
// v^2)} e^{-Gamma(t) (u-v)^2}; diagonal elements are frozen.
cd element_uncorrelated(const DephasingRun& run, double u, double v, double t);

// Joint thermal state pushed through the preparation operator; requires a
// preparation. Initial correlations enter through the level weight
// e^{beta l^2 C} and the extra phase e^{-2 i l (u-v) phi(t)}.
cd element_prepared(const DephasingRun& run, double u, double v, double t);

// The normalized factor sum_l mu_l e^{-i Phi_l} multiplying the initial
// element; modulus at most 1 when the mu form a convex combination. Throws
// when its normalizing sum (the initial element) is smaller than 1e-12 in
// magnitude, naming the offending (u, v) pair.
cd correlation_factor(const DephasingRun& run, double u, double v, double t);

// j_x = 2 <J_x> / N. The two-argument form follows the preparation: prepared
// runs use the correlated solution, plain runs the product-state one.
double jx_expectation(const DephasingRun& run, double t);
double jx_expectation(const DephasingRun& run, double t, bool correlated);

// Full (N+1) x (N+1) density matrix in the J_z basis, index 0 <-> m = -N/2.
Matrix state_matrix(const DephasingRun& run, double t, bool correlated);

std::vector<JzMatrixElement> all_elements(const DephasingRun& run, double t, bool correlated);

// |+x>^N amplitudes in the J_z basis; the projector shipped with the presets.
Vector plus_x_amplitudes(int N);

// The pi/2 pulse R = exp(i pi J_y / 2) in the J_z basis.
Matrix pulse_matrix(int N);

}  // namespace oqs::dephasing
