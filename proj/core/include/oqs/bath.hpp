// bath.hpp — spectral densities, influence functions, bath correlation functions and the quadrature engine
#pragma once

#include <complex>
#include <functional>

#include "oqs/qcore.hpp"

namespace oqs::bath {

enum class BathKind { Bosonic, Spin };

struct BathSpec {
    BathKind kind{BathKind::Bosonic};
    double G{0.0};        // coupling strength
    double s{1.0};        // Ohmicity exponent, s<1 sub-Ohmic, s=1 Ohmic, s>1 super-Ohmic
    double omega_c{1.0};  // cutoff frequency, exponential cutoff
    double beta{1.0};     // inverse temperature, +inf encodes T = 0

    bool zero_temperature() const;
    void validate() const;
};

struct QuadratureSettings {
    double rel_tol{1e-8};          // relative tolerance of adaptive quadrature
    double omega_max_factor{50.0}; // upper frequency limit as a multiple of omega_c
    double pv_window{0.05};        // principal-value exclusion half-width, fraction of the pole

    void validate() const;
};

// Scalar functions that fully determine dephasing-type dynamics.
struct DephasingFactors {
    double gamma{0.0};      // decoherence exponent
    double delta_ind{0.0};  // bath-induced indirect interaction phase
    double phi{0.0};        // phase entering correlated preparations
    double chi{0.0};        // extra coherence phase from a correlated preparation
    double gamma_corr{0.0}; // extra decoherence from a correlated preparation
};

// J(omega) = G omega^s omega_c^{1-s} exp(-omega/omega_c)
double spectral_density(const BathSpec& spec, double omega);

// Decoherence exponent, vacuum plus thermal part:
//   Gamma(t) = int J(w)/w^2 (1-cos wt) coth(beta w/2) dw
double gamma_decoherence(const BathSpec& spec, double t, const QuadratureSettings& qs = {});
double gamma_vacuum(const BathSpec& spec, double t);  // closed form; (G/2)ln(1+wc^2 t^2) at s=1
double gamma_thermal(const BathSpec& spec, double t, const QuadratureSettings& qs = {});

// Delta(t) = int J(w)/w^2 (sin wt - wt) dw  (<= 0, temperature independent)
double delta_indirect(const BathSpec& spec, double t);

// phi(t) = int J(w)/w^2 sin(wt) dw; G atan(wc t) at s=1
double phi_shift(const BathSpec& spec, double t);

// C = int J(w)/w dw; G wc at s=1
double c_factor(const BathSpec& spec);

// Quadrature routes of the closed forms above, kept separate so the two
// paths can be cross-checked.
double gamma_vacuum_quadrature(const BathSpec& spec, double t, const QuadratureSettings& qs = {});
double delta_indirect_quadrature(const BathSpec& spec, double t, const QuadratureSettings& qs = {});
double phi_shift_quadrature(const BathSpec& spec, double t, const QuadratureSettings& qs = {});
double c_factor_quadrature(const BathSpec& spec, const QuadratureSettings& qs = {});

// Parameter derivatives used by the estimation module (closed forms).
double gamma_vacuum_dwc(const BathSpec& spec, double t);
double phi_shift_dwc(const BathSpec& spec, double t);
double delta_indirect_dwc(const BathSpec& spec, double t);
double c_factor_dwc(const BathSpec& spec);
double gamma_thermal_dwc(const BathSpec& spec, double t, const QuadratureSettings& qs = {});

// Mixed imaginary/real-time correlation <E(lambda - it) E> with bare J(omega)
// weight (no 1/w^2), lambda in [0, beta].
cd e_corr_mixed(const BathSpec& spec, double lambda, double t, const QuadratureSettings& qs = {});

// Real-time correlation C(tau) = <E(tau) E>; C(-tau) = conj(C(tau)).
cd c_ts(const BathSpec& spec, double tau, const QuadratureSettings& qs = {});

// Principal value of int_0^omega_max f(w) dw with a simple pole at `pole`,
// via a symmetric exclusion window Richardson-extrapolated over w, w/2, w/4.
double pv_integral(const std::function<double(double)>& f, double pole, double omega_max,
                   const QuadratureSettings& qs = {});

// Adaptive Gauss-Kronrod on [a,b] honoring qs.rel_tol; throws numeric_error on
// failure to converge. Exposed for reuse by downstream modules and tests.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureSettings& qs = {});

} // namespace oqs::bath
