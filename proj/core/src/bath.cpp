// bath.cpp — spectral influence functions, bath correlators and the quadrature engine
#include "oqs/bath.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace oqs::bath {
namespace {

constexpr double s_pole_tol = 1e-9; // |s-1| below this uses the Ohmic limit forms

// J(w)/w, the natural unit for the influence integrands; carries the full
// w^{s-1} small-frequency behavior so every other factor stays bounded
double j_over_w(const BathSpec& spec, double w) {
    return spec.G * std::pow(w, spec.s - 1.0) * std::pow(spec.omega_c, 1.0 - spec.s) *
           std::exp(-w / spec.omega_c);
}

double omega_max(const BathSpec& spec, const QuadratureSettings& qs) {
    return qs.omega_max_factor * spec.omega_c;
}

// w * 2n(w) = 2w / (e^{beta w} - 1), bounded by 2/beta
double bose_w(double w, double beta) { return 2.0 * w / std::expm1(beta * w); }

// w / (1 - e^{-beta w}), the overflow-free building block of the
// thermally weighted cosh/sinh factors
double pole_ratio(double w, double beta) { return w / (-std::expm1(-beta * w)); }

// w * 2n(w) cosh(w lambda) and w * 2n(w) sinh(w lambda) for 0 <= lambda <= beta
double two_n_cosh_w(double w, double lambda, double beta) {
    return (std::exp(w * (lambda - beta)) + std::exp(-w * (lambda + beta))) * pole_ratio(w, beta);
}

double two_n_sinh_w(double w, double lambda, double beta) {
    return (std::exp(w * (lambda - beta)) - std::exp(-w * (lambda + beta))) * pole_ratio(w, beta);
}

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

// (sin x - x) / x without the cancellation at small x
double sin_minus_x_over_x(double x) {
    if (std::abs(x) < 1e-2) {
        const double x2 = x * x;
        return -x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0));
    }
    return (std::sin(x) - x) / x;
}

void check_time(double t, const char* where) {
    if (!(t >= 0.0)) throw std::invalid_argument(std::string(where) + ": t must be >= 0");
}

} // namespace

bool BathSpec::zero_temperature() const { return std::isinf(beta); }

void BathSpec::validate() const {
    if (!(G >= 0.0)) throw std::invalid_argument("BathSpec: G must be >= 0");
    if (!(s > 0.0)) throw std::invalid_argument("BathSpec: s must be > 0");
    if (!(omega_c > 0.0)) throw std::invalid_argument("BathSpec: omega_c must be > 0");
    if (!(beta > 0.0)) throw std::invalid_argument("BathSpec: beta must be > 0");
}

void QuadratureSettings::validate() const {
    if (!(rel_tol > 0.0) || rel_tol > 1e-4)
        throw std::invalid_argument("QuadratureSettings: rel_tol must lie in (0, 1e-4]");
    if (!(omega_max_factor >= 20.0))
        throw std::invalid_argument("QuadratureSettings: omega_max_factor must be >= 20");
    if (!(pv_window > 0.0) || !(pv_window < 1.0))
        throw std::invalid_argument("QuadratureSettings: pv_window must lie in (0, 1)");
}

double spectral_density(const BathSpec& spec, double omega) {
    spec.validate();
    if (!(omega >= 0.0)) throw std::invalid_argument("spectral_density: omega must be >= 0");
    if (omega == 0.0) return 0.0;
    return j_over_w(spec, omega) * omega;
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureSettings& qs) {
    qs.validate();
    if (!(b > a)) throw std::invalid_argument("integrate: interval must satisfy a < b");
    // Two regimes need different rules: the algebraic w^{s-1} behavior at
    // w = 0 defeats fixed-rule refinement, while oscillatory tails defeat
    // tanh-sinh level doubling. Integrals starting at 0 therefore put a
    // tanh-sinh rule on a short initial sliver (essentially oscillation-free)
    // and adaptive Gauss-Kronrod on the analytic remainder.
    double res = 0.0;
    double err = 0.0;
    double l1 = 0.0;
    double lo = a;
    if (a == 0.0) {
        thread_local boost::math::quadrature::tanh_sinh<double> sliver;
        const double c = 1e-3 * b;
        double e1 = 0.0;
        double m1 = 0.0;
        res = sliver.integrate(f, 0.0, c, 0.1 * qs.rel_tol, &e1, &m1);
        err = e1;
        l1 = m1;
        lo = c;
    }
    double e2 = 0.0;
    double m2 = 0.0;
    res += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, b, 30,
                                                                         0.1 * qs.rel_tol, &e2, &m2);
    err += e2;
    l1 += m2;
    // err is absolute; the reachable target for oscillatory integrands is
    // relative to the L1 mass, not the (possibly cancelling) value
    if (err > qs.rel_tol * std::max(l1, 1e-10)) {
        std::ostringstream msg;
        msg << "integrate: failed to reach rel_tol " << qs.rel_tol << " on [" << a << ", " << b
            << "], estimate " << res << " with error " << err;
        throw numeric_error(msg.str());
    }
    return res;
}

double gamma_vacuum(const BathSpec& spec, double t) {
    spec.validate();
    check_time(t, "gamma_vacuum");
    const double x = spec.omega_c * t;
    if (std::abs(spec.s - 1.0) < s_pole_tol) return 0.5 * spec.G * std::log1p(x * x);
    const double r = std::pow(1.0 + x * x, 0.5 * (1.0 - spec.s));
    const double u = (1.0 - spec.s) * std::atan(x);
    return spec.G * std::tgamma(spec.s - 1.0) * (1.0 - r * std::cos(u));
}

double gamma_thermal(const BathSpec& spec, double t, const QuadratureSettings& qs) {
    spec.validate();
    qs.validate();
    check_time(t, "gamma_thermal");
    if (spec.zero_temperature() || spec.G == 0.0 || t == 0.0) return 0.0;
    auto f = [&](double w) {
        if (w <= 0.0) return 0.0;
        const double sc = sinc(0.5 * w * t);
        return j_over_w(spec, w) * 0.5 * t * t * sc * sc * bose_w(w, spec.beta);
    };
    return integrate(f, 0.0, omega_max(spec, qs), qs);
}

double gamma_decoherence(const BathSpec& spec, double t, const QuadratureSettings& qs) {
    return gamma_vacuum(spec, t) + gamma_thermal(spec, t, qs);
}

double phi_shift(const BathSpec& spec, double t) {
    spec.validate();
    check_time(t, "phi_shift");
    const double x = spec.omega_c * t;
    if (std::abs(spec.s - 1.0) < s_pole_tol) return spec.G * std::atan(x);
    const double r = std::pow(1.0 + x * x, 0.5 * (1.0 - spec.s));
    const double u = (1.0 - spec.s) * std::atan(x);
    return -spec.G * std::tgamma(spec.s - 1.0) * r * std::sin(u);
}

double c_factor(const BathSpec& spec) {
    spec.validate();
    return spec.G * spec.omega_c * std::tgamma(spec.s);
}

double delta_indirect(const BathSpec& spec, double t) {
    return phi_shift(spec, t) - c_factor(spec) * t;
}

double gamma_vacuum_quadrature(const BathSpec& spec, double t, const QuadratureSettings& qs) {
    spec.validate();
    qs.validate();
    check_time(t, "gamma_vacuum_quadrature");
    if (spec.G == 0.0 || t == 0.0) return 0.0;
    auto f = [&](double w) {
        if (w <= 0.0) return 0.0;
        const double sc = sinc(0.5 * w * t);
        return j_over_w(spec, w) * 0.5 * t * t * w * sc * sc;
    };
    return integrate(f, 0.0, omega_max(spec, qs), qs);
}

double delta_indirect_quadrature(const BathSpec& spec, double t, const QuadratureSettings& qs) {
    spec.validate();
    qs.validate();
    check_time(t, "delta_indirect_quadrature");
    if (spec.G == 0.0 || t == 0.0) return 0.0;
    auto f = [&](double w) {
        if (w <= 0.0) return 0.0;
        return j_over_w(spec, w) * t * sin_minus_x_over_x(w * t);
    };
    return integrate(f, 0.0, omega_max(spec, qs), qs);
}

double phi_shift_quadrature(const BathSpec& spec, double t, const QuadratureSettings& qs) {
    spec.validate();
    qs.validate();
    check_time(t, "phi_shift_quadrature");
    if (spec.G == 0.0 || t == 0.0) return 0.0;
    auto f = [&](double w) {
        if (w <= 0.0) return 0.0;
        return j_over_w(spec, w) * t * sinc(w * t);
    };
    return integrate(f, 0.0, omega_max(spec, qs), qs);
}

double c_factor_quadrature(const BathSpec& spec, const QuadratureSettings& qs) {
    spec.validate();
    qs.validate();
    if (spec.G == 0.0) return 0.0;
    auto f = [&](double w) { return w <= 0.0 ? 0.0 : j_over_w(spec, w); };
    return integrate(f, 0.0, omega_max(spec, qs), qs);
}

double gamma_vacuum_dwc(const BathSpec& spec, double t) {
    spec.validate();
    check_time(t, "gamma_vacuum_dwc");
    const double x = spec.omega_c * t;
    const double r = std::pow(1.0 + x * x, -0.5 * spec.s);
    return spec.G * std::tgamma(spec.s) * t * r * std::sin(spec.s * std::atan(x));
}

double phi_shift_dwc(const BathSpec& spec, double t) {
    spec.validate();
    check_time(t, "phi_shift_dwc");
    const double x = spec.omega_c * t;
    const double r = std::pow(1.0 + x * x, -0.5 * spec.s);
    return spec.G * std::tgamma(spec.s) * t * r * std::cos(spec.s * std::atan(x));
}

double c_factor_dwc(const BathSpec& spec) {
    spec.validate();
    return spec.G * std::tgamma(spec.s);
}

double delta_indirect_dwc(const BathSpec& spec, double t) {
    return phi_shift_dwc(spec, t) - c_factor_dwc(spec) * t;
}

double gamma_thermal_dwc(const BathSpec& spec, double t, const QuadratureSettings& qs) {
    spec.validate();
    qs.validate();
    check_time(t, "gamma_thermal_dwc");
    if (spec.zero_temperature() || spec.G == 0.0 || t == 0.0) return 0.0;
    const double wc = spec.omega_c;
    auto f = [&](double w) {
        if (w <= 0.0) return 0.0;
        const double dj = (1.0 - spec.s) / wc + w / (wc * wc); // d ln J / d omega_c
        const double sc = sinc(0.5 * w * t);
        return dj * j_over_w(spec, w) * 0.5 * t * t * sc * sc * bose_w(w, spec.beta);
    };
    return integrate(f, 0.0, omega_max(spec, qs), qs);
}

cd e_corr_mixed(const BathSpec& spec, double lambda, double t, const QuadratureSettings& qs) {
    spec.validate();
    qs.validate();
    if (!(lambda >= 0.0) || lambda > spec.beta)
        throw std::invalid_argument("e_corr_mixed: lambda must lie in [0, beta]");
    if (spec.G == 0.0) return {0.0, 0.0};
    const bool spin = spec.kind == BathKind::Spin;
    const bool zero_t = spec.zero_temperature();
    const double beta = spec.beta;

    // all pieces are expressed as j_over_w(w) times a bounded factor. The
    // spin-bath factors come from the single-spin trace
    //   <E(lambda) E(it)> per mode = cosh(x) - tanh(beta w / 2) sinh(x),
    // x = w (lambda - i t); this reduces to the c_ts form at lambda = 0 and
    // obeys the sum rule <E^2> = integral of J at lambda = t = 0.
    auto vac = [&](double w) { return w * std::exp(-w * lambda); };
    // w (1 - tanh(beta w / 2)) sinh(w lambda), overflow-free for lambda <= beta
    auto fermi_sinh_w = [&](double w) {
        return w * (std::exp(-w * (beta - lambda)) - std::exp(-w * (beta + lambda))) /
               (1.0 + std::exp(-beta * w));
    };
    auto re_factor = [&](double w) { // multiplies cos(w t)
        if (zero_t) return vac(w);
        return spin ? vac(w) + fermi_sinh_w(w) : vac(w) + two_n_cosh_w(w, lambda, beta);
    };
    auto im_factor = [&](double w) { // multiplies i sin(w t)
        if (zero_t) return vac(w);
        return spin ? std::tanh(0.5 * beta * w) * vac(w) - fermi_sinh_w(w)
                    : vac(w) - two_n_sinh_w(w, lambda, beta);
    };

    auto fr = [&](double w) {
        if (w <= 0.0) return 0.0;
        return j_over_w(spec, w) * std::cos(w * t) * re_factor(w);
    };
    auto fi = [&](double w) {
        if (w <= 0.0) return 0.0;
        return j_over_w(spec, w) * std::sin(w * t) * im_factor(w);
    };
    const double wm = omega_max(spec, qs);
    return {integrate(fr, 0.0, wm, qs), integrate(fi, 0.0, wm, qs)};
}

cd c_ts(const BathSpec& spec, double tau, const QuadratureSettings& qs) {
    spec.validate();
    qs.validate();
    if (spec.G == 0.0) return {0.0, 0.0};
    const bool spin = spec.kind == BathKind::Spin;
    const bool zero_t = spec.zero_temperature();

    auto fr = [&](double w) {
        if (w <= 0.0) return 0.0;
        // bosonic carries w * coth(beta w / 2) = w + w * 2n, spin just w
        const double th = zero_t || spin ? w : w + bose_w(w, spec.beta);
        return j_over_w(spec, w) * th * std::cos(w * tau);
    };
    auto fi = [&](double w) {
        if (w <= 0.0) return 0.0;
        const double th = zero_t || !spin ? w : w * std::tanh(0.5 * spec.beta * w);
        return -j_over_w(spec, w) * th * std::sin(w * tau);
    };
    const double wm = omega_max(spec, qs);
    return {integrate(fr, 0.0, wm, qs), integrate(fi, 0.0, wm, qs)};
}

double pv_integral(const std::function<double(double)>& f, double pole, double omega_max,
                   const QuadratureSettings& qs) {
    qs.validate();
    if (!(pole > 0.0)) throw std::invalid_argument("pv_integral: pole must be > 0");
    if (!(omega_max > pole)) throw std::invalid_argument("pv_integral: omega_max must exceed the pole");

    // each excluded-window integral is evaluated well below the extrapolation tolerance
    QuadratureSettings inner = qs;
    inner.rel_tol = std::max(1e-2 * qs.rel_tol, 1e-11);

    struct Window {
        double value;
        double scale; // |left| + |right|, the piece mass the noise floor rides on
    };
    auto excluded = [&](double w) {
        const double left = integrate(f, 0.0, pole - w, inner);
        const double right = integrate(f, pole + w, omega_max, inner);
        return Window{left + right, std::abs(left) + std::abs(right)};
    };

    double w = qs.pv_window * pole;
    if (pole + w >= omega_max) w = 0.5 * (omega_max - pole);

    // windows w, w/2, w/4 give two first-order Richardson extrapolants; the window
    // keeps halving (reusing previous integrals) until they agree
    Window i0 = excluded(w);
    Window i1 = excluded(0.5 * w);
    Window i2 = excluded(0.25 * w);
    const double w_floor = 1e-9 * pole;
    while (true) {
        const double r1 = 2.0 * i1.value - i0.value;
        const double r2 = 2.0 * i2.value - i1.value;
        // cancelling pieces cap the reachable absolute accuracy; the floor
        // tied to the piece mass keeps the test meaningful near zero
        const double tol = std::max(qs.rel_tol * std::abs(r2), 10.0 * inner.rel_tol * i2.scale);
        if (std::abs(r2 - r1) <= tol) return r2;
        if (0.125 * w < w_floor) {
            std::ostringstream msg;
            msg << "pv_integral: extrapolants " << r1 << " and " << r2
                << " fail to agree to rel_tol " << qs.rel_tol << " at window " << w;
            throw numeric_error(msg.str());
        }
        w *= 0.5;
        i0 = i1;
        i1 = i2;
        i2 = excluded(0.25 * w);
    }
}

} // namespace oqs::bath
