// spinspin.hpp — exact dynamics of one or two central qubits in a finite Ising spin environment
#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "oqs/qcore.hpp"

namespace oqs::spinspin {

// Closure of the nearest-neighbour chain couplings alpha_i.
enum class ChainTopology {
    Periodic,  // bond i couples spins i and (i+1) mod N
    Open,      // bonds stop at N-1; the last alpha entry is unused
};

// Unitary applied to the central system at t = 0, together with the bias quench.
enum class Prep {
    PiHalfY,  // single qubit, pi/2 pulse about y
    CZ,       // two qubits, controlled-phase in the sigma_x eigenbasis
};

// Propagator route for two-qubit runs. Product uses per-qubit closed forms and
// requires kappa == 0; General diagonalizes the coupled 4x4 blocks.
enum class TwoQubitRoute { Auto, Product, General };

// Evaluation strategy for the configuration sum. Auto collapses identical
// environments into weight classes and enumerates otherwise.
enum class SumMode { Auto, Exhaustive, Collapsed };

struct SpinEnvConfig {
    int N = 1;                    // number of environment spins
    std::vector<double> g;        // central-environment couplings, length N
    std::vector<double> eps_env;  // environment spin biases, length N
    std::vector<double> alpha;    // nearest-neighbour couplings, length N
    double beta = 1.0;            // inverse preparation temperature
    ChainTopology chain = ChainTopology::Periodic;

    void validate() const;  // throws std::invalid_argument on malformed input
    bool identical() const; // true when g, eps_env and alpha are each uniform
};

struct CentralParams {
    double eps0 = 0.0;    // central bias before the preparation pulse
    double eps = 0.0;     // central bias after the pulse
    double delta0 = 0.0;  // tunnelling amplitude, unchanged by the quench
    double kappa = 0.0;   // direct qubit-qubit coupling, two-qubit runs only
    Prep prep = Prep::PiHalfY;
};

// One environment configuration |n>. Bit i of n is the state of spin i+1 with
// 0 meaning up along z, so e_n = sum_i (-1)^{n_i} g_i and likewise for eps_n.
struct EnvConfigTerm {
    std::uint32_t n = 0;
    double e_n = 0.0;       // field shift seen by the central system
    double eps_n = 0.0;     // bias eigenvalue of the environment Hamiltonian
    double lambda_n = 0.0;  // Ising chain eigenvalue
    double k_n = 1.0;       // Boltzmann weight exp(-beta (eps_n/2 + lambda_n))
    double A_n = 1.0;       // correlation weight, 1 in the uncorrelated case
};

// A group of configurations sharing identical weights and dynamics.
struct CollapsedTerm {
    double multiplicity = 1.0;
    EnvConfigTerm term;  // representative configuration
};

// Visit all 2^N configurations. Capped at N = 24; larger environments must use
// collapse_identical or evolve_bloch_sampled.
void enumerate_terms(const SpinEnvConfig& env, const CentralParams& central, bool correlated,
                     const std::function<void(const EnvConfigTerm&)>& sink);
std::vector<EnvConfigTerm> enumerate_terms(const SpinEnvConfig& env, const CentralParams& central,
                                           bool correlated);

// Group configurations of a uniform environment into weight classes: the N+1
// binomial classes when alpha = 0, otherwise classes keyed by the down-spin and
// domain-wall counts. Heterogeneous parameters are rejected.
std::vector<CollapsedTerm> collapse_identical(const SpinEnvConfig& env,
                                              const CentralParams& central, bool correlated);

// Bloch vector of the prepared single-qubit state at t = 0.
BlochVector initial_bloch(const SpinEnvConfig& env, const CentralParams& central, bool correlated);

// Single-qubit state at time t >= 0 after preparation, pulse and quench.
BlochVector evolve_bloch(const SpinEnvConfig& env, const CentralParams& central, bool correlated,
                         double t, SumMode mode = SumMode::Auto);
std::vector<BlochVector> bloch_series(const SpinEnvConfig& env, const CentralParams& central,
                                      bool correlated, const std::vector<double>& t_grid,
                                      SumMode mode = SumMode::Auto);

// Two-qubit reduced state at time t >= 0; requires prep = CZ.
DensityMatrix evolve_two_qubit(const SpinEnvConfig& env, const CentralParams& central,
                               bool correlated, double t, TwoQubitRoute route = TwoQubitRoute::Auto,
                               SumMode mode = SumMode::Auto);
std::vector<DensityMatrix> two_qubit_series(const SpinEnvConfig& env, const CentralParams& central,
                                            bool correlated, const std::vector<double>& t_grid,
                                            TwoQubitRoute route = TwoQubitRoute::Auto,
                                            SumMode mode = SumMode::Auto);

// Concurrence of the two-qubit state over a time grid.
std::vector<std::pair<double, double>> concurrence_curve(const SpinEnvConfig& env,
                                                         const CentralParams& central,
                                                         bool correlated,
                                                         const std::vector<double>& t_grid);

// Monte Carlo fallback for large heterogeneous environments: configurations are
// drawn from the bias part of the Boltzmann weight and reweighted by the chain
// and correlation factors. std_error is a batch-mean estimate over the worst
// Bloch component.
struct SampledBloch {
    BlochVector value{0.0, 0.0, 0.0};
    double std_error = 0.0;
};
SampledBloch evolve_bloch_sampled(const SpinEnvConfig& env, const CentralParams& central,
                                  bool correlated, double t, int samples, std::uint64_t seed);

}  // namespace oqs::spinspin
