#pragma once
// Three-level network with a shared ground state and two coupled excited
// states: pumping g->k, decay k->g, and directed conversion between the
// excited pair, each as a Lindblad channel.  Ships closed-form rate
// expressions used as oracles for the projection-based engine, both for the
// fine-grained {g, 1, 2} partition and for the grouped {A = g+1, 2} one.
//
// Default parameter values are the benchmark set used by all built-in
// studies and regression tests.

#include <utility>
#include <vector>

#include "nesskit/operators.hpp"
#include "nesskit/partition.hpp"

namespace nesskit {

struct VParams {
    double eps_g = 0.0;
    double eps_1 = 0.02;
    double eps_2 = 0.012;
    double J = 2e-5;         // coherent coupling between the excited states
    double Gamma_H1 = 1.5e-6;  // pump g -> 1
    double Gamma_H2 = 0.0;     // pump g -> 2
    double Gamma_C1 = 4.5e-6;  // decay 1 -> g
    double Gamma_C2 = 1e-9;    // decay 2 -> g
    double Gamma_Df = 1e-9;    // conversion 1 -> 2
    double Gamma_Db = 0.0;     // conversion 2 -> 1
};

struct VDerived {
    double beta = 0.0;        // coherence-mediated contribution to the 1<->2 rate
    double gamma_star = 0.0;  // total width entering the coherence denominator
    double delta = 0.0;       // eps_2 - eps_1
    double r = 0.0;           // ground-state share within group A (needs a state)
};

struct VSystem {
    Operator h;
    SuperOperator l;
    Partition standard;  // {g, 1, 2}
    Partition grouped;   // {A = g+1, 2}
};

// Hamiltonian, full generator (channel rates enter as 2*Gamma), and both
// built-in partitions.
VSystem build(const VParams& p);

// beta, gamma_star, delta; r is filled only by the rho_s overload.
// Throws "beta undefined" when the coherence denominator vanishes.
VDerived derived(const VParams& p);
VDerived derived(const VParams& p, const MatrixXc& rho_s);

// Closed forms for the fine-grained partition: (k_21, k_12).
std::pair<double, double> analytic_rates_standard(const VParams& p);

// Closed forms for the grouped partition: (k_2A, k_A2), given the ground
// share r within group A.  Throws "grouped rate undefined" when the common
// denominator vanishes.
std::pair<double, double> analytic_rates_grouped(const VParams& p, double r);

// Limiting values of the grouped rates.
struct GroupedLimits {
    double pump1_k2A = 0.0;  // Gamma_H1 dominant
    double pump1_kA2 = 0.0;
    double pump2_k2A = 0.0;  // Gamma_H2 dominant
    double pump2_kA2 = 0.0;
    double dark_kA2 = 0.0;   // both pumps -> 0 (k_2A -> 0 there)
};
GroupedLimits grouped_rate_limits(const VParams& p);

// beta over a (delta, gamma) grid with Gamma_C2 = Gamma_Df = gamma and all
// other parameters from `base`.
struct BetaSweepRow {
    double delta;
    double gamma;
    double beta;
};
std::vector<BetaSweepRow> sweep_beta(const std::vector<double>& deltas,
                                     const std::vector<double>& gammas, const VParams& base);

}  // namespace nesskit
