#pragma once
// Exact kinetic rate matrix between partition components at the steady
// state.  Element (m, n) is the real part of tr{ P_m L[rho_n + x_n] },
// where x_n corrects the factorized-state approximation by solving the
// complement-restricted system  QLQ x_n = -QL[rho_n],  x_n in range(Q).

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "nesskit/operators.hpp"
#include "nesskit/partition.hpp"

namespace nesskit {

enum class Route { direct, linear_solve, fitted };

std::string route_name(Route r);

struct RateMatrix {
    std::vector<std::string> names;
    Eigen::MatrixXd k;  // k(m, n): transition rate from component n into m
    Route route = Route::direct;
    double imag_residue = 0.0;  // largest imaginary part discarded from any entry
};

// Generator restricted to range(Q), expressed in the orthonormal complement
// basis V:  M = V'LV - (V'Phi)(W'LV).  Its spectrum carries the decay of
// coherences and intra-component structure.
MatrixXc complement_generator(const SuperOperator& l, const LiouvillePartition& lp);

// Solves the complement-restricted correction for component n.
//   direct:       reduce to an orthonormal basis of range(Q) and solve the
//                 (dim^2 - N)-dimensional system by min-norm least squares;
//   linear_solve: min-norm solve of the full-space singular system QLQ x = b,
//                 then project the result back into range(Q).
// Throws "complement operator singular" when the residual of the restricted
// system exceeds tolerance.
VectorXc qlq_restricted_solve(const SuperOperator& l, const LiouvillePartition& lp,
                              Eigen::Index n, Route route = Route::direct);

// Full N x N rate matrix through the chosen route.  Throws "non-real rate"
// when the discarded imaginary residue exceeds tolerance relative to max|k|.
RateMatrix rate_matrix(const SuperOperator& l, const LiouvillePartition& lp,
                       Route route = Route::direct);

struct BalanceReport {
    double kp_inf = 0.0;            // |k p_s|_inf
    Eigen::VectorXd column_sums;    // per-column conservation residues
    Eigen::MatrixXd pair_flux;      // (m,n): k_mn p_n - k_nm p_m, net directed flux
};

// Global-balance and pairwise-flux diagnostics; pair fluxes are generically
// nonzero at a nonequilibrium steady state and vanish under detailed balance.
BalanceReport balance_report(const RateMatrix& k, const Eigen::VectorXd& p_s);

}  // namespace nesskit
