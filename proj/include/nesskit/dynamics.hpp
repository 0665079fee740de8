#pragma once
// Exact propagation of the master equation and kinetic diagnostics around
// the steady state: the Markovian/remainder split of the population flow,
// characteristic timescales, the windowed relative-error metric, and a
// rate matrix fitted from relaxation data.

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "nesskit/operators.hpp"
#include "nesskit/partition.hpp"
#include "nesskit/rates.hpp"

namespace nesskit {

struct Trajectory {
    std::vector<std::string> names;  // component labels, one per population row
    Eigen::VectorXd times;
    std::vector<MatrixXc> states;  // retained only when requested
    Eigen::MatrixXd p;             // N x T populations
    Eigen::MatrixXd pdot;          // N x T exact derivatives tr{P_m L[rho(t)]}
    Eigen::MatrixXd m1;            // N x T steady-rate term k p, filled by m_split
    Eigen::MatrixXd m2;            // N x T remainder pdot - m1, filled by m_split
};

struct TimescaleReport {
    double t1 = 0.0;  // slowest population relaxation time, from the rate matrix
    double t2 = 0.0;  // slowest complement (coherence) relaxation time
    double ts = 0.0;  // time for |p(t) - p_s|_inf to fall below threshold
    bool markovian = false;           // t2/t1 at or below the separation threshold
    Eigen::VectorXcd rate_eigs;       // nonzero rate-matrix eigenvalues, Re descending
    Eigen::VectorXcd complement_eigs; // complement-generator eigenvalues, Re descending
};

// Uniformly spaced grid {0, dt, ..., floor(t_end/dt) dt}; the last point
// never exceeds t_end.
Eigen::VectorXd uniform_grid(double t_end, double dt);

// Steady state displaced toward one component: (1-eta) rho_s + eta P_c/tr(P_c).
MatrixXc perturbed_initial(const MatrixXc& rho_s, const Partition& part,
                           Eigen::Index component = 1, double eta = 0.5);

// rho(t) = exp(L t)[rho_0] on the given strictly increasing grid, by
// eigendecomposition of L, or by a repeated fixed-step exponential when the
// eigendecomposition fails to reconstruct L (uniform grids only).  Populations
// and their exact derivatives are recorded for every component of the
// partition.  Throws "propagation failed" when no route applies or when
// Hermiticity/trace conservation breaks down.
Trajectory propagate(const SuperOperator& l, const MatrixXc& rho0,
                     const Eigen::VectorXd& grid, const Partition& part,
                     bool keep_states = false);

// Closed-system evolution rho(t) = e^{-iHt} rho_0 e^{iHt} through the
// eigenbasis of H, recording populations and exact derivatives like
// propagate.  Much cheaper than exponentiating the full generator.
Trajectory propagate_unitary(const Operator& h, const MatrixXc& rho0,
                             const Eigen::VectorXd& grid, const Partition& part,
                             bool keep_states = false);

// Splits pdot into the steady-rate term m1 = k p and the remainder
// m2 = pdot - m1; the identity m1 + m2 = pdot holds exactly as computed.
void m_split(Trajectory& traj, const RateMatrix& k);

// Per-time |m2|_inf / |m1|_inf (NaN where m1 vanishes).
Eigen::VectorXd m_ratio(const Trajectory& traj);

// Characteristic times from the spectra of k and of the complement generator,
// plus the steady-state reach time from rho0.  Throws "unstable generator"
// when a retained eigenvalue has positive real part.
TimescaleReport timescales(const SuperOperator& l, const RateMatrix& k,
                           const LiouvillePartition& lp, const MatrixXc& rho0);

// 2 int |pdot - k p| dt / int |pdot + k p| dt over [t_start, t_end], trapezoid
// quadrature, Euclidean norms.  Zero iff the window is exactly Markovian with
// generator k.  Throws "empty window" when fewer than two samples fall inside.
double relative_error(const Trajectory& traj, const RateMatrix& k, double t_start,
                      double t_end);

// Least-squares generator from relaxation data on the window:
//   k_fit = (int pdot p^T dt) pinv(int p p^T dt),
// with the pseudo-inverse truncated at the minimum-norm rcond.  Throws
// "degenerate population trajectories" when the Gram matrix has rank < 2.
RateMatrix fit_rate_matrix(const Trajectory& traj, double t_start, double t_end);

}  // namespace nesskit
