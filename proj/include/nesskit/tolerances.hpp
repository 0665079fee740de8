#pragma once
// Named numerical tolerances shared by the library and its test suite.
// Everything is either an absolute entrywise bound or a bound relative to
// the natural scale named in the comment.

namespace nesskit::tol {

// States and projectors (absolute, entrywise / eigenvalue).
inline constexpr double hermiticity = 1e-10;
inline constexpr double unit_trace = 1e-10;
inline constexpr double positivity_floor = -1e-8;  // smallest admissible eigenvalue

// Hilbert-space partitions (absolute, entrywise).
inline constexpr double partition_closure = 1e-10;   // sum of projectors vs identity
inline constexpr double partition_overlap = 1e-10;   // P_m P_n vs delta_mn P_n
inline constexpr double liouville_projector = 1e-9;  // Pi_m Pi_n, Q^2 = Q
inline constexpr double population_floor = 1e-12;    // component weight in the steady state

// Steady-state solve.
inline constexpr double ness_residual_rel = 1e-9;  // |L vec(rho_s)|_2 relative to |L|_F
inline constexpr double nullity_rel = 1e-10;       // singular values counted as zero

// Rate extraction.
inline constexpr double complement_residual_rel = 1e-9;  // restricted-solve residual
inline constexpr double min_norm_rcond = 1e-12;          // pivot cutoff in min-norm solves
inline constexpr double rate_column_sum_rel = 1e-12;     // column sums of k vs max|k|
inline constexpr double rate_balance_rel = 1e-10;        // |k p_s| vs max|k| |p_s|
inline constexpr double rate_imag_rel = 1e-10;           // discarded imaginary part vs max|k|
inline constexpr double rate_imag_floor_rel = 1e-14;     // ... vs the contraction roundoff scale
inline constexpr double route_agreement_rel = 1e-8;      // direct vs linear-solve

// Model builders.
inline constexpr double crossing_residual = 1e-14;  // |V_1 - V_2| at the dividing surface
inline constexpr double surface_tie = 1e-12;        // eigenvalue tie at the dividing surface
inline constexpr double truncation_condition_max = 1e8;  // retained-set Gram matrix
inline constexpr double kick_term_floor = 1e-14;    // nested-commutator series cutoff

// Dynamics and fitting.
inline constexpr double structural_zero_rel = 1e-14;  // |Re eig| treated as the zero mode
inline constexpr double gram_condition_max = 1e12;    // population Gram matrix conditioning
inline constexpr double steady_reach_inf = 1e-6;      // |p(t) - p_s|_inf defining t_s
inline constexpr double markovian_ratio = 0.1;        // t2/t1 threshold for the flag

}  // namespace nesskit::tol
