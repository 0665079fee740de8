#pragma once
// Steady-state solver: the unique density matrix in the kernel of a
// trace-preserving generator, certified by residual, kernel dimension,
// and spectral positivity.

#include "nesskit/operators.hpp"

namespace nesskit {

struct NessResult {
    Operator rho_s;
    double residual = 0.0;  // |L vec(rho_s)|_2 after normalization
    int null_dim = 0;       // numerical nullity of L (singular values <= 1e-10 * s_max)
    double min_eig = 0.0;   // smallest eigenvalue of the Hermitized solution
};

// Solves L[rho] = 0 with the unit-trace constraint replacing one row of the
// generator, then Hermitizes and renormalizes.  Throws
//   "steady state not unique"    when the kernel dimension differs from one,
//   "non-physical steady state"  when the solution has an eigenvalue below
//                                the positivity floor,
// and a residual diagnostic if the constrained solve failed to converge.
NessResult solve_ness(const SuperOperator& l);

}  // namespace nesskit
