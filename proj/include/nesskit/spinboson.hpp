#pragma once
// Two-diabat displaced-oscillator network: a pair of harmonic diabats with a
// constant electronic coupling, a radiative channel connecting them, and one
// phonon channel per diabat.  The workspace builder runs the half-space
// truncation pipeline: diagonalize the position operator, split the nuclear
// space at the diabat crossing, diagonalize the side-restricted Hamiltonians,
// and keep eigenstates below an energy cutoff from each side.  Rates between
// the left/right (or ground/trapped/transferred) components then come from
// the generic engine in rates.hpp.

#include <Eigen/Dense>

#include <limits>
#include <utility>

#include "nesskit/operators.hpp"
#include "nesskit/partition.hpp"

namespace nesskit {

using MatrixXd = Eigen::MatrixXd;

struct SBParams {
    double Omega_1 = 2e-3;   // diabat frequencies (hartree)
    double Omega_2 = 4e-4;
    double eps_1 = 0.0;      // vertical offsets (hartree)
    double eps_2 = 0.012;
    double q_1 = -3.0;       // minima positions (dimensionless)
    double q_2 = 3.0;
    double lambda = 2e-5;    // diabatic coupling (hartree)
    double Gamma_rad = 1e-6;  // radiative channel strength
    double Gamma_ph1 = 1e-9;  // phonon channel strengths, one per diabat
    double Gamma_ph2 = 1e-9;
    double T_rad = 5800.0;  // bath temperatures (kelvin)
    double T_ph = 300.0;
    double alpha_att = 1.0;  // attenuation of the radiative occupation
    int n_basis = 400;       // primitive oscillator count
    // Truncation energy (hartree); NaN resolves to 50*Omega_2 + eps_2 - eps_1.
    double e_cut = std::numeric_limits<double>::quiet_NaN();
};

// The e_cut the builder will actually use (resolves the NaN default).
double resolved_e_cut(const SBParams& p);

// Small-basis defaults for fast regression runs: 128 primitives and a
// 25*Omega_2 + eps_2 - eps_1 cutoff keep the truncated dimension in the
// tens while preserving the qualitative rate structure.
SBParams reduced_basis_params();

// Nuclear operators in the oscillator basis centered at q = 0 with unit
// frequency: lowering operator <k-1|a|k> = sqrt(k), position
// q = (a + a^T)/sqrt(2), and second derivative d2 = ((a - a^T)/sqrt(2))^2.
struct NuclearOperators {
    MatrixXd a;
    MatrixXd q;
    MatrixXd d2;
};
NuclearOperators primitive_basis(int n_basis);

// Diabat Hamiltonian -(Omega/2) d2 + (Omega/2)(q - q_c)^2 + eps.
MatrixXd diabat_hamiltonian(const NuclearOperators& nuc, double omega, double q_c, double eps);

// Crossing point of the two diabat potentials, bisected to |V_1 - V_2| <=
// 1e-14 inside (q_1, q_2).  Throws "no crossing between minima" when the
// potentials do not change order inside the interval, and rejects identical
// parabolas (every point crosses).
double dividing_surface(const SBParams& p);

// Half-space projectors from the eigendecomposition of the position matrix:
// P_L collects eigenvectors with eigenvalue below q_x (an eigenvalue within
// 1e-12 of q_x counts as left), P_R = I - P_L.
std::pair<MatrixXd, MatrixXd> half_space_projectors(const MatrixXd& q, double q_x);

struct SBWorkspace {
    SBParams params;
    HilbertSpace space;  // truncated space, labels L0..,R0.. by origin side
    Operator h;
    SuperOperator l;
    Operator p_left, p_right;  // half-space projectors in the truncated basis
    Partition side;            // {L, R}
    Partition three;           // {g, 1, 2}: left-ground, left-excited, right
    MatrixXd basis;       // (2 n_basis) x d map from truncated to primitive
    double q_x = 0.0;
    double e_rad = 0.0;  // diabat gap at q = q_1, sets the radiative occupation
    double e_cut = 0.0;  // resolved truncation energy
    Eigen::Index dim_left = 0, dim_right = 0;
    double overlap_condition = 1.0;  // of the retained-set Gram matrix
    double projector_round_distance = 0.0;  // eigenvalue distance from {0,1}
                                            // before re-idempotization
};

// Full pipeline: primitive operators, crossing point, side-restricted
// eigenproblems, cutoff retention, orthonormalization, congruence transform
// of all operators, channel assembly, and both partitions.  Throws
//   "cutoff too aggressive"       when a side retains nothing or the total
//                                 dimension falls below 4,
//   "ill-conditioned truncation"  when the retained-set Gram matrix has
//                                 condition number above 1e8.
SBWorkspace build_truncated(const SBParams& p);

// exp(-i mu) rho exp(+i mu) summed as nested commutators with 1/k!, stopped
// once a term falls below 1e-14 in Frobenius norm.  Throws when 200 terms do
// not reach that. Returns the kicked state before Hermitization and the term
// count used.
struct KickResult {
    MatrixXc rho;
    int terms = 0;
};
KickResult unitary_kick(const MatrixXc& mu, const MatrixXc& rho);

// Sudden dipole kick applied to the steady state of the workspace with the
// radiative channel off: mu = alpha_dip * (|1><2| + |2><1|) (x) identity,
// congruence-transformed.  The result is Hermitized and trace-normalized;
// energy = Re tr{H (rho - rho_dark)}.  Requires Gamma_rad == 0.
struct VerticalExcitation {
    MatrixXc rho;
    double energy = 0.0;
    int terms = 0;
};
VerticalExcitation vertical_excitation(const SBWorkspace& ws, const MatrixXc& rho_dark,
                                       double alpha_dip = 0.45);

// The {g, 1, 2} partition carried by the workspace: ground-left, excited-left,
// and everything right of the crossing.
const Partition& three_component_partition(const SBWorkspace& ws);

}  // namespace nesskit
