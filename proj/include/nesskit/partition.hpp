#pragma once
// Orthogonal-projector partitions of a Hilbert space, and their lift to
// rank-one projectors in Liouville space built around a reference steady
// state.  The lifted projector for component n acts as
//   Pi_n[B] = rho_n * tr(P_n B),  rho_n = P_n rho_s P_n / tr(P_n rho_s),
// i.e. the dense rank-one matrix vec(rho_n) vec(P_n)^dag.  The complement
// Q = I - sum_n Pi_n is an oblique projector whose range is exactly the
// orthogonal complement of span{vec(P_n)}.

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "nesskit/operators.hpp"

namespace nesskit {

struct Partition {
    HilbertSpace space;
    std::vector<MatrixXc> projectors;
    std::vector<std::string> names;

    Eigen::Index size() const { return static_cast<Eigen::Index>(projectors.size()); }
};

// Checks Hermiticity, completeness (sum = identity), and pairwise
// orthogonality of the projectors; throws on violation.
Partition validate(HilbertSpace space, std::vector<MatrixXc> projectors,
                   std::vector<std::string> names);

// p_n = Re tr(P_n rho).
Eigen::VectorXd populations(const Partition& part, const MatrixXc& rho);

struct LiouvillePartition {
    Partition partition;
    std::vector<MatrixXc> steady_components;  // rho_n, unit-trace states
    Eigen::VectorXd steady_populations;       // p_s,n = tr(P_n rho_s)
    std::vector<MatrixXc> pi;                 // dense rank-one Pi_n
    MatrixXc q;                               // dense Q = I - sum Pi_n

    // Rank-one factors of the same objects, used for reduced solves:
    // columns w.col(n) = vec(P_n), phi.col(n) = vec(rho_n).
    MatrixXc w;
    MatrixXc phi;
    // Orthonormal basis of range(Q) = span{vec(P_n)}^perp.
    MatrixXc complement_basis;

    Eigen::Index size() const { return partition.size(); }
};

// Builds the Liouville-space projectors around rho_s.  Throws
// "degenerate component: unpopulated projector" when some component carries
// steady population at or below the population floor.
LiouvillePartition liouville_partition(const Partition& part, const MatrixXc& rho_s);

}  // namespace nesskit
