#include "nesskit/ness.hpp"

#include <cmath>
#include <stdexcept>

#include "nesskit/tolerances.hpp"

namespace nesskit {

NessResult solve_ness(const SuperOperator& l) {
    const Eigen::Index dim = l.space.dim;
    const Eigen::Index dim2 = dim * dim;
    if (l.matrix.rows() != dim2 || l.matrix.cols() != dim2)
        throw std::invalid_argument("generator dimension mismatch");

    // Kernel dimension from the singular spectrum; this certifies uniqueness
    // independently of the constrained solve below.
    Eigen::BDCSVD<MatrixXc> svd(l.matrix);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double cut = tol::nullity_rel * sv(0);
    int null_dim = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) <= cut) ++null_dim;

    // Trace-row replacement: overwrite one redundant row of the singular
    // system with the unit-trace functional.
    MatrixXc a = l.matrix;
    a.row(0).setZero();
    for (Eigen::Index i = 0; i < dim; ++i) a(0, i * dim + i) = 1.0;
    VectorXc b = VectorXc::Zero(dim2);
    b(0) = 1.0;
    VectorXc x = Eigen::PartialPivLU<MatrixXc>(a).solve(b);

    MatrixXc rho = herm(unvec(x, dim));
    rho /= rho.trace();

    NessResult out;
    out.null_dim = null_dim;
    out.residual = (l.matrix * vec(rho)).norm();
    Eigen::SelfAdjointEigenSolver<MatrixXc> es(rho, Eigen::EigenvaluesOnly);
    out.min_eig = es.eigenvalues().minCoeff();
    out.rho_s = Operator{l.space, std::move(rho)};

    if (null_dim != 1) throw std::runtime_error("steady state not unique");
    if (out.residual > tol::ness_residual_rel * l.matrix.norm())
        throw std::runtime_error("steady state residual exceeds tolerance");
    if (out.min_eig < tol::positivity_floor)
        throw std::runtime_error("non-physical steady state");
    return out;
}

}  // namespace nesskit
