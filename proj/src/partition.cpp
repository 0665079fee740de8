#include "nesskit/partition.hpp"

#include <stdexcept>
#include <utility>

#include "nesskit/tolerances.hpp"

namespace nesskit {

Partition validate(HilbertSpace space, std::vector<MatrixXc> projectors,
                   std::vector<std::string> names) {
    check_space(space);
    const Eigen::Index dim = space.dim;
    const auto n = projectors.size();
    if (n == 0) throw std::invalid_argument("partition needs at least one projector");
    if (names.size() != n) throw std::invalid_argument("one name per projector required");
    for (const auto& p : projectors)
        if (p.rows() != dim || p.cols() != dim)
            throw std::invalid_argument("projector dimension mismatch");

    for (const auto& p : projectors)
        if ((p - p.adjoint()).cwiseAbs().maxCoeff() > tol::hermiticity)
            throw std::invalid_argument("projector is not Hermitian");

    MatrixXc sum = MatrixXc::Zero(dim, dim);
    for (const auto& p : projectors) sum += p;
    if ((sum - MatrixXc::Identity(dim, dim)).cwiseAbs().maxCoeff() > tol::partition_closure)
        throw std::invalid_argument("incomplete partition");

    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            MatrixXc prod = projectors[a] * projectors[b];
            if (a == b) prod -= projectors[b];
            if (prod.cwiseAbs().maxCoeff() > tol::partition_overlap)
                throw std::invalid_argument("overlapping components");
        }

    return Partition{std::move(space), std::move(projectors), std::move(names)};
}

Eigen::VectorXd populations(const Partition& part, const MatrixXc& rho) {
    if (rho.rows() != part.space.dim || rho.cols() != part.space.dim)
        throw std::invalid_argument("state dimension mismatch");
    Eigen::VectorXd p(part.size());
    for (Eigen::Index i = 0; i < part.size(); ++i)
        p(i) = (part.projectors[i] * rho).trace().real();
    return p;
}

LiouvillePartition liouville_partition(const Partition& part, const MatrixXc& rho_s) {
    const Eigen::Index dim = part.space.dim;
    const Eigen::Index n = part.size();
    const Eigen::Index dim2 = dim * dim;
    require_state(rho_s);

    LiouvillePartition lp;
    lp.partition = part;
    lp.steady_populations = populations(part, rho_s);
    lp.w.resize(dim2, n);
    lp.phi.resize(dim2, n);
    lp.steady_components.reserve(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double pop = lp.steady_populations(i);
        if (pop <= tol::population_floor)
            throw std::runtime_error("degenerate component: unpopulated projector");
        MatrixXc comp = part.projectors[i] * rho_s * part.projectors[i] / pop;
        comp = herm(comp);  // exact Hermitian symmetrization of the conditional state
        lp.w.col(i) = vec(part.projectors[i]);
        lp.phi.col(i) = vec(comp);
        lp.steady_components.push_back(std::move(comp));
    }

    lp.pi.reserve(n);
    lp.q = MatrixXc::Identity(dim2, dim2);
    for (Eigen::Index i = 0; i < n; ++i) {
        MatrixXc pi_i = lp.phi.col(i) * lp.w.col(i).adjoint();
        lp.q -= pi_i;
        lp.pi.push_back(std::move(pi_i));
    }

    // range(Q) equals span{vec(P_n)}^perp: take the trailing columns of the
    // full unitary factor of a QR of [vec(P_0) ... vec(P_{N-1})].
    Eigen::HouseholderQR<MatrixXc> qr(lp.w);
    MatrixXc qfull = qr.householderQ() * MatrixXc::Identity(dim2, dim2);
    lp.complement_basis = qfull.rightCols(dim2 - n);

    return lp;
}

}  // namespace nesskit
