#include "nesskit/rates.hpp"

#include <cmath>
#include <stdexcept>

#include "nesskit/tolerances.hpp"

namespace nesskit {

std::string route_name(Route r) {
    switch (r) {
        case Route::direct: return "direct";
        case Route::linear_solve: return "linear-solve";
        case Route::fitted: return "fitted";
    }
    return "unknown";
}

namespace {

// Shared machinery for the complement-restricted solves: a factorization
// prepared once per (L, partition) pair and reused across components.
class ComplementSolver {
  public:
    ComplementSolver(const SuperOperator& l, const LiouvillePartition& lp, Route route)
        : l_(l), lp_(lp), route_(route), lnorm_(l.matrix.norm()) {
        cod_.setThreshold(tol::min_norm_rcond);
        if (route == Route::direct) {
            vphi_ = lp.complement_basis.adjoint() * lp.phi;
            cod_.compute(complement_generator(l, lp));
        } else {
            MatrixXc qlq = lp.q * l.matrix * lp.q;
            cod_.compute(qlq);
        }
    }

    // Minimum-norm x_n in range(Q) with QLQ x_n = -QL[rho_n].
    VectorXc solve(Eigen::Index n) const {
        const VectorXc f = lp_.phi.col(n);
        const VectorXc lf = l_.matrix * f;
        VectorXc x;
        if (route_ == Route::direct) {
            const MatrixXc& v = lp_.complement_basis;
            VectorXc rhs = -(v.adjoint() * lf - vphi_ * (lp_.w.adjoint() * lf));
            x = v * cod_.solve(rhs).eval();
        } else {
            VectorXc b = -(lp_.q * lf);
            x = lp_.q * cod_.solve(b).eval();
        }

        // Residual of the restricted system, relative to its load.  A load at
        // the roundoff floor of the evaluation itself means the system is
        // trivially consistent, not singular.
        const VectorXc lhs = project_q(l_.matrix * VectorXc(x + f));
        const double load = project_q(lf).norm();
        const double floor = 1e-14 * lnorm_ * (1.0 + x.norm() + f.norm());
        if (lhs.norm() > tol::complement_residual_rel * load && lhs.norm() > floor)
            throw std::runtime_error("complement operator singular");
        return x;
    }

  private:
    VectorXc project_q(const VectorXc& y) const { return y - lp_.phi * (lp_.w.adjoint() * y); }

    const SuperOperator& l_;
    const LiouvillePartition& lp_;
    Route route_;
    double lnorm_;
    MatrixXc vphi_;
    Eigen::CompleteOrthogonalDecomposition<MatrixXc> cod_;
};

}  // namespace

MatrixXc complement_generator(const SuperOperator& l, const LiouvillePartition& lp) {
    // V'Q = V' - (V'Phi)W', so V'(QLQ)V = V'LV - (V'Phi)(W'LV) using QV = V.
    const MatrixXc& v = lp.complement_basis;
    MatrixXc lv = l.matrix * v;
    return v.adjoint() * lv - (v.adjoint() * lp.phi) * (lp.w.adjoint() * lv);
}

VectorXc qlq_restricted_solve(const SuperOperator& l, const LiouvillePartition& lp,
                              Eigen::Index n, Route route) {
    if (route == Route::fitted)
        throw std::invalid_argument("fitted is not a solve route");
    if (n < 0 || n >= lp.size()) throw std::invalid_argument("component index out of range");
    return ComplementSolver(l, lp, route).solve(n);
}

RateMatrix rate_matrix(const SuperOperator& l, const LiouvillePartition& lp, Route route) {
    if (route == Route::fitted)
        throw std::invalid_argument("fitted is not a solve route");
    const Eigen::Index n = lp.size();
    ComplementSolver solver(l, lp, route);
    const MatrixXc wl = lp.w.adjoint() * l.matrix;  // N x dim^2, reused for every column

    RateMatrix out;
    out.names = lp.partition.names;
    out.route = route;
    out.k.resize(n, n);
    double contraction_scale = 0.0;
    for (Eigen::Index col = 0; col < n; ++col) {
        const VectorXc x = solver.solve(col);
        const VectorXc load = lp.phi.col(col) + x;
        const VectorXc rates = wl * load;
        out.k.col(col) = rates.real();
        out.imag_residue = std::max(out.imag_residue, rates.imag().cwiseAbs().maxCoeff());
        contraction_scale = std::max(contraction_scale, 1.0 + load.norm());
    }

    // The imaginary part is a discarded roundoff residue.  Its natural size is
    // set by the contraction wl * load, not by max|k|: when the rates are many
    // orders below the generator's scale, a floor tied to max|k| alone would
    // reject exact results.
    const double scale = out.k.cwiseAbs().maxCoeff();
    const double floor = tol::rate_imag_floor_rel * wl.norm() * contraction_scale;
    if (out.imag_residue > tol::rate_imag_rel * scale && out.imag_residue > floor)
        throw std::runtime_error("non-real rate");
    return out;
}

BalanceReport balance_report(const RateMatrix& k, const Eigen::VectorXd& p_s) {
    const Eigen::Index n = k.k.rows();
    if (p_s.size() != n) throw std::invalid_argument("population vector dimension mismatch");
    BalanceReport rep;
    rep.kp_inf = (k.k * p_s).cwiseAbs().maxCoeff();
    rep.column_sums = k.k.colwise().sum();
    rep.pair_flux.resize(n, n);
    for (Eigen::Index m = 0; m < n; ++m)
        for (Eigen::Index j = 0; j < n; ++j)
            rep.pair_flux(m, j) = k.k(m, j) * p_s(j) - k.k(j, m) * p_s(m);
    return rep;
}

}  // namespace nesskit
