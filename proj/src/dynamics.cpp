#include "nesskit/dynamics.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "nesskit/tolerances.hpp"

namespace nesskit {

namespace {

void check_grid(const Eigen::VectorXd& grid) {
    if (grid.size() < 1) throw std::invalid_argument("empty time grid");
    if (grid(0) < 0.0) throw std::invalid_argument("time grid starts before zero");
    for (Eigen::Index j = 1; j < grid.size(); ++j)
        if (grid(j) <= grid(j - 1))
            throw std::invalid_argument("time grid not strictly increasing");
}

bool uniform_spacing(const Eigen::VectorXd& grid, double& dt) {
    if (grid.size() < 2) return false;
    dt = grid(1) - grid(0);
    for (Eigen::Index j = 1; j + 1 < grid.size(); ++j)
        if (std::abs(grid(j + 1) - grid(j) - dt) > 1e-9 * dt) return false;
    return true;
}

MatrixXc projector_columns(const Partition& part) {
    const Eigen::Index dim2 = part.space.dim * part.space.dim;
    MatrixXc w(dim2, part.size());
    for (Eigen::Index i = 0; i < part.size(); ++i) w.col(i) = vec(part.projectors[i]);
    return w;
}

// Eigendecomposition of a generator, accepted only if it reconstructs the
// matrix; non-normal generators can defeat it.
struct GeneratorEigen {
    bool ok = false;
    VectorXc eigs;
    MatrixXc vectors;
    Eigen::PartialPivLU<MatrixXc> lu;
};

GeneratorEigen generator_eigen(const MatrixXc& l) {
    GeneratorEigen ge;
    Eigen::ComplexEigenSolver<MatrixXc> es(l);
    if (es.info() != Eigen::Success) return ge;
    ge.eigs = es.eigenvalues();
    ge.vectors = es.eigenvectors();
    ge.lu.compute(ge.vectors);
    MatrixXc recon = ge.vectors * ge.eigs.asDiagonal() * ge.lu.inverse();
    const double scale = l.norm();
    ge.ok = (recon - l).norm() <= 1e-8 * (scale > 0 ? scale : 1.0);
    return ge;
}

void finalize_state_checks(const MatrixXc& rho_final) {
    const double herm_err = (rho_final - rho_final.adjoint()).cwiseAbs().maxCoeff();
    const double trace_err = std::abs(rho_final.trace() - Complex(1.0));
    if (herm_err > 1e-8 || trace_err > 1e-8)
        throw std::runtime_error("propagation failed");
}

std::vector<Eigen::Index> window_indices(const Eigen::VectorXd& times, double t_start,
                                         double t_end) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < times.size(); ++j)
        if (times(j) >= t_start && times(j) <= t_end) idx.push_back(j);
    return idx;
}

// Trapezoid weights for a sub-grid of samples.
Eigen::VectorXd trapezoid_weights(const Eigen::VectorXd& times,
                                  const std::vector<Eigen::Index>& idx) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j + 1 < idx.size(); ++j) {
        const double h = times(idx[j + 1]) - times(idx[j]);
        w(static_cast<Eigen::Index>(j)) += 0.5 * h;
        w(static_cast<Eigen::Index>(j + 1)) += 0.5 * h;
    }
    return w;
}

}  // namespace

Eigen::VectorXd uniform_grid(double t_end, double dt) {
    if (!(t_end > 0.0) || !(dt > 0.0))
        throw std::invalid_argument("grid extent and step must be positive");
    const auto steps = static_cast<Eigen::Index>(std::floor(t_end / dt));
    Eigen::VectorXd grid(steps + 1);
    for (Eigen::Index j = 0; j <= steps; ++j) grid(j) = dt * static_cast<double>(j);
    return grid;
}

MatrixXc perturbed_initial(const MatrixXc& rho_s, const Partition& part,
                           Eigen::Index component, double eta) {
    if (component < 0 || component >= part.size())
        throw std::invalid_argument("component index out of range");
    if (eta < 0.0 || eta > 1.0) throw std::invalid_argument("mixing weight outside [0, 1]");
    const MatrixXc& proj = part.projectors[component];
    const double weight = proj.trace().real();
    if (weight <= 0.0) throw std::invalid_argument("empty component projector");
    return (1.0 - eta) * rho_s + (eta / weight) * proj;
}

Trajectory propagate(const SuperOperator& l, const MatrixXc& rho0,
                     const Eigen::VectorXd& grid, const Partition& part,
                     bool keep_states) {
    check_grid(grid);
    require_state(rho0);
    const Eigen::Index dim = part.space.dim;
    if (rho0.rows() != dim) throw std::invalid_argument("state dimension mismatch");
    if (l.matrix.rows() != dim * dim)
        throw std::invalid_argument("generator dimension mismatch");

    const Eigen::Index nt = grid.size();
    const MatrixXc w = projector_columns(part);

    Trajectory traj;
    traj.names = part.names;
    traj.times = grid;
    traj.p.resize(part.size(), nt);
    traj.pdot.resize(part.size(), nt);
    if (keep_states) traj.states.reserve(nt);

    MatrixXc rho_final;
    GeneratorEigen ge = generator_eigen(l.matrix);
    if (ge.ok) {
        const VectorXc c = ge.lu.solve(vec(rho0));
        const MatrixXc wv = w.adjoint() * ge.vectors;
        const MatrixXc wlv = wv * ge.eigs.asDiagonal();
        for (Eigen::Index j = 0; j < nt; ++j) {
            const VectorXc amp = (ge.eigs * grid(j)).array().exp().matrix().cwiseProduct(c);
            traj.p.col(j) = (wv * amp).real();
            traj.pdot.col(j) = (wlv * amp).real();
            if (keep_states || j + 1 == nt) {
                MatrixXc rho_t = unvec(VectorXc(ge.vectors * amp), dim);
                if (keep_states) traj.states.push_back(rho_t);
                if (j + 1 == nt) rho_final = std::move(rho_t);
            }
        }
    } else {
        double dt = 0.0;
        if (!uniform_spacing(grid, dt)) throw std::runtime_error("propagation failed");
        const MatrixXc step = (l.matrix * dt).exp();
        VectorXc y = vec(rho0);
        if (grid(0) > 0.0) y = (l.matrix * grid(0)).exp() * y;
        for (Eigen::Index j = 0; j < nt; ++j) {
            if (j > 0) y = step * y;
            traj.p.col(j) = (w.adjoint() * y).real();
            traj.pdot.col(j) = (w.adjoint() * (l.matrix * y)).real();
            if (keep_states) traj.states.push_back(unvec(y, dim));
            if (j + 1 == nt) rho_final = unvec(y, dim);
        }
    }

    finalize_state_checks(rho_final);
    return traj;
}

Trajectory propagate_unitary(const Operator& h, const MatrixXc& rho0,
                             const Eigen::VectorXd& grid, const Partition& part,
                             bool keep_states) {
    check_grid(grid);
    require_state(rho0);
    const Eigen::Index dim = part.space.dim;
    if (rho0.rows() != dim || h.matrix.rows() != dim)
        throw std::invalid_argument("state dimension mismatch");
    if ((h.matrix - h.matrix.adjoint()).cwiseAbs().maxCoeff() >
        tol::hermiticity * std::max(1.0, h.matrix.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("generator is not Hermitian");

    Eigen::SelfAdjointEigenSolver<MatrixXc> es(h.matrix);
    if (es.info() != Eigen::Success) throw std::runtime_error("propagation failed");
    const Eigen::VectorXd& e = es.eigenvalues();
    const MatrixXc& u = es.eigenvectors();

    const Eigen::Index nt = grid.size();
    Trajectory traj;
    traj.names = part.names;
    traj.times = grid;
    traj.p.resize(part.size(), nt);
    traj.pdot.resize(part.size(), nt);
    if (keep_states) traj.states.reserve(nt);

    // Projectors rotated into the eigenbasis once; rho evolves by phases.
    std::vector<MatrixXc> proj_eig;
    proj_eig.reserve(part.size());
    for (const auto& proj : part.projectors) proj_eig.push_back(u.adjoint() * proj * u);
    const MatrixXc rho_eig = u.adjoint() * rho0 * u;

    MatrixXc rho_final;
    const VectorXc ec = e.cast<Complex>();
    for (Eigen::Index j = 0; j < nt; ++j) {
        const VectorXc phase = (Complex(0, -1) * ec * grid(j)).array().exp();
        const MatrixXc rho_t = phase.asDiagonal() * rho_eig * phase.conjugate().asDiagonal();
        // d/dt tr{P rho} = tr{P (-i)[H, rho]}, all in the eigenbasis.
        const MatrixXc hr = Complex(0, -1) * (ec.asDiagonal() * rho_t - rho_t * ec.asDiagonal());
        for (Eigen::Index m = 0; m < part.size(); ++m) {
            traj.p(m, j) = (proj_eig[m] * rho_t).trace().real();
            traj.pdot(m, j) = (proj_eig[m] * hr).trace().real();
        }
        if (keep_states || j + 1 == nt) {
            MatrixXc rho_site = u * rho_t * u.adjoint();
            if (keep_states) traj.states.push_back(rho_site);
            if (j + 1 == nt) rho_final = std::move(rho_site);
        }
    }

    finalize_state_checks(rho_final);
    return traj;
}

void m_split(Trajectory& traj, const RateMatrix& k) {
    if (k.k.rows() != traj.p.rows())
        throw std::invalid_argument("trajectory and rate matrix partition mismatch");
    traj.m1 = k.k * traj.p;
    traj.m2 = traj.pdot - traj.m1;
}

Eigen::VectorXd m_ratio(const Trajectory& traj) {
    if (traj.m1.size() == 0) throw std::invalid_argument("split not computed");
    Eigen::VectorXd ratio(traj.times.size());
    for (Eigen::Index j = 0; j < traj.times.size(); ++j) {
        const double denom = traj.m1.col(j).cwiseAbs().maxCoeff();
        ratio(j) = denom > 0 ? traj.m2.col(j).cwiseAbs().maxCoeff() / denom
                             : std::numeric_limits<double>::quiet_NaN();
    }
    return ratio;
}

namespace {

// Eigenvalues with the structural zeros removed, sorted by descending real
// part (slowest first); throws on retained growth.
Eigen::VectorXcd retained_spectrum(const Eigen::VectorXcd& eigs) {
    const double scale = eigs.real().cwiseAbs().maxCoeff();
    std::vector<Complex> keep;
    for (Eigen::Index i = 0; i < eigs.size(); ++i)
        if (std::abs(eigs(i).real()) > tol::structural_zero_rel * scale)
            keep.push_back(eigs(i));
    if (keep.empty()) throw std::runtime_error("no relaxing modes");
    std::sort(keep.begin(), keep.end(),
              [](Complex a, Complex b) { return a.real() > b.real(); });
    if (keep.front().real() > 0.0) throw std::runtime_error("unstable generator");
    return Eigen::Map<Eigen::VectorXcd>(keep.data(), static_cast<Eigen::Index>(keep.size()));
}

}  // namespace

TimescaleReport timescales(const SuperOperator& l, const RateMatrix& k,
                           const LiouvillePartition& lp, const MatrixXc& rho0) {
    TimescaleReport rep;

    Eigen::EigenSolver<Eigen::MatrixXd> kes(k.k);
    if (kes.info() != Eigen::Success) throw std::runtime_error("rate spectrum failed");
    rep.rate_eigs = retained_spectrum(kes.eigenvalues());
    rep.t1 = 1.0 / std::abs(rep.rate_eigs(0).real());

    Eigen::ComplexEigenSolver<MatrixXc> ces(complement_generator(l, lp));
    if (ces.info() != Eigen::Success)
        throw std::runtime_error("complement spectrum failed");
    rep.complement_eigs = retained_spectrum(ces.eigenvalues());
    rep.t2 = 1.0 / std::abs(rep.complement_eigs(0).real());

    rep.markovian = rep.t2 <= tol::markovian_ratio * rep.t1;

    // Reach time: first scan point where the population deviation from the
    // steady values drops to the threshold.
    require_state(rho0);
    const Eigen::VectorXd& p_s = lp.steady_populations;
    auto deviation_below = [&](const Eigen::VectorXd& p) {
        return (p - p_s).cwiseAbs().maxCoeff() <= tol::steady_reach_inf;
    };

    GeneratorEigen ge = generator_eigen(l.matrix);
    const double t_lo = rep.t1 * 1e-6;
    const double t_hi = rep.t1 * 1e3;
    if (ge.ok) {
        const VectorXc c = ge.lu.solve(vec(rho0));
        const MatrixXc wv = lp.w.adjoint() * ge.vectors;
        auto populations_at = [&](double t) {
            const VectorXc amp = (ge.eigs * t).array().exp().matrix().cwiseProduct(c);
            return Eigen::VectorXd((wv * amp).real());
        };
        if (deviation_below(populations_at(0.0))) {
            rep.ts = 0.0;
            return rep;
        }
        double t = t_lo;
        while (t <= t_hi) {
            if (deviation_below(populations_at(t))) {
                rep.ts = t;
                return rep;
            }
            t *= 1.02;
        }
        throw std::runtime_error("steady state not reached");
    }

    // Defective generator: walk a uniform grid with a fixed-step exponential.
    const double dt = rep.t1 / 200.0;
    const MatrixXc step = (l.matrix * dt).exp();
    VectorXc y = vec(rho0);
    for (double t = 0.0; t <= t_hi; t += dt) {
        if (deviation_below((lp.w.adjoint() * y).real())) {
            rep.ts = t;
            return rep;
        }
        y = step * y;
    }
    throw std::runtime_error("steady state not reached");
}

double relative_error(const Trajectory& traj, const RateMatrix& k, double t_start,
                      double t_end) {
    if (k.k.rows() != traj.p.rows())
        throw std::invalid_argument("trajectory and rate matrix partition mismatch");
    const auto idx = window_indices(traj.times, t_start, t_end);
    if (idx.size() < 2) throw std::invalid_argument("empty window");
    const Eigen::VectorXd w = trapezoid_weights(traj.times, idx);

    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < idx.size(); ++j) {
        const Eigen::VectorXd kp = k.k * traj.p.col(idx[j]);
        const Eigen::VectorXd pd = traj.pdot.col(idx[j]);
        num += w(static_cast<Eigen::Index>(j)) * (pd - kp).norm();
        den += w(static_cast<Eigen::Index>(j)) * (pd + kp).norm();
    }
    if (den == 0.0)
        return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return 2.0 * num / den;
}

RateMatrix fit_rate_matrix(const Trajectory& traj, double t_start, double t_end) {
    const auto idx = window_indices(traj.times, t_start, t_end);
    if (idx.size() < 2) throw std::invalid_argument("empty window");
    const Eigen::VectorXd w = trapezoid_weights(traj.times, idx);

    const Eigen::Index n = traj.p.rows();
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t j = 0; j < idx.size(); ++j) {
        const Eigen::VectorXd p = traj.p.col(idx[j]);
        const Eigen::VectorXd pd = traj.pdot.col(idx[j]);
        const double wj = w(static_cast<Eigen::Index>(j));
        gram += wj * p * p.transpose();
        cross += wj * pd * p.transpose();
    }

    // Pseudo-inverse: the Gram matrix of near-relaxed trajectories is
    // rank-deficient along the barely-explored directions; truncating them
    // reproduces the kinetics actually present in the data.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(gram, Eigen::ComputeFullU | Eigen::ComputeFullV);
    svd.setThreshold(tol::min_norm_rcond);
    if (svd.rank() < 2) throw std::runtime_error("degenerate population trajectories");
    Eigen::VectorXd inv_sv = Eigen::VectorXd::Zero(svd.singularValues().size());
    for (Eigen::Index i = 0; i < svd.rank(); ++i)
        inv_sv(i) = 1.0 / svd.singularValues()(i);
    const Eigen::MatrixXd pinv =
        svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose();

    RateMatrix out;
    out.names = traj.names;
    out.k = cross * pinv;
    out.route = Route::fitted;
    return out;
}

}  // namespace nesskit
