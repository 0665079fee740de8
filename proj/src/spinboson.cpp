#include "nesskit/spinboson.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nesskit {

namespace {

double diabat_potential(double q, double omega, double q_c, double eps) {
    return 0.5 * omega * (q - q_c) * (q - q_c) + eps;
}

void check_params(const SBParams& p) {
    if (p.Omega_1 <= 0.0 || p.Omega_2 <= 0.0)
        throw std::invalid_argument("diabat frequencies must be positive");
    if (p.Gamma_rad < 0.0 || p.Gamma_ph1 < 0.0 || p.Gamma_ph2 < 0.0)
        throw std::invalid_argument("channel strengths must be non-negative");
    if (p.T_rad <= 0.0 || p.T_ph <= 0.0)
        throw std::invalid_argument("temperatures must be positive");
    if (p.alpha_att < 0.0)
        throw std::invalid_argument("attenuation must be non-negative");
    if (p.n_basis < 2)
        throw std::invalid_argument("need at least two basis functions");
    if (!(resolved_e_cut(p) > std::min(p.eps_1, p.eps_2)))
        throw std::invalid_argument("cutoff below the lowest diabat energy");
}

// Eigenvectors of the position matrix split at the surface; an eigenvalue
// within the tie tolerance of q_x counts as left.
struct SideSplit {
    MatrixXd u_left, u_right;
};

SideSplit split_at_surface(const MatrixXd& q, double q_x) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(q);
    const Eigen::VectorXd& lam = es.eigenvalues();
    Eigen::Index nl = 0;
    while (nl < lam.size() && lam(nl) < q_x + tol::surface_tie) ++nl;
    return {es.eigenvectors().leftCols(nl),
            es.eigenvectors().rightCols(lam.size() - nl)};
}

}  // namespace

double resolved_e_cut(const SBParams& p) {
    if (std::isnan(p.e_cut)) return 50.0 * p.Omega_2 + p.eps_2 - p.eps_1;
    return p.e_cut;
}

SBParams reduced_basis_params() {
    SBParams p;
    p.n_basis = 128;
    p.e_cut = 25.0 * p.Omega_2 + p.eps_2 - p.eps_1;
    return p;
}

NuclearOperators primitive_basis(int n_basis) {
    if (n_basis < 2) throw std::invalid_argument("need at least two basis functions");
    MatrixXd a = MatrixXd::Zero(n_basis, n_basis);
    for (int k = 1; k < n_basis; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
    const MatrixXd q = (a + a.transpose()) / std::sqrt(2.0);
    const MatrixXd dq = (a - a.transpose()) / std::sqrt(2.0);
    return {std::move(a), q, dq * dq};
}

MatrixXd diabat_hamiltonian(const NuclearOperators& nuc, double omega, double q_c,
                            double eps) {
    const Eigen::Index n = nuc.q.rows();
    const MatrixXd shifted = nuc.q - q_c * MatrixXd::Identity(n, n);
    return -0.5 * omega * nuc.d2 + 0.5 * omega * shifted * shifted +
           eps * MatrixXd::Identity(n, n);
}

double dividing_surface(const SBParams& p) {
    if (p.Omega_1 == p.Omega_2 && p.q_1 == p.q_2 && p.eps_1 == p.eps_2)
        throw std::invalid_argument("diabats are identical: every point is a crossing");
    if (!(p.q_1 < p.q_2))
        throw std::invalid_argument("diabat minima must satisfy q_1 < q_2");
    auto f = [&p](double q) {
        return diabat_potential(q, p.Omega_1, p.q_1, p.eps_1) -
               diabat_potential(q, p.Omega_2, p.q_2, p.eps_2);
    };
    double lo = p.q_1;
    double hi = p.q_2;
    double flo = f(lo);
    const double fhi = f(hi);
    if (flo == 0.0 || fhi == 0.0 || (flo > 0.0) == (fhi > 0.0))
        throw std::invalid_argument("no crossing between minima");
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (flo * fm <= 0.0) {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    const double q_x = 0.5 * (lo + hi);
    if (std::abs(f(q_x)) > tol::crossing_residual)
        throw std::runtime_error("crossing not resolved to tolerance");
    return q_x;
}

std::pair<MatrixXd, MatrixXd> half_space_projectors(const MatrixXd& q, double q_x) {
    if (q.rows() != q.cols())
        throw std::invalid_argument("position matrix must be square");
    const SideSplit split = split_at_surface(q, q_x);
    MatrixXd pl = split.u_left * split.u_left.transpose();
    if (split.u_left.cols() == 0) pl = MatrixXd::Zero(q.rows(), q.rows());
    MatrixXd pr = MatrixXd::Identity(q.rows(), q.rows()) - pl;
    return {std::move(pl), std::move(pr)};
}

SBWorkspace build_truncated(const SBParams& p) {
    check_params(p);
    const double e_cut = resolved_e_cut(p);
    const Eigen::Index n = p.n_basis;
    const NuclearOperators nuc = primitive_basis(p.n_basis);
    const MatrixXd h1 = diabat_hamiltonian(nuc, p.Omega_1, p.q_1, p.eps_1);
    const MatrixXd h2 = diabat_hamiltonian(nuc, p.Omega_2, p.q_2, p.eps_2);
    const double q_x = dividing_surface(p);

    const SideSplit split = split_at_surface(nuc.q, q_x);
    const MatrixXd pl_nuc = split.u_left * split.u_left.transpose();

    MatrixXd e1 = MatrixXd::Zero(2, 2);
    e1(0, 0) = 1.0;
    MatrixXd e2 = MatrixXd::Zero(2, 2);
    e2(1, 1) = 1.0;
    MatrixXd x12 = MatrixXd::Zero(2, 2);  // |1><2|: radiative lowering
    x12(0, 1) = 1.0;
    const MatrixXd eye_n = MatrixXd::Identity(n, n);
    const MatrixXd eye2 = MatrixXd::Identity(2, 2);
    const MatrixXd h_full = kron(e1, h1) + kron(e2, h2) +
                            p.lambda * kron(x12 + x12.transpose(), eye_n);

    // Side-restricted eigenproblems; retain eigenstates below the cutoff.
    const MatrixXd bl = kron(eye2, split.u_left);
    const MatrixXd br = kron(eye2, split.u_right);
    Eigen::SelfAdjointEigenSolver<MatrixXd> esl(bl.transpose() * h_full * bl);
    Eigen::SelfAdjointEigenSolver<MatrixXd> esr(br.transpose() * h_full * br);
    Eigen::Index dl = 0;
    while (dl < esl.eigenvalues().size() && esl.eigenvalues()(dl) < e_cut) ++dl;
    Eigen::Index dr = 0;
    while (dr < esr.eigenvalues().size() && esr.eigenvalues()(dr) < e_cut) ++dr;
    const Eigen::Index d = dl + dr;
    if (dl == 0 || dr == 0 || d < 4) throw std::runtime_error("cutoff too aggressive");

    MatrixXd b(2 * n, d);
    b.leftCols(dl) = bl * esl.eigenvectors().leftCols(dl);
    b.rightCols(dr) = br * esr.eigenvectors().leftCols(dr);

    // Symmetric orthonormalization of the retained set.  The two sides are
    // orthogonal by construction, so this is a roundoff-level correction, but
    // it certifies the conditioning of the joint basis.
    const MatrixXd gram = b.transpose() * b;
    Eigen::SelfAdjointEigenSolver<MatrixXd> esg(gram);
    const Eigen::VectorXd ew = esg.eigenvalues();
    const double cond =
        ew(0) > 0.0 ? ew(d - 1) / ew(0) : std::numeric_limits<double>::infinity();
    if (!(cond <= tol::truncation_condition_max))
        throw std::runtime_error("ill-conditioned truncation");
    b = b * esg.eigenvectors() * ew.cwiseSqrt().cwiseInverse().asDiagonal() *
        esg.eigenvectors().transpose();

    auto tr_op = [&b](const MatrixXd& m) { return MatrixXd(b.transpose() * m * b); };
    const MatrixXd ht = tr_op(h_full);
    const MatrixXd plt = tr_op(kron(eye2, pl_nuc));
    const MatrixXd prt = MatrixXd::Identity(d, d) - plt;

    // Left-ground projector: compress, then round eigenvalues to {0, 1}.
    // Truncation moves them off the lattice by at most round_dist.
    const MatrixXd pg_raw = tr_op(kron(e1, pl_nuc));
    Eigen::SelfAdjointEigenSolver<MatrixXd> esp(pg_raw);
    MatrixXd pg = MatrixXd::Zero(d, d);
    double round_dist = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
        const double w = esp.eigenvalues()(i);
        round_dist = std::max(round_dist, std::min(std::abs(w), std::abs(w - 1.0)));
        if (w > 0.5) pg += esp.eigenvectors().col(i) * esp.eigenvectors().col(i).transpose();
    }
    const MatrixXd p1 = plt - pg;

    const double e_rad = diabat_potential(p.q_1, p.Omega_2, p.q_2, p.eps_2) -
                         diabat_potential(p.q_1, p.Omega_1, p.q_1, p.eps_1);
    if (!(e_rad > 0.0))
        throw std::invalid_argument("radiative gap must be positive at the left minimum");
    const double n_rad = p.alpha_att * bose_occupation(e_rad, p.T_rad);
    const double n_ph1 = bose_occupation(p.Omega_1, p.T_ph);
    const double n_ph2 = bose_occupation(p.Omega_2, p.T_ph);
    const MatrixXd s_rad = tr_op(kron(x12, eye_n));
    const MatrixXd s1 = tr_op(kron(e1, nuc.a - (p.q_1 / std::sqrt(2.0)) * eye_n));
    const MatrixXd s2 = tr_op(kron(e2, nuc.a - (p.q_2 / std::sqrt(2.0)) * eye_n));

    SBWorkspace ws;
    ws.params = p;
    ws.space.dim = d;
    ws.space.labels.reserve(d);
    for (Eigen::Index i = 0; i < dl; ++i) ws.space.labels.push_back("L" + std::to_string(i));
    for (Eigen::Index i = 0; i < dr; ++i) ws.space.labels.push_back("R" + std::to_string(i));
    ws.h = Operator{ws.space, ht.cast<Complex>()};

    std::vector<MatrixXc> channels;
    if (p.Gamma_rad > 0.0) channels.push_back(lindblad_pair(s_rad, p.Gamma_rad, n_rad));
    if (p.Gamma_ph1 > 0.0) channels.push_back(lindblad_pair(s1, p.Gamma_ph1, n_ph1));
    if (p.Gamma_ph2 > 0.0) channels.push_back(lindblad_pair(s2, p.Gamma_ph2, n_ph2));
    ws.l = assemble_liouvillian(ws.h, channels);

    ws.p_left = Operator{ws.space, plt.cast<Complex>()};
    ws.p_right = Operator{ws.space, prt.cast<Complex>()};
    ws.side = validate(ws.space, {plt.cast<Complex>(), prt.cast<Complex>()}, {"L", "R"});
    ws.three = validate(ws.space,
                        {pg.cast<Complex>(), p1.cast<Complex>(), prt.cast<Complex>()},
                        {"g", "1", "2"});
    ws.basis = std::move(b);
    ws.q_x = q_x;
    ws.e_rad = e_rad;
    ws.e_cut = e_cut;
    ws.dim_left = dl;
    ws.dim_right = dr;
    ws.overlap_condition = cond;
    ws.projector_round_distance = round_dist;
    return ws;
}

KickResult unitary_kick(const MatrixXc& mu, const MatrixXc& rho) {
    if (mu.rows() != mu.cols() || rho.rows() != rho.cols() || mu.rows() != rho.rows())
        throw std::invalid_argument("kick generator and state dimensions differ");
    MatrixXc out = rho;
    MatrixXc term = rho;
    for (int k = 1; k <= 200; ++k) {
        term = (Complex(0.0, -1.0) / static_cast<double>(k)) * (mu * term - term * mu);
        out += term;
        if (term.norm() <= tol::kick_term_floor) return {std::move(out), k};
    }
    throw std::runtime_error("excitation series did not converge within 200 terms");
}

VerticalExcitation vertical_excitation(const SBWorkspace& ws, const MatrixXc& rho_dark,
                                       double alpha_dip) {
    if (ws.params.Gamma_rad != 0.0)
        throw std::invalid_argument("workspace must be built with the radiative channel off");
    if (rho_dark.rows() != ws.space.dim || rho_dark.cols() != ws.space.dim)
        throw std::invalid_argument("state dimension does not match the workspace");
    const Eigen::Index n = ws.params.n_basis;
    MatrixXd sx(2, 2);
    sx << 0.0, 1.0, 1.0, 0.0;
    const MatrixXd mu_unit =
        ws.basis.transpose() * kron(sx, MatrixXd::Identity(n, n)) * ws.basis;
    KickResult kick = unitary_kick((alpha_dip * mu_unit).cast<Complex>(), rho_dark);
    MatrixXc rho = herm(kick.rho);
    rho /= rho.trace().real();
    const double energy = (ws.h.matrix * (rho - rho_dark)).trace().real();
    return {std::move(rho), energy, kick.terms};
}

const Partition& three_component_partition(const SBWorkspace& ws) { return ws.three; }

}  // namespace nesskit
