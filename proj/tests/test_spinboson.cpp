#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "nesskit/ness.hpp"
#include "nesskit/partition.hpp"
#include "nesskit/rates.hpp"
#include "nesskit/spinboson.hpp"

using namespace nesskit;

namespace {

bool throws_with(const std::function<void()>& f, const std::string& needle) {
    try {
        f();
    } catch (const std::exception& e) {
        return std::string(e.what()).find(needle) != std::string::npos;
    }
    return false;
}

// Built once and shared: the reduced-scale workspace is the expensive part.
const SBWorkspace& reduced() {
    static const SBWorkspace ws = build_truncated(reduced_basis_params());
    return ws;
}

const SBWorkspace& reduced_dark() {
    static const SBWorkspace ws = [] {
        SBParams p = reduced_basis_params();
        p.Gamma_rad = 0.0;
        return build_truncated(p);
    }();
    return ws;
}

// Electronic projector |2><2| (x) identity mapped into the truncated basis.
MatrixXd electronic_two(const SBWorkspace& ws) {
    MatrixXd e2 = MatrixXd::Zero(2, 2);
    e2(1, 1) = 1.0;
    const Eigen::Index n = ws.params.n_basis;
    return ws.basis.transpose() * kron(e2, MatrixXd::Identity(n, n)) * ws.basis;
}

}  // namespace

TEST_CASE("primitive ladder operators carry the textbook matrix elements") {
    NuclearOperators two = primitive_basis(2);
    const double s = 1.0 / std::sqrt(2.0);
    CHECK(two.q(0, 0) == 0.0);
    CHECK(two.q(0, 1) == doctest::Approx(s).epsilon(1e-15));
    CHECK(two.q(1, 0) == doctest::Approx(s).epsilon(1e-15));
    CHECK(two.q(1, 1) == 0.0);

    NuclearOperators nuc = primitive_basis(10);
    // Ground-state variance of the unit oscillator.
    CHECK((nuc.q * nuc.q)(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
    // q^2 - d2 is the shifted number operator on the interior block.
    const MatrixXd num = nuc.q * nuc.q - nuc.d2;
    for (int k = 0; k < 9; ++k) {
        CHECK(num(k, k) == doctest::Approx(2.0 * k + 1.0).epsilon(1e-13));
        for (int j = 0; j < 10; ++j)
            if (j != k) CHECK(std::abs(num(k, j)) < 1e-13);
    }
    // [a, a^T] = I away from the truncation edge.
    const MatrixXd comm = nuc.a * nuc.a.transpose() - nuc.a.transpose() * nuc.a;
    for (int k = 0; k < 9; ++k) CHECK(comm(k, k) == doctest::Approx(1.0).epsilon(1e-14));

    CHECK(throws_with([] { primitive_basis(1); }, "at least two basis functions"));
}

TEST_CASE("dividing surface sits at the diabat crossing") {
    const SBParams p;
    const double qx = dividing_surface(p);
    // Frozen root of the default diabats; closed form (-9 + sqrt(105)) / 2.
    CHECK(std::abs(qx - 0.6234753829797992) < 1e-15);
    CHECK(std::abs(qx - (-9.0 + std::sqrt(105.0)) / 2.0) < 1e-15);
    const double v1 = 0.5 * p.Omega_1 * (qx - p.q_1) * (qx - p.q_1) + p.eps_1;
    const double v2 = 0.5 * p.Omega_2 * (qx - p.q_2) * (qx - p.q_2) + p.eps_2;
    CHECK(std::abs(v1 - v2) <= 1e-14);

    // Mirror-symmetric diabats cross at the origin.
    SBParams sym;
    sym.Omega_2 = sym.Omega_1;
    sym.eps_2 = sym.eps_1;
    CHECK(std::abs(dividing_surface(sym)) <= 1e-14);

    // Offset too large: the parabolas do not change order between the minima.
    SBParams apart;
    apart.Omega_1 = apart.Omega_2 = 2e-3;
    apart.eps_2 = 0.05;
    CHECK(throws_with([&] { dividing_surface(apart); }, "no crossing between minima"));

    SBParams same;
    same.Omega_2 = same.Omega_1;
    same.eps_2 = same.eps_1;
    same.q_2 = same.q_1;
    CHECK(throws_with([&] { dividing_surface(same); }, "identical"));
}

TEST_CASE("half-space projectors resolve the position eigenbasis") {
    NuclearOperators nuc = primitive_basis(128);
    auto [pl, pr] = half_space_projectors(nuc.q, 0.0);
    // Symmetric spectrum: the origin splits the quadrature points evenly.
    CHECK(pl.trace() == doctest::Approx(64.0).epsilon(1e-12));
    CHECK((pl - pl.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((pl * pl - pl).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((pl + pr - MatrixXd::Identity(128, 128)).cwiseAbs().maxCoeff() < 1e-12);

    // Surface beyond the largest quadrature point: everything is left.
    auto [pl_all, pr_all] = half_space_projectors(nuc.q, 1e6);
    CHECK((pl_all - MatrixXd::Identity(128, 128)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(pr_all.cwiseAbs().maxCoeff() < 1e-12);

    // Half of the ground-state Gaussian sits left of the origin.
    NuclearOperators big = primitive_basis(400);
    auto [pl_big, pr_big] = half_space_projectors(big.q, 0.0);
    CHECK(pl_big(0, 0) == doctest::Approx(0.5).epsilon(2e-3));
}

TEST_CASE("reduced-scale truncation reproduces the frozen workspace") {
    const SBWorkspace& ws = reduced();
    CHECK(ws.space.dim == 36);
    CHECK(ws.dim_left + ws.dim_right == 36);
    CHECK(ws.e_cut == doctest::Approx(0.022).epsilon(1e-14));
    CHECK(ws.e_rad == doctest::Approx(0.0192).epsilon(1e-14));
    CHECK(std::abs(ws.q_x - 0.6234753829797992) < 1e-15);
    CHECK(ws.overlap_condition == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(ws.projector_round_distance > 0.0);
    CHECK(ws.projector_round_distance < 1e-4);

    const Eigen::Index d = ws.space.dim;
    const MatrixXc eye = MatrixXc::Identity(d, d);
    CHECK((ws.p_left.matrix + ws.p_right.matrix - eye).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((ws.p_left.matrix * ws.p_left.matrix - ws.p_left.matrix).cwiseAbs().maxCoeff() <
          1e-9);
    CHECK(ws.side.names == std::vector<std::string>{"L", "R"});
    CHECK(ws.three.names == std::vector<std::string>{"g", "1", "2"});
    CHECK(three_component_partition(ws).names == ws.three.names);
    // Ground-left and excited-left projectors tile the left half exactly.
    CHECK((ws.three.projectors[0] + ws.three.projectors[1] - ws.p_left.matrix)
              .cwiseAbs()
              .maxCoeff() < 1e-12);
    CHECK(ws.space.labels.front() == "L0");
    CHECK(ws.space.labels.back() == "R" + std::to_string(ws.dim_right - 1));

    // The trace functional annihilates the generator.
    VectorXc tr_row = VectorXc::Zero(d * d);
    for (Eigen::Index i = 0; i < d; ++i) tr_row(i * d + i) = 1.0;
    CHECK((tr_row.adjoint() * ws.l.matrix).cwiseAbs().maxCoeff() <
          1e-12 * ws.l.matrix.norm());

    // Frozen bath occupations at the default temperatures.
    CHECK(bose_occupation(ws.e_rad, ws.params.T_rad) ==
          doctest::Approx(0.542205).epsilon(1e-5));
    CHECK(bose_occupation(ws.params.Omega_1, ws.params.T_ph) ==
          doctest::Approx(0.138726).epsilon(1e-5));
    CHECK(bose_occupation(ws.params.Omega_2, ws.params.T_ph) ==
          doctest::Approx(1.91009).epsilon(1e-5));
}

TEST_CASE("steady state and side rates match the frozen regression values") {
    const SBWorkspace& ws = reduced();
    NessResult ness = solve_ness(ws.l);
    Eigen::VectorXd pops = populations(ws.side, ness.rho_s.matrix);
    CHECK(pops(0) == doctest::Approx(0.6292633151).epsilon(1e-8));
    CHECK(pops(1) == doctest::Approx(0.3707366849).epsilon(1e-8));

    LiouvillePartition lp = liouville_partition(ws.side, ness.rho_s.matrix);
    RateMatrix k = rate_matrix(ws.l, lp);
    CHECK(k.k(1, 0) == doctest::Approx(1.104244797e-7).epsilon(1e-6));
    CHECK(k.k(0, 1) == doctest::Approx(1.874270257e-7).epsilon(1e-6));
    const double scale = k.k.cwiseAbs().maxCoeff();
    CHECK(k.k.colwise().sum().cwiseAbs().maxCoeff() < 1e-12 * scale);
    CHECK((k.k * lp.steady_populations).cwiseAbs().maxCoeff() < 1e-10 * scale);
}

TEST_CASE("dark workspace pins the thermal floor") {
    const SBWorkspace& ws = reduced_dark();
    NessResult ness = solve_ness(ws.l);
    Eigen::VectorXd pops = populations(ws.side, ness.rho_s.matrix);
    CHECK(pops(1) == doctest::Approx(0.00162775).epsilon(1e-4));

    LiouvillePartition lp = liouville_partition(ws.side, ness.rho_s.matrix);
    RateMatrix k = rate_matrix(ws.l, lp);
    CHECK(k.k(1, 0) == doctest::Approx(8.44073e-14).epsilon(1e-3));
}

TEST_CASE("decoupled electronic sectors conserve their own populations") {
    SBParams p = reduced_basis_params();
    p.lambda = 0.0;
    p.Gamma_rad = 0.0;
    SBWorkspace ws = build_truncated(p);
    // With no coupling and no radiative channel the population of electronic
    // state 2 is a conserved charge: its trace functional annihilates L.
    const MatrixXd p2 = electronic_two(ws);
    const VectorXc w = vec(p2.cast<Complex>());
    CHECK((w.adjoint() * ws.l.matrix).cwiseAbs().maxCoeff() < 1e-12 * ws.l.matrix.norm());
    // Two conserved charges means the steady state cannot be unique.
    CHECK(throws_with([&] { solve_ness(ws.l); }, "steady state not unique"));
}

TEST_CASE("vertical excitation is the unitary dipole kick") {
    const SBWorkspace& ws = reduced_dark();
    NessResult ness = solve_ness(ws.l);
    VerticalExcitation ve = vertical_excitation(ws, ness.rho_s.matrix);
    CHECK(ve.terms < 200);
    CHECK(std::abs(ve.rho.trace() - Complex(1.0)) < 1e-12);
    CHECK((ve.rho - ve.rho.adjoint()).cwiseAbs().maxCoeff() < 1e-14);

    // Energy deposited per transferred electronic population lands near the
    // vertical gap; both numbers are frozen regressions.
    const MatrixXd p2 = electronic_two(ws);
    const double dpop =
        ((ve.rho - ness.rho_s.matrix) * p2.cast<Complex>()).trace().real();
    CHECK(ve.energy / dpop == doctest::Approx(0.0178653).epsilon(1e-4));

    // A kick with zero dipole is the identity.
    VerticalExcitation none = vertical_excitation(ws, ness.rho_s.matrix, 0.0);
    CHECK((none.rho - ness.rho_s.matrix).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(none.energy == doctest::Approx(0.0).epsilon(1e-18));

    // Quarter-turn on a two-level state moves everything across.
    MatrixXc mu(2, 2);
    mu << 0.0, M_PI_2, M_PI_2, 0.0;
    MatrixXc rho0 = MatrixXc::Zero(2, 2);
    rho0(0, 0) = 1.0;
    KickResult full = unitary_kick(mu, rho0);
    CHECK(std::abs(full.rho(1, 1) - Complex(1.0)) < 1e-12);
    CHECK(std::abs(full.rho(0, 0)) < 1e-12);

    // A huge generator cannot converge within the term budget.
    CHECK(throws_with([&] { unitary_kick(500.0 * mu, rho0); }, "did not converge"));

    // The kick demands a dark workspace.
    CHECK(throws_with([&] { vertical_excitation(reduced(), ness.rho_s.matrix); },
                      "radiative channel off"));
}

TEST_CASE("parameter and truncation failures are reported") {
    SBParams starved = reduced_basis_params();
    starved.e_cut = 2e-3;
    CHECK(throws_with([&] { build_truncated(starved); }, "cutoff too aggressive"));

    SBParams bad = reduced_basis_params();
    bad.e_cut = -1.0;
    CHECK(throws_with([&] { build_truncated(bad); }, "cutoff below the lowest"));

    SBParams cold = reduced_basis_params();
    cold.T_ph = 0.0;
    CHECK(throws_with([&] { build_truncated(cold); }, "temperatures must be positive"));

    SBParams neg = reduced_basis_params();
    neg.Gamma_ph1 = -1e-9;
    CHECK(throws_with([&] { build_truncated(neg); }, "non-negative"));
}
