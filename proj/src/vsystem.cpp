#include "nesskit/vsystem.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "nesskit/core.hpp"

namespace nesskit {

namespace {

MatrixXc ketbra(Eigen::Index i, Eigen::Index j) {
    MatrixXc m = MatrixXc::Zero(3, 3);
    m(i, j) = 1.0;
    return m;
}

void check_params(const VParams& p) {
    const double gammas[] = {p.Gamma_H1, p.Gamma_H2, p.Gamma_C1,
                             p.Gamma_C2, p.Gamma_Df, p.Gamma_Db};
    for (double g : gammas)
        if (g < 0.0 || !std::isfinite(g)) throw std::invalid_argument("negative bath rate");
}

}  // namespace

VSystem build(const VParams& p) {
    check_params(p);
    HilbertSpace space = make_space({"g", "1", "2"});

    MatrixXc h = MatrixXc::Zero(3, 3);
    h(0, 0) = p.eps_g;
    h(1, 1) = p.eps_1;
    h(2, 2) = p.eps_2;
    h(1, 2) = p.J;
    h(2, 1) = p.J;

    // Channel rates carry a factor 2 relative to the nominal Gamma values.
    std::vector<MatrixXc> dissipators;
    const std::pair<MatrixXc, double> channels[] = {
        {ketbra(1, 0), p.Gamma_H1},  // pump g -> 1
        {ketbra(2, 0), p.Gamma_H2},  // pump g -> 2
        {ketbra(0, 1), p.Gamma_C1},  // decay 1 -> g
        {ketbra(0, 2), p.Gamma_C2},  // decay 2 -> g
        {ketbra(2, 1), p.Gamma_Df},  // conversion 1 -> 2
        {ketbra(1, 2), p.Gamma_Db},  // conversion 2 -> 1
    };
    for (const auto& [s, gamma] : channels)
        if (gamma > 0.0) dissipators.push_back(lindblad_pair(s, 2.0 * gamma, 0.0));

    VSystem sys;
    sys.h = Operator{space, h};
    sys.l = assemble_liouvillian(sys.h, dissipators);
    sys.standard = validate(space, {ketbra(0, 0), ketbra(1, 1), ketbra(2, 2)},
                            {"g", "1", "2"});
    sys.grouped = validate(space, {ketbra(0, 0) + ketbra(1, 1), ketbra(2, 2)}, {"A", "2"});
    return sys;
}

VDerived derived(const VParams& p) {
    check_params(p);
    VDerived d;
    d.gamma_star = p.Gamma_C1 + p.Gamma_C2 + p.Gamma_Df + p.Gamma_Db;
    d.delta = p.eps_2 - p.eps_1;
    const double denom = d.gamma_star * d.gamma_star + d.delta * d.delta;
    if (denom == 0.0) throw std::runtime_error("beta undefined");
    d.beta = p.J * p.J * d.gamma_star / denom;
    d.r = std::numeric_limits<double>::quiet_NaN();
    return d;
}

VDerived derived(const VParams& p, const MatrixXc& rho_s) {
    VDerived d = derived(p);
    const double pgg = rho_s(0, 0).real();
    const double p11 = rho_s(1, 1).real();
    if (pgg + p11 <= 0.0) throw std::runtime_error("grouped rate undefined");
    d.r = pgg / (pgg + p11);
    return d;
}

std::pair<double, double> analytic_rates_standard(const VParams& p) {
    const VDerived d = derived(p);
    return {2.0 * (d.beta + p.Gamma_Df), 2.0 * (d.beta + p.Gamma_Db)};
}

std::pair<double, double> analytic_rates_grouped(const VParams& p, double r) {
    if (!(r >= 0.0 && r <= 1.0)) throw std::runtime_error("grouped rate undefined");
    const VDerived d = derived(p);
    const double denom = r * (d.beta + p.Gamma_Df) + p.Gamma_H1 + (1.0 - r) * p.Gamma_H2 +
                         p.Gamma_C1;
    if (denom == 0.0) throw std::runtime_error("grouped rate undefined");
    const double k2A =
        2.0 * ((p.Gamma_H1 + p.Gamma_H2) * (d.beta + p.Gamma_Df) + p.Gamma_H2 * p.Gamma_C1) /
        denom;
    const double kA2 = 2.0 *
                       ((d.beta + p.Gamma_Df + p.Gamma_H1 + p.Gamma_C1) * p.Gamma_C2 +
                        (d.beta + p.Gamma_Db) * (p.Gamma_H1 + p.Gamma_H2 + p.Gamma_C1)) /
                       denom;
    return {k2A, kA2};
}

GroupedLimits grouped_rate_limits(const VParams& p) {
    const VDerived d = derived(p);
    GroupedLimits lim;
    lim.pump1_k2A = 2.0 * (d.beta + p.Gamma_Df);
    lim.pump1_kA2 = 2.0 * (d.beta + p.Gamma_Db + p.Gamma_C2);
    lim.pump2_k2A = 2.0 * (d.beta + p.Gamma_Df + p.Gamma_C1);
    lim.pump2_kA2 = 2.0 * (d.beta + p.Gamma_Db);
    const double dark_denom = d.beta + p.Gamma_Df + p.Gamma_C1;
    if (dark_denom == 0.0) throw std::runtime_error("grouped rate undefined");
    lim.dark_kA2 = 2.0 * (p.Gamma_C2 + (d.beta + p.Gamma_Db) * p.Gamma_C1 / dark_denom);
    return lim;
}

std::vector<BetaSweepRow> sweep_beta(const std::vector<double>& deltas,
                                     const std::vector<double>& gammas, const VParams& base) {
    if (deltas.empty() || gammas.empty()) throw std::invalid_argument("empty sweep grid");
    std::vector<BetaSweepRow> rows;
    rows.reserve(deltas.size() * gammas.size());
    for (double dl : deltas)
        for (double g : gammas) {
            VParams p = base;
            p.eps_2 = p.eps_1 + dl;
            p.Gamma_C2 = g;
            p.Gamma_Df = g;
            rows.push_back(BetaSweepRow{dl, g, derived(p).beta});
        }
    return rows;
}

}  // namespace nesskit
