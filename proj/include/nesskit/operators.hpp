#pragma once
// Typed layer over the raw matrix algebra: a Hilbert space with labelled
// basis states (optionally a tensor product, first factor major), operators
// on it, and superoperators on its vectorized operators.

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nesskit/core.hpp"
#include "nesskit/tolerances.hpp"

namespace nesskit {

struct HilbertSpace {
    Eigen::Index dim = 0;
    std::vector<std::string> labels;  // one label per basis state, unique
    // Optional tensor-factor structure (name, dim); composite index is
    // row-major: state (i0, i1) of factors (d0, d1) sits at i0*d1 + i1.
    std::vector<std::pair<std::string, Eigen::Index>> factors;
};

inline HilbertSpace make_space(std::vector<std::string> labels) {
    HilbertSpace s;
    s.dim = static_cast<Eigen::Index>(labels.size());
    s.labels = std::move(labels);
    return s;
}

inline void check_space(const HilbertSpace& s) {
    if (s.dim <= 0) throw std::invalid_argument("space dimension must be positive");
    if (static_cast<Eigen::Index>(s.labels.size()) != s.dim)
        throw std::invalid_argument("label count must equal the space dimension");
    for (std::size_t i = 0; i < s.labels.size(); ++i)
        for (std::size_t j = i + 1; j < s.labels.size(); ++j)
            if (s.labels[i] == s.labels[j])
                throw std::invalid_argument("duplicate basis label: " + s.labels[i]);
    if (!s.factors.empty()) {
        Eigen::Index prod = 1;
        for (const auto& f : s.factors) prod *= f.second;
        if (prod != s.dim)
            throw std::invalid_argument("factor dimensions do not multiply to the space dimension");
    }
}

struct Operator {
    HilbertSpace space;
    MatrixXc matrix;
};

struct SuperOperator {
    HilbertSpace space;
    MatrixXc matrix;  // (dim^2) x (dim^2), acts on column-stacked operators
};

inline VectorXc vectorize(const Operator& op) { return vec(op.matrix); }

inline Operator devectorize(const VectorXc& v, const HilbertSpace& space) {
    if (v.size() != space.dim * space.dim)
        throw std::invalid_argument("vector length is not the squared space dimension");
    return Operator{space, unvec(v, space.dim)};
}

// Physical-state checks, applied only where a contract demands a state.
inline void require_state(const MatrixXc& rho) {
    if (rho.rows() != rho.cols()) throw std::invalid_argument("state matrix must be square");
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > tol::hermiticity)
        throw std::invalid_argument("state is not Hermitian");
    if (std::abs(rho.trace() - Complex(1.0)) > tol::unit_trace)
        throw std::invalid_argument("state trace differs from one");
    Eigen::SelfAdjointEigenSolver<MatrixXc> es(herm(rho), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < tol::positivity_floor)
        throw std::invalid_argument("state has a negative eigenvalue");
}

// Full open-system generator: coherent part plus already-built dissipative terms.
inline SuperOperator assemble_liouvillian(const Operator& h,
                                          const std::vector<MatrixXc>& dissipators) {
    MatrixXc l = commutator_generator(h.matrix);
    for (const auto& d : dissipators) {
        if (d.rows() != l.rows() || d.cols() != l.cols())
            throw std::invalid_argument("dissipator dimension mismatch");
        l += d;
    }
    return SuperOperator{h.space, std::move(l)};
}

}  // namespace nesskit
