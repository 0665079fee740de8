#pragma once
// Dense operator algebra for open-network generators.
//
// Conventions used throughout:
//   * atomic units, hbar = 1;
//   * column-stacking vectorization: vec(M)(j*rows + i) = M(i,j), so that
//     vec(A X B) = (B^T (x) A) vec(X);
//   * superoperators are dim^2 x dim^2 matrices acting on vectorized operators.
//
// Everything here is a free function over Eigen expressions; results are
// evaluated dense matrices so callers can feed arbitrary expressions in.

#include <Eigen/Dense>

#include <cmath>
#include <complex>

namespace nesskit {

using Complex = std::complex<double>;
using MatrixXc = Eigen::MatrixXcd;
using VectorXc = Eigen::VectorXcd;

// Boltzmann constant, hartree per kelvin.
inline constexpr double k_boltzmann = 3.166811563e-6;

// Mean thermal occupation of a mode with energy gap `energy` (hartree) at
// temperature `temperature` (kelvin).
inline double bose_occupation(double energy, double temperature) {
    return 1.0 / std::expm1(energy / (k_boltzmann * temperature));
}

// Kronecker product with scalar promotion (real (x) complex yields complex).
template <typename DerivedA, typename DerivedB>
auto kron(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
    using Scalar = typename Eigen::ScalarBinaryOpTraits<typename DerivedA::Scalar,
                                                        typename DerivedB::Scalar>::ReturnType;
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(a.rows() * b.rows(),
                                                              a.cols() * b.cols());
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) =
                a(i, j) * b.derived();
    return out;
}

// Column-stacking vectorization and its inverse.
template <typename Derived>
auto vec(const Eigen::MatrixBase<Derived>& m) {
    using Scalar = typename Derived::Scalar;
    Eigen::Vector<Scalar, Eigen::Dynamic> v(m.size());
    Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>(v.data(), m.rows(),
                                                                      m.cols()) = m;
    return v;
}

template <typename Derived>
auto unvec(const Eigen::MatrixBase<Derived>& v, Eigen::Index dim) {
    using Scalar = typename Derived::Scalar;
    eigen_assert(v.size() == dim * dim);
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m(dim, dim);
    Eigen::Map<Eigen::Vector<Scalar, Eigen::Dynamic>>(m.data(), m.size()) = v;
    return m;
}

// Trace of the operator a vector encodes, without materializing the matrix.
template <typename Derived>
typename Derived::Scalar vec_trace(const Eigen::MatrixBase<Derived>& v, Eigen::Index dim) {
    typename Derived::Scalar t{};
    for (Eigen::Index i = 0; i < dim; ++i) t += v(i * dim + i);
    return t;
}

template <typename Derived>
auto dag(const Eigen::MatrixBase<Derived>& m) {
    return m.adjoint().eval();
}

template <typename Derived>
auto herm(const Eigen::MatrixBase<Derived>& m) {
    return ((m + m.adjoint()) / 2.0).eval();
}

// Left multiplication: vec(A X) = spre(A) vec(X).
template <typename Derived>
auto spre(const Eigen::MatrixBase<Derived>& a) {
    using Mat = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    return kron(Mat::Identity(a.rows(), a.cols()), a);
}

// Right multiplication: vec(X B) = spost(B) vec(X).
template <typename Derived>
auto spost(const Eigen::MatrixBase<Derived>& b) {
    using Mat = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    return kron(b.transpose(), Mat::Identity(b.rows(), b.cols()));
}

// Two-sided multiplication: vec(A X B) = sandwich(A, B) vec(X).
template <typename DerivedA, typename DerivedB>
auto sandwich(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
    return kron(b.transpose(), a);
}

// Coherent part: d vec(rho)/dt = commutator_generator(H) vec(rho) realizes -i[H, rho].
template <typename Derived>
MatrixXc commutator_generator(const Eigen::MatrixBase<Derived>& h) {
    const MatrixXc hc = h.template cast<Complex>();
    return Complex(0, -1) * (spre(hc) - spost(hc));
}

// Generator of S rho S^dag - {S^dag S, rho}/2.
template <typename Derived>
MatrixXc dissipator(const Eigen::MatrixBase<Derived>& s) {
    const MatrixXc sc = s.template cast<Complex>();
    const MatrixXc sds = sc.adjoint() * sc;
    return sandwich(sc, MatrixXc(sc.adjoint())) - 0.5 * (spre(sds) + spost(sds));
}

// Thermal dissipation channel: rate*(n+1) times decay through S plus rate*n
// times the reverse (excitation) process through S^dag.
template <typename Derived>
MatrixXc lindblad_pair(const Eigen::MatrixBase<Derived>& s, double rate, double occupation) {
    MatrixXc out = (rate * (occupation + 1.0)) * dissipator(s);
    if (occupation > 0.0) out += (rate * occupation) * dissipator(dag(s));
    return out;
}

}  // namespace nesskit
