#pragma once

/// \file numkernel.hpp
///
/// Dense numerical primitives shared by every other module: reduced SVD in
/// the M = U S V convention (right factor NOT conjugated, so V has
/// orthonormal rows), spectral norm, smallest singular value, minimum-norm
/// least squares and the unitary polar factor.
///
/// All routines are templated on the Eigen expression type and work for
/// real and complex scalars. They are pure and deterministic.

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Dense>

#include "nepid/error.hpp"

namespace nepid {

using Index = Eigen::Index;
using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Singular values at or below this fraction of the largest one count as zero.
inline constexpr double kZeroRelTol = 1e-12;

/// Above this order min_singular switches from a full SVD to inverse iteration.
inline constexpr Index kDenseSigmaMinLimit = 256;

template <typename Scalar>
struct SvdFactors {
    using Real = typename Eigen::NumTraits<Scalar>::Real;
    DenseMatrix<Scalar> U;                     // rows x k, orthonormal columns
    Eigen::Matrix<Real, Eigen::Dynamic, 1> S;  // k, descending
    DenseMatrix<Scalar> V;                     // k x cols, orthonormal rows

    DenseMatrix<Scalar> reconstruct() const { return U * S.asDiagonal() * V; }
};

namespace detail {

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& M, const char* who) {
    if (!M.allFinite()) throw Error(Errc::InvalidInput, std::string(who) + ": non-finite entry");
}

template <typename Derived>
void require_nonempty(const Eigen::MatrixBase<Derived>& M, const char* who) {
    if (M.rows() < 1 || M.cols() < 1) throw Error(Errc::InvalidInput, std::string(who) + ": empty matrix");
}

template <typename Derived>
void require_square(const Eigen::MatrixBase<Derived>& M, const char* who) {
    if (M.rows() != M.cols())
        throw Error(Errc::ShapeMismatch, std::string(who) + ": expected a square matrix, got " +
                                             std::to_string(M.rows()) + "x" + std::to_string(M.cols()));
}

template <typename Derived>
auto jacobi_values(const Eigen::MatrixBase<Derived>& M) {
    using Plain = typename Derived::PlainObject;
    Eigen::JacobiSVD<Plain> svd(M.eval());
    return svd.singularValues().eval();
}

} // namespace detail

/// Reduced SVD with k = min(rows, cols). Returns factors with
/// M = U * diag(S) * V.
template <typename Derived>
SvdFactors<typename Derived::Scalar> svd_reduced(const Eigen::MatrixBase<Derived>& M) {
    detail::require_nonempty(M, "svd_reduced");
    detail::require_finite(M, "svd_reduced");
    using Plain = typename Derived::PlainObject;
    Eigen::JacobiSVD<Plain, Eigen::ColPivHouseholderQRPreconditioner> svd(
        M.eval(), Eigen::ComputeThinU | Eigen::ComputeThinV);
    SvdFactors<typename Derived::Scalar> out;
    out.U = svd.matrixU();
    out.S = svd.singularValues();
    out.V = svd.matrixV().adjoint();
    return out;
}

template <typename Derived>
double spectral_norm(const Eigen::MatrixBase<Derived>& M) {
    detail::require_nonempty(M, "spectral_norm");
    detail::require_finite(M, "spectral_norm");
    return static_cast<double>(detail::jacobi_values(M)(0));
}

/// Smallest singular value by inverse iteration on M^* M, using one LU
/// factorization of M. Returns 0 when M is exactly singular.
template <typename Derived>
double min_singular_iterative(const Eigen::MatrixBase<Derived>& M, int max_iter = 2000, double tol = 1e-15) {
    detail::require_square(M, "min_singular_iterative");
    detail::require_finite(M, "min_singular_iterative");
    using Scalar = typename Derived::Scalar;
    using Plain = typename Derived::PlainObject;
    const Index n = M.rows();
    const Plain A = M.eval();
    Eigen::FullPivLU<Plain> lu(A);
    if (!lu.isInvertible()) return 0.0;
    const Plain Ah = A.adjoint();
    Eigen::FullPivLU<Plain> lu_h(Ah);

    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x(n);
    for (Index i = 0; i < n; ++i) x(i) = Scalar(1.0 + 0.5 * std::sin(1.0 + static_cast<double>(i)));
    x.normalize();
    double lambda = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        // y = (M^* M)^{-1} x
        Eigen::Matrix<Scalar, Eigen::Dynamic, 1> y = lu.solve(lu_h.solve(x));
        const double next = y.norm();
        if (!(next > 0.0) || !std::isfinite(next)) return 0.0;
        x = y / next;
        if (it > 0 && std::abs(next - lambda) <= tol * next) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    // Rayleigh value: ||M x|| for the converged right singular vector.
    return static_cast<double>((A * x).norm());
}

template <typename Derived>
double min_singular(const Eigen::MatrixBase<Derived>& M) {
    detail::require_square(M, "min_singular");
    detail::require_nonempty(M, "min_singular");
    detail::require_finite(M, "min_singular");
    if (M.rows() > kDenseSigmaMinLimit) return min_singular_iterative(M);
    const auto S = detail::jacobi_values(M);
    return static_cast<double>(S(S.size() - 1));
}

/// Minimum-Frobenius-norm minimizer of ||A X - B||_F (pseudoinverse
/// solution). Singular values of A below kZeroRelTol * S[0] are dropped.
template <typename DerivedA, typename DerivedB>
DenseMatrix<typename DerivedA::Scalar> lstsq(const Eigen::MatrixBase<DerivedA>& A,
                                             const Eigen::MatrixBase<DerivedB>& B) {
    if (A.rows() != B.rows())
        throw Error(Errc::ShapeMismatch, "lstsq: A has " + std::to_string(A.rows()) + " rows, B has " +
                                             std::to_string(B.rows()));
    detail::require_finite(B, "lstsq");
    const auto f = svd_reduced(A);
    using Real = typename SvdFactors<typename DerivedA::Scalar>::Real;
    const Real cutoff = f.S.size() > 0 ? f.S(0) * Real(kZeroRelTol) : Real(0);
    Eigen::Matrix<Real, Eigen::Dynamic, 1> inv(f.S.size());
    for (Index i = 0; i < f.S.size(); ++i) inv(i) = (f.S(i) > cutoff && f.S(i) > Real(0)) ? Real(1) / f.S(i) : Real(0);
    return f.V.adjoint() * (inv.asDiagonal() * (f.U.adjoint() * B));
}

/// Unitary factor U_svd * V_svd of the polar decomposition M = U_svd S V_svd.
/// Among all unitaries it is the nearest to M in spectral norm.
template <typename Derived>
DenseMatrix<typename Derived::Scalar> polar_unitary(const Eigen::MatrixBase<Derived>& M) {
    detail::require_square(M, "polar_unitary");
    const auto f = svd_reduced(M);
    const auto smax = f.S(0);
    const auto smin = f.S(f.S.size() - 1);
    if (!(smax > 0) || smin <= smax * kZeroRelTol)
        throw Error(Errc::SingularMatrix, "polar_unitary: matrix is singular (sigma_min = " + std::to_string(smin) + ")");
    return f.U * f.V;
}

} // namespace nepid
