#pragma once

/// \file gcs.hpp
///
/// Generic cyclic shift matrices C_{k,n}: the n x n 0/1 matrix whose
/// columns are [e_2, e_3, ..., e_n, e_k]. C_{k,n} is the companion matrix of
/// z^n - z^{k-1}, and C_{s+1,s+T} generates every eventually periodic orbit
/// with transient s and period T.

#include <string>

#include "nepid/numkernel.hpp"

namespace nepid {

struct GcsSpec {
    Index k = 1;
    Index n = 1;

    /// Throws InvalidSpec unless 1 <= k <= n.
    void validate() const;

    /// The GCS factor C_{s+1,s+T} of an (s, T) index.
    static GcsSpec from_index(Index s, Index T);
};

/// p(z) = z^a - z^b with a > b >= 0.
struct PeriodicPoly {
    Index a = 1;
    Index b = 0;

    void validate() const;

    /// z^{s+T} - z^s
    static PeriodicPoly transient_period(Index s, Index T) { return {s + T, s}; }
    /// z^{s+T+1} - z^{s+1}
    static PeriodicPoly shifted(Index s, Index T) { return {s + T + 1, s + 1}; }

    /// Value of the derivative of |p|(z) = z^a + z^b at a real point.
    double abs_derivative(double z) const;

    friend bool operator==(const PeriodicPoly&, const PeriodicPoly&) = default;
};

template <typename Scalar = Complex>
DenseMatrix<Scalar> gcs_build(const GcsSpec& spec) {
    spec.validate();
    DenseMatrix<Scalar> C = DenseMatrix<Scalar>::Zero(spec.n, spec.n);
    for (Index j = 0; j + 1 < spec.n; ++j) C(j + 1, j) = Scalar(1);
    C(spec.k - 1, spec.n - 1) = Scalar(1);
    return C;
}

PeriodicPoly minimal_poly(const GcsSpec& spec);

/// Smallest exponent t' with C_{s+1,s+T}^t = C_{s+1,s+T}^{t'}: t itself when
/// t <= s, otherwise s + ((t - s) mod T).
Index reduce_exponent(Index s, Index T, Index t);

/// Row index that e_{j+1} (0-based j) is sent to by C_{s+1,s+T}^t.
inline Index gcs_image(Index s, Index T, Index j, Index t) { return reduce_exponent(s, T, j + t); }

/// C_{s+1,s+T}^t * V applied column by column through index bookkeeping,
/// O((s+T) * cols). V must have s+T rows.
template <typename Derived>
typename Derived::PlainObject gcs_apply_power(Index s, Index T, Index t, const Eigen::MatrixBase<Derived>& V) {
    if (s < 0 || T < 1 || t < 0) throw Error(Errc::InvalidSpec, "gcs_apply_power: need s >= 0, T >= 1, t >= 0");
    const Index m = s + T;
    if (V.rows() != m)
        throw Error(Errc::ShapeMismatch, "gcs_apply_power: expected " + std::to_string(m) + " rows, got " +
                                             std::to_string(V.rows()));
    typename Derived::PlainObject out = Derived::PlainObject::Zero(V.rows(), V.cols());
    for (Index j = 0; j < m; ++j) out.row(gcs_image(s, T, j, t)) += V.row(j);
    return out;
}

/// (C_{s+1,s+T}^T)^t * V, the adjoint action, again by index bookkeeping.
template <typename Derived>
typename Derived::PlainObject gcs_apply_adjoint_power(Index s, Index T, Index t, const Eigen::MatrixBase<Derived>& V) {
    if (s < 0 || T < 1 || t < 0) throw Error(Errc::InvalidSpec, "gcs_apply_adjoint_power: need s >= 0, T >= 1, t >= 0");
    const Index m = s + T;
    if (V.rows() != m) throw Error(Errc::ShapeMismatch, "gcs_apply_adjoint_power: row count mismatch");
    typename Derived::PlainObject out(V.rows(), V.cols());
    for (Index j = 0; j < m; ++j) out.row(j) = V.row(gcs_image(s, T, j, t));
    return out;
}

/// M^e by repeated squaring. M must be square.
template <typename Derived>
typename Derived::PlainObject matrix_power(const Eigen::MatrixBase<Derived>& M, Index e) {
    detail::require_square(M, "matrix_power");
    if (e < 0) throw Error(Errc::InvalidSpec, "matrix_power: negative exponent");
    using Plain = typename Derived::PlainObject;
    Plain result = Plain::Identity(M.rows(), M.cols());
    Plain base = M;
    while (e > 0) {
        if (e & 1) result = (result * base).eval();
        e >>= 1;
        if (e > 0) base = (base * base).eval();
    }
    return result;
}

/// ||M^a - M^b|| in spectral norm; M lies in Z_{m,eps}(p) iff this is <= eps.
template <typename Derived>
double poly_residual(const Eigen::MatrixBase<Derived>& M, const PeriodicPoly& p) {
    detail::require_square(M, "poly_residual");
    p.validate();
    const auto Mb = matrix_power(M, p.b);
    // M^a = M^b * M^(a-b) saves one chain of squarings.
    const auto Ma = (Mb * matrix_power(M, p.a - p.b)).eval();
    return spectral_norm(Ma - Mb);
}

/// (1 + p'_abs(2 + delta)) * delta: an upper bound on ||p(Y)|| whenever
/// ||X|| <= 2, ||p(X)|| <= delta and ||X - Y|| <= delta.
double poly_pert_bound(const PeriodicPoly& p, double delta);

} // namespace nepid
