#include "nepid/periodicity.hpp"

#include <cmath>

namespace nepid {

namespace {

void require_rows(const Matrix& X, Index min_rows, const char* who) {
    if (X.rows() < min_rows)
        throw Error(Errc::InvalidInput, std::string(who) + ": need at least " + std::to_string(min_rows) +
                                            " state components, got " + std::to_string(X.rows()));
}

void require_cols(const Matrix& X, Index min_cols, const char* who) {
    if (X.cols() < min_cols)
        throw Error(Errc::InvalidInput, std::string(who) + ": need at least " + std::to_string(min_cols) +
                                            " snapshots, got " + std::to_string(X.cols()));
}

void require_eps(double eps, const char* who) {
    if (!(eps >= 0.0) || !std::isfinite(eps)) throw Error(Errc::InvalidSpec, std::string(who) + ": eps must be finite and >= 0");
}

Matrix centered(const Matrix& X) {
    Matrix Xc(X.rows(), X.cols());
    for (Index j = 0; j < X.cols(); ++j) {
        const Complex mu = column_mean(X.col(j));
        for (Index i = 0; i < X.rows(); ++i) Xc(i, j) = X(i, j) - mu;
    }
    return Xc;
}

// Smallest s such that every lag-T pair past the transient matches within
// eps; returns N - T when even the last pair fails.
Index min_transient_direct(const Matrix& X, Index T, double eps) {
    const Index N = X.cols();
    for (Index q = N - T; q >= 1; --q) {
        if ((X.col(q + T - 1) - X.col(q - 1)).norm() > eps) return q;
    }
    return 0;
}

Index min_transient_stripe(const DetectionMatrix& P, Index T) {
    const Index N = P.size();
    for (Index q = N; q >= 1; --q) {
        for (Index k = q + T; k <= N; k += T) {
            if (!P(k - 1, q - 1)) return q;
        }
    }
    return 0;
}

} // namespace

Complex column_mean(const Eigen::Ref<const Vector>& v) {
    if (v.size() < 1) throw Error(Errc::InvalidInput, "column_mean: empty vector");
    Complex sum{0.0, 0.0};
    for (Index i = 0; i < v.size(); ++i) sum += v(i);
    return sum / static_cast<double>(v.size());
}

double column_std(const Eigen::Ref<const Vector>& v) {
    if (v.size() < 2) throw Error(Errc::InvalidInput, "column_std: need at least 2 entries");
    const Complex mu = column_mean(v);
    double ss = 0.0;
    for (Index i = 0; i < v.size(); ++i) ss += std::norm(v(i) - mu);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

Matrix covariance(const Matrix& X) {
    require_rows(X, 2, "covariance");
    detail::require_finite(X, "covariance");
    const Matrix Xc = centered(X);
    const Index N = X.cols();
    const double scale = 1.0 / static_cast<double>(X.rows() - 1);
    Matrix C(N, N);
    for (Index j = 0; j < N; ++j) {
        for (Index k = j; k < N; ++k) {
            Complex acc{0.0, 0.0};
            for (Index i = 0; i < X.rows(); ++i) acc += std::conj(Xc(i, k)) * Xc(i, j);
            C(k, j) = acc * scale;
            C(j, k) = std::conj(C(k, j));
        }
    }
    return C;
}

double cov_pert_bound(const Eigen::Ref<const Vector>& xj, double eps) {
    require_eps(eps, "cov_pert_bound");
    if (xj.size() < 2) throw Error(Errc::InvalidInput, "cov_pert_bound: need at least 2 entries");
    return 2.0 * column_std(xj) * eps / std::sqrt(static_cast<double>(xj.size() - 1));
}

RealVector column_deltas(const Matrix& X, double eps) {
    require_rows(X, 2, "column_deltas");
    RealVector d(X.cols());
    for (Index j = 0; j < X.cols(); ++j) d(j) = cov_pert_bound(X.col(j), eps);
    return d;
}

DetectionMatrix detection_matrix(const Matrix& X, const RealVector& deltas) {
    if (deltas.size() != X.cols()) throw Error(Errc::ShapeMismatch, "detection_matrix: one delta per column required");
    for (Index j = 0; j < deltas.size(); ++j)
        if (!(deltas(j) >= 0.0)) throw Error(Errc::InvalidSpec, "detection_matrix: delta must be >= 0");
    const Matrix C = covariance(X);
    const Index N = X.cols();
    DetectionMatrix P;
    P.bits.setConstant(N, N, false);
    for (Index j = 0; j < N; ++j) {
        // The diagonal entry is sigma(x_j)^2 by construction.
        const double var_j = C(j, j).real();
        for (Index k = j; k < N; ++k) P.bits(k, j) = std::abs(C(k, j) - var_j) <= deltas(j);
    }
    return P;
}

DetectionMatrix detection_matrix(const Matrix& X, double delta) {
    if (!(delta >= 0.0)) throw Error(Errc::InvalidSpec, "detection_matrix: delta must be >= 0");
    return detection_matrix(X, RealVector::Constant(X.cols(), delta));
}

EpsIndex estimate_index_direct(const Matrix& X, double eps) {
    require_eps(eps, "estimate_index_direct");
    require_cols(X, 3, "estimate_index_direct");
    detail::require_finite(X, "estimate_index_direct");
    const Index N = X.cols();
    for (Index T = 1; T <= N - 1; ++T) {
        const Index s = min_transient_direct(X, T, eps);
        if (s + T <= N - 1) return {s, T, eps};
    }
    throw Error(Errc::NotNearlyPeriodic, "no (s, T) with s + T <= " + std::to_string(N - 1) +
                                             " matches at eps = " + std::to_string(eps));
}

EpsIndex estimate_index_cov(const Matrix& X, double eps) {
    require_eps(eps, "estimate_index_cov");
    require_cols(X, 3, "estimate_index_cov");
    require_rows(X, 2, "estimate_index_cov");
    const DetectionMatrix P = detection_matrix(X, column_deltas(X, eps));
    const Index N = X.cols();
    for (Index T = 1; T <= N - 1; ++T) {
        Index s = min_transient_stripe(P, T);
        if (s + T > N - 1) continue;
        // The stripe is only a necessary condition; confirm with norms.
        s = std::max(s, min_transient_direct(X, T, eps));
        if (s + T <= N - 1) return {s, T, eps};
    }
    throw Error(Errc::NotNearlyPeriodic, "no covariance stripe found at eps = " + std::to_string(eps));
}

EpsIndex estimate_index(const Matrix& X, double eps, DetectMethod method) {
    return method == DetectMethod::Covariance ? estimate_index_cov(X, eps) : estimate_index_direct(X, eps);
}

bool is_meaningful(const Matrix& sample, const Matrix& truth, double eps) {
    if (truth.cols() < sample.cols() || truth.rows() != sample.rows())
        throw Error(Errc::InvalidInput, "is_meaningful: truth must cover the sample");
    EpsIndex sample_index;
    EpsIndex truth_index;
    try {
        sample_index = estimate_index_direct(sample, eps);
        truth_index = estimate_index_direct(truth, eps);
    } catch (const Error& e) {
        if (e.code() == Errc::NotNearlyPeriodic || e.code() == Errc::InvalidInput) return false;
        throw;
    }
    if (!same_index(sample_index, truth_index)) return false;
    const Index m = sample_index.order();
    if (m > sample.cols() - 1) return false;
    for (Index t = 0; t < m; ++t)
        if ((sample.col(t) - truth.col(t)).norm() > eps) return false;
    return true;
}

} // namespace nepid
