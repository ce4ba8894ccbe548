#pragma once

/// \file periodicity.hpp
///
/// Column statistics, the snapshot covariance matrix, the (0,1) detection
/// matrix and the two estimators of the sample index (s, T) of a nearly
/// eventually periodic trajectory.
///
/// Snapshot matrices are n x N with column t holding the state x_{t+1}
/// (0-based storage, 1-based time in the documentation). Real inputs are
/// carried as complex with zero imaginary parts.

#include <optional>
#include <string>

#include "nepid/numkernel.hpp"

namespace nepid {

struct Trajectory {
    Matrix data;  // n x N, column t = snapshot at time t+1
    std::optional<double> dt;
    std::string label;

    Index dim() const { return data.rows(); }
    Index length() const { return data.cols(); }
};

struct EpsIndex {
    Index s = 0;   // transient length
    Index T = 1;   // period
    double eps = 0.0;

    Index order() const { return s + T; }
};

inline bool same_index(const EpsIndex& a, const EpsIndex& b) { return a.s == b.s && a.T == b.T; }

/// Lower-triangular (0,1) pattern; bits(k, j) = 1 marks columns k >= j whose
/// covariance with x_j is within delta_j of the variance of x_j.
struct DetectionMatrix {
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> bits;

    Index size() const { return bits.rows(); }
    bool operator()(Index k, Index j) const { return bits(k, j); }
};

enum class DetectMethod { Covariance, Direct };

Complex column_mean(const Eigen::Ref<const Vector>& v);

/// ||v - mean(v) e|| / sqrt(n - 1)
double column_std(const Eigen::Ref<const Vector>& v);

/// N x N covariance of the columns, treating the n rows as observations.
/// Each entry is accumulated in a fixed order, so the result does not
/// depend on memory alignment or threading.
Matrix covariance(const Matrix& X);

/// 2 * std(x_j) * eps / sqrt(n - 1)
double cov_pert_bound(const Eigen::Ref<const Vector>& xj, double eps);

/// Per-column thresholds delta_j = cov_pert_bound(x_j, eps).
RealVector column_deltas(const Matrix& X, double eps);

DetectionMatrix detection_matrix(const Matrix& X, double delta);
DetectionMatrix detection_matrix(const Matrix& X, const RealVector& deltas);

/// Smallest (T, s), ordered by T first, with s + T <= N - 1 and
/// ||x_{q+T} - x_q|| <= eps for every q in [s+1, N-T].
EpsIndex estimate_index_direct(const Matrix& X, double eps);

/// Covariance stripe scan: the smallest (T, s) whose stripe
/// {(q + mT, q) : q >= s+1} in the detection matrix is all ones and that
/// also passes the direct-norm test.
EpsIndex estimate_index_cov(const Matrix& X, double eps);

EpsIndex estimate_index(const Matrix& X, double eps, DetectMethod method);

/// Synthetic-data check that `sample` is meaningful for the orbit `truth`.
bool is_meaningful(const Matrix& sample, const Matrix& truth, double eps);

} // namespace nepid
