#pragma once

/// \file realization.hpp
///
/// Cyclic realizations of nearly eventually periodic trajectories.
///
///  - CMR: A = U S_d V C V^* S_d^{-1} U^*, built from the perturbed reduced
///    SVD X = U S V of the first m = s+T snapshots and the GCS factor
///    C = C_{s+1,s+T}. Kept in factored form.
///  - CROM: a reduced r x r matrix A_eta on the leading singular subspace W,
///    acting on the state space through Phi(Y) = W Y W^*.
///  - UCROM: the unitary polar factor U_eta of a near-unitary A_eta.
///
/// Every fitted model carries a residual report that certifies it against
/// the data it was fitted on.

#include <optional>
#include <variant>

#include "nepid/gcs.hpp"
#include "nepid/periodicity.hpp"

namespace nepid {

struct ResidualReport {
    Index horizon = 0;
    double one_step_max = 0.0;      // max_t ||A x_t - x_{t+1}||
    double one_step_rel_max = 0.0;  // max_t ||A x_t - x_{t+1}|| / ||x_{t+1}||
    double poly_residual_st = 0.0;  // z^{s+T} - z^s on the compressed matrix
    double poly_residual_st1 = 0.0; // z^{s+T+1} - z^{s+1} on the compressed matrix
    std::optional<double> unitarity_defect;  // ||U U^* - 1||, UCROM only
};

struct FitParams {
    double eps = 0.0;
    double delta = 0.0;
};

struct CmrModel {
    Matrix U;          // n x m
    RealVector Sdelta; // m, all > 0
    Matrix V;          // m x m
    Index s = 0;
    Index T = 1;
    FitParams params;
    ResidualReport residuals;

    Index dim() const { return U.rows(); }
    Index order() const { return s + T; }

    /// A * x without forming A.
    Vector apply(const Vector& x) const;
    Vector apply_adjoint(const Vector& x) const;
    /// U^* A U = S_d V C V^* S_d^{-1}
    Matrix compressed() const;
    /// Dense n x n operator, diagnostics only (n <= 512).
    Matrix dense() const;
    /// Columns U S_d V, the perturbed snapshots x_1 .. x_m.
    Matrix basis() const;
    /// ||A|| by power iteration on the factored operator.
    double operator_norm() const;
};

struct CromModel {
    Matrix W;    // n x r
    Matrix Aeta; // r x r
    Index s = 0;
    Index T = 1;
    FitParams params;
    ResidualReport residuals;

    Index dim() const { return W.rows(); }
    Index rank() const { return W.cols(); }
    Vector apply(const Vector& x) const;
};

struct UcromModel {
    Matrix W;    // n x r
    Matrix Aeta; // r x r, the CROM matrix it was derived from
    Matrix Ueta; // r x r unitary
    Index s = 0;
    Index T = 1;
    FitParams params;
    double nearness = 0.0;  // ||A_eta - U_eta||
    ResidualReport residuals;

    Index dim() const { return W.rows(); }
    Index rank() const { return W.cols(); }
    Vector apply(const Vector& x) const;
};

using Model = std::variant<CmrModel, CromModel, UcromModel>;

/// S_d: entries at or below kZeroRelTol * S[0] are replaced by delta.
RealVector perturb_singular(const RealVector& S, double delta);

/// Cutoff r = min{max{t : s_t >= delta}, m}.
Index crom_rank(const RealVector& S, double delta);

CmrModel fit_cmr(const Matrix& X, const EpsIndex& index, double delta);
CmrModel fit_cmr(const Matrix& X, double eps, double delta);

CromModel fit_crom(const Matrix& X, const EpsIndex& index, double delta);
CromModel fit_crom(const Matrix& X, double eps, double delta);

UcromModel fit_ucrom(const Matrix& X, const EpsIndex& index, double delta);
/// Polar factor of a fitted CROM. Throws NotNearUnitary unless both
/// ||A A^* - 1|| and ||A^* A - 1|| are <= delta. Residuals are left empty.
UcromModel unitarize(const CromModel& crom, double delta);
UcromModel fit_ucrom(const Matrix& X, double eps, double delta);

/// W^* M W
Matrix compress(const Matrix& W, const Matrix& M);
/// Phi(Y) = W Y W^*
Matrix lift(const Matrix& W, const Matrix& Y);

/// Residuals of `model` against X over t = 1..horizon. Targets past the
/// end of X are taken from the eventually periodic extrapolation of X.
ResidualReport model_residuals(const Model& model, const Matrix& X, Index horizon);

// Uniform access over the model variant.
Vector apply(const Model& model, const Vector& x);
Index state_dim(const Model& model);
Index transient(const Model& model);
Index period(const Model& model);
/// Low-rank representation of the connecting matrix: U^* A U, A_eta or U_eta.
Matrix connecting_matrix(const Model& model);
const ResidualReport& residuals(const Model& model);
const char* kind_name(const Model& model);

} // namespace nepid
