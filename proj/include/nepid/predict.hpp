#pragma once

/// \file predict.hpp
///
/// Predictive simulation: exact eventually periodic extrapolation from a
/// detected index, rollouts of fitted realizations, and relative error
/// series in the max norm.

#include <optional>

#include "nepid/realization.hpp"

namespace nepid {

/// [x_1 ... x_{s+T}] C_{s+1,s+T}^t e_1, i.e. the basis column at the reduced
/// exponent. For t <= s+T-1 this is x_{t+1}.
Vector extrapolate_ep(const Matrix& basis, Index s, Index T, Index t);

/// Columns t = 0 .. horizon-1 of extrapolate_ep.
Matrix extrapolate_ep_series(const Matrix& basis, Index s, Index T, Index horizon);

/// Rollout x_{t+1} = A x_t with x_1 = x1; `horizon` columns in total.
/// Throws NumericalBlowup once an entry exceeds 1e12 * ||x1||.
Matrix simulate(const Model& model, const Vector& x1, Index horizon);

/// ||pred_t - truth_t||_inf / ||truth_t||_inf for each column.
RealVector relative_error_series(const Matrix& pred, const Matrix& truth);

struct PredictionRun {
    const char* source = "";
    Index horizon = 0;
    Matrix predictions;
    std::optional<RealVector> errors;
};

/// simulate() plus, when truth is supplied, the error series against its
/// first `horizon` columns.
PredictionRun run_prediction(const Model& model, const Vector& x1, Index horizon,
                             const Matrix* truth = nullptr);

} // namespace nepid
