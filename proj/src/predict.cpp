#include "nepid/predict.hpp"

#include <cmath>

namespace nepid {

namespace {

constexpr double kBlowupFactor = 1e12;

void check_state(const Vector& x, double limit, Index step) {
    for (Index i = 0; i < x.size(); ++i) {
        const double a = std::abs(x(i));
        if (!std::isfinite(a) || a > limit)
            throw Error(Errc::NumericalBlowup, "state left the admissible range at step " + std::to_string(step),
                        static_cast<std::size_t>(step));
    }
}

} // namespace

Vector extrapolate_ep(const Matrix& basis, Index s, Index T, Index t) {
    if (s < 0 || T < 1 || t < 0) throw Error(Errc::InvalidSpec, "extrapolate_ep: need s >= 0, T >= 1, t >= 0");
    if (basis.cols() != s + T)
        throw Error(Errc::ShapeMismatch, "extrapolate_ep: basis must have s + T = " + std::to_string(s + T) + " columns");
    return basis.col(reduce_exponent(s, T, t));
}

Matrix extrapolate_ep_series(const Matrix& basis, Index s, Index T, Index horizon) {
    Matrix out(basis.rows(), horizon);
    for (Index t = 0; t < horizon; ++t) out.col(t) = extrapolate_ep(basis, s, T, t);
    return out;
}

Matrix simulate(const Model& model, const Vector& x1, Index horizon) {
    if (horizon < 1) throw Error(Errc::InvalidSpec, "simulate: horizon must be >= 1");
    if (x1.size() != state_dim(model)) throw Error(Errc::ShapeMismatch, "simulate: initial state length mismatch");
    const double limit = kBlowupFactor * x1.norm();
    Matrix out(x1.size(), horizon);
    out.col(0) = x1;

    if (const auto* cmr = std::get_if<CmrModel>(&model)) {
        // A^t x1 = U S V C^t c with c = V^* S^{-1} U^* x1, so the rollout is
        // index bookkeeping on c and never compounds rounding.
        const Vector c = cmr->V.adjoint() * (cmr->U.adjoint() * x1).cwiseQuotient(cmr->Sdelta.cast<Complex>());
        const Matrix lift_basis = cmr->basis();
        for (Index t = 1; t < horizon; ++t) {
            out.col(t) = lift_basis * gcs_apply_power(cmr->s, cmr->T, t, c);
            check_state(out.col(t), limit, t + 1);
        }
        return out;
    }

    const Matrix& W = std::holds_alternative<CromModel>(model) ? std::get<CromModel>(model).W
                                                               : std::get<UcromModel>(model).W;
    const Matrix M = connecting_matrix(model);
    Vector y = W.adjoint() * x1;
    for (Index t = 1; t < horizon; ++t) {
        y = M * y;
        out.col(t) = W * y;
        check_state(out.col(t), limit, t + 1);
    }
    return out;
}

RealVector relative_error_series(const Matrix& pred, const Matrix& truth) {
    if (pred.rows() != truth.rows() || pred.cols() != truth.cols())
        throw Error(Errc::ShapeMismatch, "relative_error_series: shape mismatch");
    RealVector out(pred.cols());
    for (Index t = 0; t < pred.cols(); ++t) {
        const double denom = truth.col(t).cwiseAbs().maxCoeff();
        if (!(denom > 0.0))
            throw Error(Errc::DivisionByZero, "relative_error_series: zero truth column at step " + std::to_string(t + 1),
                        static_cast<std::size_t>(t + 1));
        out(t) = (pred.col(t) - truth.col(t)).cwiseAbs().maxCoeff() / denom;
    }
    return out;
}

PredictionRun run_prediction(const Model& model, const Vector& x1, Index horizon, const Matrix* truth) {
    PredictionRun run;
    run.source = kind_name(model);
    run.horizon = horizon;
    run.predictions = simulate(model, x1, horizon);
    if (truth != nullptr) {
        if (truth->cols() < horizon)
            throw Error(Errc::ShapeMismatch, "run_prediction: truth shorter than the horizon");
        run.errors = relative_error_series(run.predictions, truth->leftCols(horizon));
    }
    return run;
}

} // namespace nepid
