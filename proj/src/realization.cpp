#include "nepid/realization.hpp"

#include <cmath>
#include <random>

namespace nepid {

namespace {

constexpr Index kDenseOperatorLimit = 512;
constexpr int kPowerIterations = 200;
constexpr double kPowerTol = 1e-10;
constexpr std::uint64_t kPowerSeed = 0x5eed;

void require_delta(double delta, const char* who) {
    if (!(delta > 0.0) || !std::isfinite(delta)) throw Error(Errc::InvalidSpec, std::string(who) + ": delta must be > 0");
}

void require_sample(const Matrix& X, const EpsIndex& index, const char* who) {
    if (index.s < 0 || index.T < 1) throw Error(Errc::InvalidSpec, std::string(who) + ": invalid index");
    if (index.order() > X.cols() - 1)
        throw Error(Errc::InsufficientSample, std::string(who) + ": s + T = " + std::to_string(index.order()) +
                                                  " exceeds N - 1 = " + std::to_string(X.cols() - 1));
    detail::require_finite(X, who);
}

Index default_horizon(const Matrix& X, const EpsIndex& index) {
    return std::min<Index>(X.cols() - 1, 3 * index.order());
}

// Snapshot x_t (1-based) of X, continued past the sample by the
// eventually periodic extrapolation of its first s + T columns.
Vector snapshot(const Matrix& X, Index s, Index T, Index t) {
    if (t <= X.cols()) return X.col(t - 1);
    return X.col(reduce_exponent(s, T, t - 1));
}

double unitarity_defect(const Matrix& U) {
    return spectral_norm(U * U.adjoint() - Matrix::Identity(U.rows(), U.rows()));
}

} // namespace

// ---------------------------------------------------------------- CMR ----

Vector CmrModel::apply(const Vector& x) const {
    if (x.size() != dim()) throw Error(Errc::ShapeMismatch, "CmrModel::apply: state length mismatch");
    Vector y = (U.adjoint() * x).cwiseQuotient(Sdelta.cast<Complex>());
    y = V.adjoint() * y;
    y = gcs_apply_power(s, T, 1, y);
    y = Sdelta.cast<Complex>().cwiseProduct(V * y);
    return U * y;
}

Vector CmrModel::apply_adjoint(const Vector& x) const {
    if (x.size() != dim()) throw Error(Errc::ShapeMismatch, "CmrModel::apply_adjoint: state length mismatch");
    Vector y = Sdelta.cast<Complex>().cwiseProduct(U.adjoint() * x);
    y = V.adjoint() * y;
    y = gcs_apply_adjoint_power(s, T, 1, y);
    y = (V * y).cwiseQuotient(Sdelta.cast<Complex>());
    return U * y;
}

Matrix CmrModel::compressed() const {
    const Matrix C = gcs_build(GcsSpec::from_index(s, T));
    const auto S = Sdelta.cast<Complex>().asDiagonal();
    const auto Sinv = Sdelta.cwiseInverse().cast<Complex>().asDiagonal();
    return S * (V * C * V.adjoint()) * Sinv;
}

Matrix CmrModel::dense() const {
    if (dim() > kDenseOperatorLimit)
        throw Error(Errc::InvalidInput, "CmrModel::dense: n = " + std::to_string(dim()) + " is too large");
    return U * compressed() * U.adjoint();
}

Matrix CmrModel::basis() const { return U * Sdelta.cast<Complex>().asDiagonal() * V; }

double CmrModel::operator_norm() const {
    std::mt19937_64 rng(kPowerSeed);
    std::normal_distribution<double> gauss;
    Vector x(dim());
    for (Index i = 0; i < x.size(); ++i) x(i) = Complex(gauss(rng), gauss(rng));
    x.normalize();
    double sigma = 0.0;
    for (int it = 0; it < kPowerIterations; ++it) {
        const Vector y = apply_adjoint(apply(x));
        const double lambda = y.norm();
        if (!(lambda > 0.0)) return 0.0;
        x = y / lambda;
        const double next = std::sqrt(lambda);
        if (std::abs(next - sigma) <= kPowerTol * next) {
            sigma = next;
            break;
        }
        sigma = next;
    }
    return apply(x).norm();
}

RealVector perturb_singular(const RealVector& S, double delta) {
    require_delta(delta, "perturb_singular");
    RealVector out = S;
    const double cutoff = S.size() > 0 ? S(0) * kZeroRelTol : 0.0;
    for (Index j = 0; j < out.size(); ++j)
        if (!(S(j) > cutoff) || S(j) <= 0.0) out(j) = delta;
    return out;
}

Index crom_rank(const RealVector& S, double delta) {
    Index r = 0;
    for (Index t = 0; t < S.size(); ++t)
        if (S(t) >= delta) r = t + 1;
    return r;
}

CmrModel fit_cmr(const Matrix& X, const EpsIndex& index, double delta) {
    require_delta(delta, "fit_cmr");
    require_sample(X, index, "fit_cmr");
    const Index m = index.order();
    if (X.rows() < m)
        throw Error(Errc::ShapeMismatch, "fit_cmr: state dimension " + std::to_string(X.rows()) +
                                             " is smaller than s + T = " + std::to_string(m));
    const auto f = svd_reduced(X.leftCols(m));
    CmrModel model;
    model.U = f.U;
    model.Sdelta = perturb_singular(f.S, delta);
    model.V = f.V;
    model.s = index.s;
    model.T = index.T;
    model.params = {index.eps, delta};
    model.residuals = model_residuals(model, X, default_horizon(X, index));
    return model;
}

CmrModel fit_cmr(const Matrix& X, double eps, double delta) {
    return fit_cmr(X, estimate_index_cov(X, eps), delta);
}

// --------------------------------------------------------------- CROM ----

Vector CromModel::apply(const Vector& x) const {
    if (x.size() != dim()) throw Error(Errc::ShapeMismatch, "CromModel::apply: state length mismatch");
    return W * (Aeta * (W.adjoint() * x));
}

CromModel fit_crom(const Matrix& X, const EpsIndex& index, double delta) {
    require_delta(delta, "fit_crom");
    require_sample(X, index, "fit_crom");
    const Index m = index.order();
    const auto f = svd_reduced(X.leftCols(m));
    const Index r = crom_rank(f.S, delta);
    if (r < 1)
        throw Error(Errc::DegenerateCompression, "fit_crom: no singular value reaches delta = " + std::to_string(delta));

    const Matrix W = f.U.leftCols(r);
    const Matrix Xr = W.adjoint() * X.leftCols(m);
    const Matrix lead = Xr.leftCols(r);
    Matrix shifted(r, r);
    if (r < m) {
        shifted = Xr.middleCols(1, r);
    } else {
        // The successor of x_{s+T} inside the window is x_{s+1}.
        shifted.leftCols(r - 1) = Xr.rightCols(r - 1);
        shifted.col(r - 1) = Xr.col(index.s);
    }
    const Matrix Chat = lstsq(lead, shifted);

    const auto g = svd_reduced(lead);
    const double smax = g.S(0);
    const double smin = g.S(g.S.size() - 1);
    if (!(smax > 0.0) || smin <= smax * kZeroRelTol)
        throw Error(Errc::DegenerateCompression, "fit_crom: compressed snapshots are rank deficient");
    const auto S = g.S.cast<Complex>().asDiagonal();
    const auto Sinv = g.S.cwiseInverse().cast<Complex>().asDiagonal();

    CromModel model;
    model.W = W;
    model.Aeta = g.U * S * g.V * Chat * g.V.adjoint() * Sinv * g.U.adjoint();
    model.s = index.s;
    model.T = index.T;
    model.params = {index.eps, delta};
    model.residuals = model_residuals(model, X, default_horizon(X, index));
    return model;
}

CromModel fit_crom(const Matrix& X, double eps, double delta) {
    return fit_crom(X, estimate_index_cov(X, eps), delta);
}

// -------------------------------------------------------------- UCROM ----

Vector UcromModel::apply(const Vector& x) const {
    if (x.size() != dim()) throw Error(Errc::ShapeMismatch, "UcromModel::apply: state length mismatch");
    return W * (Ueta * (W.adjoint() * x));
}

UcromModel unitarize(const CromModel& crom, double delta) {
    require_delta(delta, "unitarize");
    const Index r = crom.rank();
    const Matrix I = Matrix::Identity(r, r);
    const double left = spectral_norm(crom.Aeta * crom.Aeta.adjoint() - I);
    const double right = spectral_norm(crom.Aeta.adjoint() * crom.Aeta - I);
    if (left > delta || right > delta)
        throw Error(Errc::NotNearUnitary, "||A A^* - 1|| = " + std::to_string(left) + ", ||A^* A - 1|| = " +
                                              std::to_string(right) + ", delta = " + std::to_string(delta));
    UcromModel model;
    model.W = crom.W;
    model.Aeta = crom.Aeta;
    model.Ueta = polar_unitary(crom.Aeta);
    model.s = crom.s;
    model.T = crom.T;
    model.params = {crom.params.eps, delta};
    model.nearness = spectral_norm(model.Aeta - model.Ueta);
    return model;
}

UcromModel fit_ucrom(const Matrix& X, const EpsIndex& index, double delta) {
    UcromModel model = unitarize(fit_crom(X, index, delta), delta);
    model.residuals = model_residuals(model, X, default_horizon(X, index));
    return model;
}

UcromModel fit_ucrom(const Matrix& X, double eps, double delta) {
    return fit_ucrom(X, estimate_index_cov(X, eps), delta);
}

// ---------------------------------------------------------- Phi maps ----

Matrix compress(const Matrix& W, const Matrix& M) {
    if (M.rows() != W.rows() || M.cols() != W.rows()) throw Error(Errc::ShapeMismatch, "compress: shape mismatch");
    return W.adjoint() * M * W;
}

Matrix lift(const Matrix& W, const Matrix& Y) {
    if (Y.rows() != W.cols() || Y.cols() != W.cols()) throw Error(Errc::ShapeMismatch, "lift: shape mismatch");
    return W * Y * W.adjoint();
}

// ---------------------------------------------------------- residuals ----

ResidualReport model_residuals(const Model& model, const Matrix& X, Index horizon) {
    if (horizon < 1) throw Error(Errc::InvalidSpec, "model_residuals: horizon must be >= 1");
    const Index s = transient(model);
    const Index T = period(model);
    if (X.rows() != state_dim(model)) throw Error(Errc::ShapeMismatch, "model_residuals: state dimension mismatch");
    if (s + T > X.cols()) throw Error(Errc::InsufficientSample, "model_residuals: sample shorter than s + T");

    ResidualReport rep;
    rep.horizon = horizon;
    for (Index t = 1; t <= horizon; ++t) {
        const Vector next = snapshot(X, s, T, t + 1);
        const double res = (nepid::apply(model, snapshot(X, s, T, t)) - next).norm();
        rep.one_step_max = std::max(rep.one_step_max, res);
        const double scale = next.norm();
        if (scale > 0.0) rep.one_step_rel_max = std::max(rep.one_step_rel_max, res / scale);
    }
    const Matrix K = connecting_matrix(model);
    rep.poly_residual_st = poly_residual(K, PeriodicPoly::transient_period(s, T));
    rep.poly_residual_st1 = poly_residual(K, PeriodicPoly::shifted(s, T));
    if (const auto* u = std::get_if<UcromModel>(&model)) rep.unitarity_defect = unitarity_defect(u->Ueta);
    return rep;
}

// ------------------------------------------------------ variant access ----

Vector apply(const Model& model, const Vector& x) {
    return std::visit([&](const auto& m) { return m.apply(x); }, model);
}

Index state_dim(const Model& model) {
    return std::visit([](const auto& m) { return m.dim(); }, model);
}

Index transient(const Model& model) {
    return std::visit([](const auto& m) { return m.s; }, model);
}

Index period(const Model& model) {
    return std::visit([](const auto& m) { return m.T; }, model);
}

Matrix connecting_matrix(const Model& model) {
    if (const auto* c = std::get_if<CmrModel>(&model)) return c->compressed();
    if (const auto* c = std::get_if<CromModel>(&model)) return c->Aeta;
    return std::get<UcromModel>(model).Ueta;
}

const ResidualReport& residuals(const Model& model) {
    return std::visit([](const auto& m) -> const ResidualReport& { return m.residuals; }, model);
}

const char* kind_name(const Model& model) {
    switch (model.index()) {
    case 0: return "cmr";
    case 1: return "crom";
    default: return "ucrom";
    }
}

} // namespace nepid
