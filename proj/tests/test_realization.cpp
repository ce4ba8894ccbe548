#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include "nepid/datagen.hpp"
#include "nepid/realization.hpp"
#include "test_support.hpp"

using namespace nepid;
using nepid::test::periodic_orbit;
using nepid::test::random_matrix;

namespace {

Errc code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an nepid::Error";
    return Errc::InvalidInput;
}

Matrix swap2() {
    Matrix P(2, 2);
    P << 0, 1, 1, 0;
    return P;
}

// Orbit of a unitary with T-th root of unity eigenvalues: x_t = Q D^{t-1} c.
Matrix rotation_orbit(Index n, Index T, Index N, std::mt19937_64& rng) {
    const Matrix Q = test::random_unitary(n, rng);
    const Vector c = random_matrix(T, 1, rng).col(0);
    Matrix X(n, N);
    for (Index t = 0; t < N; ++t) {
        Vector z(T);
        for (Index k = 0; k < T; ++k)
            z(k) = c(k) * std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(k * t) / static_cast<double>(T));
        X.col(t) = Q.leftCols(T) * z;
    }
    return X;
}

std::vector<Complex> eigenvalues_of(const Matrix& M) {
    Eigen::ComplexEigenSolver<Matrix> es(M, false);
    return {es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size()};
}

// Largest distance in a greedy nearest-neighbour matching of two spectra.
// Zero eigenvalues of a Jordan block of size s move like eps^(1/s), so
// they are reported separately.
struct SpectrumGap {
    double nonzero = 0.0;
    double zero = 0.0;
};

SpectrumGap match_spectra(std::vector<Complex> got, const std::vector<Complex>& want) {
    SpectrumGap gap;
    for (const Complex w : want) {
        auto best = std::min_element(got.begin(), got.end(),
                                     [w](Complex a, Complex b) { return std::abs(a - w) < std::abs(b - w); });
        const double d = std::abs(*best - w);
        double& slot = std::abs(w) < 0.5 ? gap.zero : gap.nonzero;
        slot = std::max(slot, d);
        got.erase(best);
    }
    return gap;
}

} // namespace

TEST(PerturbSingular, Examples) {
    RealVector S(2);
    S << 3.0, 0.0;
    RealVector expected(2);
    expected << 3.0, 0.01;
    EXPECT_EQ(perturb_singular(S, 0.01), expected);
    RealVector pos(3);
    pos << 4.0, 2.0, 1.0;
    EXPECT_EQ(perturb_singular(pos, 0.5), pos);
    EXPECT_EQ(code_of([&] { perturb_singular(pos, 0.0); }), Errc::InvalidSpec);
}

TEST(PerturbSingular, ReconstructionMovesAtMostDelta) {
    std::mt19937_64 rng(1);
    Matrix X = random_matrix(6, 4, rng);
    X.col(3) = X.col(0) + X.col(1);
    const auto f = svd_reduced(X);
    const double delta = 1e-3;
    const Matrix Xd = f.U * perturb_singular(f.S, delta).cast<Complex>().asDiagonal() * f.V;
    EXPECT_LE(spectral_norm(Matrix(X - Xd)), delta * (1.0 + 1e-9));
}

TEST(CromRank, Cutoff) {
    RealVector S(4);
    S << 5.0, 1.0, 0.1, 0.0;
    EXPECT_EQ(crom_rank(S, 1e-3), 3);
    EXPECT_EQ(crom_rank(S, 0.5), 2);
    EXPECT_EQ(crom_rank(S, 10.0), 0);
}

TEST(FitCmr, TwoCycleIsTheGcsMatrix) {
    Matrix X = Matrix::Zero(2, 3);
    X(0, 0) = X(1, 1) = X(0, 2) = 1.0;
    const CmrModel m = fit_cmr(X, EpsIndex{0, 2, 1e-9}, 1e-6);
    EXPECT_LE((m.dense() - swap2()).norm(), 1e-14);
    EXPECT_LE((m.apply(X.col(0)) - X.col(1)).norm(), 1e-15);
    EXPECT_LE(m.residuals.one_step_max, 1e-15);
}

TEST(FitCmr, NoiselessPeriodicOrbits) {
    std::mt19937_64 rng(2);
    for (Index s = 0; s <= 3; ++s)
        for (Index T = 1; T <= 6; ++T) {
            const Matrix X = periodic_orbit(random_matrix(12, s + T, rng), s, T, s + 3 * T + 1);
            const CmrModel m = fit_cmr(X, 1e-9, 1e-8);
            EXPECT_EQ(m.s, s);
            EXPECT_EQ(m.T, T);
            EXPECT_LE(m.residuals.one_step_max, 1e-10);
            EXPECT_LE(m.residuals.poly_residual_st, 1e-8);
            EXPECT_LE(m.residuals.poly_residual_st1, 1e-8);
            EXPECT_LE((m.U.adjoint() * m.U - Matrix::Identity(s + T, s + T)).norm(), 1e-10);
            EXPECT_EQ(m.residuals.horizon, std::min<Index>(X.cols() - 1, 3 * (s + T)));
        }
}

TEST(FitCmr, ConstantOrbitIsFixed) {
    std::mt19937_64 rng(3);
    const Vector x = random_matrix(5, 1, rng).col(0);
    const Matrix X = x.replicate(1, 6);
    const CmrModel m = fit_cmr(X, 1e-12, 1e-9);
    EXPECT_EQ(m.T, 1);
    EXPECT_LE((m.apply(x) - x).norm(), 1e-10);
}

TEST(FitCmr, NoisyResidualWithinTheoremConstant) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        NepSpec spec;
        spec.n = 16;
        spec.s = 2;
        spec.T = 4;
        spec.N = 30;
        spec.noise = 1e-4;
        spec.seed = seed;
        const auto gen = gen_nep(spec);
        const CmrModel m = fit_cmr(gen.trajectory.data, gen.truth, 1e-8);
        EXPECT_LE(m.residuals.one_step_max, (3.0 * m.operator_norm() + 4.0) * spec.noise);
    }
}

TEST(FitCmr, FactoredOperatorMatchesDense) {
    std::mt19937_64 rng(4);
    const Matrix X = periodic_orbit(random_matrix(9, 5, rng), 2, 3, 12);
    const CmrModel m = fit_cmr(X, EpsIndex{2, 3, 1e-9}, 1e-8);
    const Matrix A = m.dense();
    const Vector v = random_matrix(9, 1, rng).col(0);
    EXPECT_LE((m.apply(v) - A * v).norm(), 1e-10 * A.norm());
    EXPECT_LE((m.apply_adjoint(v) - A.adjoint() * v).norm(), 1e-10 * A.norm());
    EXPECT_NEAR(m.operator_norm(), spectral_norm(A), 1e-6 * spectral_norm(A));
    EXPECT_LE((m.basis() - X.leftCols(5)).norm(), 1e-12 * X.norm());
    EXPECT_LE((m.compressed() - m.U.adjoint() * A * m.U).norm(), 1e-10 * A.norm());
}

TEST(FitCmr, Errors) {
    std::mt19937_64 rng(5);
    const Matrix X = periodic_orbit(random_matrix(6, 3, rng), 0, 3, 7);
    EXPECT_EQ(code_of([&] { fit_cmr(X, EpsIndex{0, 7, 0.0}, 1e-6); }), Errc::InsufficientSample);
    EXPECT_EQ(code_of([&] { fit_cmr(X, EpsIndex{0, 3, 0.0}, 0.0); }), Errc::InvalidSpec);
    EXPECT_EQ(code_of([&] { fit_cmr(X.topRows(2), EpsIndex{0, 3, 0.0}, 1e-6); }), Errc::ShapeMismatch);
    EXPECT_EQ(code_of([&] { fit_cmr(random_matrix(6, 20, rng), 1e-6, 1e-6); }), Errc::NotNearlyPeriodic);
}

TEST(FitCrom, MatchesCmrOnFullRankData) {
    std::mt19937_64 rng(6);
    for (Index s = 0; s <= 3; ++s)
        for (Index T = 1; T <= 5; ++T) {
            const Matrix X = periodic_orbit(random_matrix(10, s + T, rng), s, T, s + 3 * T + 1);
            const EpsIndex idx{s, T, 1e-9};
            const CmrModel cmr = fit_cmr(X, idx, 1e-10);
            const CromModel crom = fit_crom(X, idx, 1e-10);
            EXPECT_EQ(crom.rank(), s + T);
            for (Index t = 0; t + 1 < X.cols(); ++t)
                EXPECT_LE((crom.apply(X.col(t)) - cmr.apply(X.col(t))).norm(), 1e-8);
            EXPECT_NEAR(crom.residuals.one_step_max, cmr.residuals.one_step_max, 1e-6);
            EXPECT_LE(crom.residuals.poly_residual_st1, 1e-6);
            EXPECT_LE((crom.W.adjoint() * crom.W - Matrix::Identity(s + T, s + T)).norm(), 1e-10);
        }
}

TEST(FitCrom, TwoCycleByHand) {
    Matrix X = Matrix::Zero(2, 3);
    X(0, 0) = X(1, 1) = X(0, 2) = 1.0;
    const CromModel m = fit_crom(X, EpsIndex{0, 2, 1e-9}, 1e-6);
    EXPECT_EQ(m.rank(), 2);
    EXPECT_LE((lift(m.W, m.Aeta) - swap2()).norm(), 1e-14);
    EXPECT_LE(m.residuals.one_step_max, 1e-14);
    EXPECT_LE(m.residuals.poly_residual_st1, 1e-14);
}

TEST(FitCrom, ConstantOrbitHasRankOne) {
    Matrix X = Matrix::Zero(3, 5);
    X.row(1).setConstant(Complex(0.0, 2.0));
    const CromModel m = fit_crom(X, EpsIndex{0, 1, 0.0}, 1e-6);
    ASSERT_EQ(m.rank(), 1);
    EXPECT_NEAR(std::abs(m.Aeta(0, 0) - 1.0), 0.0, 1e-14);
}

TEST(FitCrom, LargeDeltaTruncates) {
    Matrix base = Matrix::Zero(4, 3);
    base(0, 0) = 10.0;
    base(1, 1) = 10.0;
    base(2, 2) = 0.01;
    const Matrix X = periodic_orbit(base, 0, 3, 8);
    const CromModel m = fit_crom(X, EpsIndex{0, 3, 1e-9}, 1.0);
    EXPECT_EQ(m.rank(), 2);
    EXPECT_EQ(code_of([&] { fit_crom(X, EpsIndex{0, 3, 1e-9}, 100.0); }), Errc::DegenerateCompression);
}

TEST(FitCrom, SpectrumMatchesGcsMatrix) {
    std::mt19937_64 rng(7);
    for (Index s = 0; s <= 2; ++s)
        for (Index T = 2; T <= 5; ++T) {
            const Matrix X = periodic_orbit(random_matrix(8, s + T, rng), s, T, s + 2 * T + 1);
            const CromModel m = fit_crom(X, EpsIndex{s, T, 1e-9}, 1e-10);
            const auto got = eigenvalues_of(m.Aeta);
            const auto want = eigenvalues_of(gcs_build(GcsSpec::from_index(s, T)));
            ASSERT_EQ(got.size(), want.size());
            const SpectrumGap gap = match_spectra(got, want);
            EXPECT_LE(gap.nonzero, 1e-6) << "s=" << s << " T=" << T;
            EXPECT_LE(gap.zero, 1e-3) << "s=" << s << " T=" << T;
        }
}

TEST(FitUcrom, RotationDataIsUnitary) {
    std::mt19937_64 rng(8);
    for (Index T : {2, 3, 5, 8}) {
        const Matrix X = rotation_orbit(12, T, 3 * T + 1, rng);
        const UcromModel m = fit_ucrom(X, 1e-8, 1e-6);
        EXPECT_EQ(m.T, T);
        const Index r = m.rank();
        EXPECT_LE((m.Ueta * m.Ueta.adjoint() - Matrix::Identity(r, r)).norm(), 1e-12);
        ASSERT_TRUE(m.residuals.unitarity_defect.has_value());
        EXPECT_LE(*m.residuals.unitarity_defect, 1e-12);
        EXPECT_LE(m.nearness, std::sqrt(1.0 + 1e-6) - 1.0);
        EXPECT_LE(m.residuals.one_step_max, 1e-8);
    }
}

TEST(Unitarize, AlreadyUnitary) {
    std::mt19937_64 rng(9);
    CromModel c;
    c.W = Matrix::Identity(3, 3);
    c.Aeta = test::random_unitary(3, rng);
    const UcromModel u = unitarize(c, 1e-6);
    EXPECT_LE((u.Ueta - c.Aeta).norm(), 1e-12);
    EXPECT_LE(u.nearness, 1e-12);
}

TEST(Unitarize, ScaledDiagonalIsTight) {
    CromModel c;
    c.W = Matrix::Identity(2, 2);
    c.Aeta = Matrix::Zero(2, 2);
    c.Aeta(0, 0) = std::sqrt(1.2);
    c.Aeta(1, 1) = 1.0;
    const UcromModel u = unitarize(c, 0.2 + 1e-12);
    EXPECT_LE((u.Ueta - Matrix::Identity(2, 2)).norm(), 1e-14);
    EXPECT_NEAR(u.nearness, std::sqrt(1.2) - 1.0, 1e-14);
    EXPECT_LE(u.nearness, std::sqrt(1.2) - 1.0 + 1e-14);
}

TEST(Unitarize, ContractingDiagonalExceedsStatedBound) {
    // Singular values below one: both defects equal delta but the distance to
    // the polar factor is 1 - sqrt(1 - delta), larger than sqrt(1 + delta) - 1.
    CromModel c;
    c.W = Matrix::Identity(2, 2);
    c.Aeta = Matrix::Zero(2, 2);
    c.Aeta(0, 0) = std::sqrt(0.8);
    c.Aeta(1, 1) = 1.0;
    const double delta = 0.2 + 1e-12;
    const UcromModel u = unitarize(c, delta);
    EXPECT_NEAR(u.nearness, 1.0 - std::sqrt(0.8), 1e-14);
    EXPECT_GT(u.nearness, std::sqrt(1.0 + delta) - 1.0);
    EXPECT_LE(u.nearness, 1.0 - std::sqrt(1.0 - delta));
}

TEST(Unitarize, GeneralBoundOnRandomNearUnitaries) {
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> size(1e-4, 0.3);
    for (int trial = 0; trial < 300; ++trial) {
        const Index r = 1 + trial % 6;
        CromModel c;
        c.W = Matrix::Identity(r, r);
        Matrix E = random_matrix(r, r, rng);
        c.Aeta = test::random_unitary(r, rng) + size(rng) * E / spectral_norm(E);
        const Matrix I = Matrix::Identity(r, r);
        const double delta = std::max(spectral_norm(Matrix(c.Aeta * c.Aeta.adjoint() - I)),
                                      spectral_norm(Matrix(c.Aeta.adjoint() * c.Aeta - I)));
        if (delta >= 1.0) continue;
        const UcromModel u = unitarize(c, delta);
        EXPECT_LE(u.nearness, 1.0 - std::sqrt(1.0 - delta) + 1e-12);
    }
}

TEST(Unitarize, RejectsFarFromUnitary) {
    CromModel c;
    c.W = Matrix::Identity(2, 2);
    c.Aeta = Matrix::Zero(2, 2);
    c.Aeta(0, 0) = 2.0;
    c.Aeta(1, 1) = 1.0;
    try {
        unitarize(c, 0.2);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::NotNearUnitary);
        EXPECT_NE(std::string(e.what()).find("||A A^* - 1|| = 3"), std::string::npos);
    }
}

TEST(PhiMaps, IdentityW) {
    std::mt19937_64 rng(11);
    const Matrix M = random_matrix(4, 4, rng);
    EXPECT_EQ(compress(Matrix::Identity(4, 4), M), M);
    EXPECT_EQ(lift(Matrix::Identity(4, 4), M), M);
}

TEST(PhiMaps, AlgebraProperties) {
    std::mt19937_64 rng(12);
    const Matrix W = test::random_unitary(7, rng).leftCols(3);
    for (int k = 0; k < 100; ++k) {
        const Matrix X = random_matrix(3, 3, rng);
        const Matrix Y = random_matrix(3, 3, rng);
        const Complex a(0.3, -1.1);
        EXPECT_NEAR(spectral_norm(lift(W, X)), spectral_norm(X), 1e-10 * spectral_norm(X));
        EXPECT_LE((lift(W, X * Y) - lift(W, X) * lift(W, Y)).norm(), 1e-10 * X.norm() * Y.norm());
        EXPECT_LE((lift(W, Matrix(X + a * Y)) - lift(W, X) - a * lift(W, Y)).norm(), 1e-10 * (X.norm() + Y.norm()));
        EXPECT_LE((lift(W, Matrix(X.adjoint())) - lift(W, X).adjoint()).norm(), 1e-12 * X.norm());
        EXPECT_LE((compress(W, lift(W, X)) - X).norm(), 1e-10 * X.norm());
        const Matrix psd = X * X.adjoint();
        Eigen::SelfAdjointEigenSolver<Matrix> es(lift(W, psd));
        EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10 * psd.norm());
    }
    EXPECT_EQ(code_of([&] { lift(W, Matrix::Identity(2, 2)); }), Errc::ShapeMismatch);
    EXPECT_EQ(code_of([&] { compress(W, Matrix::Identity(3, 3)); }), Errc::ShapeMismatch);
}

TEST(ModelResiduals, HorizonPastSampleUsesExtrapolation) {
    std::mt19937_64 rng(13);
    const Matrix X = periodic_orbit(random_matrix(6, 4, rng), 1, 3, 6);
    const Model m = fit_cmr(X, EpsIndex{1, 3, 1e-9}, 1e-8);
    const ResidualReport rep = model_residuals(m, X, 40);
    EXPECT_EQ(rep.horizon, 40);
    EXPECT_LE(rep.one_step_max, 1e-10);
    EXPECT_LE(rep.one_step_rel_max, 1e-10);
    EXPECT_FALSE(rep.unitarity_defect.has_value());
    EXPECT_EQ(code_of([&] { model_residuals(m, X, 0); }), Errc::InvalidSpec);
    EXPECT_EQ(code_of([&] { model_residuals(m, X.topRows(5), 3); }), Errc::ShapeMismatch);
}

TEST(ModelVariant, UniformAccess) {
    std::mt19937_64 rng(14);
    const Matrix X = rotation_orbit(6, 3, 10, rng);
    const EpsIndex idx{0, 3, 1e-9};
    const Model cmr = fit_cmr(X, idx, 1e-8);
    const Model crom = fit_crom(X, idx, 1e-8);
    const Model ucrom = fit_ucrom(X, idx, 1e-6);
    EXPECT_STREQ(kind_name(cmr), "cmr");
    EXPECT_STREQ(kind_name(crom), "crom");
    EXPECT_STREQ(kind_name(ucrom), "ucrom");
    for (const Model* m : {&cmr, &crom, &ucrom}) {
        EXPECT_EQ(state_dim(*m), 6);
        EXPECT_EQ(transient(*m), 0);
        EXPECT_EQ(period(*m), 3);
        EXPECT_EQ(connecting_matrix(*m).rows(), 3);
        EXPECT_LE((nepid::apply(*m, X.col(0)) - X.col(1)).norm(), 1e-8);
    }
}
