#include "nepid/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

namespace nepid {

namespace {

constexpr int kMaxBaseDraws = 1000;
constexpr Index kMaxGridPoints = 256;

Vector random_unit(Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss;
    Vector v(n);
    for (;;) {
        for (Index i = 0; i < n; ++i) v(i) = Complex(gauss(rng), gauss(rng));
        const double nrm = v.norm();
        if (nrm > 0.0) return v / nrm;
    }
}

double min_pairwise_distance(const Matrix& B) {
    double best = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < B.cols(); ++i)
        for (Index j = i + 1; j < B.cols(); ++j) best = std::min(best, (B.col(i) - B.col(j)).norm());
    return best;
}

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> hamiltonian_eigen(Index n_x) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(schrodinger_hamiltonian(n_x));
    if (es.info() != Eigen::Success) throw Error(Errc::GenerationFailed, "eigen-solve of H_h failed");
    return es;
}

} // namespace

void NepSpec::validate() const {
    if (n < 1 || s < 0 || T < 1) throw Error(Errc::InvalidSpec, "NEP spec requires n >= 1, s >= 0, T >= 1");
    if (N < s + T + 2) throw Error(Errc::InvalidSpec, "NEP spec requires N >= s + T + 2");
    if (!(noise >= 0.0) || !std::isfinite(noise)) throw Error(Errc::InvalidSpec, "NEP noise must be finite and >= 0");
}

NepTrajectory gen_nep(const NepSpec& spec) {
    spec.validate();
    const Index m = spec.s + spec.T;
    std::mt19937_64 rng(spec.seed);

    Matrix base(spec.n, m);
    bool separated = false;
    for (int draw = 0; draw < kMaxBaseDraws && !separated; ++draw) {
        for (Index j = 0; j < m; ++j) base.col(j) = random_unit(spec.n, rng);
        separated = m < 2 || min_pairwise_distance(base) >= 10.0 * spec.noise;
    }
    if (!separated) throw Error(Errc::GenerationFailed, "could not separate base columns by 10 * noise");

    NepTrajectory out;
    out.clean.resize(spec.n, spec.N);
    for (Index t = 0; t < spec.N; ++t) out.clean.col(t) = base.col(reduce_exponent(spec.s, spec.T, t));
    out.trajectory.data = spec.noise > 0.0 ? add_noise(out.clean, spec.noise, rng()) : out.clean;
    out.trajectory.label = "nep";
    out.truth = {spec.s, spec.T, 2.0 * spec.noise};
    return out;
}

void SchrodingerSpec::validate() const {
    if (n_x < 8 || n_x > kMaxGridPoints) throw Error(Errc::InvalidSpec, "Schrodinger grid needs 8 <= n_x <= 256");
    if (steps < 1) throw Error(Errc::InvalidSpec, "Schrodinger run needs steps >= 1");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(Errc::InvalidSpec, "Schrodinger dt must be > 0");
    if (mode < 0 || mode >= n_x) throw Error(Errc::InvalidSpec, "Schrodinger mode out of range");
}

Eigen::MatrixXd schrodinger_hamiltonian(Index n_x) {
    if (n_x < 2) throw Error(Errc::InvalidSpec, "schrodinger_hamiltonian: n_x must be >= 2");
    const double h = 2.0 / static_cast<double>(n_x + 1);
    const double kinetic = 0.5 / (h * h);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n_x, n_x);
    for (Index j = 0; j < n_x; ++j) {
        const double x = -1.0 + static_cast<double>(j + 1) * h;
        H(j, j) = 2.0 * kinetic + 0.5 * x * x;
        if (j + 1 < n_x) {
            H(j, j + 1) = -kinetic;
            H(j + 1, j) = -kinetic;
        }
    }
    return H;
}

double schrodinger_eigenvalue(Index n_x, Index mode) {
    if (mode < 0 || mode >= n_x) throw Error(Errc::InvalidSpec, "schrodinger_eigenvalue: mode out of range");
    return hamiltonian_eigen(n_x).eigenvalues()(mode);
}

double schrodinger_period_dt(Index n_x, Index mode, Index period) {
    if (period < 3) throw Error(Errc::InvalidSpec, "schrodinger_period_dt: period must be >= 3");
    // arg mu = -2 atan(dt lambda / 2) must equal -2 pi / period.
    const double lambda = schrodinger_eigenvalue(n_x, mode);
    return 2.0 * std::tan(std::numbers::pi / static_cast<double>(period)) / lambda;
}

Trajectory gen_schrodinger(const SchrodingerSpec& spec) {
    spec.validate();
    const auto es = hamiltonian_eigen(spec.n_x);
    const Complex half_step(0.0, 0.5 * spec.dt);
    const Matrix I = Matrix::Identity(spec.n_x, spec.n_x);
    const Matrix Hh = schrodinger_hamiltonian(spec.n_x).cast<Complex>();
    Eigen::PartialPivLU<Matrix> implicit(I + half_step * Hh);
    const Matrix explicit_part = I - half_step * Hh;

    Trajectory out;
    out.data.resize(spec.n_x, spec.steps);
    out.data.col(0) = es.eigenvectors().col(spec.mode).cast<Complex>().normalized();
    for (Index t = 1; t < spec.steps; ++t) out.data.col(t) = implicit.solve(explicit_part * out.data.col(t - 1));
    out.dt = spec.dt;
    out.label = "schrodinger";
    return out;
}

Matrix add_noise(const Matrix& X, double amplitude, std::uint64_t seed) {
    if (!(amplitude >= 0.0)) throw Error(Errc::InvalidSpec, "add_noise: amplitude must be >= 0");
    if (amplitude == 0.0) return X;
    std::mt19937_64 rng(seed);
    Matrix out = X;
    for (Index t = 0; t < X.cols(); ++t) out.col(t) += amplitude * random_unit(X.rows(), rng);
    return out;
}

} // namespace nepid
