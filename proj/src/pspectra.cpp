#include "nepid/pspectra.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <string>
#include <thread>

#include <Eigen/Eigenvalues>

namespace nepid {

void Window::validate() const {
    if (!(re_min < re_max) || !(im_min < im_max) || !std::isfinite(re_min) || !std::isfinite(re_max) ||
        !std::isfinite(im_min) || !std::isfinite(im_max))
        throw Error(Errc::InvalidSpec, "window bounds must be finite and ordered");
}

Complex PseudospectrumGrid::node(Index i, Index j) const {
    const double dr = (window.re_max - window.re_min) / static_cast<double>(resolution - 1);
    const double di = (window.im_max - window.im_min) / static_cast<double>(resolution - 1);
    return {window.re_min + static_cast<double>(j) * dr, window.im_min + static_cast<double>(i) * di};
}

Window default_window(const Matrix& M, double pad) {
    detail::require_square(M, "default_window");
    detail::require_finite(M, "default_window");
    Eigen::ComplexEigenSolver<Matrix> es(M, false);
    const auto& ev = es.eigenvalues();
    Window w{ev(0).real(), ev(0).real(), ev(0).imag(), ev(0).imag()};
    for (Index i = 1; i < ev.size(); ++i) {
        w.re_min = std::min(w.re_min, ev(i).real());
        w.re_max = std::max(w.re_max, ev(i).real());
        w.im_min = std::min(w.im_min, ev(i).imag());
        w.im_max = std::max(w.im_max, ev(i).imag());
    }
    w.re_min -= pad;
    w.re_max += pad;
    w.im_min -= pad;
    w.im_max += pad;
    return w;
}

namespace {

constexpr int kMaxInverseSteps = 200;
constexpr double kInverseTol = 1e-14;

// sigma_min(z 1 - T) for upper-triangular T by inverse iteration on
// (A^* A)^{-1}, two triangular solves per step. Falls back to a dense SVD
// when the Rayleigh value has not settled.
double triangular_min_singular(const Matrix& T, Complex z, double scale, Matrix& A) {
    const Index r = T.rows();
    A = -T;
    A.diagonal().array() += z;
    for (Index k = 0; k < r; ++k)
        if (A(k, k) == Complex(0.0)) return 0.0;

    const auto upper = A.triangularView<Eigen::Upper>();
    Vector x(r);
    for (Index i = 0; i < r; ++i) x(i) = Complex(1.0 + 0.5 * std::sin(1.0 + static_cast<double>(i)));
    x.normalize();
    double prev = -1.0;
    for (int step = 0; step < kMaxInverseSteps; ++step) {
        Vector y = upper.solve(upper.adjoint().solve(x));
        const double norm = y.norm();
        if (!std::isfinite(norm) || !(norm > 0.0)) break;
        x = y / norm;
        const double rho = (upper * x).norm();
        if (std::abs(rho - prev) <= kInverseTol * rho + 1e-17 * scale) return rho;
        prev = rho;
    }
    const auto S = detail::jacobi_values(Matrix(A.triangularView<Eigen::Upper>()));
    return static_cast<double>(S(S.size() - 1));
}

} // namespace

unsigned worker_threads() {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("NEP_IDENT_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1) return std::min<unsigned>(hw, static_cast<unsigned>(cap));
    }
    return hw;
}

PseudospectrumGrid pseudospectrum_grid(const Matrix& M, const Window& window, Index resolution, unsigned threads) {
    detail::require_square(M, "pseudospectrum_grid");
    detail::require_finite(M, "pseudospectrum_grid");
    window.validate();
    if (resolution < 2) throw Error(Errc::InvalidSpec, "pseudospectrum_grid: resolution must be >= 2");

    PseudospectrumGrid grid;
    grid.window = window;
    grid.resolution = resolution;
    grid.values.resize(resolution, resolution);

    // sigma_min is unitarily invariant, so every node works on the Schur
    // factor of M instead of M itself.
    const Index r = M.rows();
    Eigen::ComplexSchur<Matrix> schur(M);
    if (schur.info() != Eigen::Success) throw Error(Errc::NumericalBlowup, "pseudospectrum_grid: Schur form failed");
    const Matrix& T = schur.matrixT();
    const double scale = T.cwiseAbs().maxCoeff() + 1.0;
    // A numerically diagonal Schur factor means M is normal; by Weyl the
    // node value is then the distance to the spectrum up to ||offdiag||.
    const double offdiag = Matrix(T.triangularView<Eigen::StrictlyUpper>()).norm();
    const bool normal = offdiag <= 1e-14 * scale;
    const Vector diag = T.diagonal();
    auto fill_rows = [&](Index first, Index stride) {
        Matrix work(r, r);
        for (Index i = first; i < resolution; i += stride)
            for (Index j = 0; j < resolution; ++j) {
                const Complex z = grid.node(i, j);
                grid.values(i, j) = normal ? (diag.array() - z).abs().minCoeff()
                                           : triangular_min_singular(T, z, scale, work);
            }
    };

    const unsigned workers = std::max(1u, std::min<unsigned>(threads == 0 ? worker_threads() : threads,
                                                             static_cast<unsigned>(resolution)));
    if (workers == 1) {
        fill_rows(0, 1);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(fill_rows, static_cast<Index>(w), static_cast<Index>(workers));
        for (auto& t : pool) t.join();
    }
    return grid;
}

void write_grid_csv(std::ostream& os, const PseudospectrumGrid& grid) {
    os << "re,im,sigma_min\n";
    char buf[96];
    for (Index i = 0; i < grid.resolution; ++i) {
        for (Index j = 0; j < grid.resolution; ++j) {
            const Complex z = grid.node(i, j);
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", z.real(), z.imag(), grid.values(i, j));
            os << buf;
        }
    }
}

} // namespace nepid
