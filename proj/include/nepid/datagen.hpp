#pragma once

/// \file datagen.hpp
///
/// Synthetic ground-truth trajectories: parametric nearly eventually
/// periodic signals, and the Crank-Nicolson discretization of the quantum
/// harmonic oscillator on [-1, 1].

#include <cstdint>

#include "nepid/gcs.hpp"
#include "nepid/periodicity.hpp"

namespace nepid {

struct NepSpec {
    Index n = 8;       // state dimension
    Index s = 0;       // transient length
    Index T = 4;       // period
    Index N = 40;      // number of snapshots
    double noise = 0.0;
    std::uint64_t seed = 1;

    void validate() const;
};

struct NepTrajectory {
    Trajectory trajectory;
    Matrix clean;    // noiseless parent orbit
    EpsIndex truth;  // (s, T) of the construction
};

/// x_t = b_{idx(t)} + noise * g_t, where b_1 .. b_{s+T} are unit vectors
/// pairwise at least 10 * noise apart, idx(t) = t for t <= s+T and wraps
/// into the periodic part afterwards, and g_t are unit-norm perturbations.
NepTrajectory gen_nep(const NepSpec& spec);

struct SchrodingerSpec {
    Index n_x = 64;     // interior grid points
    Index steps = 300;  // number of snapshots
    double dt = 0.01;
    Index mode = 0;     // eigenmode of H_h, ascending eigenvalues

    void validate() const;
};

/// H_h = -(1/2) D2 + (1/2) diag(x_j^2) with Dirichlet boundaries.
Eigen::MatrixXd schrodinger_hamiltonian(Index n_x);

/// Eigenvalue `mode` of H_h in ascending order.
double schrodinger_eigenvalue(Index n_x, Index mode);

/// Time step for which the Crank-Nicolson phase of `mode` advances by
/// exactly 2 pi / period per step.
double schrodinger_period_dt(Index n_x, Index mode, Index period);

/// Snapshots psi^(1) .. psi^(steps) of
/// (1 + i dt H_h / 2) psi^(n+1) = (1 - i dt H_h / 2) psi^(n),
/// starting from the normalized eigenvector `mode`.
Trajectory gen_schrodinger(const SchrodingerSpec& spec);

/// Adds to each column an independent perturbation of norm `amplitude`.
Matrix add_noise(const Matrix& X, double amplitude, std::uint64_t seed);

} // namespace nepid
