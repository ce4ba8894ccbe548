#pragma once

/// \file pspectra.hpp
///
/// Grids of sigma_min(z 1 - M) over a rectangular window of the complex
/// plane. A node z lies in the eps-pseudospectrum of M iff its value < eps.

#include <iosfwd>
#include <vector>

#include "nepid/numkernel.hpp"

namespace nepid {

struct Window {
    double re_min = -1.0;
    double re_max = 1.0;
    double im_min = -1.0;
    double im_max = 1.0;

    void validate() const;
};

struct PseudospectrumGrid {
    Window window;
    Index resolution = 0;
    Eigen::MatrixXd values;  // values(i, j): i indexes Im, j indexes Re
    std::vector<double> eps_levels;

    Complex node(Index i, Index j) const;
};

/// Bounding box of the eigenvalues of M padded by `pad` on each side.
Window default_window(const Matrix& M, double pad = 0.5);

/// Worker count from NEP_IDENT_THREADS, defaulting to all cores.
unsigned worker_threads();

PseudospectrumGrid pseudospectrum_grid(const Matrix& M, const Window& window, Index resolution,
                                       unsigned threads = 0);

/// CSV with header `re,im,sigma_min`, rows ordered by Im then Re.
void write_grid_csv(std::ostream& os, const PseudospectrumGrid& grid);

} // namespace nepid
