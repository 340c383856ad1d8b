#pragma once

// Periodic mollification with the standard radial bump
//   chi_eps(z) = c * exp(-1 / (1 - |z/eps|^2))  for |z| < eps,  0 otherwise,
// sampled on the grid with minimum-image distances and renormalized so the
// discrete mass is exactly 1. Convolution runs through the FFT, which on a
// periodic grid is identical to the direct offset sum.

#include <vector>

#include "conslab/grid.hpp"
#include "conslab/spectral.hpp"

namespace conslab {

struct MollifierKernel {
    PeriodicGrid grid;
    double eps = 0.0;
    std::vector<double> samples;       // renormalized kernel values
    cvec spectrum_times_cellvol;       // fft(samples) * cell_volume, cached

    double mass() const;               // discrete integral of the kernel (== 1)
};

// Requires eps >= 4 * max grid spacing (kernel must be resolved) and
// eps < half the shortest axis (min-image support must not wrap).
MollifierKernel build_kernel(const PeriodicGrid& grid, double eps);

ScalarField mollify(const ScalarField& f, const MollifierKernel& k);
VectorField mollify(const VectorField& u, const MollifierKernel& k);

// f - f(. - y) with y an exact circular shift by whole cells per axis.
ScalarField increment_field(const ScalarField& f, const std::array<int, 3>& cells);
ScalarField shift_field(const ScalarField& f, const std::array<int, 3>& cells);

// Dyadic ladder eps_j = eps0 * 2^{-j}, truncated at the resolution floor
// 4 * max_spacing. Throws if fewer than `min_rungs` rungs survive.
struct EpsilonLadder {
    std::vector<double> eps;
};
EpsilonLadder make_ladder(const PeriodicGrid& grid, double eps0, int count, int min_rungs = 2);

}  // namespace conslab
