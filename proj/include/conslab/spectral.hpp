#pragma once

// Spectral calculus on periodic grids (FFT-backed). Wavenumbers are
// kappa_a = 2*pi*k_a/L_a with signed integer k_a; the Nyquist mode is
// zeroed for odd-order derivatives so that differentiation is exactly
// antisymmetric on the grid (discrete integration by parts holds to
// machine precision).

#include <complex>
#include <vector>

#include "conslab/grid.hpp"

namespace conslab {

using cvec = std::vector<std::complex<double>>;

// Unnormalized forward DFT / normalized inverse (ifft(fft(f)) == f).
cvec fft_forward(const PeriodicGrid& g, const std::vector<double>& data);
std::vector<double> fft_inverse_real(const PeriodicGrid& g, const cvec& spec);
cvec fft_inverse(const PeriodicGrid& g, const cvec& spec);

// Signed integer frequency for index i on axis a: i <= n/2 ? i : i - n.
inline long signed_freq(const PeriodicGrid& g, int axis, int i) {
    return i <= g.n[axis] / 2 ? i : long(i) - g.n[axis];
}
// kappa = 2*pi*k/L.
inline double wavenumber(const PeriodicGrid& g, int axis, int i) {
    return 2.0 * M_PI * double(signed_freq(g, axis, i)) / g.len[axis];
}
inline bool is_nyquist(const PeriodicGrid& g, int axis, int i) {
    return g.n[axis] % 2 == 0 && i == g.n[axis] / 2;
}

// d f / d x_axis, spectral symbol i*kappa, Nyquist zeroed.
ScalarField spectral_derivative(const ScalarField& f, int axis);

ScalarField divergence(const VectorField& u);
VectorField gradient(const ScalarField& f);
// curl for dim-3 fields only; throws otherwise.
VectorField curl(const VectorField& u);

// Periodic vector potential Psi with curl(Psi) = u - mean(u); requires
// divergence(u) ~ 0 (L2 tolerance 1e-8 * (1 + ||u||_2)); the removed mean
// is reported through mean_out (may be null).
VectorField vector_potential(const VectorField& u, std::array<double, 3>* mean_out = nullptr);

// Leray projection onto divergence-free fields (mean preserved).
VectorField leray_project(const VectorField& u);

// Zero all modes with |k_a| > n_a/3 on any axis (2/3-rule dealiasing).
void dealias_twothirds(const PeriodicGrid& g, cvec& spec);

// Quadrature and norms (uniform cell weights).
double integrate(const ScalarField& f);
double lp_norm(const ScalarField& f, double p);
double lp_norm(const VectorField& u, double p);  // pointwise Euclidean norm
double l2_norm(const ScalarField& f);

}  // namespace conslab
