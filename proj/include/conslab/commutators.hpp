#pragma once

// Mollification commutators: the advective transport commutator, the
// energy-flux commutator and its two-part decomposition, the entropy
// (renormalisation) defect, the Euler local-energy-flux defect, and the
// pressure commutators with vacuum bookkeeping.

#include <functional>
#include <string>

#include "conslab/grid.hpp"
#include "conslab/mollify.hpp"

namespace conslab {

struct CommutatorResult {
    double eps = 0.0;
    ScalarField field;
    double l1 = 0.0;  // L1 norm of field
    double l2 = 0.0;  // L2 norm of field
};

// Advective transport commutator
//   R_eps = Div((rho u)_eps) - u . grad(rho_eps),
// which converges to rho div(u) as eps -> 0 for smooth data; it vanishes
// in the limit exactly when u is divergence-free.
CommutatorResult dl_commutator(const ScalarField& rho, const VectorField& u,
                               const MollifierKernel& kernel);

// Energy-flux commutator  S_eps = Div((rho u)_eps) - Div(rho_eps u_eps).
CommutatorResult cet_commutator(const ScalarField& rho, const VectorField& u,
                                const MollifierKernel& kernel);

// Exact splitting of the product commutator
//   (rho u)_eps - rho_eps u_eps = part_a + part_b,
//   part_a = -(rho_eps - rho)(u_eps - u),
//   part_b = (rho u)_eps - rho u_eps - u rho_eps + rho u
// (part_b is the kernel average of the paired increments).
struct CommutatorParts {
    VectorField part_a;
    VectorField part_b;
};
CommutatorParts cet_decomposition(const ScalarField& rho, const VectorField& u,
                                  const MollifierKernel& kernel);

struct EntropyFunction {
    std::function<double(double)> eta;
    std::function<double(double)> eta_prime;
    std::string tag;
};

// -int phi(x) eta'(rho_eps) S_eps dx. Throws if eta' is not finite on the
// achieved range of rho_eps.
double renormalisation_defect(const ScalarField& rho, const VectorField& u,
                              const EntropyFunction& eta, const MollifierKernel& kernel,
                              const ScalarField& phi);

// int phi u_eps . Div(u_eps (x) u_eps - (u (x) u)_eps) dx. Requires u
// divergence-free (tolerance 1e-8 in L2, relative to 1 + ||u||_2); for such
// fields the pressure does not contribute to the localized flux, so p only
// participates through that cancellation.
double euler_defect(const VectorField& u, const ScalarField& p, const MollifierKernel& kernel,
                    const ScalarField& phi);

// p(rho_eps) - (p o rho)_eps; pointwise <= 0 for convex p (discrete Jensen,
// the kernel being a sub-probability weight at every point). Throws if p
// returns a non-finite value on the achieved range.
ScalarField taylor_gap(const std::function<double(double)>& p, const ScalarField& rho,
                       const MollifierKernel& kernel);

// R1 = int div(u_eps) [p(rho_eps) - p(rho)_eps] dx,
// R2 = int div(rho_eps u_eps - (rho u)_eps) P'(rho_eps) dx,
// with p(rho) = rho^gamma and pressure potential P(rho) = (rho^gamma - rho)/(gamma - 1),
// whose derivative P'(rho) = (gamma rho^{gamma-1} - 1)/(gamma - 1) extends
// continuously to the vacuum (P'(0) = -1/(gamma-1)), so the near-vacuum set
// needs no regularisation -- it is measured instead:
// vacuum_fraction = |{0 < rho_eps < eps^{alpha_cut}}| / |domain|.
struct PressureCommutators {
    double r1 = 0.0;
    double r2 = 0.0;
    double vacuum_fraction = 0.0;
};
PressureCommutators pressure_commutators(const ScalarField& rho, const VectorField& u,
                                         double gamma, const MollifierKernel& kernel,
                                         double alpha_cut);

}  // namespace conslab
