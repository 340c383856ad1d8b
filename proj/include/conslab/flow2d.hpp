#pragma once

// Pseudo-spectral periodic solvers: conservative advection of a scalar by
// a divergence-free velocity, and the 2D (Navier-)Stokes equations in
// vorticity-streamfunction form. Both use RK4 with 2/3-rule dealiasing;
// the viscous term is handled exactly by an integrating factor.

#include <vector>

#include "conslab/grid.hpp"

namespace conslab {

// One RK4 step of  d rho / dt = -div(rho u)  with u divergence-free
// (checked, tolerance 1e-8 in L2 relative to 1 + ||u||_2).
ScalarField transport_step(const ScalarField& rho, const VectorField& u, double dt);

struct FlowState2D {
    PeriodicGrid grid;
    ScalarField omega;  // scalar vorticity
    double nu = 0.0;
    double time = 0.0;
};

FlowState2D make_flow_state(const ScalarField& omega0, double nu);

// Velocity recovered from vorticity: u = grad^perp psi with -Lap psi = -omega
// convention  omega = d1 u2 - d2 u1,  u = (d2 psi, -d1 psi).
VectorField velocity_from_vorticity(const ScalarField& omega);

void euler2d_step(FlowState2D& s, double dt);

struct FlowDiagnostics {
    std::vector<double> times;
    std::vector<double> energy;     // E(t) = (1/2) int |u|^2
    std::vector<double> enstrophy;  // Z(t) = int omega^2  ( = int |grad u|^2 in 2D)
};

// Advances to t_end with fixed dt, recording diagnostics every `record_every`
// steps (and at both endpoints).
FlowDiagnostics euler2d_run(FlowState2D& s, double t_end, double dt, int record_every = 1);

// | E(T) + nu * int_0^T Z dt - E(0) | / E(0), the viscous dissipation residual;
// the time integral uses composite Simpson on the recorded samples (trapezoid
// fallback on the last interval when the sample count is even). A zero initial
// field is reported as exactly balanced.
double nse_energy_balance(const FlowDiagnostics& d, double nu);

double kinetic_energy(const ScalarField& omega);
double enstrophy(const ScalarField& omega);

}  // namespace conslab
