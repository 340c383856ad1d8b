#pragma once

// Finite-volume Burgers solver (Godunov flux, first order) on either a
// periodic interval or a segment with constant far-field extension, plus
// the entropy bookkeeping used by the balance experiments.
//
// Flux f(u) = u^2/2; entropy pair eta(u) = u^2/2, q(u) = u^3/3.

#include <functional>
#include <vector>

namespace conslab {

enum class BurgersBoundary {
    Periodic,  // torus: total mass is conserved to machine precision
    FarField,  // segment: ghost cells hold the constant far-field states
};

struct BurgersState {
    double xa = 0.0, xb = 1.0;  // segment endpoints
    int cells = 0;
    double dx = 0.0;
    double time = 0.0;
    double cfl = 0.9;           // CFL number used for internal substepping (<= 0.9)
    BurgersBoundary boundary = BurgersBoundary::FarField;
    double far_left = 0.0, far_right = 0.0;
    std::vector<double> u;      // cell averages

    double cell_center(int i) const { return xa + (i + 0.5) * dx; }
};

BurgersState make_burgers_state(double xa, double xb, int cells,
                                const std::function<double(double)>& initial,
                                BurgersBoundary boundary, double cfl = 0.9);

// Exact solution of the standing ramp problem: u0 = 1 on x <= 0, 1 - x on
// 0 <= x <= 1, 0 on x >= 1. A shock forms at t = 1 and travels at speed 1/2.
double burgers_exact_ramp(double x, double t);

// Exact Riemann (Godunov) flux for f(u) = u^2/2.
double godunov_flux(double ul, double ur);

// Advances by exactly dt, internally substepping so that every accepted
// step satisfies max|u| * dt_sub / dx <= cfl.
void burgers_step(BurgersState& s, double dt);

struct BurgersTrajectory {
    BurgersState final_state;
    std::vector<double> times;     // every accepted substep boundary
    std::vector<double> energy;    // int eta(u) dx at those times
};

// Runs to t_end, recording the entropy integral at every substep.
BurgersTrajectory burgers_run(BurgersState s, double t_end);

struct EntropyBalance {
    double window_rate = 0.0;   // (E(t2) - E(t1)) / (t2 - t1)
    double boundary_inflow = 0.0;  // q(u_far_left) - q(u_far_right); 0 on the torus
    double dissipation = 0.0;   // inflow - rate (>= 0 for entropy solutions)
};

// Window-averaged entropy balance over [t1, t2] (nearest recorded times).
EntropyBalance burgers_entropy_balance(const BurgersTrajectory& traj, double t1, double t2);

double entropy_integral(const BurgersState& s);
double mass_integral(const BurgersState& s);

}  // namespace conslab
