#include "conslab/burgers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace conslab {

BurgersState make_burgers_state(double xa, double xb, int cells,
                                const std::function<double(double)>& initial,
                                BurgersBoundary boundary, double cfl) {
    if (!(xb > xa)) throw std::invalid_argument("make_burgers_state: xb must exceed xa");
    if (cells < 8) throw std::invalid_argument("make_burgers_state: need at least 8 cells");
    if (!(cfl > 0.0 && cfl <= 0.9))
        throw std::invalid_argument("make_burgers_state: cfl must lie in (0, 0.9]");

    BurgersState s;
    s.xa = xa;
    s.xb = xb;
    s.cells = cells;
    s.dx = (xb - xa) / cells;
    s.cfl = cfl;
    s.boundary = boundary;
    s.u.resize(cells);
    for (int i = 0; i < cells; ++i) s.u[i] = initial(s.cell_center(i));
    s.far_left = s.u.front();
    s.far_right = s.u.back();
    for (double v : s.u)
        if (!std::isfinite(v)) throw std::invalid_argument("make_burgers_state: non-finite datum");
    return s;
}

double burgers_exact_ramp(double x, double t) {
    if (t < 1.0) {
        if (x <= t) return 1.0;
        if (x < 1.0) return (1.0 - x) / (1.0 - t);
        return 0.0;
    }
    return x < 0.5 * (t + 1.0) ? 1.0 : 0.0;
}

double godunov_flux(double ul, double ur) {
    auto f = [](double u) { return 0.5 * u * u; };
    if (ul >= ur) {
        // Shock: upwind by the Rankine-Hugoniot speed (ul + ur)/2.
        return ul + ur > 0.0 ? f(ul) : f(ur);
    }
    // Rarefaction: sonic point at u = 0.
    if (ul > 0.0) return f(ul);
    if (ur < 0.0) return f(ur);
    return 0.0;
}

namespace {

void single_step(BurgersState& s, double dt) {
    const int n = s.cells;
    const bool periodic = s.boundary == BurgersBoundary::Periodic;
    const double ul_ghost = periodic ? s.u[n - 1] : s.far_left;
    const double ur_ghost = periodic ? s.u[0] : s.far_right;

    std::vector<double> flux(n + 1);
    flux[0] = godunov_flux(ul_ghost, s.u[0]);
    for (int i = 1; i < n; ++i) flux[i] = godunov_flux(s.u[i - 1], s.u[i]);
    flux[n] = godunov_flux(s.u[n - 1], ur_ghost);

    const double lam = dt / s.dx;
    for (int i = 0; i < n; ++i) s.u[i] -= lam * (flux[i + 1] - flux[i]);
    s.time += dt;
}

double max_speed(const BurgersState& s) {
    double m = std::max(std::abs(s.far_left), std::abs(s.far_right));
    for (double v : s.u) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace

void burgers_step(BurgersState& s, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("burgers_step: dt must be positive");
    double remaining = dt;
    while (remaining > 0.0) {
        const double speed = max_speed(s);
        const double dt_max = speed > 0.0 ? s.cfl * s.dx / speed : remaining;
        const double step = std::min(remaining, dt_max);
        single_step(s, step);
        remaining -= step;
    }
}

double entropy_integral(const BurgersState& s) {
    double e = 0.0;
    for (double v : s.u) e += 0.5 * v * v;
    return e * s.dx;
}

double mass_integral(const BurgersState& s) {
    double m = 0.0;
    for (double v : s.u) m += v;
    return m * s.dx;
}

BurgersTrajectory burgers_run(BurgersState s, double t_end) {
    if (!(t_end > s.time)) throw std::invalid_argument("burgers_run: t_end must exceed state time");
    BurgersTrajectory traj;
    traj.times.push_back(s.time);
    traj.energy.push_back(entropy_integral(s));
    while (s.time < t_end - 1e-14) {
        const double speed = max_speed(s);
        const double dt_max = speed > 0.0 ? s.cfl * s.dx / speed : t_end - s.time;
        const double step = std::min(t_end - s.time, dt_max);
        single_step(s, step);
        traj.times.push_back(s.time);
        traj.energy.push_back(entropy_integral(s));
    }
    traj.final_state = std::move(s);
    return traj;
}

EntropyBalance burgers_entropy_balance(const BurgersTrajectory& traj, double t1, double t2) {
    if (traj.times.size() < 2)
        throw std::invalid_argument("burgers_entropy_balance: trajectory too short");
    if (!(t2 > t1)) throw std::invalid_argument("burgers_entropy_balance: need t2 > t1");

    auto nearest = [&](double t) {
        auto it = std::lower_bound(traj.times.begin(), traj.times.end(), t);
        if (it == traj.times.end()) return traj.times.size() - 1;
        std::size_t i = std::size_t(it - traj.times.begin());
        if (i > 0 && t - traj.times[i - 1] < traj.times[i] - t) --i;
        return i;
    };
    const std::size_t i1 = nearest(t1), i2 = nearest(t2);
    if (i1 == i2) throw std::invalid_argument("burgers_entropy_balance: window has no steps");

    EntropyBalance b;
    b.window_rate = (traj.energy[i2] - traj.energy[i1]) / (traj.times[i2] - traj.times[i1]);
    const BurgersState& s = traj.final_state;
    if (s.boundary == BurgersBoundary::FarField) {
        auto q = [](double u) { return u * u * u / 3.0; };
        b.boundary_inflow = q(s.far_left) - q(s.far_right);
    }
    b.dissipation = b.boundary_inflow - b.window_rate;
    return b;
}

}  // namespace conslab
