#pragma once

// Boundary-cutoff energy bookkeeping on a channel: periodic in x1, walls at
// x2 = 0 and x2 = 1. The wall cutoff phi_delta = xi(dist/delta) uses the
// unique C^2 quintic step xi(s) = 6s^5 - 15s^4 + 10s^3, whose derivative
// peaks at C = 15/8; |grad phi_delta| <= C/delta with support in the strip
// {dist < delta}.

#include <functional>
#include <string>
#include <vector>

namespace conslab {

struct ChannelDomain {
    int n1 = 0, n2 = 0;     // cells along x1 (periodic) and x2 (wall-normal)
    double len1 = 1.0;      // channel length; height is fixed to 1

    void validate() const;
    double h1() const { return len1 / n1; }
    double h2() const { return 1.0 / n2; }
    double x1(int i) const { return (i + 0.5) * h1(); }
    double x2(int j) const { return (j + 0.5) * h2(); }   // cell-centered
    double wall_distance(double x2v) const { return x2v < 0.5 ? x2v : 1.0 - x2v; }
};

struct ChannelField {
    ChannelDomain dom;
    std::vector<double> u1, u2, p;  // row-major (i1 slow, i2 fast)

    std::size_t idx(int i, int j) const { return std::size_t(i) * dom.n2 + j; }
};

ChannelField make_channel_field(const ChannelDomain& dom,
                                const std::function<double(double, double)>& u1,
                                const std::function<double(double, double)>& u2,
                                const std::function<double(double, double)>& p);

// Quintic step and its derivative.
double cutoff_xi(double s);
double cutoff_xi_prime(double s);
constexpr double kCutoffGradConstant = 15.0 / 8.0;

// phi_delta at a wall distance.
double wall_cutoff(const ChannelDomain& dom, double x2v, double delta);

struct FluxIntegral {
    double integral = 0.0;     // int grad(phi_delta) . u (|u|^2/2 + p) dx
    double upper_bound = 0.0;  // (C/delta) int_{dist<delta} |u.n| | |u|^2/2 + p | dx
};

// Requires delta >= 4 wall-normal spacings and delta <= 1/2.
FluxIntegral boundary_flux_integral(const ChannelField& f, double delta);

struct GlobalVerdict {
    bool conserved = false;
    double rate = 0.0;          // fitted decay exponent of |integral| in delta
    double fit_quality = 0.0;
    double limit_estimate = 0.0;  // linear-in-delta extrapolation from the two finest rungs
};

// Runs the flux integral over a delta ladder and decides whether it vanishes.
// Exact zeros (|I| < 1e-12 on every rung) are conserved with rate 0.
GlobalVerdict global_from_local(const ChannelField& f, const std::vector<double>& deltas);
std::string global_verdict_json(const GlobalVerdict& v);
std::string flux_ladder_csv(const ChannelField& f, const std::vector<double>& deltas);

// Space-time test function with closed-form partial derivatives.
struct SpaceTimeBump {
    double xc = 0.0, rx = 1.0;  // spatial center / radius
    double tc = 0.0, rt = 1.0;  // temporal center / radius

    double value(double x, double t) const;
    double dx(double x, double t) const;
    double dt(double x, double t) const;
};

// int int ( dphi/dt eta(u) + dphi/dx q(u) ) dx dt along a recorded Burgers
// run: positive for entropy-dissipating solutions when phi >= 0, and O(dx)
// small before shock formation. Trapezoid in time, cell sum in space.
struct BurgersFrame {
    double time = 0.0;
    std::vector<double> u;
};
double local_balance_defect(const std::vector<BurgersFrame>& frames, double xa, double dx,
                            const std::function<double(double)>& eta,
                            const std::function<double(double)>& q, const SpaceTimeBump& phi);

}  // namespace conslab
