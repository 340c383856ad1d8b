#include "conslab/balance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "conslab/scaling.hpp"

namespace conslab {

void ChannelDomain::validate() const {
    if (n1 < 8 || n2 < 8) throw std::invalid_argument("ChannelDomain: need n1, n2 >= 8");
    if (n2 % 2 != 0)
        throw std::invalid_argument("ChannelDomain: n2 must be even (no cell on the centerline)");
    if (!(len1 > 0.0)) throw std::invalid_argument("ChannelDomain: len1 must be positive");
}

ChannelField make_channel_field(const ChannelDomain& dom,
                                const std::function<double(double, double)>& u1,
                                const std::function<double(double, double)>& u2,
                                const std::function<double(double, double)>& p) {
    dom.validate();
    ChannelField f;
    f.dom = dom;
    const std::size_t n = std::size_t(dom.n1) * dom.n2;
    f.u1.resize(n);
    f.u2.resize(n);
    f.p.resize(n);
    for (int i = 0; i < dom.n1; ++i)
        for (int j = 0; j < dom.n2; ++j) {
            const std::size_t k = f.idx(i, j);
            f.u1[k] = u1(dom.x1(i), dom.x2(j));
            f.u2[k] = u2(dom.x1(i), dom.x2(j));
            f.p[k] = p(dom.x1(i), dom.x2(j));
            if (!std::isfinite(f.u1[k]) || !std::isfinite(f.u2[k]) || !std::isfinite(f.p[k]))
                throw std::invalid_argument("make_channel_field: non-finite sample");
        }
    return f;
}

double cutoff_xi(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

double cutoff_xi_prime(double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    return 30.0 * s * s * (1.0 - s) * (1.0 - s);
}

double wall_cutoff(const ChannelDomain& dom, double x2v, double delta) {
    return cutoff_xi(dom.wall_distance(x2v) / delta);
}

FluxIntegral boundary_flux_integral(const ChannelField& f, double delta) {
    const ChannelDomain& dom = f.dom;
    dom.validate();
    if (delta < 4.0 * dom.h2())
        throw std::invalid_argument("boundary_flux_integral: delta below 4 wall-normal spacings");
    if (!(delta <= 0.5))
        throw std::invalid_argument("boundary_flux_integral: delta must be <= 1/2");

    // grad phi_delta = xi'(dist/delta)/delta * grad dist, grad dist = +-e2.
    const double cell = dom.h1() * dom.h2();
    FluxIntegral out;
    for (int i = 0; i < dom.n1; ++i)
        for (int j = 0; j < dom.n2; ++j) {
            const std::size_t k = f.idx(i, j);
            const double x2v = dom.x2(j);
            const double dist = dom.wall_distance(x2v);
            if (dist >= delta) continue;
            const double sign = x2v < 0.5 ? 1.0 : -1.0;
            const double gphi = sign * cutoff_xi_prime(dist / delta) / delta;
            const double head = 0.5 * (f.u1[k] * f.u1[k] + f.u2[k] * f.u2[k]) + f.p[k];
            out.integral += gphi * f.u2[k] * head * cell;
            out.upper_bound += (kCutoffGradConstant / delta) * std::abs(f.u2[k]) *
                               std::abs(head) * cell;
        }
    return out;
}

GlobalVerdict global_from_local(const ChannelField& f, const std::vector<double>& deltas) {
    if (deltas.size() < 3)
        throw std::invalid_argument("global_from_local: need at least 3 rungs");

    std::vector<double> vals;
    for (double d : deltas) vals.push_back(boundary_flux_integral(f, d).integral);

    GlobalVerdict v;
    double vmax = 0.0;
    for (double x : vals) vmax = std::max(vmax, std::abs(x));
    if (vmax < 1e-12) {
        v.conserved = true;
        v.rate = 0.0;
        v.fit_quality = 1.0;
        v.limit_estimate = 0.0;
        return v;
    }

    // Sort rungs coarse -> fine for the extrapolation.
    std::vector<std::size_t> order(deltas.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return deltas[a] > deltas[b]; });
    const double d1 = deltas[order[order.size() - 1]], v1 = vals[order[order.size() - 1]];
    const double d2 = deltas[order[order.size() - 2]], v2 = vals[order[order.size() - 2]];
    v.limit_estimate = v1 + (v1 - v2) * d1 / (d2 - d1);

    std::vector<double> avals;
    for (double x : vals) avals.push_back(std::abs(x));
    try {
        ScalingReport rep = fit_scaling(deltas, avals);
        v.rate = rep.fitted_exponent;
        v.fit_quality = rep.fit_quality;
    } catch (const std::exception&) {
        v.rate = 0.0;
        v.fit_quality = 0.0;
    }

    // Conserved iff the flux both decays at a definite rate and has gone
    // small in absolute terms on the finest rung.
    v.conserved = v.rate > 0.1 && std::abs(v1) < 0.1 * vmax + 1e-12;
    return v;
}

std::string global_verdict_json(const GlobalVerdict& v) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "{\"conserved\": %s, \"rate\": %.17g, \"fit_quality\": %.17g, "
                  "\"limit_estimate\": %.17g}",
                  v.conserved ? "true" : "false", v.rate, v.fit_quality, v.limit_estimate);
    return buf;
}

std::string flux_ladder_csv(const ChannelField& f, const std::vector<double>& deltas) {
    std::string out = "delta,integral,upper_bound\n";
    char buf[160];
    for (double d : deltas) {
        FluxIntegral fi = boundary_flux_integral(f, d);
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", d, fi.integral, fi.upper_bound);
        out += buf;
    }
    return out;
}

namespace {

double bump_profile(double s2) {
    return s2 < 1.0 ? std::exp(-1.0 / (1.0 - s2)) : 0.0;
}
double bump_profile_d(double s2) {  // d/ds2 of the profile
    if (s2 >= 1.0) return 0.0;
    const double g = 1.0 - s2;
    return -std::exp(-1.0 / g) / (g * g);
}

}  // namespace

double SpaceTimeBump::value(double x, double t) const {
    const double sx = (x - xc) / rx, st = (t - tc) / rt;
    return bump_profile(sx * sx) * bump_profile(st * st);
}

double SpaceTimeBump::dx(double x, double t) const {
    const double sx = (x - xc) / rx, st = (t - tc) / rt;
    return bump_profile_d(sx * sx) * 2.0 * sx / rx * bump_profile(st * st);
}

double SpaceTimeBump::dt(double x, double t) const {
    const double sx = (x - xc) / rx, st = (t - tc) / rt;
    return bump_profile(sx * sx) * bump_profile_d(st * st) * 2.0 * st / rt;
}

double local_balance_defect(const std::vector<BurgersFrame>& frames, double xa, double dx,
                            const std::function<double(double)>& eta,
                            const std::function<double(double)>& q, const SpaceTimeBump& phi) {
    if (frames.size() < 2)
        throw std::invalid_argument("local_balance_defect: need at least 2 frames");

    auto pairing_at = [&](const BurgersFrame& fr) {
        double acc = 0.0;
        for (std::size_t i = 0; i < fr.u.size(); ++i) {
            const double x = xa + (double(i) + 0.5) * dx;
            acc += phi.dt(x, fr.time) * eta(fr.u[i]) + phi.dx(x, fr.time) * q(fr.u[i]);
        }
        return acc * dx;
    };

    double total = 0.0;
    double prev = pairing_at(frames[0]);
    for (std::size_t k = 1; k < frames.size(); ++k) {
        const double cur = pairing_at(frames[k]);
        total += 0.5 * (prev + cur) * (frames[k].time - frames[k - 1].time);
        prev = cur;
    }
    return total;
}

}  // namespace conslab
