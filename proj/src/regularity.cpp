#include "conslab/regularity.hpp"

#include <cmath>
#include <stdexcept>

#include "conslab/spectral.hpp"

namespace conslab {

namespace {

// Whole-cell offsets y with |y| <= eps (minimum-image length). Offsets range
// over [-n/2, n/2) per active axis.
std::vector<std::array<int, 3>> shift_ball(const PeriodicGrid& g, double eps) {
    std::vector<std::array<int, 3>> offsets;
    const int r0 = std::min(g.n[0] / 2, int(std::floor(eps / g.spacing(0))) + 1);
    const int r1 = g.dim > 1 ? std::min(g.n[1] / 2, int(std::floor(eps / g.spacing(1))) + 1) : 0;
    const int r2 = g.dim > 2 ? std::min(g.n[2] / 2, int(std::floor(eps / g.spacing(2))) + 1) : 0;
    for (int a = -r0; a <= r0; ++a)
        for (int b = -r1; b <= r1; ++b)
            for (int c = -r2; c <= r2; ++c) {
                double y2 = a * g.spacing(0) * a * g.spacing(0);
                if (g.dim > 1) y2 += b * g.spacing(1) * b * g.spacing(1);
                if (g.dim > 2) y2 += c * g.spacing(2) * c * g.spacing(2);
                if (y2 <= eps * eps) offsets.push_back({a, b, c});
            }
    return offsets;
}

template <typename IncrementPowSum>
double besov_core(const PeriodicGrid& g, double p, double alpha, double eps,
                  IncrementPowSum&& pow_sum) {
    if (!(p >= 1.0)) throw std::invalid_argument("besov_functional: p must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("besov_functional: alpha must lie in (0,1)");
    if (!(eps >= g.max_spacing()))
        throw std::invalid_argument("besov_functional: eps below one grid spacing");

    const double cv = g.cell_volume();
    double total = 0.0;
    for (const auto& y : shift_ball(g, eps)) total += pow_sum(y) * cv * cv;
    return total / std::pow(eps, g.dim + alpha * p);
}

}  // namespace

double besov_functional(const ScalarField& f, double p, double alpha, double eps) {
    return besov_core(f.grid, p, alpha, eps, [&](const std::array<int, 3>& y) {
        ScalarField shifted = shift_field(f, y);
        double s = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i)
            s += std::pow(std::abs(f.v[i] - shifted.v[i]), p);
        return s;
    });
}

double besov_functional(const VectorField& u, double p, double alpha, double eps) {
    return besov_core(u.grid, p, alpha, eps, [&](const std::array<int, 3>& y) {
        std::vector<ScalarField> shifted;
        for (int a = 0; a < u.dim(); ++a) shifted.push_back(shift_field(u[a], y));
        double s = 0.0;
        for (std::size_t i = 0; i < u[0].size(); ++i) {
            double m2 = 0.0;
            for (int a = 0; a < u.dim(); ++a) {
                const double d = u[a].v[i] - shifted[a].v[i];
                m2 += d * d;
            }
            s += std::pow(std::sqrt(m2), p);
        }
        return s;
    });
}

double mollified_increment_norm(const ScalarField& f, double p, double alpha,
                                const MollifierKernel& kernel) {
    require_same_grid(f.grid, kernel.grid, "mollified_increment_norm");
    ScalarField fm = mollify(f, kernel);
    ScalarField diff(f.grid);
    for (std::size_t i = 0; i < f.size(); ++i) diff.v[i] = f.v[i] - fm.v[i];
    return std::pow(kernel.eps, -alpha) * lp_norm(diff, p);
}

double gradient_bound(const ScalarField& f, double p, double alpha,
                      const MollifierKernel& kernel) {
    require_same_grid(f.grid, kernel.grid, "gradient_bound");
    ScalarField fm = mollify(f, kernel);
    VectorField grad = gradient(fm);
    return std::pow(kernel.eps, 1.0 - alpha) * lp_norm(grad, p);
}

HolderEstimate holder_exponent_estimate(const ScalarField& f, const EpsilonLadder& ladder) {
    const PeriodicGrid& g = f.grid;
    std::vector<double> eps, s2;
    for (double e : ladder.eps) {
        // Axis-aligned increments at |y| ~ eps, averaged over directions.
        double acc = 0.0;
        int used = 0;
        for (int a = 0; a < g.dim; ++a) {
            const int cells = int(std::round(e / g.spacing(a)));
            if (cells < 1 || cells > g.n[a] / 2) continue;
            std::array<int, 3> y{0, 0, 0};
            y[a] = cells;
            ScalarField inc = increment_field(f, y);
            const double nrm = lp_norm(inc, 2.0);
            acc += nrm * nrm;
            ++used;
        }
        if (used == 0) continue;
        eps.push_back(e);
        s2.push_back(acc / used);
    }

    HolderEstimate est;
    ScalingReport rep = fit_scaling(eps, s2);
    est.alpha_hat = std::min(1.0, rep.fitted_exponent / 2.0);
    est.fit_quality = rep.fit_quality;
    if (est.alpha_hat <= 0.1) est.flag = "unresolved";
    return est;
}

void EnsembleSet::validate() const {
    if (members.empty()) throw std::invalid_argument("EnsembleSet: no members");
    if (members.size() != weights.size())
        throw std::invalid_argument("EnsembleSet: member/weight count mismatch");
    double sum = 0.0;
    for (double w : weights) {
        if (!(w > 0.0)) throw std::invalid_argument("EnsembleSet: weights must be positive");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("EnsembleSet: weights sum to " + std::to_string(sum) +
                                    ", expected 1 within 1e-12");
    for (const auto& m : members) require_same_grid(m.grid, members[0].grid, "EnsembleSet");
}

double ensemble_besov(const EnsembleSet& ens, double p, double alpha, double eps) {
    ens.validate();
    double acc = 0.0;
    for (std::size_t i = 0; i < ens.members.size(); ++i)
        acc += ens.weights[i] * besov_functional(ens.members[i], p, alpha, eps);
    return acc;
}

}  // namespace conslab
