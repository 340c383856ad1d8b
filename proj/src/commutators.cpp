#include "conslab/commutators.hpp"

#include <cmath>
#include <stdexcept>

#include "conslab/spectral.hpp"

namespace conslab {

namespace {

VectorField pointwise_product(const ScalarField& rho, const VectorField& u) {
    VectorField out(u.grid);
    for (int a = 0; a < u.dim(); ++a)
        for (std::size_t i = 0; i < rho.size(); ++i) out[a].v[i] = rho.v[i] * u[a].v[i];
    return out;
}

void finalize(CommutatorResult& r) {
    r.l1 = lp_norm(r.field, 1.0);
    r.l2 = lp_norm(r.field, 2.0);
}

void check_divergence_free(const VectorField& u, const char* where) {
    ScalarField div = divergence(u);
    const double dnorm = l2_norm(div);
    if (dnorm > 1e-8 * (1.0 + lp_norm(u, 2.0)))
        throw std::invalid_argument(std::string(where) +
                                    ": u must be divergence-free (||div u||_2 = " +
                                    std::to_string(dnorm) + ")");
}

}  // namespace

CommutatorResult dl_commutator(const ScalarField& rho, const VectorField& u,
                               const MollifierKernel& kernel) {
    require_same_grid(rho.grid, u.grid, "dl_commutator");
    require_same_grid(rho.grid, kernel.grid, "dl_commutator");

    ScalarField div_flux = divergence(mollify(pointwise_product(rho, u), kernel));
    VectorField grad_rho = gradient(mollify(rho, kernel));

    CommutatorResult r;
    r.eps = kernel.eps;
    r.field = ScalarField(rho.grid);
    for (std::size_t i = 0; i < r.field.size(); ++i) {
        double adv = 0.0;
        for (int a = 0; a < u.dim(); ++a) adv += u[a].v[i] * grad_rho[a].v[i];
        r.field.v[i] = div_flux.v[i] - adv;
    }
    finalize(r);
    return r;
}

CommutatorResult cet_commutator(const ScalarField& rho, const VectorField& u,
                                const MollifierKernel& kernel) {
    require_same_grid(rho.grid, u.grid, "cet_commutator");
    require_same_grid(rho.grid, kernel.grid, "cet_commutator");

    ScalarField rho_m = mollify(rho, kernel);
    VectorField u_m = mollify(u, kernel);
    ScalarField div_flux = divergence(mollify(pointwise_product(rho, u), kernel));
    ScalarField div_prod = divergence(pointwise_product(rho_m, u_m));

    CommutatorResult r;
    r.eps = kernel.eps;
    r.field = ScalarField(rho.grid);
    for (std::size_t i = 0; i < r.field.size(); ++i)
        r.field.v[i] = div_flux.v[i] - div_prod.v[i];
    finalize(r);
    return r;
}

CommutatorParts cet_decomposition(const ScalarField& rho, const VectorField& u,
                                  const MollifierKernel& kernel) {
    require_same_grid(rho.grid, u.grid, "cet_decomposition");
    require_same_grid(rho.grid, kernel.grid, "cet_decomposition");

    ScalarField rho_m = mollify(rho, kernel);
    VectorField u_m = mollify(u, kernel);
    VectorField flux_m = mollify(pointwise_product(rho, u), kernel);

    CommutatorParts parts{VectorField(u.grid), VectorField(u.grid)};
    for (int a = 0; a < u.dim(); ++a)
        for (std::size_t i = 0; i < rho.size(); ++i) {
            const double dr = rho_m.v[i] - rho.v[i];
            const double du = u_m[a].v[i] - u[a].v[i];
            parts.part_a[a].v[i] = -dr * du;
            parts.part_b[a].v[i] = flux_m[a].v[i] - rho.v[i] * u_m[a].v[i] -
                                   u[a].v[i] * rho_m.v[i] + rho.v[i] * u[a].v[i];
        }
    return parts;
}

double renormalisation_defect(const ScalarField& rho, const VectorField& u,
                              const EntropyFunction& eta, const MollifierKernel& kernel,
                              const ScalarField& phi) {
    require_same_grid(rho.grid, phi.grid, "renormalisation_defect");
    CommutatorResult s = cet_commutator(rho, u, kernel);
    ScalarField rho_m = mollify(rho, kernel);

    ScalarField integrand(rho.grid);
    for (std::size_t i = 0; i < integrand.size(); ++i) {
        const double ep = eta.eta_prime(rho_m.v[i]);
        if (!std::isfinite(ep))
            throw std::runtime_error(
                "renormalisation_defect: eta' not finite at rho_eps = " +
                std::to_string(rho_m.v[i]) + " (entropy '" + eta.tag + "')");
        integrand.v[i] = -phi.v[i] * ep * s.field.v[i];
    }
    return integrate(integrand);
}

double euler_defect(const VectorField& u, const ScalarField& /*p*/, const MollifierKernel& kernel,
                    const ScalarField& phi) {
    require_same_grid(u.grid, kernel.grid, "euler_defect");
    require_same_grid(u.grid, phi.grid, "euler_defect");
    check_divergence_free(u, "euler_defect");

    const int d = u.dim();
    VectorField u_m = mollify(u, kernel);

    // R_i = sum_j d_j [ (u_m)_i (u_m)_j - (u_i u_j)_eps ]
    ScalarField integrand(u.grid);
    for (int i = 0; i < d; ++i) {
        ScalarField Ri(u.grid);
        for (int j = 0; j < d; ++j) {
            ScalarField Tij(u.grid);
            for (std::size_t idx = 0; idx < Tij.size(); ++idx)
                Tij.v[idx] = u[i].v[idx] * u[j].v[idx];
            Tij = mollify(Tij, kernel);
            for (std::size_t idx = 0; idx < Tij.size(); ++idx)
                Tij.v[idx] = u_m[i].v[idx] * u_m[j].v[idx] - Tij.v[idx];
            ScalarField dj = spectral_derivative(Tij, j);
            for (std::size_t idx = 0; idx < Ri.size(); ++idx) Ri.v[idx] += dj.v[idx];
        }
        for (std::size_t idx = 0; idx < integrand.size(); ++idx)
            integrand.v[idx] += phi.v[idx] * u_m[i].v[idx] * Ri.v[idx];
    }
    return integrate(integrand);
}

ScalarField taylor_gap(const std::function<double(double)>& p, const ScalarField& rho,
                       const MollifierKernel& kernel) {
    require_same_grid(rho.grid, kernel.grid, "taylor_gap");
    ScalarField rho_m = mollify(rho, kernel);
    ScalarField p_of_rho(rho.grid);
    for (std::size_t i = 0; i < rho.size(); ++i) {
        p_of_rho.v[i] = p(rho.v[i]);
        if (!std::isfinite(p_of_rho.v[i]))
            throw std::runtime_error("taylor_gap: p(rho) not finite at rho = " +
                                     std::to_string(rho.v[i]));
    }
    ScalarField p_moll = mollify(p_of_rho, kernel);

    ScalarField gap(rho.grid);
    for (std::size_t i = 0; i < gap.size(); ++i) {
        const double pm = p(rho_m.v[i]);
        if (!std::isfinite(pm))
            throw std::runtime_error("taylor_gap: p(rho_eps) not finite at rho_eps = " +
                                     std::to_string(rho_m.v[i]));
        gap.v[i] = pm - p_moll.v[i];
    }
    return gap;
}

PressureCommutators pressure_commutators(const ScalarField& rho, const VectorField& u,
                                         double gamma, const MollifierKernel& kernel,
                                         double alpha_cut) {
    require_same_grid(rho.grid, u.grid, "pressure_commutators");
    if (!(gamma > 1.0 && gamma < 2.0))
        throw std::invalid_argument("pressure_commutators: gamma must lie in (1,2)");
    if (!(alpha_cut > 0.0))
        throw std::invalid_argument("pressure_commutators: alpha_cut must be positive");
    for (double x : rho.v)
        if (x < 0.0)
            throw std::invalid_argument("pressure_commutators: rho must be nonnegative");

    ScalarField rho_m = mollify(rho, kernel);
    VectorField u_m = mollify(u, kernel);
    ScalarField div_um = divergence(u_m);

    auto pres = [gamma](double r) { return std::pow(std::max(r, 0.0), gamma); };

    // R1: pressure Jensen gap against the mollified compression.
    ScalarField p_of_rho(rho.grid);
    for (std::size_t i = 0; i < rho.size(); ++i) p_of_rho.v[i] = pres(rho.v[i]);
    ScalarField p_moll = mollify(p_of_rho, kernel);
    ScalarField r1_field(rho.grid);
    for (std::size_t i = 0; i < rho.size(); ++i)
        r1_field.v[i] = div_um.v[i] * (pres(rho_m.v[i]) - p_moll.v[i]);

    // R2: flux commutator against P'(rho_eps); P'(0) = -1/(gamma-1) is finite,
    // so the integrand needs no cutoff even where rho_eps ~ 0.
    VectorField comm(u.grid);
    VectorField flux_m = mollify(pointwise_product(rho, u), kernel);
    for (int a = 0; a < u.dim(); ++a)
        for (std::size_t i = 0; i < rho.size(); ++i)
            comm[a].v[i] = rho_m.v[i] * u_m[a].v[i] - flux_m[a].v[i];
    ScalarField div_comm = divergence(comm);

    const double eps_alpha = std::pow(kernel.eps, alpha_cut);
    ScalarField r2_field(rho.grid);
    std::size_t vacuum_count = 0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        const double rm = std::max(rho_m.v[i], 0.0);
        const double pprime = (gamma * std::pow(rm, gamma - 1.0) - 1.0) / (gamma - 1.0);
        r2_field.v[i] = div_comm.v[i] * pprime;
        if (rho_m.v[i] > 0.0 && rho_m.v[i] < eps_alpha) ++vacuum_count;
    }

    PressureCommutators out;
    out.r1 = integrate(r1_field);
    out.r2 = integrate(r2_field);
    out.vacuum_fraction = double(vacuum_count) / double(rho.size());
    return out;
}

}  // namespace conslab
