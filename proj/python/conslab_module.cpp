// Python bindings for the conservation laboratory. Fields cross the
// boundary as numpy double arrays on the unit torus: scalars with shape
// (n0[, n1[, n2]]), vectors with a leading component axis. Everything is
// copied at the boundary; the C++ value types stay immutable underneath.

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <optional>
#include <stdexcept>

#include "conslab/balance.hpp"
#include "conslab/battery.hpp"
#include "conslab/burgers.hpp"
#include "conslab/commutators.hpp"
#include "conslab/convexint.hpp"
#include "conslab/flow2d.hpp"
#include "conslab/generators.hpp"
#include "conslab/grid.hpp"
#include "conslab/mollify.hpp"
#include "conslab/regularity.hpp"
#include "conslab/runner.hpp"
#include "conslab/scaling.hpp"
#include "conslab/snapshot.hpp"
#include "conslab/spectral.hpp"

namespace py = pybind11;
using namespace conslab;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

PeriodicGrid grid_from_shape(const std::vector<int>& shape) {
    PeriodicGrid g;
    g.dim = int(shape.size());
    for (int a = 0; a < g.dim; ++a) g.n[a] = shape[a];
    g.validate();
    return g;
}

ScalarField scalar_from_numpy(const DoubleArray& arr) {
    if (arr.ndim() < 1 || arr.ndim() > 3)
        throw std::invalid_argument("expected a 1D, 2D or 3D array");
    std::vector<int> shape;
    for (py::ssize_t a = 0; a < arr.ndim(); ++a) shape.push_back(int(arr.shape(a)));
    ScalarField f(grid_from_shape(shape));
    const double* src = arr.data();
    std::copy(src, src + f.size(), f.v.begin());
    return f;
}

VectorField vector_from_numpy(const DoubleArray& arr) {
    if (arr.ndim() < 2 || arr.ndim() > 4)
        throw std::invalid_argument("expected shape (components, n0[, n1[, n2]])");
    const int dim = int(arr.ndim()) - 1;
    if (int(arr.shape(0)) != dim)
        throw std::invalid_argument("leading axis must hold one component per dimension");
    std::vector<int> shape;
    for (py::ssize_t a = 1; a < arr.ndim(); ++a) shape.push_back(int(arr.shape(a)));
    VectorField u(grid_from_shape(shape));
    const double* src = arr.data();
    const std::size_t stride = u.grid.total();
    for (int c = 0; c < dim; ++c)
        std::copy(src + c * stride, src + (c + 1) * stride, u[c].v.begin());
    return u;
}

py::array_t<double> numpy_from_scalar(const ScalarField& f) {
    std::vector<py::ssize_t> shape;
    for (int a = 0; a < f.grid.dim; ++a) shape.push_back(f.grid.n[a]);
    py::array_t<double> out(shape);
    std::copy(f.v.begin(), f.v.end(), out.mutable_data());
    return out;
}

py::array_t<double> numpy_from_vector(const VectorField& u) {
    std::vector<py::ssize_t> shape{u.grid.dim};
    for (int a = 0; a < u.grid.dim; ++a) shape.push_back(u.grid.n[a]);
    py::array_t<double> out(shape);
    double* dst = out.mutable_data();
    const std::size_t stride = u.grid.total();
    for (int c = 0; c < u.grid.dim; ++c)
        std::copy(u[c].v.begin(), u[c].v.end(), dst + c * stride);
    return out;
}

StateTriple triple_from_numpy(const DoubleArray& arr) {
    if (arr.ndim() != 2 || arr.shape(0) != 3 || arr.shape(1) != 3)
        throw std::invalid_argument("expected a 3x3 state matrix");
    StateTriple U;
    const double* src = arr.data();
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) U.r[r][c] = src[r * 3 + c];
    return U;
}

py::array_t<double> numpy_from_triple(const StateTriple& U) {
    py::array_t<double> out({py::ssize_t(3), py::ssize_t(3)});
    double* dst = out.mutable_data();
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) dst[r * 3 + c] = U.r[r][c];
    return out;
}

ScalarField phi_or_ones(const std::optional<DoubleArray>& phi, const PeriodicGrid& g) {
    if (!phi) return ScalarField(g, 1.0);
    ScalarField f = scalar_from_numpy(*phi);
    require_same_grid(f.grid, g, "phi");
    return f;
}

py::dict commutator_dict(const CommutatorResult& r) {
    py::dict d;
    d["eps"] = r.eps;
    d["field"] = numpy_from_scalar(r.field);
    d["l1"] = r.l1;
    d["l2"] = r.l2;
    return d;
}

py::dict laminate_dict(const Laminate& lam) {
    py::list weights, values;
    for (int i : lam.leaf_indices()) {
        weights.append(lam.nodes[i].weight);
        values.append(numpy_from_triple(lam.nodes[i].value));
    }
    py::dict d;
    d["weights"] = weights;
    d["leaves"] = values;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Conservation laboratory: mollification commutators, scaling "
              "fits, Burgers/Euler balances, boundary cutoffs, laminates.";
    m.attr("__version__") = kModuleVersion;

    // ------------------------------------------------------------ generators
    m.def(
        "weierstrass",
        [](int n, int dim, double alpha, int octaves, std::uint64_t seed, bool locked,
           double phase_offset, std::optional<std::array<int, 3>> direction) {
            PeriodicGrid g;
            g.dim = dim;
            for (int a = 0; a < dim; ++a) g.n[a] = n;
            g.validate();
            FieldSpec spec;
            spec.kind = FieldKind::Weierstrass;
            spec.alpha = alpha;
            spec.octaves = octaves;
            spec.seed = seed;
            spec.phase_mode = locked ? PhaseMode::Locked : PhaseMode::Seeded;
            spec.phase_offset = phase_offset;
            if (direction) spec.direction = *direction;
            return numpy_from_scalar(sample_scalar(spec, g));
        },
        py::arg("n"), py::arg("dim") = 1, py::arg("alpha") = 0.5, py::arg("octaves") = 8,
        py::arg("seed") = 0, py::arg("locked") = false, py::arg("phase_offset") = 0.0,
        py::arg("direction") = std::nullopt,
        "Lacunary Weierstrass-type sample on the unit torus.");

    m.def(
        "radial_bump",
        [](int n, int dim, std::array<double, 3> center, double r) {
            PeriodicGrid g;
            g.dim = dim;
            for (int a = 0; a < dim; ++a) g.n[a] = n;
            g.validate();
            return numpy_from_scalar(radial_bump(g, center, r));
        },
        py::arg("n"), py::arg("dim") = 2, py::arg("center") = std::array<double, 3>{0.5, 0.5, 0.5},
        py::arg("r") = 0.25, "Compactly supported smooth bump test function.");

    // ---------------------------------------------------------- mollification
    m.def(
        "mollify",
        [](const DoubleArray& f, double eps) {
            ScalarField sf = scalar_from_numpy(f);
            return numpy_from_scalar(mollify(sf, build_kernel(sf.grid, eps)));
        },
        py::arg("f"), py::arg("eps"), "Periodic mollification at scale eps.");

    m.def(
        "besov_functional",
        [](const DoubleArray& f, double p, double alpha, double eps) {
            ScalarField sf = scalar_from_numpy(f);
            return besov_functional(sf, p, alpha, eps);
        },
        py::arg("f"), py::arg("p"), py::arg("alpha"), py::arg("eps"),
        "Mollification-increment Besov functional at one scale.");

    m.def(
        "fit_scaling",
        [](const std::vector<double>& eps, const std::vector<double>& value,
           std::optional<double> predicted) {
            ScalingReport r = fit_scaling(eps, value, predicted);
            py::dict d;
            d["fitted_exponent"] = r.fitted_exponent;
            d["fit_quality"] = r.fit_quality;
            d["zeros_dropped"] = r.zeros_dropped;
            if (r.predicted_exponent) d["predicted_exponent"] = *r.predicted_exponent;
            return d;
        },
        py::arg("eps"), py::arg("value"), py::arg("predicted") = std::nullopt,
        "Least-squares power-law fit of a defect ladder.");

    // ------------------------------------------------------------ commutators
    m.def(
        "dl_commutator",
        [](const DoubleArray& rho, const DoubleArray& u, double eps) {
            ScalarField r = scalar_from_numpy(rho);
            VectorField v = vector_from_numpy(u);
            return commutator_dict(dl_commutator(r, v, build_kernel(r.grid, eps)));
        },
        py::arg("rho"), py::arg("u"), py::arg("eps"),
        "Advective transport commutator Div((rho u)_eps) - u.grad(rho_eps).");

    m.def(
        "cet_commutator",
        [](const DoubleArray& rho, const DoubleArray& u, double eps) {
            ScalarField r = scalar_from_numpy(rho);
            VectorField v = vector_from_numpy(u);
            return commutator_dict(cet_commutator(r, v, build_kernel(r.grid, eps)));
        },
        py::arg("rho"), py::arg("u"), py::arg("eps"),
        "Energy-flux commutator Div((rho u)_eps) - Div(rho_eps u_eps).");

    m.def(
        "renormalisation_defect",
        [](const DoubleArray& rho, const DoubleArray& u, double eps,
           std::optional<DoubleArray> phi) {
            ScalarField r = scalar_from_numpy(rho);
            VectorField v = vector_from_numpy(u);
            EntropyFunction eta{[](double s) { return 0.5 * s * s; },
                                [](double s) { return s; }, "s^2/2"};
            return renormalisation_defect(r, v, eta, build_kernel(r.grid, eps),
                                          phi_or_ones(phi, r.grid));
        },
        py::arg("rho"), py::arg("u"), py::arg("eps"), py::arg("phi") = std::nullopt,
        "Quadratic-entropy renormalisation defect -int phi eta'(rho_eps) S_eps.");

    m.def(
        "euler_defect",
        [](const DoubleArray& u, double eps, std::optional<DoubleArray> p,
           std::optional<DoubleArray> phi) {
            VectorField v = vector_from_numpy(u);
            ScalarField pf = p ? scalar_from_numpy(*p) : ScalarField(v.grid, 0.0);
            return euler_defect(v, pf, build_kernel(v.grid, eps), phi_or_ones(phi, v.grid));
        },
        py::arg("u"), py::arg("eps"), py::arg("p") = std::nullopt,
        py::arg("phi") = std::nullopt,
        "Localized kinetic-energy flux defect for a divergence-free field.");

    m.def(
        "taylor_gap",
        [](const DoubleArray& rho, double gamma, double eps) {
            ScalarField r = scalar_from_numpy(rho);
            auto p = [gamma](double s) { return std::pow(s, gamma); };
            return numpy_from_scalar(taylor_gap(p, r, build_kernel(r.grid, eps)));
        },
        py::arg("rho"), py::arg("gamma"), py::arg("eps"),
        "Pointwise Jensen gap p(rho_eps) - (p o rho)_eps for p(s) = s^gamma.");

    m.def(
        "pressure_commutators",
        [](const DoubleArray& rho, const DoubleArray& u, double gamma, double eps,
           double alpha_cut) {
            ScalarField r = scalar_from_numpy(rho);
            VectorField v = vector_from_numpy(u);
            PressureCommutators pc =
                pressure_commutators(r, v, gamma, build_kernel(r.grid, eps), alpha_cut);
            py::dict d;
            d["r1"] = pc.r1;
            d["r2"] = pc.r2;
            d["vacuum_fraction"] = pc.vacuum_fraction;
            return d;
        },
        py::arg("rho"), py::arg("u"), py::arg("gamma"), py::arg("eps"), py::arg("alpha_cut"),
        "Pressure commutators R1, R2 with the measured near-vacuum fraction.");

    // ---------------------------------------------------------------- burgers
    m.def(
        "burgers_ramp_run",
        [](int cells, double t_end, double xa, double xb, double cfl) {
            BurgersState s = make_burgers_state(
                xa, xb, cells,
                [](double x) { return x <= 0.0 ? 1.0 : (x >= 1.0 ? 0.0 : 1.0 - x); },
                BurgersBoundary::FarField, cfl);
            BurgersTrajectory traj = burgers_run(s, t_end);
            py::array_t<double> x(std::vector<py::ssize_t>{cells});
            py::array_t<double> u(std::vector<py::ssize_t>{cells});
            for (int i = 0; i < cells; ++i) {
                x.mutable_data()[i] = traj.final_state.cell_center(i);
                u.mutable_data()[i] = traj.final_state.u[i];
            }
            py::dict d;
            d["x"] = x;
            d["u"] = u;
            d["time"] = traj.final_state.time;
            d["times"] = traj.times;
            d["energy"] = traj.energy;
            return d;
        },
        py::arg("cells"), py::arg("t_end"), py::arg("xa") = -0.05, py::arg("xb") = 1.65,
        py::arg("cfl") = 0.9, "Godunov run of the standing-ramp datum with far-field cells.");

    m.def(
        "burgers_ramp_balance",
        [](int cells, double t_end, double t1, double t2) {
            BurgersState s = make_burgers_state(
                -0.05, 1.65, cells,
                [](double x) { return x <= 0.0 ? 1.0 : (x >= 1.0 ? 0.0 : 1.0 - x); },
                BurgersBoundary::FarField, 0.9);
            EntropyBalance b = burgers_entropy_balance(burgers_run(s, t_end), t1, t2);
            py::dict d;
            d["window_rate"] = b.window_rate;
            d["boundary_inflow"] = b.boundary_inflow;
            d["dissipation"] = b.dissipation;
            return d;
        },
        py::arg("cells"), py::arg("t_end"), py::arg("t1"), py::arg("t2"),
        "Window-averaged entropy balance of the ramp run.");

    m.def("burgers_exact_ramp", &burgers_exact_ramp, py::arg("x"), py::arg("t"),
          "Closed-form entropy solution of the standing-ramp datum.");

    // ------------------------------------------------------------------ flows
    m.def(
        "euler2d_run",
        [](const DoubleArray& omega0, double nu, double t_end, double dt, int record_every) {
            ScalarField w0 = scalar_from_numpy(omega0);
            if (w0.grid.dim != 2) throw std::invalid_argument("omega0 must be 2D");
            FlowState2D s = make_flow_state(w0, nu);
            FlowDiagnostics diag = euler2d_run(s, t_end, dt, record_every);
            py::dict d;
            d["times"] = diag.times;
            d["energy"] = diag.energy;
            d["enstrophy"] = diag.enstrophy;
            d["omega"] = numpy_from_scalar(s.omega);
            return d;
        },
        py::arg("omega0"), py::arg("nu"), py::arg("t_end"), py::arg("dt"),
        py::arg("record_every") = 1,
        "Vorticity-form 2D (Navier-)Stokes run with recorded diagnostics.");

    m.def(
        "nse_energy_residual",
        [](const std::vector<double>& times, const std::vector<double>& energy,
           const std::vector<double>& enstrophy, double nu) {
            FlowDiagnostics d;
            d.times = times;
            d.energy = energy;
            d.enstrophy = enstrophy;
            return nse_energy_balance(d, nu);
        },
        py::arg("times"), py::arg("energy"), py::arg("enstrophy"), py::arg("nu"),
        "Relative energy-balance residual |E(T) + nu int Z - E(0)| / E(0).");

    m.def(
        "velocity_from_vorticity",
        [](const DoubleArray& omega) {
            ScalarField w = scalar_from_numpy(omega);
            return numpy_from_vector(velocity_from_vorticity(w));
        },
        py::arg("omega"), "Biot-Savart velocity u = grad^perp psi on the torus.");

    // --------------------------------------------------------------- boundary
    m.def(
        "boundary_flux",
        [](const DoubleArray& u1, const DoubleArray& u2, const DoubleArray& p, double len1,
           const std::vector<double>& deltas) {
            if (u1.ndim() != 2) throw std::invalid_argument("channel fields must be 2D");
            ChannelDomain dom;
            dom.n1 = int(u1.shape(0));
            dom.n2 = int(u1.shape(1));
            dom.len1 = len1;
            dom.validate();
            if (u2.ndim() != 2 || p.ndim() != 2 || u2.shape(0) != u1.shape(0) ||
                p.shape(0) != u1.shape(0) || u2.shape(1) != u1.shape(1) ||
                p.shape(1) != u1.shape(1))
                throw std::invalid_argument("u1, u2, p must share one shape");
            ChannelField f;
            f.dom = dom;
            const std::size_t total = std::size_t(dom.n1) * dom.n2;
            f.u1.assign(u1.data(), u1.data() + total);
            f.u2.assign(u2.data(), u2.data() + total);
            f.p.assign(p.data(), p.data() + total);

            py::list integrals, bounds;
            for (double d : deltas) {
                FluxIntegral fi = boundary_flux_integral(f, d);
                integrals.append(fi.integral);
                bounds.append(fi.upper_bound);
            }
            GlobalVerdict v = global_from_local(f, deltas);
            py::dict d;
            d["integrals"] = integrals;
            d["upper_bounds"] = bounds;
            d["conserved"] = v.conserved;
            d["rate"] = v.rate;
            d["fit_quality"] = v.fit_quality;
            d["limit_estimate"] = v.limit_estimate;
            return d;
        },
        py::arg("u1"), py::arg("u2"), py::arg("p"), py::arg("len1"), py::arg("deltas"),
        "Boundary-cutoff flux ladder and the vanishing-limit verdict.");

    // ---------------------------------------------------------------- convexint
    m.def(
        "kc_project",
        [](const DoubleArray& U, double C) {
            KcProjection kp = kc_project(triple_from_numpy(U), C);
            py::dict d;
            d["dist"] = kp.dist;
            d["rho"] = kp.rho;
            d["u"] = kp.u;
            return d;
        },
        py::arg("U"), py::arg("C"), "Nearest-point search over the constraint manifold K_C.");

    m.def(
        "geom1_decompose",
        [](std::array<double, 3> w) {
            double c_used = 0.0;
            Laminate lam = geom1_decompose(w, &c_used);
            StateTriple target = StateTriple::from_rows({0, 0, 0}, {0, 0, 0}, w);
            py::dict d = laminate_dict(lam);
            d["C_used"] = c_used;
            d["barycenter_error"] = distance(lam.barycenter(), target);
            return d;
        },
        py::arg("w"), "Explicit three-leaf laminate for the state (0, 0, w), |w| >= 1.");

    m.def(
        "geom2_decompose",
        [](const DoubleArray& U, double C, double eps_budget) {
            Geom2Result res = geom2_decompose(triple_from_numpy(U), C, eps_budget);
            py::dict d;
            d["accepted"] = res.accepted;
            d["reason"] = res.reason;
            d["dist_to_K"] = res.dist_to_K;
            d["spread"] = res.spread;
            d["h_bound"] = res.h_bound;
            if (res.accepted) d["laminate"] = laminate_dict(res.laminate);
            return d;
        },
        py::arg("U"), py::arg("C"), py::arg("eps_budget"),
        "Constructive laminate splitting with the sqrt spread bound.");

    m.def(
        "ci_run",
        [](const DoubleArray& w0, int stages) {
            VectorField w = vector_from_numpy(w0);
            CiResult res = ci_iterate(w, default_ci_schedule(stages));
            py::list reports;
            for (const CiStageReport& r : res.reports) {
                py::dict rd;
                rd["stage"] = r.stage;
                rd["C"] = r.C;
                rd["mean_dist"] = r.mean_dist;
                rd["max_dist"] = r.max_dist;
                rd["weak_div_u"] = r.weak_div_u;
                rd["weak_div_m"] = r.weak_div_m;
                rd["renorm_gap"] = r.renorm_gap;
                rd["renorm_gap_bound"] = r.renorm_gap_bound;
                rd["h_integral"] = r.h_integral;
                rd["delta"] = r.delta;
                rd["accepted"] = r.accepted;
                reports.append(rd);
            }
            py::dict d;
            d["completed"] = res.completed;
            d["message"] = res.message;
            d["reports"] = reports;
            d["f"] = numpy_from_scalar(res.f);
            return d;
        },
        py::arg("w0"), py::arg("stages") = 1,
        "Staged convex-integration iteration from the initial w row (3, n, n, n).");

    // ---------------------------------------------------------------- snapshots
    m.def(
        "write_snapshot",
        [](const std::string& path, const DoubleArray& field, const std::string& name,
           bool vector) {
            if (vector)
                write_snapshot(path, snapshot_of(vector_from_numpy(field), name));
            else
                write_snapshot(path, snapshot_of(scalar_from_numpy(field), name));
        },
        py::arg("path"), py::arg("field"), py::arg("name") = "field",
        py::arg("vector") = false,
        "Write a scalar (n0[, n1[, n2]]) or vector (dim, ...) snapshot file.");

    m.def(
        "read_snapshot",
        [](const std::string& path) {
            Snapshot s = read_snapshot(path);
            py::dict d;
            d["name"] = s.name;
            d["rank"] = s.rank;
            if (s.rank == 0)
                d["field"] = numpy_from_scalar(scalar_from_snapshot(s));
            else if (s.rank == 1)
                d["field"] = numpy_from_vector(vector_from_snapshot(s));
            else
                throw std::invalid_argument("matrix snapshots are not exposed here");
            return d;
        },
        py::arg("path"), "Read a snapshot file back into numpy.");
}
