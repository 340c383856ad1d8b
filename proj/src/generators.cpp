#include "conslab/generators.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace conslab {

FieldKind parse_field_kind(const std::string& name) {
    if (name == "constant") return FieldKind::Constant;
    if (name == "fourier-mode") return FieldKind::FourierMode;
    if (name == "shear") return FieldKind::Shear;
    if (name == "taylor-green") return FieldKind::TaylorGreen;
    if (name == "weierstrass") return FieldKind::Weierstrass;
    if (name == "boundary-layer") return FieldKind::BoundaryLayer;
    if (name == "custom-table") return FieldKind::CustomTable;
    throw std::invalid_argument("unknown field kind '" + name +
                                "' (expected one of: constant, fourier-mode, shear, "
                                "taylor-green, weierstrass, boundary-layer, custom-table)");
}

std::string field_kind_name(FieldKind k) {
    switch (k) {
        case FieldKind::Constant: return "constant";
        case FieldKind::FourierMode: return "fourier-mode";
        case FieldKind::Shear: return "shear";
        case FieldKind::TaylorGreen: return "taylor-green";
        case FieldKind::Weierstrass: return "weierstrass";
        case FieldKind::BoundaryLayer: return "boundary-layer";
        case FieldKind::CustomTable: return "custom-table";
    }
    return "?";
}

std::vector<double> weierstrass_phases(std::uint64_t seed, int octaves) {
    // mt19937_64 output mapped through the top 53 bits; identical on any
    // conforming platform, so fields are bitwise reproducible everywhere.
    std::mt19937_64 gen(seed);
    std::vector<double> phases(octaves);
    for (int k = 0; k < octaves; ++k) {
        const double u = std::ldexp(double(gen() >> 11), -53);  // [0,1)
        phases[k] = 2.0 * M_PI * u;
    }
    return phases;
}

namespace {

void check_weierstrass_resolution(const FieldSpec& s, const PeriodicGrid& g) {
    if (!(s.alpha > 0.0 && s.alpha < 1.0))
        throw std::invalid_argument("weierstrass: alpha must lie in (0,1)");
    if (s.octaves < 1 || s.octaves > 40)
        throw std::invalid_argument("weierstrass: octaves must lie in [1,40]");
    for (int a = 0; a < g.dim; ++a) {
        const long kmax = (1L << s.octaves) * std::labs(s.direction[a]);
        if (kmax > g.n[a] / 4)
            throw std::invalid_argument(
                "weierstrass: top octave unresolved on axis " + std::to_string(a) +
                " (2^octaves * |e| = " + std::to_string(kmax) + " > n/4 = " +
                std::to_string(g.n[a] / 4) + "); lower octaves or refine the grid");
    }
}

double weierstrass_value(const FieldSpec& s, const std::vector<double>& phases, double arg) {
    double acc = 0.0;
    for (int k = 1; k <= s.octaves; ++k) {
        const double amp = std::pow(2.0, -s.alpha * k);
        acc += amp * std::cos(2.0 * M_PI * std::ldexp(arg, k) + phases[k - 1] + s.phase_offset);
    }
    return s.amplitude * acc;
}

template <typename F>
void for_each_point(const PeriodicGrid& g, F&& f) {
    std::size_t idx = 0;
    for (int i = 0; i < g.n[0]; ++i)
        for (int j = 0; j < g.n[1]; ++j)
            for (int k = 0; k < g.n[2]; ++k, ++idx) {
                const double x0 = g.coord(0, i);
                const double x1 = g.dim > 1 ? g.coord(1, j) : 0.0;
                const double x2 = g.dim > 2 ? g.coord(2, k) : 0.0;
                f(idx, x0, x1, x2);
            }
}

}  // namespace

ScalarField sample_scalar(const FieldSpec& spec, const PeriodicGrid& grid) {
    grid.validate();
    ScalarField out(grid);

    switch (spec.kind) {
        case FieldKind::Constant: {
            for (auto& x : out.v) x = spec.value;
            break;
        }
        case FieldKind::FourierMode: {
            for_each_point(grid, [&](std::size_t idx, double x0, double x1, double x2) {
                const double arg = 2.0 * M_PI *
                                       (spec.wavevector[0] * x0 / grid.len[0] +
                                        (grid.dim > 1 ? spec.wavevector[1] * x1 / grid.len[1] : 0.0) +
                                        (grid.dim > 2 ? spec.wavevector[2] * x2 / grid.len[2] : 0.0)) +
                                   spec.phase;
                out.v[idx] = spec.amplitude * (spec.use_cos ? std::cos(arg) : std::sin(arg));
            });
            break;
        }
        case FieldKind::Weierstrass: {
            check_weierstrass_resolution(spec, grid);
            std::vector<double> phases;
            if (spec.phase_mode == PhaseMode::Seeded)
                phases = weierstrass_phases(spec.seed, spec.octaves);
            else
                phases.assign(spec.octaves, 0.0);
            for_each_point(grid, [&](std::size_t idx, double x0, double x1, double x2) {
                const double arg = spec.direction[0] * x0 / grid.len[0] +
                                   (grid.dim > 1 ? spec.direction[1] * x1 / grid.len[1] : 0.0) +
                                   (grid.dim > 2 ? spec.direction[2] * x2 / grid.len[2] : 0.0);
                out.v[idx] = weierstrass_value(spec, phases, arg);
            });
            break;
        }
        case FieldKind::CustomTable: {
            if (spec.table.size() != grid.total())
                throw std::invalid_argument("custom-table: sample count " +
                                            std::to_string(spec.table.size()) +
                                            " does not match grid size " +
                                            std::to_string(grid.total()));
            out.v = spec.table;
            break;
        }
        default:
            throw std::invalid_argument("sample_scalar: kind '" + field_kind_name(spec.kind) +
                                        "' produces a vector field; use sample_vector");
    }
    out.check_finite("sample_scalar");
    return out;
}

VectorField sample_vector(const FieldSpec& spec, const PeriodicGrid& grid) {
    grid.validate();
    VectorField out(grid);

    switch (spec.kind) {
        case FieldKind::Shear: {
            // u = (g(x_perp), 0, ...) along axis `component`, varying in the
            // next axis; divergence-free by construction.
            if (grid.dim < 2) throw std::invalid_argument("shear: requires dim >= 2");
            const int a = spec.component;
            if (a < 0 || a >= grid.dim) throw std::invalid_argument("shear: bad component");
            const int b = (a + 1) % grid.dim;
            for_each_point(grid, [&](std::size_t idx, double x0, double x1, double x2) {
                const double xb = b == 0 ? x0 : b == 1 ? x1 : x2;
                out[a].v[idx] = spec.amplitude *
                                std::sin(2.0 * M_PI * spec.shear_mode * xb / grid.len[b] + spec.phase);
            });
            break;
        }
        case FieldKind::TaylorGreen: {
            if (grid.dim != 2) throw std::invalid_argument("taylor-green: requires dim == 2");
            for_each_point(grid, [&](std::size_t idx, double x0, double x1, double) {
                const double cx = 2.0 * M_PI * x0 / grid.len[0];
                const double cy = 2.0 * M_PI * x1 / grid.len[1];
                out[0].v[idx] = spec.amplitude * std::sin(cx) * std::cos(cy);
                out[1].v[idx] = -spec.amplitude * std::cos(cx) * std::sin(cy);
            });
            break;
        }
        case FieldKind::BoundaryLayer: {
            // Tangential layer profile u = (tanh(x2/w) * tanh((L2-x2)/w), 0, ...):
            // vanishes at x2 = 0 and x2 = L2, flat in the interior.
            if (grid.dim < 2) throw std::invalid_argument("boundary-layer: requires dim >= 2");
            if (!(spec.layer_width > 0.0))
                throw std::invalid_argument("boundary-layer: layer_width must be positive");
            for_each_point(grid, [&](std::size_t idx, double, double x1, double) {
                out[0].v[idx] = spec.amplitude * std::tanh(x1 / spec.layer_width) *
                                std::tanh((grid.len[1] - x1) / spec.layer_width);
            });
            break;
        }
        case FieldKind::Constant:
        case FieldKind::FourierMode:
        case FieldKind::Weierstrass: {
            // Scalar kinds lift to vectors by filling the requested component.
            const int a = spec.component;
            if (a < 0 || a >= grid.dim)
                throw std::invalid_argument("sample_vector: bad component for scalar kind");
            out[a] = sample_scalar(spec, grid);
            break;
        }
        default:
            throw std::invalid_argument("sample_vector: unsupported kind '" +
                                        field_kind_name(spec.kind) + "'");
    }
    for (int a = 0; a < grid.dim; ++a) out[a].check_finite("sample_vector");
    return out;
}

}  // namespace conslab
