#include "conslab/mollify.hpp"

#include <cmath>
#include <stdexcept>

namespace conslab {

double MollifierKernel::mass() const {
    double s = 0.0;
    for (double x : samples) s += x;
    return s * grid.cell_volume();
}

MollifierKernel build_kernel(const PeriodicGrid& grid, double eps) {
    grid.validate();
    const double floor = 4.0 * grid.max_spacing();
    if (eps < floor)
        throw std::invalid_argument("build_kernel: eps = " + std::to_string(eps) +
                                    " below resolution floor 4*h = " + std::to_string(floor));
    for (int a = 0; a < grid.dim; ++a)
        if (!(eps < 0.5 * grid.len[a]))
            throw std::invalid_argument("build_kernel: eps must be < half the axis length");

    MollifierKernel k;
    k.grid = grid;
    k.eps = eps;
    k.samples.assign(grid.total(), 0.0);

    std::size_t idx = 0;
    double sum = 0.0;
    for (int i = 0; i < grid.n[0]; ++i)
        for (int j = 0; j < grid.n[1]; ++j)
            for (int kk = 0; kk < grid.n[2]; ++kk, ++idx) {
                double r2 = 0.0;
                const int iv[3] = {i, j, kk};
                for (int a = 0; a < grid.dim; ++a) {
                    double z = grid.coord(a, iv[a]);
                    if (z > 0.5 * grid.len[a]) z -= grid.len[a];  // minimum image
                    r2 += z * z;
                }
                const double s2 = r2 / (eps * eps);
                if (s2 < 1.0) {
                    k.samples[idx] = std::exp(-1.0 / (1.0 - s2));
                    sum += k.samples[idx];
                }
            }
    if (sum <= 0.0) throw std::runtime_error("build_kernel: empty kernel support");

    const double scale = 1.0 / (sum * grid.cell_volume());
    for (auto& x : k.samples) x *= scale;

    k.spectrum_times_cellvol = fft_forward(grid, k.samples);
    const double cv = grid.cell_volume();
    for (auto& c : k.spectrum_times_cellvol) c *= cv;
    return k;
}

ScalarField mollify(const ScalarField& f, const MollifierKernel& k) {
    require_same_grid(f.grid, k.grid, "mollify");
    cvec spec = fft_forward(f.grid, f.v);
    for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= k.spectrum_times_cellvol[i];
    ScalarField out(f.grid);
    out.v = fft_inverse_real(f.grid, spec);
    return out;
}

VectorField mollify(const VectorField& u, const MollifierKernel& k) {
    VectorField out(u.grid);
    for (int a = 0; a < u.dim(); ++a) out[a] = mollify(u[a], k);
    return out;
}

ScalarField shift_field(const ScalarField& f, const std::array<int, 3>& cells) {
    const PeriodicGrid& g = f.grid;
    ScalarField out(g);
    for (int i = 0; i < g.n[0]; ++i)
        for (int j = 0; j < g.n[1]; ++j)
            for (int k = 0; k < g.n[2]; ++k) {
                const int si = g.wrap(0, long(i) - cells[0]);
                const int sj = g.wrap(1, long(j) - (g.dim > 1 ? cells[1] : 0));
                const int sk = g.wrap(2, long(k) - (g.dim > 2 ? cells[2] : 0));
                out.at(i, j, k) = f.at(si, sj, sk);
            }
    return out;
}

ScalarField increment_field(const ScalarField& f, const std::array<int, 3>& cells) {
    ScalarField shifted = shift_field(f, cells);
    ScalarField out(f.grid);
    for (std::size_t i = 0; i < out.size(); ++i) out.v[i] = f.v[i] - shifted.v[i];
    return out;
}

EpsilonLadder make_ladder(const PeriodicGrid& grid, double eps0, int count, int min_rungs) {
    if (!(eps0 > 0.0) || count < 1)
        throw std::invalid_argument("make_ladder: need eps0 > 0 and count >= 1");
    const double floor = 4.0 * grid.max_spacing();
    EpsilonLadder lad;
    double e = eps0;
    for (int j = 0; j < count; ++j, e *= 0.5) {
        if (e < floor) break;
        lad.eps.push_back(e);
    }
    if (int(lad.eps.size()) < min_rungs)
        throw std::invalid_argument("make_ladder: only " + std::to_string(lad.eps.size()) +
                                    " rungs above the resolution floor " + std::to_string(floor) +
                                    "; refine the grid or raise eps0");
    return lad;
}

}  // namespace conslab
