#include "conslab/spectral.hpp"

#include <fftw3.h>

#include <array>
#include <cmath>
#include <cstring>
#include <map>
#include <mutex>
#include <stdexcept>

namespace conslab {

namespace {

// FFTW's planner is not thread-safe; execution of an existing plan is.
// Plans are created under a global mutex with FFTW_ESTIMATE (cheap, and
// independent of measured timings, so results are reproducible run to run).
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

// Plans are cached per (geometry, sign) for the process lifetime and
// re-applied to fresh buffers with the new-array execute interface; all
// buffers come from fftw_malloc, so the alignment the plan was built for
// always holds.
void run_c2c(const PeriodicGrid& g, fftw_complex* in, fftw_complex* out, int sign) {
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        static std::map<std::array<int, 5>, fftw_plan> cache;
        const std::array<int, 5> key{g.dim, g.n[0], g.n[1], g.n[2], sign};
        auto it = cache.find(key);
        if (it == cache.end()) {
            switch (g.dim) {
                case 1:
                    plan = fftw_plan_dft_1d(g.n[0], in, out, sign, FFTW_ESTIMATE);
                    break;
                case 2:
                    plan = fftw_plan_dft_2d(g.n[0], g.n[1], in, out, sign, FFTW_ESTIMATE);
                    break;
                default:
                    plan = fftw_plan_dft_3d(g.n[0], g.n[1], g.n[2], in, out, sign,
                                            FFTW_ESTIMATE);
                    break;
            }
            if (!plan) throw std::runtime_error("spectral: FFTW plan creation failed");
            cache.emplace(key, plan);
        } else {
            plan = it->second;
        }
    }
    fftw_execute_dft(plan, in, out);
}

struct FftwBuffer {
    fftw_complex* p = nullptr;
    explicit FftwBuffer(std::size_t n) {
        p = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
        if (!p) throw std::bad_alloc();
    }
    ~FftwBuffer() { fftw_free(p); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
};

struct FftwRealBuffer {
    double* p = nullptr;
    explicit FftwRealBuffer(std::size_t n) {
        p = static_cast<double*>(fftw_malloc(sizeof(double) * n));
        if (!p) throw std::bad_alloc();
    }
    ~FftwRealBuffer() { fftw_free(p); }
    FftwRealBuffer(const FftwRealBuffer&) = delete;
    FftwRealBuffer& operator=(const FftwRealBuffer&) = delete;
};

// Half-spectrum length of the real transforms: the last active axis is
// truncated to n/2 + 1 columns.
std::size_t half_total(const PeriodicGrid& g) {
    std::size_t h = std::size_t(g.n[g.dim - 1]) / 2 + 1;
    for (int a = 0; a < g.dim - 1; ++a) h *= std::size_t(g.n[a]);
    return h;
}

// Real-data transforms (r2c forward, c2r inverse) cached like the complex
// ones; kind 1 = r2c, kind 2 = c2r.
fftw_plan real_plan(const PeriodicGrid& g, int kind, double* re, fftw_complex* co) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    static std::map<std::array<int, 5>, fftw_plan> cache;
    const std::array<int, 5> key{kind, g.dim, g.n[0], g.n[1], g.n[2]};
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    fftw_plan plan = nullptr;
    if (kind == 1) {
        switch (g.dim) {
            case 1: plan = fftw_plan_dft_r2c_1d(g.n[0], re, co, FFTW_ESTIMATE); break;
            case 2: plan = fftw_plan_dft_r2c_2d(g.n[0], g.n[1], re, co, FFTW_ESTIMATE); break;
            default:
                plan = fftw_plan_dft_r2c_3d(g.n[0], g.n[1], g.n[2], re, co, FFTW_ESTIMATE);
                break;
        }
    } else {
        switch (g.dim) {
            case 1: plan = fftw_plan_dft_c2r_1d(g.n[0], co, re, FFTW_ESTIMATE); break;
            case 2: plan = fftw_plan_dft_c2r_2d(g.n[0], g.n[1], co, re, FFTW_ESTIMATE); break;
            default:
                plan = fftw_plan_dft_c2r_3d(g.n[0], g.n[1], g.n[2], co, re, FFTW_ESTIMATE);
                break;
        }
    }
    if (!plan) throw std::runtime_error("spectral: FFTW plan creation failed");
    cache.emplace(key, plan);
    return plan;
}

}  // namespace

cvec fft_forward(const PeriodicGrid& g, const std::vector<double>& data) {
    const std::size_t n = g.total();
    if (data.size() != n) throw std::invalid_argument("fft_forward: size mismatch");
    const std::size_t h = half_total(g);
    FftwRealBuffer in(n);
    FftwBuffer out(h);
    std::copy(data.begin(), data.end(), in.p);
    fftw_execute_dft_r2c(real_plan(g, 1, in.p, out.p), in.p, out.p);

    // Expand the half spectrum to the full grid through Hermitian symmetry:
    // X(n - k) = conj(X(k)), with the mirror taken per axis.
    cvec spec(n);
    const int last = g.dim - 1;
    const int ncols = g.n[last] / 2 + 1;
    std::size_t idx = 0;
    for (int i = 0; i < g.n[0]; ++i)
        for (int j = 0; j < g.n[1]; ++j)
            for (int k = 0; k < g.n[2]; ++k, ++idx) {
                const int kl = last == 0 ? i : last == 1 ? j : k;
                if (kl < ncols) {
                    std::size_t hidx;
                    if (last == 0)
                        hidx = std::size_t(i);
                    else if (last == 1)
                        hidx = std::size_t(i) * ncols + j;
                    else
                        hidx = (std::size_t(i) * g.n[1] + j) * ncols + k;
                    spec[idx] = {out.p[hidx][0], out.p[hidx][1]};
                } else {
                    const int mi = i == 0 ? 0 : g.n[0] - i;
                    const int mj = j == 0 ? 0 : g.n[1] - j;
                    const int mk = k == 0 ? 0 : g.n[2] - k;
                    std::size_t hidx;
                    if (last == 0)
                        hidx = std::size_t(mi);
                    else if (last == 1)
                        hidx = std::size_t(mi) * ncols + mj;
                    else
                        hidx = (std::size_t(mi) * g.n[1] + mj) * ncols + mk;
                    spec[idx] = {out.p[hidx][0], -out.p[hidx][1]};
                }
            }
    return spec;
}

cvec fft_inverse(const PeriodicGrid& g, const cvec& spec) {
    const std::size_t n = g.total();
    if (spec.size() != n) throw std::invalid_argument("fft_inverse: size mismatch");
    FftwBuffer in(n), out(n);
    for (std::size_t i = 0; i < n; ++i) {
        in.p[i][0] = spec[i].real();
        in.p[i][1] = spec[i].imag();
    }
    run_c2c(g, in.p, out.p, FFTW_BACKWARD);
    cvec res(n);
    const double scale = 1.0 / double(n);
    for (std::size_t i = 0; i < n; ++i) res[i] = {out.p[i][0] * scale, out.p[i][1] * scale};
    return res;
}

std::vector<double> fft_inverse_real(const PeriodicGrid& g, const cvec& spec) {
    const std::size_t n = g.total();
    if (spec.size() != n) throw std::invalid_argument("fft_inverse_real: size mismatch");
    const std::size_t h = half_total(g);
    FftwBuffer in(h);
    FftwRealBuffer out(n);

    // Collapse the full spectrum to the non-redundant half read by the c2r
    // transform. Every producer in this module keeps Hermitian symmetry
    // exactly, so dropping the mirrored half loses nothing.
    const int last = g.dim - 1;
    const int ncols = g.n[last] / 2 + 1;
    std::size_t idx = 0, hidx = 0;
    for (int i = 0; i < g.n[0]; ++i)
        for (int j = 0; j < g.n[1]; ++j)
            for (int k = 0; k < g.n[2]; ++k, ++idx) {
                const int kl = last == 0 ? i : last == 1 ? j : k;
                if (kl >= ncols) continue;
                in.p[hidx][0] = spec[idx].real();
                in.p[hidx][1] = spec[idx].imag();
                ++hidx;
            }
    fftw_execute_dft_c2r(real_plan(g, 2, out.p, in.p), in.p, out.p);

    std::vector<double> res(n);
    const double scale = 1.0 / double(n);
    for (std::size_t i = 0; i < n; ++i) res[i] = out.p[i] * scale;
    return res;
}

namespace {

// Applies spec[idx] *= i*kappa_axis, zeroing the Nyquist plane.
void apply_derivative_symbol(const PeriodicGrid& g, cvec& spec, int axis) {
    std::size_t idx = 0;
    for (int i = 0; i < g.n[0]; ++i)
        for (int j = 0; j < g.n[1]; ++j)
            for (int k = 0; k < g.n[2]; ++k, ++idx) {
                const int ia = axis == 0 ? i : axis == 1 ? j : k;
                if (is_nyquist(g, axis, ia)) {
                    spec[idx] = 0.0;
                    continue;
                }
                const double kap = wavenumber(g, axis, ia);
                spec[idx] *= std::complex<double>(0.0, kap);
            }
}

}  // namespace

ScalarField spectral_derivative(const ScalarField& f, int axis) {
    if (axis < 0 || axis >= f.grid.dim)
        throw std::invalid_argument("spectral_derivative: axis out of range");
    cvec spec = fft_forward(f.grid, f.v);
    apply_derivative_symbol(f.grid, spec, axis);
    ScalarField out(f.grid);
    out.v = fft_inverse_real(f.grid, spec);
    return out;
}

ScalarField divergence(const VectorField& u) {
    ScalarField out(u.grid);
    for (int a = 0; a < u.dim(); ++a) {
        ScalarField da = spectral_derivative(u[a], a);
        for (std::size_t i = 0; i < out.size(); ++i) out.v[i] += da.v[i];
    }
    return out;
}

VectorField gradient(const ScalarField& f) {
    VectorField out(f.grid);
    for (int a = 0; a < f.grid.dim; ++a) out[a] = spectral_derivative(f, a);
    return out;
}

VectorField curl(const VectorField& u) {
    if (u.dim() != 3) throw std::invalid_argument("curl: requires a dim-3 field");
    VectorField out(u.grid);
    // (curl u)_a = eps_{abc} d_b u_c
    ScalarField d1u2 = spectral_derivative(u[2], 1), d2u1 = spectral_derivative(u[1], 2);
    ScalarField d2u0 = spectral_derivative(u[0], 2), d0u2 = spectral_derivative(u[2], 0);
    ScalarField d0u1 = spectral_derivative(u[1], 0), d1u0 = spectral_derivative(u[0], 1);
    for (std::size_t i = 0; i < out[0].size(); ++i) {
        out[0].v[i] = d1u2.v[i] - d2u1.v[i];
        out[1].v[i] = d2u0.v[i] - d0u2.v[i];
        out[2].v[i] = d0u1.v[i] - d1u0.v[i];
    }
    return out;
}

VectorField vector_potential(const VectorField& u, std::array<double, 3>* mean_out) {
    if (u.dim() != 3) throw std::invalid_argument("vector_potential: requires a dim-3 field");
    const PeriodicGrid& g = u.grid;

    ScalarField div = divergence(u);
    double unorm = lp_norm(u, 2.0);
    double dnorm = l2_norm(div);
    if (dnorm > 1e-8 * (1.0 + unorm))
        throw std::runtime_error("vector_potential: field is not divergence-free (||div u||_2 = " +
                                 std::to_string(dnorm) + ")");

    std::array<cvec, 3> uh;
    for (int a = 0; a < 3; ++a) uh[a] = fft_forward(g, u[a].v);

    std::array<double, 3> mean{0, 0, 0};
    const double ntot = double(g.total());
    for (int a = 0; a < 3; ++a) mean[a] = uh[a][0].real() / ntot;
    if (mean_out) *mean_out = mean;

    // Psi_hat = i kappa x u_hat / |kappa|^2, zero mode dropped. Nyquist
    // planes are zeroed so the later curl (which zeroes them too) closes
    // the round trip exactly.
    std::array<cvec, 3> ph;
    for (int a = 0; a < 3; ++a) ph[a].assign(g.total(), {0.0, 0.0});
    std::size_t idx = 0;
    for (int i = 0; i < g.n[0]; ++i)
        for (int j = 0; j < g.n[1]; ++j)
            for (int k = 0; k < g.n[2]; ++k, ++idx) {
                if (is_nyquist(g, 0, i) || is_nyquist(g, 1, j) || is_nyquist(g, 2, k)) continue;
                const double k0 = wavenumber(g, 0, i);
                const double k1 = wavenumber(g, 1, j);
                const double k2 = wavenumber(g, 2, k);
                const double k2n = k0 * k0 + k1 * k1 + k2 * k2;
                if (k2n == 0.0) continue;
                const std::complex<double> I(0.0, 1.0);
                ph[0][idx] = I * (k1 * uh[2][idx] - k2 * uh[1][idx]) / k2n;
                ph[1][idx] = I * (k2 * uh[0][idx] - k0 * uh[2][idx]) / k2n;
                ph[2][idx] = I * (k0 * uh[1][idx] - k1 * uh[0][idx]) / k2n;
            }

    VectorField psi(g);
    for (int a = 0; a < 3; ++a) psi[a].v = fft_inverse_real(g, ph[a]);
    return psi;
}

VectorField leray_project(const VectorField& u) {
    const PeriodicGrid& g = u.grid;
    const int d = u.dim();
    std::vector<cvec> uh(d);
    for (int a = 0; a < d; ++a) uh[a] = fft_forward(g, u[a].v);

    std::size_t idx = 0;
    for (int i = 0; i < g.n[0]; ++i)
        for (int j = 0; j < g.n[1]; ++j)
            for (int k = 0; k < g.n[2]; ++k, ++idx) {
                double kap[3] = {0, 0, 0};
                bool nyq = false;
                for (int a = 0; a < d; ++a) {
                    const int ia = a == 0 ? i : a == 1 ? j : k;
                    if (is_nyquist(g, a, ia)) nyq = true;
                    kap[a] = wavenumber(g, a, ia);
                }
                double k2n = 0.0;
                for (int a = 0; a < d; ++a) k2n += kap[a] * kap[a];
                if (k2n == 0.0) continue;  // mean preserved
                if (nyq) {
                    // Nyquist modes carry no well-signed derivative; project them out.
                    for (int a = 0; a < d; ++a) uh[a][idx] = 0.0;
                    continue;
                }
                std::complex<double> kdotu(0.0, 0.0);
                for (int a = 0; a < d; ++a) kdotu += kap[a] * uh[a][idx];
                for (int a = 0; a < d; ++a) uh[a][idx] -= kap[a] * kdotu / k2n;
            }

    VectorField out(g);
    for (int a = 0; a < d; ++a) out[a].v = fft_inverse_real(g, uh[a]);
    return out;
}

void dealias_twothirds(const PeriodicGrid& g, cvec& spec) {
    std::size_t idx = 0;
    for (int i = 0; i < g.n[0]; ++i)
        for (int j = 0; j < g.n[1]; ++j)
            for (int k = 0; k < g.n[2]; ++k, ++idx) {
                bool cut = false;
                for (int a = 0; a < g.dim; ++a) {
                    const int ia = a == 0 ? i : a == 1 ? j : k;
                    if (std::labs(signed_freq(g, a, ia)) > g.n[a] / 3) {
                        cut = true;
                        break;
                    }
                }
                if (cut) spec[idx] = 0.0;
            }
}

double integrate(const ScalarField& f) {
    double s = 0.0;
    for (double x : f.v) s += x;
    return s * f.grid.cell_volume();
}

double lp_norm(const ScalarField& f, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be >= 1");
    if (std::isinf(p)) {
        double m = 0.0;
        for (double x : f.v) m = std::max(m, std::abs(x));
        return m;
    }
    double s = 0.0;
    for (double x : f.v) s += std::pow(std::abs(x), p);
    return std::pow(s * f.grid.cell_volume(), 1.0 / p);
}

double lp_norm(const VectorField& u, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be >= 1");
    if (std::isinf(p)) {
        double m = 0.0;
        for (std::size_t i = 0; i < u[0].size(); ++i) {
            double m2 = 0.0;
            for (int a = 0; a < u.dim(); ++a) m2 += u[a].v[i] * u[a].v[i];
            m = std::max(m, m2);
        }
        return std::sqrt(m);
    }
    double s = 0.0;
    for (std::size_t i = 0; i < u[0].size(); ++i) {
        double m2 = 0.0;
        for (int a = 0; a < u.dim(); ++a) m2 += u[a].v[i] * u[a].v[i];
        s += std::pow(std::sqrt(m2), p);
    }
    return std::pow(s * u.grid.cell_volume(), 1.0 / p);
}

double l2_norm(const ScalarField& f) { return lp_norm(f, 2.0); }

}  // namespace conslab
