#include "conslab/battery.hpp"

#include <cmath>

namespace conslab {

namespace {

double bump_profile(double s2) {
    if (s2 >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - s2));
}

double min_image(double z, double len) { return z - len * std::round(z / len); }

// max over s in (0,1) of |d/ds exp(-1/(1-s^2))|: the derivative
// f(s) * 2s / (1-s^2)^2 peaks near s ~ 0.76 at ~ 0.7985; a slightly
// generous constant keeps every bound built on it valid.
constexpr double kProfileDerivSup = 0.85;
constexpr double kProfileSup = 0.36787944117144233;  // exp(-1)

}  // namespace

ScalarField radial_bump(const PeriodicGrid& grid, const std::array<double, 3>& center, double r) {
    ScalarField out(grid);
    std::size_t idx = 0;
    for (int i = 0; i < grid.n[0]; ++i)
        for (int j = 0; j < grid.n[1]; ++j)
            for (int k = 0; k < grid.n[2]; ++k, ++idx) {
                double r2 = 0.0;
                const int iv[3] = {i, j, k};
                for (int a = 0; a < grid.dim; ++a) {
                    const double z = min_image(grid.coord(a, iv[a]) - center[a], grid.len[a]);
                    r2 += z * z;
                }
                out.v[idx] = bump_profile(r2 / (r * r));
            }
    return out;
}

ScalarField tensor_bump(const PeriodicGrid& grid, const std::array<double, 3>& center, double r) {
    ScalarField out(grid);
    std::size_t idx = 0;
    for (int i = 0; i < grid.n[0]; ++i)
        for (int j = 0; j < grid.n[1]; ++j)
            for (int k = 0; k < grid.n[2]; ++k, ++idx) {
                double val = 1.0;
                const int iv[3] = {i, j, k};
                for (int a = 0; a < grid.dim; ++a) {
                    const double z = min_image(grid.coord(a, iv[a]) - center[a], grid.len[a]);
                    val *= bump_profile(z * z / (r * r));
                }
                out.v[idx] = val;
            }
    return out;
}

std::vector<TestFunction> test_function_battery(const PeriodicGrid& grid) {
    std::vector<TestFunction> out;
    const double scales[3] = {0.12, 0.20, 0.32};

    // Five deterministic centers (fractions of each axis length).
    const double offs[5][3] = {
        {0.50, 0.50, 0.50},
        {0.25, 0.50, 0.50},
        {0.50, 0.75, 0.50},
        {0.75, 0.25, 0.50},
        {0.50, 0.50, 0.25},
    };

    // |d_a phi| <= (sup|p'| / r) * (sup p)^(dim-1), so |grad phi| <=
    // sqrt(dim) times that; the constants are analytic, not fitted.
    const double per_axis = kProfileDerivSup * std::pow(kProfileSup, grid.dim - 1);
    const double grad_bound = std::sqrt(double(grid.dim)) * per_axis;

    for (int s = 0; s < 3; ++s)
        for (int c = 0; c < 5; ++c) {
            std::array<double, 3> center{};
            for (int a = 0; a < 3; ++a) center[a] = offs[c][a] * grid.len[a];
            const double r = scales[s] * grid.len[0];
            TestFunction tf;
            tf.id = "bump_s" + std::to_string(s) + "_c" + std::to_string(c);
            tf.phi = tensor_bump(grid, center, r);
            tf.grad_sup = grad_bound / r;
            out.push_back(std::move(tf));
        }
    return out;
}

}  // namespace conslab
