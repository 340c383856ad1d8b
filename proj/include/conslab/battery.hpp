#pragma once

// Deterministic battery of nonnegative smooth compactly supported test
// functions: tensor-product bump profiles at 3 scales x 5 centers. Used
// wherever a weak pairing must be checked against "all" test functions.

#include <string>
#include <vector>

#include "conslab/grid.hpp"

namespace conslab {

struct TestFunction {
    std::string id;
    ScalarField phi;
    double grad_sup = 0.0;  // max_x |grad phi| (analytic, for pairing bounds)
};

// phi(x) = exp(-1 / (1 - |x - c|^2 / r^2)) on |x - c| < r (minimum image).
ScalarField radial_bump(const PeriodicGrid& grid, const std::array<double, 3>& center, double r);

// phi(x) = prod_a exp(-1 / (1 - (x_a - c_a)^2 / r^2)) (minimum image per axis).
ScalarField tensor_bump(const PeriodicGrid& grid, const std::array<double, 3>& center, double r);

std::vector<TestFunction> test_function_battery(const PeriodicGrid& grid);

}  // namespace conslab
