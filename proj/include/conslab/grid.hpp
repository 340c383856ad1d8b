#pragma once

// Periodic sampled fields on the d-dimensional torus, d in {1,2,3}.
// Row-major storage, axis 0 slowest. All field types are plain value
// types: cheap to copy semantics-wise, immutable by convention once
// produced by an operation.

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace conslab {

struct PeriodicGrid {
    int dim = 1;
    std::array<int, 3> n{1, 1, 1};          // points per axis (power of two, >= 8)
    std::array<double, 3> len{1.0, 1.0, 1.0};  // axis lengths

    static bool power_of_two(int v) { return v >= 1 && (v & (v - 1)) == 0; }

    void validate() const {
        if (dim < 1 || dim > 3)
            throw std::invalid_argument("PeriodicGrid: dim must be 1, 2 or 3");
        for (int a = 0; a < dim; ++a) {
            if (n[a] < 8 || !power_of_two(n[a]))
                throw std::invalid_argument(
                    "PeriodicGrid: points_per_axis must be a power of two >= 8 (axis " +
                    std::to_string(a) + " has " + std::to_string(n[a]) + ")");
            if (!(len[a] > 0.0))
                throw std::invalid_argument("PeriodicGrid: axis_length must be positive");
        }
        for (int a = dim; a < 3; ++a) {
            if (n[a] != 1)
                throw std::invalid_argument("PeriodicGrid: unused axes must have n = 1");
        }
    }

    std::size_t total() const {
        return std::size_t(n[0]) * std::size_t(n[1]) * std::size_t(n[2]);
    }
    double spacing(int axis) const { return len[axis] / n[axis]; }
    double max_spacing() const {
        double h = 0.0;
        for (int a = 0; a < dim; ++a) h = std::max(h, spacing(a));
        return h;
    }
    double cell_volume() const {
        double v = 1.0;
        for (int a = 0; a < dim; ++a) v *= spacing(a);
        return v;
    }
    double coord(int axis, int i) const { return len[axis] * double(i) / n[axis]; }
    int wrap(int axis, long i) const {
        long m = i % n[axis];
        return int(m < 0 ? m + n[axis] : m);
    }
    std::size_t index(int i, int j = 0, int k = 0) const {
        return (std::size_t(i) * n[1] + j) * n[2] + k;
    }

    bool operator==(const PeriodicGrid& o) const {
        return dim == o.dim && n == o.n && len == o.len;
    }
    bool operator!=(const PeriodicGrid& o) const { return !(*this == o); }
};

struct ScalarField {
    PeriodicGrid grid;
    std::vector<double> v;

    ScalarField() = default;
    explicit ScalarField(const PeriodicGrid& g, double fill = 0.0)
        : grid(g), v(g.total(), fill) {}

    double& at(int i, int j = 0, int k = 0) { return v[grid.index(i, j, k)]; }
    double at(int i, int j = 0, int k = 0) const { return v[grid.index(i, j, k)]; }
    std::size_t size() const { return v.size(); }

    void check_finite(const char* what = "ScalarField") const {
        for (double x : v)
            if (!std::isfinite(x)) throw std::runtime_error(std::string(what) + ": non-finite sample");
    }
};

struct VectorField {
    PeriodicGrid grid;
    std::vector<ScalarField> comp;  // one ScalarField per dimension

    VectorField() = default;
    explicit VectorField(const PeriodicGrid& g) : grid(g) {
        comp.reserve(g.dim);
        for (int a = 0; a < g.dim; ++a) comp.emplace_back(g);
    }

    int dim() const { return grid.dim; }
    ScalarField& operator[](int a) { return comp[a]; }
    const ScalarField& operator[](int a) const { return comp[a]; }
};

// dim-3 matrix field whose rows are the three vector fields (m, u, w).
struct MatrixField {
    PeriodicGrid grid;
    std::array<VectorField, 3> row;  // row 0 = m, row 1 = u, row 2 = w

    MatrixField() = default;
    explicit MatrixField(const PeriodicGrid& g) : grid(g) {
        if (g.dim != 3) throw std::invalid_argument("MatrixField requires a dim-3 grid");
        row = {VectorField(g), VectorField(g), VectorField(g)};
    }
};

inline void require_same_grid(const PeriodicGrid& a, const PeriodicGrid& b, const char* where) {
    if (a != b) throw std::invalid_argument(std::string(where) + ": grid mismatch");
}

}  // namespace conslab
