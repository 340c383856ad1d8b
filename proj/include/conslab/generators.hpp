#pragma once

// Deterministic analytic field generators. Every kind is reproducible
// from its parameters alone; randomness only enters through an explicit
// seed, and identical specs always produce identical samples.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "conslab/grid.hpp"

namespace conslab {

enum class FieldKind {
    Constant,
    FourierMode,
    Shear,
    TaylorGreen,
    Weierstrass,
    BoundaryLayer,
    CustomTable,
};

FieldKind parse_field_kind(const std::string& name);  // throws on unknown kind
std::string field_kind_name(FieldKind k);

enum class PhaseMode {
    Seeded,  // per-octave phases drawn deterministically from the seed
    Locked,  // all per-octave phases equal to phase_offset (fully coherent)
};

struct FieldSpec {
    FieldKind kind = FieldKind::Constant;

    double amplitude = 1.0;
    double value = 0.0;                 // Constant
    std::array<int, 3> wavevector{1, 0, 0};  // FourierMode (integer cycles per axis)
    double phase = 0.0;                 // FourierMode / Shear
    bool use_cos = false;               // FourierMode: sin by default
    int component = 0;                  // FourierMode vector sampling / Shear direction

    int shear_mode = 1;                 // Shear: profile sin(2*pi*m*x_perp + phase)

    // Weierstrass-type lacunary sum  sum_k 2^{-alpha k} cos(2 pi 2^k x.e + phi_k + offset)
    double alpha = 0.5;
    int octaves = 8;
    std::uint64_t seed = 0;
    std::array<int, 3> direction{1, 0, 0};
    double phase_offset = 0.0;
    PhaseMode phase_mode = PhaseMode::Seeded;

    double layer_width = 0.1;           // BoundaryLayer

    std::vector<double> table;          // CustomTable (row-major samples)
};

// Per-octave phases for the Weierstrass kind: uniform in [0, 2*pi),
// generated by a fixed, platform-independent recipe from the seed.
std::vector<double> weierstrass_phases(std::uint64_t seed, int octaves);

ScalarField sample_scalar(const FieldSpec& spec, const PeriodicGrid& grid);
VectorField sample_vector(const FieldSpec& spec, const PeriodicGrid& grid);

}  // namespace conslab
