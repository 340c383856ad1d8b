"""Numerical laboratory for conservation and dissipation of transported
quantities: mollification commutators and their scaling ladders, entropy
balances for Burgers, energy balances for 2D flows, boundary-cutoff
bookkeeping on a channel, and laminate constructions on the momentum /
velocity / weighted-momentum state system.

All fields cross the boundary as numpy ``float64`` arrays sampled on the
unit torus (scalars as ``(n0[, n1[, n2]])``, vectors with a leading
component axis).
"""

from ._core import (
    __version__,
    besov_functional,
    boundary_flux,
    burgers_exact_ramp,
    burgers_ramp_balance,
    burgers_ramp_run,
    cet_commutator,
    ci_run,
    dl_commutator,
    euler2d_run,
    euler_defect,
    fit_scaling,
    geom1_decompose,
    geom2_decompose,
    kc_project,
    mollify,
    nse_energy_residual,
    pressure_commutators,
    radial_bump,
    read_snapshot,
    renormalisation_defect,
    taylor_gap,
    velocity_from_vorticity,
    weierstrass,
    write_snapshot,
)

__all__ = [
    "__version__",
    "besov_functional",
    "boundary_flux",
    "burgers_exact_ramp",
    "burgers_ramp_balance",
    "burgers_ramp_run",
    "cet_commutator",
    "ci_run",
    "dl_commutator",
    "euler2d_run",
    "euler_defect",
    "fit_scaling",
    "geom1_decompose",
    "geom2_decompose",
    "kc_project",
    "mollify",
    "nse_energy_residual",
    "pressure_commutators",
    "radial_bump",
    "read_snapshot",
    "renormalisation_defect",
    "taylor_gap",
    "velocity_from_vorticity",
    "weierstrass",
    "write_snapshot",
]
