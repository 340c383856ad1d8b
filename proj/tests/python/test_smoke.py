"""Smoke tests for the Python bindings: shapes, round trips, and a few
closed-form identities small enough to run in seconds."""

import math

import numpy as np
import pytest

import conslab


def unit_coords(n):
    return np.arange(n) / n


def test_version_string():
    assert conslab.__version__.count(".") == 2


def test_mollify_preserves_mean_and_smooths():
    x = unit_coords(256)
    f = np.sin(2 * np.pi * x) + 0.25
    g = conslab.mollify(f, 1.0 / 16)
    assert g.shape == f.shape
    assert abs(f.mean() - g.mean()) < 1e-12
    # Mollification damps the oscillation but keeps the constant part.
    assert np.abs(g - 0.25).max() < np.abs(f - 0.25).max()


def test_mollify_rejects_underresolved_kernel():
    with pytest.raises(Exception):
        conslab.mollify(np.zeros(64), 1.0 / 64)


def test_weierstrass_reproducible_and_rough():
    f1 = conslab.weierstrass(1024, alpha=0.5, octaves=8, seed=7)
    f2 = conslab.weierstrass(1024, alpha=0.5, octaves=8, seed=7)
    assert np.array_equal(f1, f2)
    b = conslab.besov_functional(f1, 2.0, 0.25, 1.0 / 64)
    assert b > 0.0


def test_dl_commutator_tracks_divergence():
    n = 512
    x = unit_coords(n)
    rho = 1.0 + 0.5 * np.sin(2 * np.pi * x + 0.7)
    u = np.sin(2 * np.pi * x)[None, :]
    res = conslab.dl_commutator(rho, u, 1.0 / 64)
    target = rho * 2 * np.pi * np.cos(2 * np.pi * x)
    err = np.abs(res["field"] - target).mean()
    assert err < 0.1
    assert res["l1"] > 0.0


def test_renormalisation_defect_vanishes_for_constant_density():
    n = 128
    x, y = np.meshgrid(unit_coords(n), unit_coords(n), indexing="ij")
    c = 2 * np.pi
    u = np.stack([np.sin(c * x) * np.cos(c * y), -np.cos(c * x) * np.sin(c * y)])
    rho = np.full((n, n), 1.3)
    d = conslab.renormalisation_defect(rho, u, 1.0 / 8)
    assert abs(d) < 1e-12


def test_taylor_gap_is_nonpositive():
    n = 128
    x = unit_coords(n)
    rho = 1.2 + 0.5 * np.sin(2 * np.pi * x)
    gap = conslab.taylor_gap(rho, 5.0 / 3.0, 1.0 / 16)
    assert gap.max() <= 1e-12


def test_fit_scaling_recovers_slope():
    eps = [2.0**-k for k in range(3, 9)]
    vals = [3.0 * e**0.7 for e in eps]
    rep = conslab.fit_scaling(eps, vals, predicted=0.7)
    assert abs(rep["fitted_exponent"] - 0.7) < 1e-10
    assert rep["fit_quality"] > 0.999999


def test_burgers_ramp_balance_matches_rankine_hugoniot():
    out = conslab.burgers_ramp_balance(1024, 2.0, 1.2, 2.0)
    assert abs(out["dissipation"] - 1.0 / 12.0) < 0.05 / 12.0
    assert abs(out["boundary_inflow"] - 1.0 / 3.0) < 1e-6


def test_burgers_run_matches_exact_profile():
    out = conslab.burgers_ramp_run(512, 0.5)
    exact = np.array([conslab.burgers_exact_ramp(x, 0.5) for x in out["x"]])
    assert np.abs(out["u"] - exact).mean() * (out["x"][1] - out["x"][0]) < 1e-4


def test_euler2d_taylor_green_energy():
    n = 64
    c = 2 * np.pi
    x, y = np.meshgrid(unit_coords(n), unit_coords(n), indexing="ij")
    omega0 = 2 * c * np.sin(c * x) * np.sin(c * y)
    out = conslab.euler2d_run(omega0, 0.0, 0.1, 1e-3, record_every=10)
    e = np.array(out["energy"])
    assert abs(e[0] - 0.25) < 1e-12
    assert np.abs(e - e[0]).max() / e[0] < 1e-9
    res = conslab.nse_energy_residual(out["times"], out["energy"], out["enstrophy"], 0.0)
    assert res < 1e-9


def test_boundary_flux_shear_is_conserved():
    n1, n2 = 16, 256
    x = (np.arange(n1) + 0.5) / n1
    y = (np.arange(n2) + 0.5) / n2
    xx, yy = np.meshgrid(x, y, indexing="ij")
    u1 = np.sin(np.pi * yy)
    u2 = np.zeros_like(u1)
    p = 0.1 * np.cos(2 * np.pi * xx)
    out = conslab.boundary_flux(u1, u2, p, 1.0, [0.25, 0.125, 0.0625])
    assert out["conserved"]
    assert all(v == 0.0 for v in out["integrals"])


def test_kc_project_identifies_manifold_points():
    rho, u = 1.7, np.array([0.4, -0.2, 0.3])
    U = np.vstack([rho * u, u, rho * rho * u])
    out = conslab.kc_project(U, 3.0)
    assert out["dist"] < 1e-6
    assert abs(out["rho"] - rho) < 1e-3


def test_geom1_leaves_average_to_root():
    out = conslab.geom1_decompose([0.0, 0.0, 2.0])
    assert len(out["weights"]) == 3
    assert abs(sum(out["weights"]) - 1.0) < 1e-12
    assert out["barycenter_error"] < 1e-12
    bary = sum(w * leaf for w, leaf in zip(out["weights"], out["leaves"]))
    assert np.abs(bary - np.vstack([np.zeros(3), np.zeros(3), [0, 0, 2]])).max() < 1e-12


def test_snapshot_round_trip(tmp_path):
    path = str(tmp_path / "field.clf")
    f = np.sin(2 * np.pi * unit_coords(64))[:, None] * np.ones((1, 32))
    conslab.write_snapshot(path, f, name="stripe")
    back = conslab.read_snapshot(path)
    assert back["name"] == "stripe"
    assert back["rank"] == 0
    assert np.array_equal(back["field"], f)
