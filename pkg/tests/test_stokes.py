# tests/test_stokes.py
import math

import numpy as np
import pytest

from icelab.errors import ParameterError
from icelab.grid import (
    DIRICHLET,
    NEUMANN,
    LayerGrid,
    boundary_dz,
    boundary_trace,
    horiz_divergence,
    layer_inner,
    plane_inner,
    vertical_average,
)
from icelab.hydrostatic import hydrostatic_project
from icelab.stokes import (
    adjoint_identity_check,
    dirichlet_extension,
    dirichlet_operator,
    dtn_operator,
    extension_profile,
    ocean_dirichlet_solve,
    stokes_resolvent,
)


def test_resolvent_satisfies_momentum_and_constraint(layer, rng):
    """Interior momentum residual and mean divergence both vanish."""
    f = rng.normal(size=(2,) + layer.shape)
    sol = stokes_resolvent(layer, 2.0, f)
    assert sol.residual_norm <= 1e-10
    assert np.max(np.abs(horiz_divergence(vertical_average(sol.v, layer), layer))) <= 1e-10
    assert np.all(boundary_trace(sol.v, layer, "lo") == 0.0)
    assert np.all(boundary_trace(sol.v, layer, "hi") == 0.0)


def test_resolvent_neumann_rows(rng):
    """Neumann rows give a zero one-sided normal derivative."""
    grid = LayerGrid(8, 8, 2 * math.pi, 2 * math.pi, 17, 3.0, 4.0, NEUMANN, NEUMANN)
    f = hydrostatic_project(rng.normal(size=(2,) + grid.shape), grid)
    v = stokes_resolvent(grid, 1.0, f).v
    assert np.max(np.abs(boundary_dz(v, grid, "lo"))) <= 1e-10
    assert np.max(np.abs(boundary_dz(v, grid, "hi"))) <= 1e-10


def test_resolvent_rejects_nonpositive_mu(layer):
    with pytest.raises(ParameterError):
        stokes_resolvent(layer, 0.0, np.zeros((2,) + layer.shape))


def test_resolvent_k0_closed_form():
    """Constant forcing: v = (c/mu)(1 - cosh(sqrt(mu) z') / cosh(sqrt(mu) L/2))."""
    grid = LayerGrid(4, 4, 1.0, 1.0, 129, -1.0, 0.0)
    f = np.zeros((2,) + grid.shape)
    f[0] = 1.0
    v = stokes_resolvent(grid, 1.0, f).v
    exact = 1.0 - np.cosh(grid.z + 0.5) / np.cosh(0.5)
    assert np.max(np.abs(v[0] - exact[:, None, None])) <= 1e-5


def test_extension_profile_end_values_and_mean():
    for nz in (9, 33, 65):
        grid = LayerGrid(4, 4, 1.0, 1.0, nz, -1.0, 0.0)
        r = extension_profile(grid)
        assert r[-1] == 1.0 and r[0] == 0.0
        assert abs(np.dot(grid.quad_weights, r)) <= 1e-12
    # 二次剖面的离散均值只是 O(dz^2)
    coarse = LayerGrid(4, 4, 1.0, 1.0, 9, -1.0, 0.0)
    raw = extension_profile(coarse, exact=False)
    assert abs(np.dot(coarse.quad_weights, raw)) > 1e-6


def test_dirichlet_extension_trace(layer):
    X, Y = layer.horizontal.mesh
    phi = np.stack([np.sin(X), np.cos(Y)])
    g = dirichlet_extension(phi, layer)
    assert np.all(boundary_trace(g, layer, "hi") == phi)
    assert np.all(boundary_trace(g, layer, "lo") == 0.0)


def test_dirichlet_operator_trace_and_mean_divergence(layer, rng):
    phi = rng.normal(size=(2,) + layer.horizontal.shape)
    sol = dirichlet_operator(layer, 1.0, phi)
    assert np.max(np.abs(boundary_trace(sol.v, layer, "hi") - phi)) <= 1e-10
    assert np.max(np.abs(boundary_trace(sol.v, layer, "lo"))) <= 1e-12
    assert np.max(np.abs(horiz_divergence(vertical_average(sol.v, layer), layer))) <= 1e-10


def test_ocean_solve_is_linear_in_data(layer, rng):
    f = rng.normal(size=(2,) + layer.shape)
    phi = rng.normal(size=(2,) + layer.horizontal.shape)
    combined = ocean_dirichlet_solve(layer, 3.0, f, phi).v
    parts = stokes_resolvent(layer, 3.0, f, (DIRICHLET, DIRICHLET)).v + dirichlet_operator(layer, 3.0, phi).v
    assert np.allclose(combined, parts, atol=1e-10)


def test_dtn_constant_datum_matches_closed_form():
    """k = 0: N phi = -c sqrt(mu) coth(sqrt(mu) h)."""
    mu, c = 1.0, 0.7
    grid = LayerGrid(4, 4, 1.0, 1.0, 129, -1.0, 0.0)
    phi = np.zeros((2,) + grid.horizontal.shape)
    phi[0] = c
    exact = -c * math.sqrt(mu) / math.tanh(math.sqrt(mu))
    assert np.allclose(dtn_operator(grid, mu, phi)[0], exact, rtol=1e-4)
    assert np.allclose(dtn_operator(grid, mu, phi, normal_sign=-1.0)[0], -exact, rtol=1e-4)


def test_adjoint_identity_residual_is_small():
    grid = LayerGrid(8, 8, 2 * math.pi, 2 * math.pi, 65, -1.0, 0.0)
    X, Y = grid.horizontal.mesh
    phi = np.stack([np.cos(X), np.sin(Y)])
    zeta = ((grid.z - grid.z_lo) / grid.depth)[:, None, None]
    k = np.stack([np.cos(np.pi * zeta) * np.cos(X)[None], zeta ** 2 * np.sin(Y)[None]])
    assert adjoint_identity_check(grid, 1.0, phi, hydrostatic_project(k, grid)) <= 1e-2


def test_resolvent_identity(layer, rng):
    """R(mu) - R(lam) = (lam - mu) R(lam) R(mu) on the discrete constrained space."""
    mu, lam = 1.0, 3.0
    f = rng.normal(size=(2,) + layer.shape)
    r_mu = stokes_resolvent(layer, mu, f).v
    r_lam = stokes_resolvent(layer, lam, f).v
    twice = stokes_resolvent(layer, lam, r_mu).v
    gap = np.max(np.abs(r_mu - r_lam - (lam - mu) * twice))
    assert gap <= 1e-10 * np.max(np.abs(r_mu))


def test_dirichlet_operator_norm_stable_under_refinement():
    """Sampled ||L_mu phi|| / ||phi|| settles as nz grows."""
    ratios = []
    for nz in (33, 65, 129):
        grid = LayerGrid(8, 8, 2 * math.pi, 2 * math.pi, nz, -1.0, 0.0)
        X, Y = grid.horizontal.mesh
        samples = (
            np.stack([np.cos(X), np.sin(Y)]),
            np.stack([np.ones_like(X), np.zeros_like(X)]),
            np.stack([np.sin(2 * X) * np.cos(Y), np.cos(3 * Y)]),
        )
        worst = 0.0
        for phi in samples:
            v = dirichlet_operator(grid, 1.0, phi).v
            worst = max(worst, math.sqrt(layer_inner(v, v, grid) / plane_inner(phi, phi, grid)))
        ratios.append(worst)
    assert all(math.isfinite(r) and r > 0 for r in ratios)
    assert max(ratios) / min(ratios) <= 1.02
