# tests/test_hydrostatic.py
import math

import numpy as np
import pytest

from icelab.grid import (
    DIRICHLET,
    NEUMANN,
    LayerGrid,
    discrete_laplacian,
    horiz_derivative,
    horiz_divergence,
    horiz_gradient,
    vertical_average,
)
from icelab.hydrostatic import (
    advection,
    bilinearity,
    decompose,
    helmholtz_2d,
    hydrostatic_project,
    neumann_defect,
    recover_pressure_gradient,
    recover_w,
)
from icelab.stokes import stokes_resolvent


def test_projection_is_idempotent(layer, rng):
    """P(P v) = P v on random fields."""
    for _ in range(10):
        v = rng.normal(size=(2,) + layer.shape)
        pv = hydrostatic_project(v, layer)
        assert np.max(np.abs(hydrostatic_project(pv, layer) - pv)) <= 1e-11 * max(1.0, np.max(np.abs(pv)))


def test_projection_range_has_divergence_free_mean(layer, rng):
    pv = hydrostatic_project(rng.normal(size=(2,) + layer.shape), layer)
    assert np.max(np.abs(horiz_divergence(vertical_average(pv, layer), layer))) <= 1e-11


def test_projection_annihilates_gradients(layer):
    """P grad_H pi = 0 for z-independent pi."""
    X, Y = layer.horizontal.mesh
    pi = np.cos(2 * X) * np.sin(Y) + 0.3 * np.sin(3 * Y)
    v = np.broadcast_to(horiz_gradient(pi, layer)[:, None], (2,) + layer.shape)
    assert np.max(np.abs(hydrostatic_project(v, layer))) <= 1e-11


def test_projection_keeps_mean_free_fluctuations(layer):
    """Fields with zero vertical mean pass unchanged."""
    X, _ = layer.horizontal.mesh
    zeta = (layer.z - layer.z_lo) / layer.depth
    profile = np.cos(np.pi * zeta)
    v = np.stack([profile[:, None, None] * np.cos(X)[None], np.zeros(layer.shape)])
    v = v - vertical_average(v, layer)[:, None]
    assert np.allclose(hydrostatic_project(v, layer), v, atol=1e-12)


def test_helmholtz_keeps_mean_flow(plane):
    """The k = 0 mode passes through the Leray projection."""
    f = np.ones((2,) + plane.shape) * np.array([1.5, -0.5])[:, None, None]
    assert np.allclose(helmholtz_2d(f, plane), f)


def test_decompose_reconstructs(layer, rng):
    v = rng.normal(size=(2,) + layer.shape)
    parts = decompose(v, layer)
    assert np.allclose(parts.reconstruct(), v)
    assert np.allclose(vertical_average(parts.fluct, layer), 0.0, atol=1e-13)


def test_vertical_velocity_vanishes_at_bottom(layer, rng):
    v = hydrostatic_project(rng.normal(size=(2,) + layer.shape), layer)
    w = recover_w(v, layer)
    assert np.all(w[0] == 0.0)
    # 平均散度为零时顶部 w 也为零
    assert np.max(np.abs(w[-1])) <= 1e-10


def test_advection_of_uniform_flow_is_translation(layer):
    X, _ = layer.horizontal.mesh
    v = np.zeros((2,) + layer.shape)
    v[0] = 2.0
    v2 = np.stack([np.broadcast_to(np.sin(X), layer.shape), np.zeros(layer.shape)])
    adv = advection(v, v2, layer)
    assert np.allclose(adv[0], 2.0 * np.cos(X)[None], atol=1e-11)
    assert np.allclose(bilinearity(v, v2, layer), hydrostatic_project(adv, layer))


def test_neumann_defect_zero_for_z_linear_fields(layer):
    """Equal normal derivatives at both ends give B v = 0."""
    X, _ = layer.horizontal.mesh
    v = np.stack([layer.z[:, None, None] * np.sin(X)[None], np.zeros(layer.shape)])
    assert np.allclose(neumann_defect(v, layer), 0.0, atol=1e-11)


def test_pressure_gradient_of_pure_gradient_forcing(layer):
    """With v = 0, the recovered gradient is the curl-free part of the mean forcing."""
    X, Y = layer.horizontal.mesh
    grad = horiz_gradient(np.sin(X) * np.cos(Y), layer)
    f = np.broadcast_to(grad[:, None], (2,) + layer.shape)
    gp = recover_pressure_gradient(np.zeros((2,) + layer.shape), f, layer)
    assert np.allclose(gp, grad, atol=1e-11)


def _smooth_field(layer, rng):
    X, Y = layer.horizontal.mesh
    zeta = (layer.z - layer.z_lo) / layer.depth
    c = rng.normal(size=(2, 3))
    plane = np.stack([c[i, 0] * np.cos(X) + c[i, 1] * np.sin(X + Y) + c[i, 2] * np.cos(2 * Y) for i in range(2)])
    return plane[:, None] * (1.0 + zeta ** 2)[None, :, None, None]


def test_bilinearity_is_bilinear(layer, rng):
    u1, u2, w = (_smooth_field(layer, rng) for _ in range(3))
    scale = max(1.0, np.max(np.abs(bilinearity(u1, w, layer))), np.max(np.abs(bilinearity(u2, w, layer))))
    tol = 1e-10 * scale
    assert np.max(np.abs(bilinearity(u1 + u2, w, layer)
                         - bilinearity(u1, w, layer) - bilinearity(u2, w, layer))) <= tol
    assert np.max(np.abs(bilinearity(w, u1 + u2, layer)
                         - bilinearity(w, u1, layer) - bilinearity(w, u2, layer))) <= tol
    assert np.max(np.abs(bilinearity(2.5 * u1, w, layer) - 2.5 * bilinearity(u1, w, layer))) <= 3 * tol
    assert np.max(np.abs(bilinearity(u1, -0.5 * w, layer) + 0.5 * bilinearity(u1, w, layer))) <= tol


@pytest.mark.parametrize("bc", [(DIRICHLET, DIRICHLET), (NEUMANN, NEUMANN)])
def test_recovered_pressure_gradient_matches_resolvent(bc):
    """Manufactured v with known pressure: solver and recovery both return grad pi."""
    grid = LayerGrid(16, 16, 2 * math.pi, 2 * math.pi, 17, -1.0, 0.0, *bc)
    plane = grid.horizontal
    X, Y = plane.mesh
    psi = np.sin(X) * np.cos(2 * Y)
    U = np.stack([-horiz_derivative(psi, plane, "y"), horiz_derivative(psi, plane, "x")])
    s = grid.z - grid.z_lo
    if bc[0] == DIRICHLET:
        profile = s * (grid.depth - s) / grid.depth ** 2
    else:
        profile = np.ones(grid.nz)
    v = profile[None, :, None, None] * U[:, None]
    grad_pi = horiz_gradient(np.cos(X + Y) + 0.5 * np.sin(2 * X), plane)
    mu = 2.0
    f = mu * v - discrete_laplacian(v, grid) + grad_pi[:, None]

    sol = stokes_resolvent(grid, mu, f)
    assert np.allclose(sol.v, v, atol=1e-10)
    recovered = recover_pressure_gradient(sol.v, f, grid)
    assert np.allclose(recovered, sol.grad_pi, atol=1e-10)
    assert np.allclose(recovered, grad_pi, atol=1e-10)


@pytest.mark.parametrize("bc", [(DIRICHLET, DIRICHLET), (NEUMANN, NEUMANN)])
def test_recovered_pressure_gradient_is_curl_free(bc, rng):
    grid = LayerGrid(16, 16, 2 * math.pi, 2 * math.pi, 17, -1.0, 0.0, *bc)
    f = rng.normal(size=(2,) + grid.shape)
    sol = stokes_resolvent(grid, 1.0, f)
    g = recover_pressure_gradient(sol.v, f, grid)
    curl = horiz_derivative(g[1], grid, "x") - horiz_derivative(g[0], grid, "y")
    assert np.max(np.abs(curl)) <= 1e-10 * max(1.0, np.max(np.abs(g)))
    assert np.allclose(g, sol.grad_pi, atol=1e-9 * max(1.0, np.max(np.abs(g))))
