# tests/test_grid.py
import math

import numpy as np
import pytest

from icelab.errors import GridError
from icelab.grid import (
    HorizontalGrid,
    LayerGrid,
    boundary_dz,
    boundary_trace,
    discrete_laplacian,
    horiz_derivative,
    horiz_divergence,
    horiz_gradient,
    horiz_jacobian,
    horiz_laplacian,
    layer_inner,
    plane_inner,
    spectral_forward,
    spectral_inverse,
    vert_antiderivative,
    vert_derivative,
    vert_second_derivative,
    vertical_average,
)


def _profile(grid, values):
    return np.broadcast_to(values[:, None, None], grid.shape).copy()


def test_nyquist_wavenumber_is_zeroed(plane):
    """Even grids drop the Nyquist mode from every multiplier."""
    KX, KY = plane.wavenumbers
    assert np.all(KX[:, plane.nx // 2] == 0.0)
    assert np.all(KY[plane.ny // 2, :] == 0.0)
    assert plane.k2.shape == plane.shape


def test_too_coarse_grid_rejected():
    with pytest.raises(GridError):
        HorizontalGrid(3, 16)
    with pytest.raises(GridError):
        LayerGrid(8, 8, 1.0, 1.0, 3, 0.0, 1.0)
    with pytest.raises(GridError):
        LayerGrid(8, 8, 1.0, 1.0, 9, 1.0, 0.0)


def test_shape_mismatch_raises(layer):
    with pytest.raises(GridError):
        vert_derivative(np.zeros((2, 5, 16, 16)), layer)


def test_spectral_coefficients_use_forward_normalization(plane, rng):
    X, Y = plane.mesh
    F = spectral_forward(np.cos(X) + 2.0, plane)
    assert F[0, 0].real == pytest.approx(2.0)
    assert F[0, 1].real == pytest.approx(0.5)
    f = rng.normal(size=plane.shape)
    assert np.allclose(spectral_inverse(spectral_forward(f, plane), plane), f, atol=1e-13)


def test_spectral_derivatives_exact_on_low_modes(plane):
    """d/dx sin(3x) = 3 cos(3x) to roundoff."""
    X, Y = plane.mesh
    f = np.sin(3 * X) * np.cos(2 * Y)
    assert np.allclose(horiz_derivative(f, plane, "x"), 3 * np.cos(3 * X) * np.cos(2 * Y), atol=1e-12)
    assert np.allclose(horiz_derivative(f, plane, "y"), -2 * np.sin(3 * X) * np.sin(2 * Y), atol=1e-12)
    assert np.allclose(horiz_laplacian(f, plane), -13 * f, atol=1e-11)


def test_divergence_of_gradient_is_laplacian(plane, rng):
    X, Y = plane.mesh
    phi = rng.normal() * np.cos(X + 2 * Y) + rng.normal() * np.sin(3 * Y)
    assert np.allclose(horiz_divergence(horiz_gradient(phi, plane), plane), horiz_laplacian(phi, plane),
                       atol=1e-11)


def test_jacobian_layout(plane):
    """J[i, j] = d u_i / d x_j."""
    X, Y = plane.mesh
    u = np.stack([np.sin(Y), np.cos(X)])
    J = horiz_jacobian(u, plane)
    assert np.allclose(J[0, 0], 0.0, atol=1e-12)
    assert np.allclose(J[0, 1], np.cos(Y), atol=1e-12)
    assert np.allclose(J[1, 0], -np.sin(X), atol=1e-12)


def test_vertical_derivatives_exact_on_low_polynomials(layer):
    z = layer.z
    f = _profile(layer, z ** 2)
    assert np.allclose(vert_derivative(f, layer), _profile(layer, 2 * z), atol=1e-10)
    g = _profile(layer, z ** 3)
    assert np.allclose(vert_second_derivative(g, layer), _profile(layer, 6 * z), atol=1e-8)
    assert np.allclose(boundary_dz(f, layer, "lo"), 2 * z[0], atol=1e-10)
    assert np.allclose(boundary_dz(f, layer, "hi"), 2 * z[-1], atol=1e-10)


def test_discrete_laplacian_combines_both_directions(layer):
    X, _ = layer.horizontal.mesh
    f = np.sin(X)[None] * (layer.z ** 2)[:, None, None]
    expected = -f + 2.0 * np.sin(X)[None]
    assert np.allclose(discrete_laplacian(f, layer), expected, atol=1e-8)


def test_vertical_average_and_antiderivative(layer):
    const = np.full(layer.shape, 2.5)
    assert np.allclose(vertical_average(const, layer), 2.5)
    F = vert_antiderivative(const, layer)
    assert np.all(F[0] == 0.0)
    assert np.allclose(F[-1], 2.5 * layer.depth)


def test_boundary_trace_picks_end_levels(layer):
    f = _profile(layer, layer.z)
    assert np.all(boundary_trace(f, layer, "lo") == layer.z_lo)
    assert np.all(boundary_trace(f, layer, "hi") == layer.z_hi)


def test_inner_products_match_integrals(layer):
    plane = layer.horizontal
    X, _ = plane.mesh
    assert math.isclose(plane_inner(np.sin(X), np.sin(X), plane), 2 * math.pi ** 2, rel_tol=1e-12)
    ones = np.ones((2,) + layer.shape)
    assert math.isclose(layer_inner(ones, ones, layer), 2 * plane.lx * plane.ly * layer.depth, rel_tol=1e-12)


def test_horizontal_derivative_commutes_with_vertical_average(layer, rng):
    f = rng.normal(size=layer.shape)
    for axis in ("x", "y"):
        outer = horiz_derivative(vertical_average(f, layer), layer.horizontal, axis)
        inner = vertical_average(horiz_derivative(f, layer, axis), layer)
        assert np.max(np.abs(outer - inner)) <= 1e-12 * max(1.0, np.max(np.abs(inner)))


def test_spectral_forward_parseval(plane, rng):
    """Forward normalization: mean |f|^2 equals the sum of |F|^2."""
    f = rng.normal(size=plane.shape)
    F = spectral_forward(f, plane)
    assert math.isclose(np.mean(f ** 2), np.sum(np.abs(F) ** 2), rel_tol=1e-12)
