# icelab/hydrostatic.py
"""Hydrostatic vector calculus on a layer.

Vector fields carry their two horizontal components on axis 0.
"""
import numpy as np

from .grid import (
    boundary_dz,
    horiz_derivative,
    horiz_divergence,
    spectral_forward,
    spectral_inverse,
    vert_antiderivative,
    vert_derivative,
    vertical_average,
)
from .models import HydrostaticDecomposition


def helmholtz_2d(f, grid):
    """Leray projection P_H on the torus; identity on the k = 0 mode."""
    plane = grid.horizontal if hasattr(grid, "horizontal") else grid
    KX, KY = plane.wavenumbers
    k2 = plane.k2
    F = spectral_forward(f, plane)
    kdotf = KX * F[0] + KY * F[1]
    coef = np.where(k2 > 0, kdotf / np.where(k2 > 0, k2, 1.0), 0.0)
    return spectral_inverse(np.stack([F[0] - KX * coef, F[1] - KY * coef]), plane)


def decompose(v, grid):
    mean = vertical_average(v, grid)
    return HydrostaticDecomposition(mean=mean, fluct=v - mean[:, None])


def hydrostatic_project(v, grid):
    """P v = P_H(v_bar) + (v - v_bar)."""
    parts = decompose(v, grid)
    return parts.fluct + helmholtz_2d(parts.mean, grid)[:, None]


def recover_w(v, grid):
    """Vertical velocity w(z) = -int_{z_lo}^z div_H v."""
    return -vert_antiderivative(horiz_divergence(v, grid), grid)


def advection(v, v2, grid):
    """(v . grad_H) v2 + w(v) d_z v2, unprojected."""
    w = recover_w(v, grid)
    dz_v2 = vert_derivative(v2, grid)
    return (v[0] * horiz_derivative(v2, grid, "x")
            + v[1] * horiz_derivative(v2, grid, "y")
            + w * dz_v2)


def bilinearity(v, v2, grid):
    return hydrostatic_project(advection(v, v2, grid), grid)


def neumann_defect(v, grid):
    """B v = (1/L)(1 - P_H)(d_z v|lo - d_z v|hi)."""
    jump = boundary_dz(v, grid, "lo") - boundary_dz(v, grid, "hi")
    return (jump - helmholtz_2d(jump, grid)) / grid.depth


def recover_pressure_gradient(v, f, grid):
    """Surface pressure gradient (1 - P_H) f_bar - B v of a hydrostatic momentum balance."""
    fbar = vertical_average(f, grid)
    return fbar - helmholtz_2d(fbar, grid) - neumann_defect(v, grid)
