# icelab/stokes.py
"""Hydrostatic Stokes resolvent, Dirichlet operator and Dirichlet-to-Neumann map on a layer.

Each horizontal wavenumber k decouples into a vertical two-point problem
(mu + |k|^2 - d_zz) v = f with boundary rows; modes sharing |k|^2 share one
banded matrix. The surface pressure follows from the mean-divergence constraint.
"""
import logging
from functools import lru_cache

import numpy as np
from scipy.linalg import solve_banded

from .errors import ParameterError, SolverError
from .grid import (
    DIRICHLET,
    boundary_dz,
    discrete_laplacian,
    layer_inner,
    plane_inner,
    spectral_forward,
    spectral_inverse,
)
from .models import StokesSolve

logger = logging.getLogger(__name__)

DEGENERATE_CONSTRAINT = 1e-14


@lru_cache(maxsize=2048)
def _banded_operator(nz, dz, shift, bc_lo, bc_hi):
    """Band storage (l = u = 2) of shift*I - D_zz with boundary rows."""
    ab = np.zeros((5, nz))
    inv2 = 1.0 / dz ** 2
    # 第 j 列, 第 i 行 -> ab[2 + i - j, j]
    ab[2, 1:-1] = shift + 2.0 * inv2
    ab[1, 2:] = -inv2   # (i, i+1)
    ab[3, :-2] = -inv2  # (i, i-1)
    h2 = 2.0 * dz
    if bc_lo == DIRICHLET:
        ab[2, 0] = 1.0
        ab[1, 1] = 0.0
    else:
        ab[2, 0] = -3.0 / h2
        ab[1, 1] = 4.0 / h2
        ab[0, 2] = -1.0 / h2
    if bc_hi == DIRICHLET:
        ab[2, -1] = 1.0
        ab[3, -2] = 0.0
    else:
        ab[2, -1] = 3.0 / h2
        ab[3, -2] = -4.0 / h2
        ab[4, -3] = 1.0 / h2
    ab.setflags(write=False)
    return ab


def _mode_groups(plane):
    keys, inverse = np.unique(plane.k2.ravel(), return_inverse=True)
    order = np.argsort(inverse, kind="stable")
    counts = np.bincount(inverse.ravel(), minlength=len(keys))
    return keys, np.split(order, np.cumsum(counts)[:-1])


def solve_vertical(grid, mu, rhs_hat, bc):
    """Solve (mu + |k|^2 - d_zz) v = rhs per mode; rhs_hat has shape (C, nz, ny, nx).

    Boundary rows of rhs_hat are treated as homogeneous.
    """
    nz = grid.nz
    ncomp = rhs_hat.shape[0]
    flat = np.array(rhs_hat, dtype=complex).reshape(ncomp, nz, -1)
    flat[:, 0] = 0.0
    flat[:, -1] = 0.0
    out = np.empty_like(flat)
    keys, groups = _mode_groups(grid.horizontal)
    for k2, cols in zip(keys, groups):
        ab = _banded_operator(nz, grid.dz, float(mu + k2), bc[0], bc[1])
        b = np.moveaxis(flat[:, :, cols], 1, 0).reshape(nz, -1)
        x = solve_banded((2, 2), ab, b, check_finite=False)
        out[:, :, cols] = np.moveaxis(x.reshape(nz, ncomp, len(cols)), 0, 1)
    if bc[0] == DIRICHLET:
        out[:, 0] = 0.0
    if bc[1] == DIRICHLET:
        out[:, -1] = 0.0
    return out.reshape(rhs_hat.shape)


@lru_cache(maxsize=64)
def _pressure_response(grid, mu, bc):
    """Unit surface-pressure response q and its vertical mean, per mode."""
    unit = np.zeros((1,) + grid.shape, dtype=complex)
    unit[:, 1:-1] = 1.0
    q = solve_vertical(grid, mu, unit, bc)[0].real
    qbar = np.einsum('zyx,z->yx', q, grid.quad_weights) / grid.depth
    return q, qbar


def _check_mu(mu):
    if not mu > 0:
        raise ParameterError(f"mu must be > 0, got {mu}")


def momentum_residual(grid, mu, v, grad_pi, f):
    """Relative max-norm residual of (mu - Delta) v + grad pi - f on interior levels."""
    r = mu * v - discrete_laplacian(v, grid) + grad_pi[:, None] - f
    scale = max(float(np.max(np.abs(f[:, 1:-1]))), float(np.max(np.abs(mu * v))), 1e-300)
    return float(np.max(np.abs(r[:, 1:-1]))) / scale


def stokes_resolvent(grid, mu, f, bc=None):
    """Solve (mu - Delta) v + grad_H pi = f, div_H v_bar = 0 with homogeneous boundary rows."""
    _check_mu(mu)
    bc = tuple(bc) if bc is not None else grid.bc
    grid.check(f[0])
    mu = float(mu)

    plane = grid.horizontal
    KX, KY = plane.wavenumbers
    k2 = plane.k2
    F = spectral_forward(f, plane)
    vf = solve_vertical(grid, mu, F, bc)
    q, qbar = _pressure_response(grid, mu, bc)

    w = grid.quad_weights / grid.depth
    vbar = np.einsum('czyx,z->cyx', vf, w)
    kv = KX * vbar[0] + KY * vbar[1]
    denom = k2 * qbar
    active = k2 > 0
    if np.any(np.abs(denom[active]) < DEGENERATE_CONSTRAINT):
        raise SolverError("pressure constraint degenerated", [float(np.min(np.abs(denom[active])))])
    pi_hat = np.zeros_like(kv)
    pi_hat[active] = -1j * kv[active] / denom[active]

    K = np.stack([KX, KY])
    v_hat = vf - 1j * K[:, None] * pi_hat[None, None] * q[None]
    v = spectral_inverse(v_hat, plane)
    grad_pi = spectral_inverse(1j * K * pi_hat, plane)
    residual = momentum_residual(grid, mu, v, grad_pi, f)
    logger.debug("stokes resolvent mu=%.3g bc=%s residual=%.2e", mu, bc, residual)
    return StokesSolve(v=v, grad_pi=grad_pi, residual_norm=residual)


# --- 非齐次 Dirichlet 数据的延拓 ---

def extension_profile(grid, exact=True):
    """Profile r on the layer with r(z_hi) = 1, r(z_lo) = 0 and zero mean.

    exact=False returns the quadratic 3s^2/L^2 + 4s/L + 1 (s = z - z_hi), whose
    trapezoid mean is O(dz^2); exact=True subtracts a multiple of the bump
    -s(s+L)/L^2 so the discrete mean vanishes.
    """
    L = grid.depth
    s = grid.z - grid.z_hi
    r = 3 * s ** 2 / L ** 2 + 4 * s / L + 1
    r[0], r[-1] = 0.0, 1.0
    if not exact:
        return r
    bump = -s * (s + L) / L ** 2
    bump[0] = bump[-1] = 0.0
    w = grid.quad_weights
    # bump vanishes at both ends, so the end values survive the correction
    beta = np.dot(w, r) / np.dot(w, bump)
    return r - beta * bump


def dirichlet_extension(phi, grid):
    """g = r(z) phi(x, y) on the layer."""
    grid.horizontal.check(phi)
    return extension_profile(grid)[:, None, None] * phi[:, None]


def ocean_dirichlet_solve(grid, mu, f, phi):
    """(mu - Delta) v + grad pi = f with v = phi on z_hi and v = 0 on z_lo."""
    _check_mu(mu)
    g = dirichlet_extension(phi, grid)
    inner = stokes_resolvent(grid, mu, f + discrete_laplacian(g, grid) - mu * g, (DIRICHLET, DIRICHLET))
    v = g + inner.v
    residual = momentum_residual(grid, mu, v, inner.grad_pi, f)
    return StokesSolve(v=v, grad_pi=inner.grad_pi, residual_norm=residual)


def dirichlet_operator(grid, mu, phi):
    """Hydrostatic Dirichlet operator L_mu phi."""
    zero = np.zeros((2,) + grid.shape)
    return ocean_dirichlet_solve(grid, mu, zero, phi)


def dtn_operator(grid, mu, phi, normal_sign=1.0):
    """N_mu phi = -d_nu (L_mu phi) on z_hi, nu = normal_sign * e_z."""
    v = dirichlet_operator(grid, mu, phi).v
    return -normal_sign * boundary_dz(v, grid, "hi")


def adjoint_identity_check(grid, mu, phi, k):
    """Normalized residual of <L_mu phi, k> + <phi, d_z R(mu) k on z_hi>, R(mu) = (mu - A_0)^-1."""
    lhs = layer_inner(dirichlet_operator(grid, mu, phi).v, k, grid)
    u = stokes_resolvent(grid, mu, k, (DIRICHLET, DIRICHLET)).v
    rhs = plane_inner(phi, boundary_dz(u, grid, "hi"), grid)
    scale = max(abs(lhs), abs(rhs))
    if scale == 0.0:
        return 0.0
    return abs(lhs + rhs) / scale
