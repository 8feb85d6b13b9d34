# icelab/ice_dynamics.py
"""Sea-ice balance laws: thermodynamic sources, transport and interface stresses."""
import numpy as np

from .errors import ParameterError
from .grid import horiz_divergence, horiz_jacobian
from .rheology import validate_ice_state

A_FLOOR = 1e-6


def growth_rate(f, x):
    """Evaluate the growth rate f at thickness x >= 0 (scalar or array)."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ParameterError("growth rate argument must be >= 0")
    if f.kind == "constant":
        out = np.full_like(x, f.f0)
    elif f.kind == "decaying-exponential":
        out = f.f0 * np.exp(-x / f.h_ref)
    else:
        # 表格外常数外推
        out = np.interp(x, f.breakpoints, f.values)
    return float(out) if out.ndim == 0 else out


def thermo_sources(h, a, f, params, a_floor=A_FLOOR):
    """(S_h, S_a) of the thermodynamic terms."""
    validate_ice_state(h, a, params)
    f_zero = growth_rate(f, 0.0)
    S_h = growth_rate(f, h / np.maximum(a, a_floor)) * a + (1.0 - a) * f_zero
    if f_zero > 0:
        first = (f_zero / params.kappa1) * (1.0 - a)
    else:
        first = np.zeros_like(a)
    second = np.where(S_h < 0, a / (2.0 * h) * S_h, 0.0)
    return S_h, first + second


def ice_advection(u, phi, grid):
    """div_H(u phi)."""
    return horiz_divergence(u * phi, grid)


def momentum_nonlin(u, grid):
    """(u . grad_H) u."""
    J = horiz_jacobian(u, grid)
    return np.einsum('jyx,ijyx->iyx', u, J)


def rotation(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def tau_atm(trace_v_atm, params):
    """Quadratic atmospheric drag rho C |v| R v."""
    speed = np.sqrt(trace_v_atm[0] ** 2 + trace_v_atm[1] ** 2)
    rotated = np.einsum('ij,jyx->iyx', rotation(params.theta_atm), trace_v_atm)
    return params.rho_atm * params.C_atm * speed * rotated


def tau_ocn(dn_v_ocn, params):
    """Linear ocean stress rho C R d_nu v."""
    rotated = np.einsum('ij,jyx->iyx', rotation(params.theta_ocn), dn_v_ocn)
    return params.rho_ocn * params.C_ocn * rotated
