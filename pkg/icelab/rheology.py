# icelab/rheology.py
"""Hibler's regularized viscous-plastic rheology.

Tensor fields have shape (2, 2, ny, nx); the frozen coefficient tensor has shape
(2, 2, 2, 2, ny, nx) with a[i, j, k, l] multiplying d_k d_l u_j in row i.
"""
import logging
import math

import numpy as np

from .errors import DomainViolation, EllipticityFailure, ParameterError
from .grid import (
    horiz_gradient,
    horiz_jacobian,
    spectral_forward,
    spectral_inverse,
)
from .models import EllipticityCertificate, IceState, StrainState

logger = logging.getLogger(__name__)


def validate_ice_state(h, a, params, margin=0.0):
    """Raise DomainViolation naming the first bound of V that is broken."""
    checks = (
        ("h", "kappa1", h < params.kappa1 + margin),
        ("h", "kappa2", h > params.kappa2 - margin),
        ("a", "0", a < 0.0),
        ("a", "1", a > 1.0),
    )
    for name, bound, mask in checks:
        if np.any(mask):
            loc = tuple(int(i) for i in np.argwhere(mask)[0])
            value = (h if name == "h" else a)[loc]
            raise DomainViolation(name, bound, loc, float(value))
    for name, arr in (("h", h), ("a", a)):
        if not np.all(np.isfinite(arr)):
            raise DomainViolation(name, "finite")


def deformation(u, grid):
    """eps = (grad u + grad u^T) / 2."""
    J = horiz_jacobian(u, grid)
    return 0.5 * (J + J.transpose(1, 0, 2, 3))


def triangle_delta(eps, delta, e_ratio):
    if not delta > 0:
        raise ParameterError(f"delta must be > 0, got {delta}")
    ie2 = 1.0 / e_ratio ** 2
    e11, e12, e22 = eps[0, 0], eps[0, 1], eps[1, 1]
    d2 = (e11 ** 2 + e22 ** 2) * (1 + ie2) + 4 * ie2 * e12 ** 2 + 2 * e11 * e22 * (1 - ie2)
    # delta > 0 keeps Delta away from zero at rest
    return np.sqrt(delta + d2)


def strain_state(u, grid, params):
    eps = deformation(u, grid)
    return StrainState(eps=eps, tri_delta=triangle_delta(eps, params.delta_reg, params.e_ratio))


def ice_pressure(h, a, params):
    """P = p* h exp(-c (1 - a))."""
    if np.any(h <= 0):
        loc = tuple(int(i) for i in np.argwhere(h <= 0)[0]) if np.ndim(h) else None
        raise DomainViolation("h", "0", loc)
    if np.any((a < 0) | (a > 1)):
        bad = (a < 0) | (a > 1)
        loc = tuple(int(i) for i in np.argwhere(bad)[0]) if np.ndim(a) else None
        raise DomainViolation("a", "[0, 1]", loc)
    return params.p_star * h * np.exp(-params.c_star * (1.0 - a))


def s_tensor(e_ratio):
    """S[i, j, k, l] with (S eps)_ij = sum_kl S[i, j, k, l] eps_kl."""
    ie2 = 1.0 / e_ratio ** 2
    I = np.eye(2)
    return (ie2 * (np.einsum('ik,jl->ijkl', I, I) + np.einsum('il,jk->ijkl', I, I))
            + (1 - ie2) * np.einsum('ij,kl->ijkl', I, I))


def s_map(eps, e_ratio):
    ie2 = 1.0 / e_ratio ** 2
    out = np.empty_like(eps)
    out[0, 0] = (1 + ie2) * eps[0, 0] + (1 - ie2) * eps[1, 1]
    out[1, 1] = (1 + ie2) * eps[1, 1] + (1 - ie2) * eps[0, 0]
    out[0, 1] = 2 * ie2 * eps[0, 1]
    out[1, 0] = 2 * ie2 * eps[1, 0]
    return out


def stress(eps, P, delta, e_ratio):
    """sigma = (1/e^2)(P/D) eps + (1 - 1/e^2)(P/(2D)) tr(eps) I - (P/2) I."""
    ie2 = 1.0 / e_ratio ** 2
    D = triangle_delta(eps, delta, e_ratio)
    trace = eps[0, 0] + eps[1, 1]
    sigma = ie2 * (P / D) * eps
    iso = (1 - ie2) * P / (2 * D) * trace - P / 2
    sigma[0, 0] = sigma[0, 0] + iso
    sigma[1, 1] = sigma[1, 1] + iso
    return sigma


def tensor_divergence(sigma, grid):
    """(div sigma)_i = d_x sigma_i1 + d_y sigma_i2."""
    plane = grid
    KX, KY = plane.wavenumbers
    F = spectral_forward(sigma, plane)
    return spectral_inverse(1j * (KX * F[:, 0] + KY * F[:, 1]), plane)


def hibler_div(u, h, a, grid, params):
    """Internal ice force per unit mass, (1/(rho_ice h)) div sigma_delta."""
    validate_ice_state(h, a, params)
    eps = deformation(u, grid)
    P = ice_pressure(h, a, params)
    sigma = stress(eps, P, params.delta_reg, params.e_ratio)
    return tensor_divergence(sigma, grid) / (params.rho_ice * h)


def _coefficients(eps0, D0, P0, h0, params):
    S = s_tensor(params.e_ratio)
    # 算子指标: S_ij^kl -> S[i, k, l, j]
    S_op = np.einsum('iklj->ijkl', S)[..., None, None]
    se0 = s_map(eps0, params.e_ratio)
    second = np.einsum('ikyx,jlyx->ijklyx', se0, se0) / D0 ** 2
    return -(P0 / (2 * params.rho_ice * h0 * D0)) * (S_op - second)


def linearized_coeffs(u0, h0, a0, grid, params):
    validate_ice_state(h0, a0, params)
    st = strain_state(u0, grid, params)
    return _coefficients(st.eps, st.tri_delta, ice_pressure(h0, a0, params), h0, params)


class HiblerLinearization:
    """Frozen Hibler operator A^H(v0) with cached coefficients.

    apply(u) = sum a_ij^kl D_k D_l u_j + (1/(2 rho h0 D0)) sum_j (d_j P0)(S eps(u))_ij,
    with D_k = -i d_k, so D_k D_l = -d_k d_l.
    """

    def __init__(self, state0, grid, params):
        self.grid = grid
        self.params = params
        validate_ice_state(state0.h, state0.a, params)
        st = strain_state(state0.u_ice, grid, params)
        self.h0 = state0.h
        self.P0 = ice_pressure(state0.h, state0.a, params)
        self.D0 = st.tri_delta
        self.coeffs = _coefficients(st.eps, st.tri_delta, self.P0, state0.h, params)
        self.grad_P0 = horiz_gradient(self.P0, grid)
        self._first_order = self.grad_P0 / (2 * params.rho_ice * state0.h * self.D0)

    def principal(self, u):
        KX, KY = self.grid.wavenumbers
        K = (KX, KY)
        U = spectral_forward(u, self.grid)
        out = np.zeros_like(u)
        for k in range(2):
            for l in range(2):
                # d_k d_l u_j -> -K_k K_l U_j, D_k D_l = -d_k d_l
                dd = spectral_inverse(-K[k] * K[l] * U, self.grid)
                out -= np.einsum('ijyx,jyx->iyx', self.coeffs[:, :, k, l], dd)
        return out

    def first_order(self, u):
        se = s_map(deformation(u, self.grid), self.params.e_ratio)
        return np.einsum('jyx,ijyx->iyx', self._first_order, se)

    def apply(self, u):
        return self.principal(u) + self.first_order(u)

    def mean_symbol(self):
        """Fourier symbol sum_kl abar_ij^kl K_k K_l of the plane-averaged principal part, (2, 2, ny, nx)."""
        KX, KY = self.grid.wavenumbers
        K = np.stack([KX, KY])
        abar = self.coeffs.mean(axis=(-2, -1))
        return np.einsum('ijkl,kyx,lyx->ijyx', abar, K, K)


def hibler_apply_linearized(state0, u, grid, params):
    return HiblerLinearization(state0, grid, params).apply(u)


def lower_order_terms(h0, a0, h, a, grid, params):
    """B_h h + B_a a at the frozen (h0, a0)."""
    validate_ice_state(h0, a0, params)
    P0 = ice_pressure(h0, a0, params)
    dP_dh = params.p_star * np.exp(-params.c_star * (1.0 - a0))
    dP_da = params.c_star * P0
    m2 = 2 * params.rho_ice * h0
    return -(dP_dh / m2) * horiz_gradient(h, grid) - (dP_da / m2) * horiz_gradient(a, grid)


def _eta_samples(n_eta):
    side = max(2, int(math.ceil(math.sqrt(n_eta))))
    alpha = np.linspace(0.0, np.pi / 2, side)
    beta = np.linspace(0.0, 2 * np.pi, side, endpoint=False)
    A, B = np.meshgrid(alpha, beta, indexing="ij")
    A, B = A.ravel(), B.ravel()
    return np.stack([np.cos(A) + 0j, np.exp(1j * B) * np.sin(A)], axis=1)


def ellipticity_certificate(state0, grid, params, n_xi=64, n_eta=64):
    """Minimum over samples of Re(-sum a_ij^kl xi_k xi_l eta_j conj(eta_i))."""
    if not isinstance(state0, IceState):
        state0 = IceState.of(state0)
    coeffs = linearized_coeffs(state0.u_ice, state0.h, state0.a, grid, params)
    theta = np.pi * np.arange(n_xi) / n_xi
    xi = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    etas = _eta_samples(n_eta)
    # M[n, i, j] = -sum_kl a_ij^kl xi_k xi_l
    M = -np.einsum('ijklyx,nk,nl->nijyx', coeffs, xi, xi)

    best = math.inf
    witness = None
    for m, eta in enumerate(etas):
        q = np.einsum('i,nijyx,j->nyx', eta.conj(), M, eta).real
        idx = np.unravel_index(int(np.argmin(q)), q.shape)
        if q[idx] < best:
            best = float(q[idx])
            n, jy, ix = idx
            witness = {
                'point': [int(jy), int(ix)],
                'xi': [float(xi[n, 0]), float(xi[n, 1])],
                'eta': [[float(eta[0].real), float(eta[0].imag)], [float(eta[1].real), float(eta[1].imag)]],
            }
    logger.debug("ellipticity certificate c_min=%.6g over %d x %d samples", best, n_xi, len(etas))
    if not best > 0:
        raise EllipticityFailure(best, witness)
    return EllipticityCertificate(c_min=best, witness=witness)
