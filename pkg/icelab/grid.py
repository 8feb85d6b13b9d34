# icelab/grid.py
"""Layer and plane discretizations.

Horizontal directions are periodic and handled spectrally (FFT over the last two
axes, arrays laid out (..., ny, nx)); the vertical direction uses a uniform grid
with second-order finite differences and composite trapezoid quadrature (axis -3,
arrays laid out (..., nz, ny, nx)).
"""
import math
from functools import cached_property

import numpy as np
from attrs import define, field, validators
from scipy import integrate

from .errors import GridError

DIRICHLET = "dirichlet"
NEUMANN = "neumann"
BC_TAGS = (DIRICHLET, NEUMANN)


def _at_least_four(instance, attribute, value):
    if value < 4:
        raise GridError(f"{attribute.name} must be >= 4, got {value}")


@define(frozen=True, slots=False)
class HorizontalGrid:
    """The periodic plane [0, lx) x [0, ly); also the ice grid."""

    nx: int = field(converter=int, validator=_at_least_four)
    ny: int = field(converter=int, validator=_at_least_four)
    lx: float = field(default=2 * math.pi, converter=float)
    ly: float = field(default=2 * math.pi, converter=float)

    @property
    def shape(self):
        return (self.ny, self.nx)

    @property
    def cell_area(self):
        return self.lx * self.ly / (self.nx * self.ny)

    @cached_property
    def x(self):
        return self.lx * np.arange(self.nx) / self.nx

    @cached_property
    def y(self):
        return self.ly * np.arange(self.ny) / self.ny

    @cached_property
    def mesh(self):
        """(X, Y), each of shape (ny, nx)."""
        return np.meshgrid(self.x, self.y)

    @cached_property
    def wavenumbers(self):
        """(KX, KY) of shape (ny, nx), Nyquist entries zeroed."""
        kx = 2 * np.pi * np.fft.fftfreq(self.nx, d=self.lx / self.nx)
        ky = 2 * np.pi * np.fft.fftfreq(self.ny, d=self.ly / self.ny)
        # 偶数网格的 Nyquist 模没有对称伙伴, 导数乘子置零
        if self.nx % 2 == 0:
            kx[self.nx // 2] = 0.0
        if self.ny % 2 == 0:
            ky[self.ny // 2] = 0.0
        KX, KY = np.meshgrid(kx, ky)
        return KX, KY

    @cached_property
    def k2(self):
        KX, KY = self.wavenumbers
        return KX ** 2 + KY ** 2

    def check(self, f, name="field"):
        if f.shape[-2:] != self.shape:
            raise GridError(f"{name} has horizontal shape {f.shape[-2:]}, grid is {self.shape}")

    def __repr__(self):
        return f'<HorizontalGrid {self.nx}x{self.ny} on {self.lx:.4g}x{self.ly:.4g}>'


@define(frozen=True, slots=False)
class LayerGrid:
    """A layer T^2 x (z_lo, z_hi) with boundary-condition tags at both ends."""

    nx: int = field(converter=int, validator=_at_least_four)
    ny: int = field(converter=int, validator=_at_least_four)
    lx: float = field(converter=float)
    ly: float = field(converter=float)
    nz: int = field(converter=int, validator=_at_least_four)
    z_lo: float = field(converter=float)
    z_hi: float = field(converter=float)
    bc_lo: str = field(default=DIRICHLET, validator=validators.in_(BC_TAGS))
    bc_hi: str = field(default=DIRICHLET, validator=validators.in_(BC_TAGS))

    def __attrs_post_init__(self):
        if not self.z_lo < self.z_hi:
            raise GridError(f"z_lo must be < z_hi, got {self.z_lo} >= {self.z_hi}")

    @classmethod
    def over(cls, plane, nz, z_lo, z_hi, bc_lo=DIRICHLET, bc_hi=DIRICHLET):
        return cls(plane.nx, plane.ny, plane.lx, plane.ly, nz, z_lo, z_hi, bc_lo, bc_hi)

    @cached_property
    def horizontal(self):
        return HorizontalGrid(self.nx, self.ny, self.lx, self.ly)

    @property
    def bc(self):
        return (self.bc_lo, self.bc_hi)

    @property
    def shape(self):
        return (self.nz, self.ny, self.nx)

    @property
    def depth(self):
        return self.z_hi - self.z_lo

    @property
    def dz(self):
        return self.depth / (self.nz - 1)

    @cached_property
    def z(self):
        return np.linspace(self.z_lo, self.z_hi, self.nz)

    @cached_property
    def quad_weights(self):
        w = np.full(self.nz, self.dz)
        w[0] = w[-1] = 0.5 * self.dz
        return w

    def with_nz(self, nz):
        return LayerGrid(self.nx, self.ny, self.lx, self.ly, nz, self.z_lo, self.z_hi, self.bc_lo, self.bc_hi)

    def check(self, f, name="field"):
        if f.ndim < 3 or f.shape[-3:] != self.shape:
            raise GridError(f"{name} has shape {f.shape}, layer grid is {self.shape}")

    def __repr__(self):
        return f'<LayerGrid {self.nx}x{self.ny}x{self.nz} z=({self.z_lo:.4g},{self.z_hi:.4g}) bc={self.bc}>'


def _plane(grid):
    return grid.horizontal if isinstance(grid, LayerGrid) else grid


# --- 水平谱微积分 ---

def spectral_forward(f, grid):
    plane = _plane(grid)
    plane.check(f)
    return np.fft.fft2(f, axes=(-2, -1), norm="forward")


def spectral_inverse(F, grid):
    plane = _plane(grid)
    plane.check(F, "spectral field")
    return np.fft.ifft2(F, axes=(-2, -1), norm="forward").real


def horiz_derivative(f, grid, axis):
    plane = _plane(grid)
    KX, KY = plane.wavenumbers
    if axis == "x":
        k = KX
    elif axis == "y":
        k = KY
    else:
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
    return spectral_inverse(1j * k * spectral_forward(f, plane), plane)


def horiz_gradient(phi, grid):
    """Stack (d/dx, d/dy) of a scalar field along a new leading axis."""
    plane = _plane(grid)
    KX, KY = plane.wavenumbers
    F = spectral_forward(phi, plane)
    return np.stack([spectral_inverse(1j * KX * F, plane), spectral_inverse(1j * KY * F, plane)])


def horiz_divergence(u, grid):
    """Horizontal divergence of a vector field with components on axis 0."""
    plane = _plane(grid)
    KX, KY = plane.wavenumbers
    F = spectral_forward(u, plane)
    return spectral_inverse(1j * (KX * F[0] + KY * F[1]), plane)


def horiz_laplacian(f, grid):
    plane = _plane(grid)
    return spectral_inverse(-plane.k2 * spectral_forward(f, plane), plane)


def horiz_jacobian(u, grid):
    """J[i, j] = d u_i / d x_j for a 2-component field u."""
    plane = _plane(grid)
    KX, KY = plane.wavenumbers
    F = spectral_forward(u, plane)
    J = np.empty((2, 2) + u.shape[1:])
    for i in range(2):
        J[i, 0] = spectral_inverse(1j * KX * F[i], plane)
        J[i, 1] = spectral_inverse(1j * KY * F[i], plane)
    return J


# --- 垂向差分 ---

def vert_derivative(f, grid):
    if f.shape[-3] < 3:
        raise GridError(f"vertical derivative needs nz >= 3, got {f.shape[-3]}")
    grid.check(f)
    return np.gradient(f, grid.dz, axis=-3, edge_order=2)


def vert_second_derivative(f, grid):
    """Centered second difference, four-point one-sided second-order closure at the ends."""
    grid.check(f)
    dz2 = grid.dz ** 2
    out = np.empty_like(f, dtype=float)
    out[..., 1:-1, :, :] = (f[..., 2:, :, :] - 2.0 * f[..., 1:-1, :, :] + f[..., :-2, :, :]) / dz2
    out[..., 0, :, :] = (2 * f[..., 0, :, :] - 5 * f[..., 1, :, :] + 4 * f[..., 2, :, :] - f[..., 3, :, :]) / dz2
    out[..., -1, :, :] = (2 * f[..., -1, :, :] - 5 * f[..., -2, :, :] + 4 * f[..., -3, :, :] - f[..., -4, :, :]) / dz2
    return out


def discrete_laplacian(f, grid):
    return horiz_laplacian(f, grid.horizontal) + vert_second_derivative(f, grid)


def vertical_average(f, grid):
    grid.check(f)
    return integrate.trapezoid(f, dx=grid.dz, axis=-3) / grid.depth


def vert_antiderivative(f, grid):
    """Cumulative trapezoid from z_lo; zero on the lowest level."""
    grid.check(f)
    return integrate.cumulative_trapezoid(f, dx=grid.dz, axis=-3, initial=0)


def boundary_trace(f, grid, side):
    grid.check(f)
    return f[..., 0, :, :] if side == "lo" else f[..., -1, :, :]


def boundary_dz(f, grid, side):
    """Second-order one-sided d/dz at z_lo ("lo") or z_hi ("hi")."""
    grid.check(f)
    h2 = 2.0 * grid.dz
    if side == "lo":
        return (-3 * f[..., 0, :, :] + 4 * f[..., 1, :, :] - f[..., 2, :, :]) / h2
    return (3 * f[..., -1, :, :] - 4 * f[..., -2, :, :] + f[..., -3, :, :]) / h2


def plane_inner(f, g, grid):
    """Grid inner product on T^2, summed over leading component axes."""
    plane = _plane(grid)
    return float(np.sum(f * g) * plane.cell_area)


def layer_inner(f, g, grid):
    """Trapezoid-in-z inner product on a layer, summed over component axes."""
    prod = np.sum(f * g, axis=tuple(range(f.ndim - 3))) if f.ndim > 3 else f * g
    return float(np.einsum('zyx,z->', prod, grid.quad_weights) * grid.horizontal.cell_area)
