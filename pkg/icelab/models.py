# icelab/models.py
"""Record types passed between the solver layers."""
import math
from typing import Callable, Optional

import attrs
import numpy as np
from attrs import define, field, validators

from .errors import ParameterError


def _positive(instance, attribute, value):
    if not value > 0:
        raise ParameterError(f"{attribute.name} must be > 0, got {value}")


def _finite(instance, attribute, value):
    if not math.isfinite(value):
        raise ParameterError(f"{attribute.name} must be finite, got {value}")


def _as_float(value):
    return float(value)


@define(frozen=True)
class PhysParams:
    """Physical constants of the coupled model."""

    # --- 密度 (kg/m^3) ---
    rho_atm: float = field(default=1.3, converter=_as_float, validator=_positive)
    rho_ocn: float = field(default=1026.0, converter=_as_float, validator=_positive)
    rho_ice: float = field(default=900.0, converter=_as_float, validator=_positive)
    # --- 拖曳系数与旋转角 ---
    C_atm: float = field(default=1.2e-3, converter=_as_float, validator=_finite)
    C_ocn: float = field(default=5.5e-3, converter=_as_float, validator=_finite)
    theta_atm: float = field(default=0.0, converter=_as_float, validator=_finite)
    theta_ocn: float = field(default=0.0, converter=_as_float, validator=_finite)
    # --- Hibler 流变参数 ---
    p_star: float = field(default=27500.0, converter=_as_float, validator=_positive)
    c_star: float = field(default=20.0, converter=_as_float, validator=_finite)
    e_ratio: float = field(default=2.0, converter=_as_float)
    delta_reg: float = field(default=2e-9, converter=_as_float, validator=_positive)
    # --- 扩散、重力、几何 ---
    d_h: float = field(default=1e-2, converter=_as_float, validator=_positive)
    d_a: float = field(default=1e-2, converter=_as_float, validator=_positive)
    g_grav: float = field(default=9.81, converter=_as_float, validator=_finite)
    kappa1: float = field(default=0.1, converter=_as_float, validator=_positive)
    kappa2: float = field(default=3.0, converter=_as_float, validator=_positive)
    h_ocn: float = field(default=1.0, converter=_as_float, validator=_positive)
    h_atm: float = field(default=4.0, converter=_as_float, validator=_positive)

    @e_ratio.validator
    def _check_e(self, attribute, value):
        if not value >= 1.0:
            raise ParameterError(f"e_ratio must be >= 1, got {value}")

    def __attrs_post_init__(self):
        if not self.kappa1 < self.kappa2:
            raise ParameterError(f"kappa1 must be < kappa2, got {self.kappa1} >= {self.kappa2}")
        if not self.h_atm > self.kappa2:
            raise ParameterError(f"h_atm must exceed kappa2, got {self.h_atm} <= {self.kappa2}")

    def replace(self, **changes):
        return attrs.evolve(self, **changes)

    def __repr__(self):
        return f'<PhysParams p*={self.p_star} e={self.e_ratio} delta={self.delta_reg}>'


@define(frozen=True)
class GrowthRate:
    """Ice growth rate f(x), x being a thickness."""

    kind: str = field(default="decaying-exponential",
                      validator=validators.in_(("constant", "decaying-exponential", "table")))
    f0: float = field(default=0.0, converter=_as_float, validator=_finite)
    h_ref: float = field(default=1.0, converter=_as_float, validator=_positive)
    breakpoints: tuple = field(default=(), converter=tuple)
    values: tuple = field(default=(), converter=tuple)

    def __attrs_post_init__(self):
        if self.kind != "table":
            return
        if len(self.breakpoints) < 2 or len(self.breakpoints) != len(self.values):
            raise ParameterError("table growth rate needs >= 2 breakpoints and one value per breakpoint")
        if np.any(np.diff(self.breakpoints) <= 0):
            raise ParameterError("table breakpoints must be strictly increasing")


@define(frozen=True, eq=False)
class State:
    """Principal variable (v_atm, v_ocn, u_ice, h, a) at time t.

    Velocity arrays carry the component axis first: v_atm, v_ocn have shape
    (2, nz, ny, nx), u_ice has shape (2, ny, nx), h and a have shape (ny, nx).
    The same class doubles as a state-shaped tendency.
    """

    v_atm: np.ndarray
    v_ocn: np.ndarray
    u_ice: np.ndarray
    h: np.ndarray
    a: np.ndarray
    t: float = 0.0

    FIELDS = ('v_atm', 'v_ocn', 'u_ice', 'h', 'a')

    def fields(self):
        return {name: getattr(self, name) for name in self.FIELDS}

    def replace(self, **changes):
        return attrs.evolve(self, **changes)

    def combine(self, other, alpha=1.0):
        """Return self + alpha * other fieldwise (time of self)."""
        return State(**{name: getattr(self, name) + alpha * getattr(other, name)
                        for name in self.FIELDS}, t=self.t)

    def max_norm(self):
        return max(float(np.max(np.abs(arr))) for arr in self.fields().values())

    def distance(self, other):
        return max(float(np.max(np.abs(getattr(self, n) - getattr(other, n)))) for n in self.FIELDS)

    def is_finite(self):
        return all(np.all(np.isfinite(arr)) for arr in self.fields().values())

    def __repr__(self):
        return f'<State t={self.t:.6g}>'


@define(frozen=True)
class ForcingSample:
    """Forcing evaluated at one instant."""

    f_atm: np.ndarray
    f_ocn: np.ndarray
    H_height: np.ndarray
    src_ice: np.ndarray
    src_h: np.ndarray
    src_a: np.ndarray


def _as_closure(value):
    if value is None or callable(value):
        return value
    frozen = np.asarray(value, dtype=float)
    return lambda t: frozen


@define(frozen=True)
class Forcing:
    """External forcing: f_atm, f_ocn, sea-surface height H and optional manufactured sources.

    Each entry is a closure t -> array, a constant array, or None (zero).
    """

    f_atm: Optional[Callable] = field(default=None, converter=_as_closure)
    f_ocn: Optional[Callable] = field(default=None, converter=_as_closure)
    H_height: Optional[Callable] = field(default=None, converter=_as_closure)
    src_ice: Optional[Callable] = field(default=None, converter=_as_closure)
    src_h: Optional[Callable] = field(default=None, converter=_as_closure)
    src_a: Optional[Callable] = field(default=None, converter=_as_closure)

    def at(self, t, like):
        """Sample every entry at time t; `like` is a State providing shapes for zeros."""
        def pick(fn, ref):
            if fn is None:
                return np.zeros_like(ref)
            out = np.asarray(fn(t), dtype=float)
            if out.shape != ref.shape:
                out = np.broadcast_to(out, ref.shape)
            return out

        return ForcingSample(
            f_atm=pick(self.f_atm, like.v_atm),
            f_ocn=pick(self.f_ocn, like.v_ocn),
            H_height=pick(self.H_height, like.h),
            src_ice=pick(self.src_ice, like.u_ice),
            src_h=pick(self.src_h, like.h),
            src_a=pick(self.src_a, like.a),
        )


@define(frozen=True, eq=False)
class StokesSolve:
    v: np.ndarray
    grad_pi: np.ndarray
    residual_norm: float = 0.0

    def __repr__(self):
        return f'<StokesSolve residual={self.residual_norm:.3e}>'


@define(frozen=True, eq=False)
class HydrostaticDecomposition:
    mean: np.ndarray
    fluct: np.ndarray

    def reconstruct(self):
        return self.fluct + self.mean[:, None]


@define(frozen=True, eq=False)
class StrainState:
    eps: np.ndarray
    tri_delta: np.ndarray


@define(frozen=True, eq=False)
class IceState:
    u_ice: np.ndarray
    h: np.ndarray
    a: np.ndarray

    @classmethod
    def of(cls, state):
        return cls(state.u_ice, state.h, state.a)


@define(frozen=True)
class EllipticityCertificate:
    c_min: float
    witness: dict

    def to_dict(self):
        return {'c_min': self.c_min, 'witness': self.witness}


@define
class StepReport:
    """Diagnostics of one accepted imex_step."""

    picard_iters: int = 0
    coupling_residual: float = 0.0
    constraint_margin: float = 0.0
    solver_residuals: dict = field(factory=dict)

    def to_dict(self):
        return attrs.asdict(self)


@define
class RunResult:
    cause: str
    detail: str
    final_state: State
    steps: int
    reports: list = field(factory=list)
    snapshots: list = field(factory=list)

    def to_dict(self):
        return {
            'cause': self.cause,
            'detail': self.detail,
            'steps': self.steps,
            'final_time': self.final_state.t,
            'snapshots': [list(s) for s in self.snapshots],
            'last_step': self.reports[-1].to_dict() if self.reports else None,
        }

    def __repr__(self):
        return f'<RunResult {self.cause} after {self.steps} steps>'


@define
class ConvergenceReport:
    resolutions: list
    errors_max: list
    errors_l2: list
    fitted_order: float
    r2_fit: float
    monotone: bool = True

    @property
    def trusted(self):
        return self.r2_fit >= 0.98

    def to_dict(self):
        data = attrs.asdict(self)
        data['trusted'] = self.trusted
        return data


@define
class LedgerEntry:
    criterion: int
    name: str
    passed: bool
    value: Optional[float] = None
    threshold: Optional[str] = None
    detail: str = ""

    def to_dict(self):
        return attrs.asdict(self)


@define
class Ledger:
    entries: list = field(factory=list)

    @property
    def all_passed(self):
        return bool(self.entries) and all(e.passed for e in self.entries)

    def to_dict(self):
        return {'all_passed': self.all_passed, 'entries': [e.to_dict() for e in self.entries]}

    def to_text(self):
        lines = []
        for e in sorted(self.entries, key=lambda e: e.criterion):
            mark = "PASS" if e.passed else "FAIL"
            value = "" if e.value is None else f" value={e.value:.4g}"
            bound = "" if e.threshold is None else f" ({e.threshold})"
            lines.append(f"[{mark}] {e.criterion:2d} {e.name}{value}{bound} {e.detail}".rstrip())
        lines.append("ALL PASS" if self.all_passed else "FAILURES PRESENT")
        return "\n".join(lines) + "\n"
