# icelab/stepper.py
"""IMEX time integration of the coupled atmosphere / sea-ice / ocean system.

One step solves (I - dt A(s_n)) s_{n+1} = s_n + dt E(s_n) blockwise, where A is the
frozen quasilinear operator and E collects nonlinear transport, drag and forcing.
"""
import logging
import math

import attrs
import numpy as np
from attrs import define, field, validators
from scipy.sparse.linalg import LinearOperator, gmres

from .errors import CouplingDivergence, IceSolverError, ParameterError, SolverError
from .grid import (
    DIRICHLET,
    NEUMANN,
    HorizontalGrid,
    LayerGrid,
    boundary_dz,
    boundary_trace,
    discrete_laplacian,
    horiz_divergence,
    horiz_gradient,
    horiz_laplacian,
    spectral_forward,
    spectral_inverse,
    vertical_average,
)
from .hydrostatic import bilinearity, hydrostatic_project
from .ice_dynamics import (
    ice_advection,
    momentum_nonlin,
    tau_atm,
    tau_ocn,
    thermo_sources,
)
from .models import GrowthRate, IceState, PhysParams, RunResult, State, StepReport
from .rheology import HiblerLinearization, lower_order_terms, validate_ice_state
from .stokes import (
    dirichlet_operator,
    dtn_operator,
    ocean_dirichlet_solve,
    stokes_resolvent,
)

logger = logging.getLogger(__name__)

REACHED_T_END = "reached-t-end"
HIT_BOUNDARY = "hit-boundary-of-V"
BLOW_UP = "blow-up"


@define(frozen=True)
class SolverSettings:
    mu: float = field(default=1.0, converter=float)
    tol_couple: float = field(default=1e-8, converter=float)
    max_picard: int = field(default=50, converter=int)
    ice_method: str = field(default="gmres", validator=validators.in_(("gmres", "richardson")))
    ice_tol: float = field(default=1e-10, converter=float)
    ice_maxiter: int = field(default=200, converter=int)
    ice_restart: int = field(default=40, converter=int)
    normal_sign: float = field(default=1.0, converter=float)
    theta: float = field(default=1.0, converter=float)
    v_margin: float = field(default=1e-3, converter=float)
    overflow_guard: float = field(default=1e12, converter=float)

    def __attrs_post_init__(self):
        if self.normal_sign not in (1.0, -1.0):
            raise ParameterError(f"normal_sign must be +1 or -1, got {self.normal_sign}")
        if not 0.5 <= self.theta <= 1.0:
            raise ParameterError(f"theta must lie in [0.5, 1], got {self.theta}")


@define(frozen=True)
class CoupledModel:
    """Grids, constants and solver settings of one coupled configuration."""

    atm: LayerGrid
    ocn: LayerGrid
    ice: HorizontalGrid
    params: PhysParams
    growth: GrowthRate = field(factory=GrowthRate)
    settings: SolverSettings = field(factory=SolverSettings)

    @classmethod
    def build(cls, params, nx=32, ny=32, lx=2 * math.pi, ly=2 * math.pi,
              nz_atm=33, nz_ocn=33, growth=None, settings=None):
        ice = HorizontalGrid(nx, ny, lx, ly)
        atm = LayerGrid.over(ice, nz_atm, params.kappa2, params.h_atm, NEUMANN, NEUMANN)
        ocn = LayerGrid.over(ice, nz_ocn, -params.h_ocn, 0.0, DIRICHLET, DIRICHLET)
        return cls(atm, ocn, ice, params, growth or GrowthRate(), settings or SolverSettings())

    def replace(self, **changes):
        return attrs.evolve(self, **changes)

    def zero_state(self, t=0.0):
        return State(
            v_atm=np.zeros((2,) + self.atm.shape),
            v_ocn=np.zeros((2,) + self.ocn.shape),
            u_ice=np.zeros((2,) + self.ice.shape),
            h=np.zeros(self.ice.shape),
            a=np.zeros(self.ice.shape),
            t=t,
        )

    def __repr__(self):
        return f'<CoupledModel {self.ice.nx}x{self.ice.ny} nz=({self.atm.nz},{self.ocn.nz})>'


@define
class CouplingSolve:
    v_ocn: np.ndarray
    u_ice: np.ndarray
    iterations: int
    history: list
    trace_residual: float
    ocean_residual: float
    ice_residual: float
    cross_check_error: float = None


# --- 冻结系数的海冰动量求解 ---

class FrozenIceOperator:
    """u -> u - dt A^H(s0) u, preconditioned by the plane-averaged principal part."""

    def __init__(self, model, state0, dt):
        self.model = model
        self.dt = dt
        self.lin = HiblerLinearization(IceState.of(state0), model.ice, model.params)
        M = np.eye(2)[:, :, None, None] - dt * self.lin.mean_symbol()
        det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
        self._minv = np.array([[M[1, 1], -M[0, 1]], [-M[1, 0], M[0, 0]]]) / det

    def apply(self, u):
        return u - self.dt * self.lin.apply(u)

    def precondition(self, r):
        grid = self.model.ice
        R = spectral_forward(r, grid)
        return spectral_inverse(np.einsum('ijyx,jyx->iyx', self._minv, R), grid)

    def solve(self, c, x0=None, apply=None):
        """Solve apply(u) = c (apply defaults to self.apply)."""
        apply = apply or self.apply
        settings = self.model.settings
        shape = c.shape
        bnorm = float(np.linalg.norm(c))
        if bnorm == 0.0:
            return np.zeros_like(c)
        if settings.ice_method == "richardson":
            return self._richardson(apply, c, x0, bnorm)

        n = c.size
        A = LinearOperator((n, n), matvec=lambda x: apply(x.reshape(shape)).ravel(), dtype=float)
        M = LinearOperator((n, n), matvec=lambda x: self.precondition(x.reshape(shape)).ravel(), dtype=float)
        history = []
        restart = max(1, min(settings.ice_restart, n))
        x, info = gmres(
            A, c.ravel(),
            x0=None if x0 is None else x0.ravel(),
            rtol=settings.ice_tol, atol=0.0,
            restart=restart, maxiter=max(1, settings.ice_maxiter // restart),
            M=M, callback=history.append, callback_type="pr_norm",
        )
        u = x.reshape(shape)
        residual = float(np.linalg.norm(apply(u) - c)) / bnorm
        logger.debug("ice gmres: %d iterations, residual %.2e", len(history), residual)
        if info != 0 and residual > 10 * settings.ice_tol:
            raise IceSolverError("frozen ice momentum solve did not converge", history + [residual])
        return u

    def _richardson(self, apply, c, x0, bnorm):
        settings = self.model.settings
        u = np.zeros_like(c) if x0 is None else x0.copy()
        history = []
        for _ in range(settings.ice_maxiter):
            r = c - apply(u)
            history.append(float(np.linalg.norm(r)) / bnorm)
            if history[-1] <= settings.ice_tol:
                return u
            u = u + self.precondition(r)
        raise IceSolverError("preconditioned fixed point did not converge", history)


# --- 显式项与冻结算子 ---

def explicit_rhs(model, s, forcing, t=None):
    """f - F(s) for every row of the state."""
    p = model.params
    fs = forcing.at(s.t if t is None else t, s)
    atm = hydrostatic_project(fs.f_atm, model.atm) - bilinearity(s.v_atm, s.v_atm, model.atm)
    ocn = hydrostatic_project(fs.f_ocn, model.ocn) - bilinearity(s.v_ocn, s.v_ocn, model.ocn)

    mass = p.rho_ice * s.h
    drag = tau_atm(boundary_trace(s.v_atm, model.atm, "lo"), p)
    ice = (-momentum_nonlin(s.u_ice, model.ice) + drag / mass
           - p.g_grav * horiz_gradient(fs.H_height, model.ice) + fs.src_ice)

    S_h, S_a = thermo_sources(s.h, s.a, model.growth, p)
    h = S_h - ice_advection(s.u_ice, s.h, model.ice) + fs.src_h
    a = S_a - ice_advection(s.u_ice, s.a, model.ice) + fs.src_a
    return State(atm, ocn, ice, h, a, t=s.t)


def interface_shear(model, v_ocn):
    return model.settings.normal_sign * boundary_dz(v_ocn, model.ocn, "hi")


def operator_apply(model, s0, s):
    """A(s0) s. Fluid rows are the discrete Laplacian; their pressure comes from the constraint solve."""
    p = model.params
    lin = HiblerLinearization(IceState.of(s0), model.ice, p)
    coupling = tau_ocn(interface_shear(model, s.v_ocn), p) / (p.rho_ice * s0.h)
    ice = lin.apply(s.u_ice) + lower_order_terms(s0.h, s0.a, s.h, s.a, model.ice, p) - coupling
    return State(
        v_atm=discrete_laplacian(s.v_atm, model.atm),
        v_ocn=discrete_laplacian(s.v_ocn, model.ocn),
        u_ice=ice,
        h=p.d_h * horiz_laplacian(s.h, model.ice),
        a=p.d_a * horiz_laplacian(s.a, model.ice),
        t=s.t,
    )


# --- 隐式块求解 ---

def _diffuse(field_, d, dt, grid):
    return spectral_inverse(spectral_forward(field_, grid) / (1.0 + dt * d * grid.k2), grid)


def coupled_ocean_ice_solve(model, s_frozen, rhs_ocn, rhs_ice, dt, cross_check=False):
    """Picard iteration between the ocean Dirichlet solve and the frozen ice momentum solve."""
    if not dt > 0:
        raise ParameterError(f"dt must be > 0, got {dt}")
    p, settings = model.params, model.settings
    mu = 1.0 / dt
    mass = p.rho_ice * s_frozen.h
    op = FrozenIceOperator(model, s_frozen, dt)

    u = np.array(rhs_ice, dtype=float)
    history = []
    for _ in range(settings.max_picard):
        ocean = ocean_dirichlet_solve(model.ocn, mu, mu * rhs_ocn, u)
        c = rhs_ice - dt * tau_ocn(interface_shear(model, ocean.v), p) / mass
        u_new = op.solve(c, x0=u)
        change = float(np.max(np.abs(u_new - u))) / max(1.0, float(np.max(np.abs(u_new))))
        history.append(change)
        u = u_new
        # 相对于速度量级的迭代增量
        if change <= settings.tol_couple:
            break
    else:
        raise CouplingDivergence(f"ocean/ice coupling did not converge in {settings.max_picard} iterations",
                                 history)

    # 最后一次海洋求解使界面迹严格等于海冰速度
    ocean = ocean_dirichlet_solve(model.ocn, mu, mu * rhs_ocn, u)
    trace_residual = float(np.max(np.abs(boundary_trace(ocean.v, model.ocn, "hi") - u)))
    ice_lhs = op.apply(u) + dt * tau_ocn(interface_shear(model, ocean.v), p) / mass
    scale = max(float(np.max(np.abs(rhs_ice))), float(np.max(np.abs(ice_lhs))))
    ice_residual = float(np.max(np.abs(ice_lhs - rhs_ice))) / scale if scale > 0 else 0.0
    logger.debug("coupling converged in %d iterations (trace %.1e)", len(history), trace_residual)

    result = CouplingSolve(
        v_ocn=ocean.v, u_ice=u, iterations=len(history), history=history,
        trace_residual=trace_residual, ocean_residual=ocean.residual_norm,
        ice_residual=ice_residual,
    )
    if cross_check:
        v_s, u_s = similarity_transform_solve(model, s_frozen, rhs_ocn, rhs_ice, dt)
        result.cross_check_error = max(float(np.max(np.abs(v_s - ocean.v))),
                                       float(np.max(np.abs(u_s - u))))
        logger.info("similarity-transform cross-check: max deviation %.2e", result.cross_check_error)
    return result


def similarity_transform_solve(model, s_frozen, rhs_ocn, rhs_ice, dt):
    """Solve the ocean/ice block after substituting w = v_ocn - L_mu u_ice.

    w solves a homogeneous-trace resolvent problem; the ice row then carries the
    Dirichlet-to-Neumann operator and is solved directly.
    """
    p, settings = model.params, model.settings
    mu = 1.0 / dt
    mass = p.rho_ice * s_frozen.h
    op = FrozenIceOperator(model, s_frozen, dt)
    w = stokes_resolvent(model.ocn, mu, mu * rhs_ocn, (DIRICHLET, DIRICHLET)).v

    def apply(u):
        dtn = dtn_operator(model.ocn, mu, u, settings.normal_sign)
        return op.apply(u) - dt * tau_ocn(dtn, p) / mass

    c = rhs_ice - dt * tau_ocn(interface_shear(model, w), p) / mass
    u = op.solve(c, apply=apply)
    return w + dirichlet_operator(model.ocn, mu, u).v, u


def _block_solve(model, s_frozen, rhs, dt, cross_check=False):
    if not dt > 0:
        raise ParameterError(f"dt must be > 0, got {dt}")
    p = model.params
    mu = 1.0 / dt
    atm = stokes_resolvent(model.atm, mu, mu * rhs.v_atm, (NEUMANN, NEUMANN))
    h = _diffuse(rhs.h, p.d_h, dt, model.ice)
    a = _diffuse(rhs.a, p.d_a, dt, model.ice)
    b_u = rhs.u_ice + dt * lower_order_terms(s_frozen.h, s_frozen.a, h, a, model.ice, p)
    coupling = coupled_ocean_ice_solve(model, s_frozen, rhs.v_ocn, b_u, dt, cross_check)
    new = State(atm.v, coupling.v_ocn, coupling.u_ice, h, a, t=s_frozen.t)
    return new, atm, coupling


def implicit_block_solve(model, s_frozen, rhs, dt):
    """Apply (I - dt A(s_frozen))^-1 to the state-shaped right-hand side rhs."""
    return _block_solve(model, s_frozen, rhs, dt)[0]


def mean_divergence(v, grid):
    return float(np.max(np.abs(horiz_divergence(vertical_average(v, grid), grid))))


def constraint_margin(state, params):
    return float(min(np.min(state.h - params.kappa1), np.min(params.kappa2 - state.h),
                     np.min(state.a), np.min(1.0 - state.a)))


def imex_step(model, s, forcing, dt, cross_check=False):
    """s_{n+1} = s_n + dt (A(s_n) s_{n+1} + E(s_n)), theta-weighted when theta < 1."""
    validate_ice_state(s.h, s.a, model.params)
    theta = model.settings.theta
    rhs = s.combine(explicit_rhs(model, s, forcing), dt)
    if theta < 1.0:
        rhs = rhs.combine(operator_apply(model, s, s), (1.0 - theta) * dt)
    new, atm, coupling = _block_solve(model, s, rhs, theta * dt, cross_check)
    new = new.replace(t=s.t + dt)
    report = StepReport(
        picard_iters=coupling.iterations,
        coupling_residual=coupling.trace_residual,
        constraint_margin=constraint_margin(new, model.params),
        solver_residuals={
            'atm': atm.residual_norm,
            'ocn': coupling.ocean_residual,
            'ice': coupling.ice_residual,
            'div_atm': mean_divergence(new.v_atm, model.atm),
            'div_ocn': mean_divergence(new.v_ocn, model.ocn),
        },
    )
    if coupling.cross_check_error is not None:
        report.solver_residuals['cross_check'] = coupling.cross_check_error
    return new, report


# --- 运行与终止判据 ---

def _boundary_hit(state, params, margin_h):
    if np.min(state.h) <= params.kappa1 + margin_h:
        return "h reached kappa1"
    if np.max(state.h) >= params.kappa2 - margin_h:
        return "h reached kappa2"
    if np.min(state.a) < 0.0:
        return "a reached 0"
    if np.max(state.a) > 1.0:
        return "a reached 1"
    return None


def run(model, s0, forcing, dt, t_end, n_out=None, on_snapshot=None):
    """Step from s0 to t_end; stop early when the ice state reaches the boundary of V or blows up."""
    if not dt > 0:
        raise ParameterError(f"dt must be > 0, got {dt}")
    if not t_end - s0.t >= dt * (1 - 1e-12):
        raise ParameterError(f"t_end must be >= t0 + dt, got t_end={t_end}")
    p, settings = model.params, model.settings
    margin_h = settings.v_margin * p.kappa1
    validate_ice_state(s0.h, s0.a, p, margin=margin_h)

    n_steps = max(1, math.ceil((t_end - s0.t) / dt - 1e-9))
    snapshots = []

    def emit(step, state):
        snapshots.append((step, state.t))
        if on_snapshot is not None:
            on_snapshot(step, state)

    emit(0, s0)
    state, reports = s0, []
    cause, detail = REACHED_T_END, f"t = {s0.t + n_steps * dt:.6g}"
    step = 0
    for step in range(1, n_steps + 1):
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                new, report = imex_step(model, state, forcing, dt)
        except SolverError as exc:
            cause, detail = BLOW_UP, f"inner solver failed: {exc}"
            step -= 1
            break
        state = new
        reports.append(report)
        if not state.is_finite() or state.max_norm() > settings.overflow_guard:
            cause, detail = BLOW_UP, f"max norm exceeded {settings.overflow_guard:.1e}"
            break
        hit = _boundary_hit(state, p, margin_h)
        if hit is not None:
            cause, detail = HIT_BOUNDARY, hit
            break
        if n_out and step % n_out == 0:
            emit(step, state)
    if not snapshots or snapshots[-1][0] != step:
        emit(step, state)
    logger.info("run finished: %s: %s after %d steps", cause, detail, step)
    return RunResult(cause=cause, detail=detail, final_state=state, steps=step,
                     reports=reports, snapshots=snapshots)
