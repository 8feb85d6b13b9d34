# icelab/verification.py
"""Manufactured solutions, convergence-order fits and the acceptance suites.

Every suite returns LedgerEntry records; `suite_all` gathers them into one Ledger
with exactly one entry per acceptance criterion.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from attrs import define

from .errors import ManufacturedSolutionError, ParameterError
from .grid import (
    DIRICHLET,
    LayerGrid,
    boundary_dz,
    boundary_trace,
    horiz_gradient,
    vert_derivative,
)
from .hydrostatic import hydrostatic_project
from .ice_dynamics import thermo_sources
from .models import ConvergenceReport, Forcing, GrowthRate, IceState, Ledger, LedgerEntry, State
from .rheology import ellipticity_certificate, hibler_apply_linearized, hibler_div, ice_pressure
from .stepper import (
    HIT_BOUNDARY,
    REACHED_T_END,
    CoupledModel,
    coupled_ocean_ice_solve,
    explicit_rhs,
    imex_step,
    mean_divergence,
    operator_apply,
    run,
)
from .stokes import (
    adjoint_identity_check,
    dirichlet_operator,
    dtn_operator,
    extension_profile,
    stokes_resolvent,
)

logger = logging.getLogger(__name__)


# --- 人造解 ---

@define(frozen=True)
class ExactSolution:
    """Closed-form trajectory: state(t) and its time derivative rate(t)."""

    state: object
    rate: object


def trig_exact_solution(model, amplitude=0.1, omega=1.0):
    """Low-mode trigonometric trajectory compatible with every boundary and coupling condition.

    The atmosphere is z-independent and divergence-free; the ocean is r(z) u_ice
    with the mean-free extension profile, so the interface trace equals u_ice.
    """
    p = model.params
    X, Y = model.ice.mesh
    kx, ky = 2 * np.pi / model.ice.lx, 2 * np.pi / model.ice.ly
    r = extension_profile(model.ocn)[None, :, None, None]
    base_u = np.stack([np.sin(kx * X), np.cos(kx * X)])
    base_atm = np.broadcast_to(np.stack([np.sin(ky * Y), np.zeros_like(Y)])[:, None],
                               (2,) + model.atm.shape)
    h_mid, h_amp = 0.5 * (p.kappa1 + p.kappa2), 0.1 * (p.kappa2 - p.kappa1)
    A = amplitude

    def state(t):
        T = 1.0 + 0.5 * np.sin(omega * t)
        u = A * T * base_u
        return State(
            v_atm=A * np.cos(omega * t) * base_atm,
            v_ocn=r * u[:, None],
            u_ice=u,
            h=h_mid + h_amp * np.cos(kx * X) * T,
            a=0.8 + 0.05 * np.sin(ky * Y) * np.cos(omega * t),
            t=t,
        )

    def rate(t):
        dT = 0.5 * omega * np.cos(omega * t)
        du = A * dT * base_u
        return State(
            v_atm=-A * omega * np.sin(omega * t) * base_atm,
            v_ocn=r * du[:, None],
            u_ice=du,
            h=h_amp * np.cos(kx * X) * dT,
            a=-0.05 * omega * np.sin(ky * Y) * np.sin(omega * t),
            t=t,
        )

    return ExactSolution(state=state, rate=rate)


def check_exact_state(model, s, tol=1e-12):
    """Reject exact fields that break a boundary, trace or mean-divergence condition."""
    problems = []
    scale_atm = max(1.0, float(np.max(np.abs(s.v_atm))))
    for side in ("lo", "hi"):
        if np.max(np.abs(boundary_dz(s.v_atm, model.atm, side))) > tol * scale_atm / model.atm.dz:
            problems.append(f"v_atm violates the Neumann condition at z_{side}")
    scale = max(1.0, float(np.max(np.abs(s.u_ice))))
    if np.max(np.abs(boundary_trace(s.v_ocn, model.ocn, "lo"))) > tol * scale:
        problems.append("v_ocn does not vanish at the ocean bottom")
    if np.max(np.abs(boundary_trace(s.v_ocn, model.ocn, "hi") - s.u_ice)) > tol * scale:
        problems.append("v_ocn trace differs from u_ice at the interface")
    for name, grid in (("v_atm", model.atm), ("v_ocn", model.ocn)):
        if mean_divergence(getattr(s, name), grid) > 1e-10 * max(1.0, scale):
            problems.append(f"{name} has a divergent vertical mean")
    if problems:
        raise ManufacturedSolutionError("; ".join(problems))


def manufactured_forcing(model, exact, check_times=(0.0, 0.5, 1.0)):
    """Forcing under which `exact` solves the semi-discrete system.

    Every row equals d/dt s - A(s) s - E(s) evaluated with the discrete operators.
    """
    for t in check_times:
        check_exact_state(model, exact.state(t))
    zero = Forcing()
    cache = {}

    def residual(t):
        t = float(t)
        if t not in cache:
            s = exact.state(t)
            res = exact.rate(t).combine(operator_apply(model, s, s), -1.0)
            res = res.combine(explicit_rhs(model, s, zero, t), -1.0)
            cache.clear()
            cache[t] = res
        return cache[t]

    return Forcing(
        f_atm=lambda t: residual(t).v_atm,
        f_ocn=lambda t: residual(t).v_ocn,
        src_ice=lambda t: residual(t).u_ice,
        src_h=lambda t: residual(t).h,
        src_a=lambda t: residual(t).a,
    )


# --- 收敛阶 ---

def fit_order(levels, errors):
    """Least-squares slope of log(error) against log(level), and its r^2."""
    x = np.log(np.asarray(levels, dtype=float))
    y = np.log(np.maximum(np.asarray(errors, dtype=float), 1e-300))
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), r2


def convergence_order(run_fn, levels):
    """Run `run_fn(level)` per level (a step size) and fit the observed order.

    run_fn returns the max-norm error or a (max, l2) pair.
    """
    levels = list(levels)
    if len(levels) < 3:
        raise ParameterError("convergence_order needs at least 3 levels")
    errors_max, errors_l2 = [], []
    for level in levels:
        out = run_fn(level)
        e_max, e_l2 = (out, out) if np.isscalar(out) else out
        errors_max.append(float(e_max))
        errors_l2.append(float(e_l2))
    order, r2 = fit_order(levels, errors_max)
    ranked = [e for _, e in sorted(zip(levels, errors_max), reverse=True)]
    monotone = all(b < a for a, b in zip(ranked, ranked[1:]))
    if not monotone:
        logger.warning("non-monotone error sequence %s for levels %s", errors_max, levels)
    return ConvergenceReport(resolutions=levels, errors_max=errors_max, errors_l2=errors_l2,
                             fitted_order=order, r2_fit=r2, monotone=monotone)


def _small_layer(grid, nz, n=8):
    return LayerGrid(n, n, grid.lx, grid.ly, nz, grid.z_lo, grid.z_hi, grid.bc_lo, grid.bc_hi)


def vertical_derivative_convergence(levels=(17, 33, 65, 129)):
    """Order of vert_derivative on sin z over (0, 1)."""
    def err(dz):
        nz = int(round(1.0 / dz)) + 1
        grid = LayerGrid(4, 4, 1.0, 1.0, nz, 0.0, 1.0)
        f = np.broadcast_to(np.sin(grid.z)[:, None, None], grid.shape)
        return float(np.max(np.abs(vert_derivative(f, grid) - np.cos(grid.z)[:, None, None])))

    return convergence_order(err, [1.0 / (n - 1) for n in levels])


def resolvent_convergence(model, levels=(17, 33, 65, 129), c=1.0):
    """Order of the k = 0 Dirichlet resolvent against the two-point closed form."""
    mu = model.settings.mu

    def err(dz):
        nz = int(round(model.ocn.depth / dz)) + 1
        grid = _small_layer(model.ocn, nz)
        f = np.zeros((2,) + grid.shape)
        f[0] = c
        v = stokes_resolvent(grid, mu, f, (DIRICHLET, DIRICHLET)).v
        zm, L = 0.5 * (grid.z_lo + grid.z_hi), grid.depth
        exact = (c / mu) * (1 - np.cosh(math.sqrt(mu) * (grid.z - zm)) / np.cosh(math.sqrt(mu) * L / 2))
        diff = v[0] - exact[:, None, None]
        return float(np.max(np.abs(diff))), float(np.sqrt(np.mean(diff ** 2)))

    return convergence_order(err, [model.ocn.depth / (n - 1) for n in levels])


def dirichlet_convergence(model, levels=(17, 33, 65, 129)):
    """Order of L_mu on a single shear mode plus a constant mode, against closed forms."""
    mu = model.settings.mu

    def err(dz):
        nz = int(round(model.ocn.depth / dz)) + 1
        grid = _small_layer(model.ocn, nz)
        _, Y = grid.horizontal.mesh
        ky = 2 * np.pi / grid.ly
        phi = np.stack([np.sin(ky * Y), np.full_like(Y, 0.5)])
        v = dirichlet_operator(grid, mu, phi).v
        zz = (grid.z - grid.z_lo)[:, None, None]
        lam1, lam0 = math.sqrt(mu + ky ** 2), math.sqrt(mu)
        exact = np.stack([np.sin(ky * Y) * np.sinh(lam1 * zz) / math.sinh(lam1 * grid.depth),
                          0.5 * np.sinh(lam0 * zz) / math.sinh(lam0 * grid.depth) * np.ones_like(Y)])
        diff = v - exact
        return float(np.max(np.abs(diff))), float(np.sqrt(np.mean(diff ** 2)))

    return convergence_order(err, [model.ocn.depth / (n - 1) for n in levels])


def dtn_convergence(model, levels=(17, 33, 65, 129), c=1.0):
    mu, sign = model.settings.mu, model.settings.normal_sign
    exact = -sign * c * math.sqrt(mu) / math.tanh(math.sqrt(mu) * model.ocn.depth)

    def err(dz):
        nz = int(round(model.ocn.depth / dz)) + 1
        grid = _small_layer(model.ocn, nz)
        phi = np.zeros((2,) + grid.horizontal.shape)
        phi[0] = c
        return float(np.max(np.abs(dtn_operator(grid, mu, phi, sign)[0] - exact)))

    return convergence_order(err, [model.ocn.depth / (n - 1) for n in levels])


def _smooth(rng, plane, lead=(), n_modes=2):
    X, Y = plane.mesh
    kx, ky = 2 * np.pi / plane.lx, 2 * np.pi / plane.ly
    out = np.zeros(tuple(lead) + plane.shape)
    for m in range(n_modes + 1):
        for n in range(-n_modes, n_modes + 1):
            phase = m * kx * X + n * ky * Y
            c = rng.normal(size=tuple(lead) + (2,))
            out += c[..., 0, None, None] * np.cos(phase) + c[..., 1, None, None] * np.sin(phase)
    return out


def adjoint_convergence(model, rng, levels=(33, 65, 129)):
    mu = model.settings.mu
    plane = _small_layer(model.ocn, 5).horizontal
    phi = _smooth(rng, plane, (2,))
    coef = _smooth(rng, plane, (2, 2))

    def err(dz):
        nz = int(round(model.ocn.depth / dz)) + 1
        grid = _small_layer(model.ocn, nz)
        zeta = ((grid.z - grid.z_lo) / grid.depth)[None, :, None, None]
        k = coef[:, 0][:, None] * np.cos(np.pi * zeta) + coef[:, 1][:, None] * zeta ** 2
        return adjoint_identity_check(grid, mu, phi, hydrostatic_project(k, grid))

    return convergence_order(err, [model.ocn.depth / (n - 1) for n in levels])


def temporal_convergence(model, t_end=0.2, n_levels=6, amplitude=0.1, coarsest_steps=16):
    """Global error of imex_step on the manufactured trajectory under dt halving.

    The coarsest level takes `coarsest_steps` steps; coarser levels sit outside the
    first-order regime and pull the fitted slope below one.
    """
    exact = trig_exact_solution(model, amplitude)
    forcing = manufactured_forcing(model, exact)
    target = exact.state(t_end)

    def err(dt):
        s = exact.state(0.0)
        for _ in range(int(round(t_end / dt))):
            s, _ = imex_step(model, s, forcing, dt)
        diffs = [getattr(s, n) - getattr(target, n) for n in State.FIELDS]
        e_max = max(float(np.max(np.abs(d))) for d in diffs)
        e_l2 = math.sqrt(sum(float(np.mean(d ** 2)) for d in diffs))
        return e_max, e_l2

    return convergence_order(err, [t_end / coarsest_steps / 2 ** j for j in range(n_levels)])


# --- 验收套件 ---

def _entry(criterion, name, passed, value=None, threshold=None, detail=""):
    return LedgerEntry(criterion=criterion, name=name, passed=bool(passed),
                       value=None if value is None else float(value), threshold=threshold, detail=detail)


def projection_suite(model, config, rng, n_fields=100, n_potentials=20):
    grid = model.ocn
    worst = 0.0
    for _ in range(n_fields):
        v = rng.normal(size=(2,) + grid.shape)
        pv = hydrostatic_project(v, grid)
        scale = max(1.0, float(np.max(np.abs(pv))))
        worst = max(worst, float(np.max(np.abs(hydrostatic_project(pv, grid) - pv))) / scale,
                    mean_divergence(pv, grid) / scale)
    for _ in range(n_potentials):
        grad = horiz_gradient(_smooth(rng, grid.horizontal, n_modes=3), grid.horizontal)
        v = np.broadcast_to(grad[:, None], (2,) + grid.shape)
        scale = max(1.0, float(np.max(np.abs(v))))
        worst = max(worst, float(np.max(np.abs(hydrostatic_project(v, grid)))) / scale)
    return [_entry(1, "projection", worst <= 1e-11, worst, "<= 1e-11",
                   f"{n_fields} random fields, {n_potentials} gradients")]


def extension_suite(model, config, rng):
    grid = model.ocn.with_nz(65)
    r = extension_profile(grid)
    mean = abs(float(np.dot(grid.quad_weights, r))) / grid.depth
    ok = r[-1] == 1.0 and r[0] == 0.0 and mean <= 1e-12
    return [_entry(2, "dirichlet-extension", ok, mean, "mean <= 1e-12, exact end values")]


def dirichlet_suite(model, config, rng):
    grid = model.ocn
    X, _ = grid.horizontal.mesh
    phi = np.stack([np.sin(2 * np.pi * X / grid.lx), np.zeros_like(X)])
    v = dirichlet_operator(grid, model.settings.mu, phi).v
    trace = float(np.max(np.abs(boundary_trace(v, grid, "hi") - phi)))
    report = dirichlet_convergence(model)
    ok = trace <= 1e-10 and abs(report.fitted_order - 2.0) <= 0.2
    return [_entry(3, "dirichlet-operator", ok, report.fitted_order, "trace <= 1e-10, order 2.0 +- 0.2",
                   f"trace residual {trace:.2e}")]


def adjoint_suite(model, config, rng):
    report = adjoint_convergence(model, rng)
    return [_entry(4, "adjoint-identity", report.fitted_order >= 1.8, report.fitted_order, "order >= 1.8",
                   f"residuals {['%.2e' % e for e in report.errors_max]}")]


def dtn_suite(model, config, rng):
    report = dtn_convergence(model)
    return [_entry(5, "dtn-closed-form", abs(report.fitted_order - 2.0) <= 0.2, report.fitted_order,
                   "order 2.0 +- 0.2")]


def random_ice_state(rng, plane, params, amplitude=0.5):
    """Smooth random ice state strictly inside V."""
    def unit(field_):
        return field_ / max(float(np.max(np.abs(field_))), 1e-300)

    h_mid, h_half = 0.5 * (params.kappa1 + params.kappa2), 0.4 * (params.kappa2 - params.kappa1)
    return IceState(
        u_ice=amplitude * unit(_smooth(rng, plane, (2,))),
        h=h_mid + h_half * unit(_smooth(rng, plane)),
        a=0.5 + 0.45 * unit(_smooth(rng, plane)),
    )


def ellipticity_suite(model, config, rng, n_random=20):
    p, plane = model.params, model.ice
    h0, a0 = 1.0, 0.9
    state = IceState(np.zeros((2,) + plane.shape), np.full(plane.shape, h0), np.full(plane.shape, a0))
    P0 = float(ice_pressure(h0, a0, p))
    analytic = P0 / (2 * p.rho_ice * h0 * math.sqrt(p.delta_reg)) / p.e_ratio ** 2
    rel = abs(ellipticity_certificate(state, plane, p).c_min - analytic) / analytic
    worst = math.inf
    for _ in range(n_random):
        worst = min(worst, ellipticity_certificate(random_ice_state(rng, plane, p), plane, p).c_min)
    return [_entry(6, "ellipticity", rel <= 1e-6 and worst > 0, rel, "rel <= 1e-6, random c_min > 0",
                   f"min c_min over {n_random} random states {worst:.3e}")]


def gateaux_errors(model, rng, steps, n_directions=5):
    """Relative max-norm gap between central differences of hibler_div and the frozen operator.

    The frozen state is strain-free (constant drift) over varying thickness.
    """
    p, plane = model.params, model.ice
    X, Y = plane.mesh
    kx, ky = 2 * np.pi / plane.lx, 2 * np.pi / plane.ly
    u0 = np.ones((2,) + plane.shape) * rng.normal(size=(2, 1, 1))
    h0 = 1.0 + 0.2 * np.cos(kx * X) + 0.1 * np.sin(ky * Y)
    a0 = np.full(plane.shape, 0.9)
    state0 = IceState(u0, h0, a0)
    directions = [_smooth(rng, plane, (2,)) for _ in range(n_directions)]
    out = []
    for s in steps:
        worst = 0.0
        for d in directions:
            exact = hibler_apply_linearized(state0, d, plane, p)
            fd = (hibler_div(u0 + s * d, h0, a0, plane, p) - hibler_div(u0 - s * d, h0, a0, plane, p)) / (2 * s)
            worst = max(worst, float(np.max(np.abs(fd - exact))) / float(np.max(np.abs(exact))))
        out.append(worst)
    return out


# Strain varies on the scale sqrt(delta_reg); the tolerance step sits far below it, above roundoff.
GATEAUX_STEP = 1e-9
GATEAUX_ORDER_STEPS = (1e-7, 5e-8, 2.5e-8)


def linearization_suite(model, config, rng):
    (small,) = gateaux_errors(model, rng, [GATEAUX_STEP])
    steps = list(GATEAUX_ORDER_STEPS)
    order, _ = fit_order(steps, gateaux_errors(model, rng, steps, n_directions=1))
    ok = small <= 1e-5 and abs(order - 2.0) <= 0.2
    return [_entry(7, "linearization", ok, small, "rel <= 1e-5, step order 2.0 +- 0.2",
                   f"step order {order:.3f}")]


def thermodynamics_suite(model, config, rng):
    p, plane = model.params, model.ice
    ice = random_ice_state(rng, plane, p)
    S_h, _ = thermo_sources(ice.h, ice.a, GrowthRate(kind="constant", f0=0.37), p)
    gap = float(np.max(np.abs(S_h - 0.37)))

    table = GrowthRate(kind="table", breakpoints=(0.0, 1.0), values=(-0.1, 0.5))
    a = 0.5 + 0.5 * rng.random(plane.shape)
    h = np.clip(1.0 + 1.5 * rng.random(plane.shape), p.kappa1, p.kappa2)
    S_h2, S_a2 = thermo_sources(h, a, table, p)
    case_ok = bool(np.any(S_h2 > 0)) and bool(np.all(S_a2[S_h2 > 0] == 0.0))
    return [_entry(8, "thermodynamics", gap <= 1e-13 and case_ok, gap, "|S_h - f0| <= 1e-13, S_a = 0 case")]


def conservation_suite(model, config, rng, n_steps=200):
    from .scenarios import build_scenario

    model, scenario = build_scenario(model.replace(growth=GrowthRate(kind="constant", f0=0.0)),
                                     "constant-wind", config.forcing)
    dt = config.time['dt']
    state = scenario.initial
    volume = float(np.sum(state.h))
    drift = coupling = 0.0
    for _ in range(n_steps):
        state, report = imex_step(model, state, scenario.forcing, dt)
        new_volume = float(np.sum(state.h))
        drift = max(drift, abs(new_volume - volume) / abs(volume))
        coupling = max(coupling, report.coupling_residual)
        volume = new_volume
    return [
        _entry(9, "conservation", drift <= 1e-10, drift, "<= 1e-10 per step", f"{n_steps} steps"),
        _entry(10, "coupling", coupling <= 1e-8, coupling, "<= 1e-8", f"{n_steps} steps"),
    ]


def convergence_suite(model, config, rng):
    small = CoupledModel.build(model.params, nx=16, ny=16, lx=model.ice.lx, ly=model.ice.ly,
                               nz_atm=9, nz_ocn=9,
                               growth=GrowthRate(kind="decaying-exponential", f0=0.05, h_ref=1.0),
                               settings=model.settings)
    temporal = temporal_convergence(small)
    vertical = resolvent_convergence(model)
    ok = abs(temporal.fitted_order - 1.0) <= 0.15 and abs(vertical.fitted_order - 2.0) <= 0.2
    return [_entry(11, "convergence", ok, temporal.fitted_order, "dt order 1.0 +- 0.15, dz order 2.0 +- 0.2",
                   f"vertical order {vertical.fitted_order:.3f}")]


def termination_suite(model, config, rng):
    from .scenarios import build_scenario

    opts, dt = config.forcing, config.time['dt']
    calm_model, calm = build_scenario(model, "calm", opts)
    calm_run = run(calm_model, calm.initial, calm.forcing, dt, 10 * dt)
    melt_model, melt = build_scenario(model, "strong-melt", opts)
    horizon = 2.0 * (opts['h_mean'] - model.params.kappa1) / abs(opts['melt_rate'])
    melt_run = run(melt_model, melt.initial, melt.forcing, dt, max(horizon, 2 * dt))
    ok = (calm_run.cause == REACHED_T_END and melt_run.cause == HIT_BOUNDARY
          and melt_run.detail == "h reached kappa1")
    return [_entry(12, "termination", ok, None, "calm reaches t_end, strong melt hits kappa1",
                   f"calm: {calm_run.cause}; melt: {melt_run.cause}: {melt_run.detail}")]


def decoupling_suite(model, config, rng):
    plane = model.ice
    X, Y = plane.mesh
    frozen = model.zero_state().replace(
        h=1.0 + 0.2 * np.cos(2 * np.pi * X / plane.lx), a=np.full(plane.shape, 0.9))
    rhs_ocn = rng.normal(size=(2,) + model.ocn.shape)
    rhs_ice = rng.normal(size=(2,) + plane.shape)
    result = coupled_ocean_ice_solve(model, frozen, rhs_ocn, rhs_ice, config.time['dt'], cross_check=True)
    err = result.cross_check_error
    return [_entry(13, "decoupling", err <= 1e-7, err, "<= 1e-7",
                   f"{result.iterations} Picard iterations")]


SUITES = {
    "projection": ((1,), projection_suite),
    "extension": ((2,), extension_suite),
    "dirichlet": ((3,), dirichlet_suite),
    "adjoint": ((4,), adjoint_suite),
    "dtn": ((5,), dtn_suite),
    "ellipticity": ((6,), ellipticity_suite),
    "linearization": ((7,), linearization_suite),
    "thermodynamics": ((8,), thermodynamics_suite),
    "conservation": ((9, 10), conservation_suite),
    "convergence": ((11,), convergence_suite),
    "termination": ((12,), termination_suite),
    "decoupling": ((13,), decoupling_suite),
}


def run_suite(name, config, model=None):
    """Run one named suite; an exception becomes failing entries for its criteria."""
    if name not in SUITES:
        raise ParameterError(f"unknown suite {name!r}, expected one of {sorted(SUITES)}")
    criteria, fn = SUITES[name]
    model = model or config.build_model()
    rng = np.random.default_rng([config.run['seed'], list(SUITES).index(name)])
    try:
        entries = fn(model, config, rng)
    except Exception as exc:  # 套件失败记入账本
        logger.exception("suite %s raised", name)
        entries = [_entry(c, name, False, None, None, f"raised {type(exc).__name__}: {exc}") for c in criteria]
    for e in entries:
        logger.info("criterion %d %s: %s", e.criterion, e.name, "pass" if e.passed else "FAIL")
    return entries


def suite_all(config, names=None, workers=None):
    """Run the acceptance suites and collect the ledger."""
    model = config.build_model()
    names = list(names or SUITES)
    workers = workers or config.run['workers']
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            batches = list(pool.map(lambda n: run_suite(n, config, model), names))
    else:
        batches = [run_suite(n, config, model) for n in names]
    return Ledger(entries=[e for batch in batches for e in batch])
