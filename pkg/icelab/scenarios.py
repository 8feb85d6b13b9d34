# icelab/scenarios.py
"""Built-in initial states and forcings."""
import logging

import numpy as np
from attrs import define

from .errors import ConfigError
from .models import Forcing, GrowthRate, State

logger = logging.getLogger(__name__)

SCENARIOS = ("calm", "constant-wind", "strong-melt", "manufactured")


@define(frozen=True)
class Scenario:
    name: str
    initial: State
    forcing: Forcing
    growth: GrowthRate = None

    def __repr__(self):
        return f'<Scenario {self.name}>'


def _resting_ice(model, h_mean, a_mean, h_amplitude=0.0):
    X, _ = model.ice.mesh
    state = model.zero_state()
    h = h_mean * (1.0 + h_amplitude * np.cos(2 * np.pi * X / model.ice.lx))
    return state.replace(h=h, a=np.full(model.ice.shape, a_mean))


def calm(model, opts):
    """Everything at rest with uniform ice and no growth."""
    state = _resting_ice(model, opts['h_mean'], opts['a_mean'])
    return Scenario("calm", state, Forcing(), GrowthRate(kind="constant", f0=0.0))


def constant_wind(model, opts):
    """Uniform wind over resting ocean and slightly uneven ice."""
    state = _resting_ice(model, opts['h_mean'], opts['a_mean'], opts['h_amplitude'])
    v_atm = np.zeros_like(state.v_atm)
    v_atm[0] = opts['wind_speed']
    return Scenario("constant-wind", state.replace(v_atm=v_atm), Forcing(), None)


def strong_melt(model, opts):
    """Resting uniform ice under a constant negative growth rate."""
    state = _resting_ice(model, opts['h_mean'], opts['a_mean'])
    growth = GrowthRate(kind="constant", f0=-abs(opts['melt_rate']))
    return Scenario("strong-melt", state, Forcing(), growth)


def manufactured(model, opts):
    from .verification import manufactured_forcing, trig_exact_solution

    exact = trig_exact_solution(model, amplitude=opts['amplitude'])
    return Scenario("manufactured", exact.state(0.0), manufactured_forcing(model, exact), None)


_BUILDERS = {
    "calm": calm,
    "constant-wind": constant_wind,
    "strong-melt": strong_melt,
    "manufactured": manufactured,
}


def build_scenario(model, name, opts):
    """Return (model with the scenario's growth rate, Scenario)."""
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise ConfigError([f"forcing.scenario: unknown scenario {name!r}, expected one of {SCENARIOS}"])
    scenario = builder(model, opts)
    if scenario.growth is not None:
        model = model.replace(growth=scenario.growth)
    logger.info("scenario %s built on %r", name, model)
    return model, scenario
