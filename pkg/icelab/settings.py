# icelab/settings.py
"""Run configuration: defaults from a config class, overlays from key=value files.

Config files are flat dotenv-style documents with dotted keys::

    phys.kappa1=0.1
    grid.nx=32
    forcing.scenario=strong-melt
"""
import copy
import hashlib
import json
import logging
import os

from attrs import define, field
from dotenv import dotenv_values
from jsonschema import Draft7Validator

from config import Config

from .errors import ConfigError, IcelabError
from .models import GrowthRate, PhysParams
from .scenarios import SCENARIOS
from .stepper import CoupledModel, SolverSettings

logger = logging.getLogger(__name__)

SECTIONS = ('phys', 'grid', 'time', 'growth', 'forcing', 'solver', 'run')

# 这些键只影响进程行为, 不进入配置哈希
PROCESS_KEYS = ('output_dir', 'workers', 'log_level')

_POSITIVE = {'type': 'number', 'exclusiveMinimum': 0}
_NUMBER = {'type': 'number'}
_COUNT = {'type': 'integer', 'minimum': 4}


def _section(properties):
    return {'type': 'object', 'additionalProperties': False, 'properties': properties}


SCHEMA = {
    'type': 'object',
    'additionalProperties': False,
    'properties': {
        'phys': _section({
            'rho_atm': _POSITIVE, 'rho_ocn': _POSITIVE, 'rho_ice': _POSITIVE,
            'C_atm': _NUMBER, 'C_ocn': _NUMBER, 'theta_atm': _NUMBER, 'theta_ocn': _NUMBER,
            'p_star': _POSITIVE, 'c_star': _NUMBER,
            'e_ratio': {'type': 'number', 'minimum': 1},
            'delta_reg': _POSITIVE,
            'd_h': _POSITIVE, 'd_a': _POSITIVE, 'g_grav': _NUMBER,
            'kappa1': _POSITIVE, 'kappa2': _POSITIVE, 'h_ocn': _POSITIVE, 'h_atm': _POSITIVE,
            'coriolis': _NUMBER,
        }),
        'grid': _section({
            'nx': _COUNT, 'ny': _COUNT, 'lx': _POSITIVE, 'ly': _POSITIVE,
            'nz_atm': _COUNT, 'nz_ocn': _COUNT,
        }),
        'time': _section({
            'dt': _POSITIVE, 't_end': _POSITIVE,
            'n_out': {'type': 'integer', 'minimum': 1},
            'theta': {'type': 'number', 'minimum': 0.5, 'maximum': 1},
        }),
        'growth': _section({
            'kind': {'enum': ['constant', 'decaying-exponential', 'table']},
            'f0': _NUMBER, 'h_ref': _POSITIVE,
            'breakpoints': {'type': 'array', 'items': {'type': 'number', 'minimum': 0}},
            'values': {'type': 'array', 'items': _NUMBER},
        }),
        'forcing': _section({
            'scenario': {'enum': list(SCENARIOS)},
            'h_mean': _POSITIVE,
            'a_mean': {'type': 'number', 'minimum': 0, 'maximum': 1},
            'h_amplitude': {'type': 'number', 'minimum': 0, 'exclusiveMaximum': 1},
            'wind_speed': _NUMBER, 'melt_rate': _NUMBER, 'amplitude': _NUMBER,
        }),
        'solver': _section({
            'mu': _POSITIVE, 'tol_couple': _POSITIVE,
            'max_picard': {'type': 'integer', 'minimum': 1},
            'ice_method': {'enum': ['gmres', 'richardson']},
            'ice_tol': _POSITIVE,
            'ice_maxiter': {'type': 'integer', 'minimum': 1},
            'ice_restart': {'type': 'integer', 'minimum': 1},
            'normal_sign': {'enum': [1, -1]},
        }),
        'run': _section({
            'output_dir': {'type': 'string'},
            'workers': {'type': 'integer', 'minimum': 1},
            'seed': {'type': 'integer', 'minimum': 0},
            'log_level': {'enum': ['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL']},
            'v_margin': {'type': 'number', 'minimum': 0},
            'overflow_guard': _POSITIVE,
        }),
    },
}

_VALIDATOR = Draft7Validator(SCHEMA)


def _coerce(value, prop):
    """Turn a config-file string into the type the schema expects; leave it alone if that fails."""
    if not isinstance(value, str):
        return value
    kind = prop.get('type')
    text = value.strip()
    try:
        if kind == 'integer':
            return int(text)
        if kind == 'number':
            return float(text)
        if kind == 'array':
            return [float(v) for v in text.split(',') if v.strip()]
        if 'enum' in prop and not any(isinstance(v, str) for v in prop['enum']):
            return int(float(text))
    except ValueError:
        return value
    return text


def defaults_from(config_class):
    """Nested defaults dict of a config class (section dicts plus environment settings)."""
    data = {name: copy.deepcopy(getattr(config_class, name.upper())) for name in SECTIONS}
    data['run'].update(
        output_dir=config_class.OUTPUT_DIR,
        workers=config_class.WORKERS,
        seed=config_class.SEED,
        log_level=config_class.LOG_LEVEL,
    )
    return data


def _cross_field(data):
    phys, time, growth, forcing = data['phys'], data['time'], data['growth'], data['forcing']
    violations = []
    if not phys['kappa1'] < phys['kappa2']:
        violations.append(f"phys.kappa1: must be < phys.kappa2, got {phys['kappa1']} >= {phys['kappa2']}")
    if not phys['h_atm'] > phys['kappa2']:
        violations.append(f"phys.h_atm: must exceed phys.kappa2, got {phys['h_atm']} <= {phys['kappa2']}")
    if phys.get('coriolis', 0.0) != 0.0:
        violations.append("phys.coriolis: Coriolis forcing is not supported, must be 0")
    if not time['t_end'] >= time['dt']:
        violations.append(f"time.t_end: must be >= time.dt, got {time['t_end']} < {time['dt']}")
    if not phys['kappa1'] < forcing['h_mean'] < phys['kappa2']:
        violations.append(f"forcing.h_mean: must lie in (kappa1, kappa2), got {forcing['h_mean']}")
    if growth['kind'] == 'table':
        bp, vals = growth.get('breakpoints', []), growth.get('values', [])
        if len(bp) < 2 or len(bp) != len(vals):
            violations.append("growth.breakpoints: table needs >= 2 breakpoints and one value each")
        elif any(b <= a for a, b in zip(bp, bp[1:])):
            violations.append("growth.breakpoints: must be strictly increasing")
    return violations


def validate(data):
    """Coerce, schema-check and cross-check a nested config dict; return a RunConfig."""
    for name, section in data.items():
        props = SCHEMA['properties'].get(name, {}).get('properties', {})
        if isinstance(section, dict):
            for key, value in section.items():
                if key in props:
                    section[key] = _coerce(value, props[key])

    violations = []
    for error in sorted(_VALIDATOR.iter_errors(data), key=lambda e: list(e.absolute_path)):
        path = ".".join(str(p) for p in error.absolute_path) or "<root>"
        violations.append(f"{path}: {error.message}")
    if violations:
        raise ConfigError(violations)
    violations = _cross_field(data)
    if violations:
        raise ConfigError(violations)

    config = RunConfig(data)
    try:
        config.phys, config.growth, config.solver
    except IcelabError as exc:
        raise ConfigError([str(exc)])
    return config


def load_config(config_class=Config):
    return validate(defaults_from(config_class))


def parse_config(path, base=Config):
    """Overlay the dotted keys of the file at `path` on the defaults of `base`."""
    if not os.path.isfile(path):
        raise ConfigError([f"{path}: no such config file"])
    data = defaults_from(base)
    violations = []
    for key, value in dotenv_values(path).items():
        section, _, name = key.partition('.')
        if not name:
            violations.append(f"{key}: expected a dotted key such as phys.kappa1")
        elif section not in SECTIONS:
            violations.append(f"{key}: unknown section {section!r}")
        elif name not in SCHEMA['properties'][section]['properties']:
            violations.append(f"{key}: unknown key")
        elif value is None:
            violations.append(f"{key}: missing value")
        else:
            data[section][name] = value
    if violations:
        raise ConfigError(violations)
    logger.debug("config overlay from %s", path)
    return validate(data)


@define(frozen=True)
class RunConfig:
    """Validated configuration; `data` is the nested section dict."""

    data: dict = field(repr=False)

    @property
    def grid(self):
        return self.data['grid']

    @property
    def time(self):
        return self.data['time']

    @property
    def forcing(self):
        return self.data['forcing']

    @property
    def run(self):
        return self.data['run']

    @property
    def phys(self):
        values = {k: v for k, v in self.data['phys'].items() if k != 'coriolis'}
        return PhysParams(**values)

    @property
    def growth(self):
        return GrowthRate(**self.data['growth'])

    @property
    def solver(self):
        return SolverSettings(
            **self.data['solver'],
            theta=self.time['theta'],
            v_margin=self.run['v_margin'],
            overflow_guard=self.run['overflow_guard'],
        )

    def build_model(self):
        g = self.grid
        return CoupledModel.build(self.phys, nx=g['nx'], ny=g['ny'], lx=g['lx'], ly=g['ly'],
                                  nz_atm=g['nz_atm'], nz_ocn=g['nz_ocn'],
                                  growth=self.growth, settings=self.solver)

    def to_dict(self):
        return copy.deepcopy(self.data)

    @property
    def config_hash(self):
        canonical = self.to_dict()
        for key in PROCESS_KEYS:
            canonical['run'].pop(key, None)
        text = json.dumps(canonical, sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(text.encode('utf-8')).hexdigest()

    def __repr__(self):
        return f'<RunConfig {self.forcing["scenario"]} {self.config_hash[:12]}>'
