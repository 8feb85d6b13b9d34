# icelab/__init__.py
"""Coupled atmosphere / sea-ice / ocean simulator and verification laboratory."""
import json
import logging
import os

from config import Config

from .scenarios import build_scenario
from .settings import RunConfig, load_config
from .snapshots import grid_metadata, write_snapshot
from .stepper import run
from .verification import suite_all

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(level="INFO"):
    """Install a single stream handler on the package logger."""
    logger = logging.getLogger(__name__)
    if not any(getattr(h, '_icelab', False) for h in logger.handlers):
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._icelab = True
        logger.addHandler(handler)
    logger.setLevel(level)
    return logger


class Simulator:
    """A resolved configuration bound to its CoupledModel."""

    def __init__(self, config):
        self.config = config
        self.model = config.build_model()

    def scenario(self, name=None):
        return build_scenario(self.model, name or self.config.forcing['scenario'], self.config.forcing)

    def run(self, out_dir=None, scenario=None):
        """Run the configured scenario, writing step_NNNNNN/ snapshots and run_summary.json."""
        model, sc = self.scenario(scenario)
        out_dir = out_dir or self.config.run['output_dir']
        os.makedirs(out_dir, exist_ok=True)
        grid, digest = grid_metadata(model), self.config.config_hash

        def on_snapshot(step, state):
            write_snapshot(state, os.path.join(out_dir, f"step_{step:06d}"), grid, digest)

        t = self.config.time
        result = run(model, sc.initial, sc.forcing, t['dt'], t['t_end'], t['n_out'], on_snapshot)
        summary = result.to_dict()
        summary.update(scenario=sc.name, config_hash=digest)
        with open(os.path.join(out_dir, "run_summary.json"), 'w', encoding='utf-8') as fh:
            json.dump(summary, fh, sort_keys=True, indent=2)
            fh.write("\n")
        return result

    def verify(self, suites=None, workers=None):
        return suite_all(self.config, suites, workers)

    def __repr__(self):
        return f'<Simulator {self.model!r}>'


def create_simulator(config=Config):
    """Build a Simulator from a config class or an already validated RunConfig."""
    if not isinstance(config, RunConfig):
        config = load_config(config)
    configure_logging(config.run['log_level'])
    return Simulator(config)
