# icelab/cli.py
"""Command line: simulate, verify, ellipticity, convergence.

Exit codes: 0 success, 1 physical termination or failed checks, 2 config/usage errors.
"""
import json
import os

import click

from config import Config

from . import create_simulator
from .errors import ConfigError, DomainViolation, EllipticityFailure, SnapshotError
from .models import IceState
from .rheology import ellipticity_certificate
from .settings import load_config, parse_config
from .snapshots import read_snapshot
from .stepper import REACHED_T_END
from .verification import SUITES, resolvent_convergence, temporal_convergence

EXIT_OK, EXIT_TERMINATED, EXIT_CONFIG = 0, 1, 2


def _simulator(config_path):
    config = parse_config(config_path) if config_path else load_config(Config)
    return create_simulator(config)


@click.group()
def cli():
    """Coupled atmosphere / sea-ice / ocean simulator."""


@cli.command()
@click.option('--config', 'config_path', type=click.Path(dir_okay=False), default=None)
@click.option('--out', 'out_dir', type=click.Path(file_okay=False), default=None)
@click.option('--scenario', default=None, help='Override forcing.scenario.')
def simulate(config_path, out_dir, scenario):
    """Run the configured scenario and write snapshots."""
    sim = _simulator(config_path)
    try:
        result = sim.run(out_dir, scenario)
    except DomainViolation as exc:
        click.echo(f"initial state outside V: {exc}", err=True)
        return EXIT_CONFIG
    click.echo(f"{result.cause}: {result.detail}")
    return EXIT_OK if result.cause == REACHED_T_END else EXIT_TERMINATED


@cli.command()
@click.option('--config', 'config_path', type=click.Path(dir_okay=False), default=None)
@click.option('--suite', 'suites', multiple=True, type=click.Choice(list(SUITES)))
@click.option('--out', 'out_dir', type=click.Path(file_okay=False), default=None)
@click.option('--workers', type=click.IntRange(min=1), default=None)
def verify(config_path, suites, out_dir, workers):
    """Run the acceptance suites and write ledger.json / ledger.txt."""
    sim = _simulator(config_path)
    ledger = sim.verify(list(suites) or None, workers)
    out_dir = out_dir or sim.config.run['output_dir']
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "ledger.json"), 'w', encoding='utf-8') as fh:
        json.dump(ledger.to_dict(), fh, sort_keys=True, indent=2)
    text = ledger.to_text()
    with open(os.path.join(out_dir, "ledger.txt"), 'w', encoding='utf-8') as fh:
        fh.write(text)
    click.echo(text, nl=False)
    return EXIT_OK if ledger.all_passed else EXIT_TERMINATED


@cli.command()
@click.option('--config', 'config_path', type=click.Path(dir_okay=False), default=None)
@click.option('--state', 'state_path', type=click.Path(file_okay=False), required=True)
@click.option('--n-xi', default=64, type=click.IntRange(min=1))
@click.option('--n-eta', default=64, type=click.IntRange(min=1))
def ellipticity(config_path, state_path, n_xi, n_eta):
    """Certify strong ellipticity of the frozen Hibler operator at a snapshot."""
    sim = _simulator(config_path)
    model = sim.model
    try:
        state = read_snapshot(state_path, model=model, config_hash=sim.config.config_hash)
        cert = ellipticity_certificate(IceState.of(state), model.ice, model.params, n_xi, n_eta)
    except SnapshotError as exc:
        click.echo(f"cannot read snapshot: {exc}", err=True)
        return EXIT_CONFIG
    except DomainViolation as exc:
        click.echo(f"state outside V: {exc}", err=True)
        return EXIT_TERMINATED
    except EllipticityFailure as exc:
        click.echo(json.dumps({'c_min': exc.c_min, 'witness': exc.witness}, sort_keys=True))
        return EXIT_TERMINATED
    click.echo(json.dumps(cert.to_dict(), sort_keys=True))
    return EXIT_OK


@cli.command()
@click.option('--config', 'config_path', type=click.Path(dir_okay=False), default=None)
@click.option('--target', type=click.Choice(['vertical', 'temporal']), required=True)
def convergence(config_path, target):
    """Measure the vertical (dz) or temporal (dt) convergence order."""
    sim = _simulator(config_path)
    if target == 'vertical':
        report = resolvent_convergence(sim.model)
    else:
        report = temporal_convergence(sim.model)
    click.echo(json.dumps(report.to_dict(), sort_keys=True))
    return EXIT_OK if report.trusted and report.monotone else EXIT_TERMINATED


def cli_main(argv=None):
    """Run the command line and return its exit code."""
    try:
        rv = cli.main(args=list(argv or []), prog_name="icelab", standalone_mode=False)
    except click.UsageError as exc:
        exc.show()
        return EXIT_CONFIG
    except ConfigError as exc:
        click.echo(str(exc), err=True)
        return EXIT_CONFIG
    except click.ClickException as exc:
        exc.show()
        return EXIT_TERMINATED
    except click.Abort:
        return EXIT_TERMINATED
    return rv if isinstance(rv, int) else EXIT_OK
