# tests/test_cli.py
import json
import os

from icelab.cli import cli, cli_main


def test_help_lists_subcommands(runner):
    result = runner.invoke(cli, ['--help'])
    assert result.exit_code == 0
    for name in ('simulate', 'verify', 'ellipticity', 'convergence'):
        assert name in result.output


def test_unknown_subcommand_is_usage_error(capsys):
    assert cli_main(['bogus']) == 2
    assert "Usage" in capsys.readouterr().err


def test_invalid_config_exits_2(small_config_file, capsys):
    path = small_config_file("phys.kappa1=0")
    assert cli_main(['simulate', '--config', path]) == 2
    assert "phys.kappa1" in capsys.readouterr().err


def test_simulate_calm_writes_snapshots(small_config_file, tmp_path, capsys):
    out = tmp_path / "calm"
    path = small_config_file("forcing.scenario=calm")
    assert cli_main(['simulate', '--config', path, '--out', str(out)]) == 0
    assert "reached-t-end" in capsys.readouterr().out
    steps = sorted(d for d in os.listdir(out) if d.startswith("step_"))
    assert steps == ["step_000000", "step_000001", "step_000002", "step_000003"]
    with open(out / "run_summary.json") as fh:
        summary = json.load(fh)
    assert summary['cause'] == "reached-t-end"
    assert summary['scenario'] == "calm"


def test_simulate_strong_melt_exits_1(small_config_file, tmp_path, capsys):
    path = small_config_file("forcing.scenario=strong-melt", "time.t_end=1.0", "time.n_out=100")
    assert cli_main(['simulate', '--config', path, '--out', str(tmp_path / "melt")]) == 1
    assert "hit-boundary-of-V: h reached kappa1" in capsys.readouterr().out


def test_identical_runs_write_identical_files(small_config_file, tmp_path):
    path = small_config_file("forcing.scenario=constant-wind", "time.t_end=0.02")
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli_main(['simulate', '--config', path, '--out', str(a)]) == 0
    assert cli_main(['simulate', '--config', path, '--out', str(b)]) == 0
    for name in os.listdir(a / "step_000002"):
        assert (a / "step_000002" / name).read_bytes() == (b / "step_000002" / name).read_bytes()


def test_verify_writes_ledger(small_config_file, tmp_path, capsys):
    path = small_config_file()
    out = tmp_path / "ledger"
    code = cli_main(['verify', '--config', path, '--suite', 'extension', '--suite', 'thermodynamics',
                     '--out', str(out)])
    assert code == 0
    with open(out / "ledger.json") as fh:
        ledger = json.load(fh)
    assert ledger['all_passed']
    assert sorted(e['criterion'] for e in ledger['entries']) == [2, 8]
    assert (out / "ledger.txt").read_text().endswith("ALL PASS\n")


def test_ellipticity_on_snapshot(small_config_file, tmp_path, capsys):
    path = small_config_file("forcing.scenario=calm")
    out = tmp_path / "run"
    assert cli_main(['simulate', '--config', path, '--out', str(out)]) == 0
    capsys.readouterr()
    code = cli_main(['ellipticity', '--config', path, '--state', str(out / "step_000000"),
                     '--n-xi', '16', '--n-eta', '16'])
    assert code == 0
    assert json.loads(capsys.readouterr().out)['c_min'] > 0


def test_ellipticity_missing_snapshot(small_config_file, tmp_path):
    path = small_config_file()
    assert cli_main(['ellipticity', '--config', path, '--state', str(tmp_path / "nowhere")]) == 2


def test_convergence_vertical(small_config_file, capsys):
    path = small_config_file()
    assert cli_main(['convergence', '--config', path, '--target', 'vertical']) == 0
    report = json.loads(capsys.readouterr().out)
    assert abs(report['fitted_order'] - 2.0) <= 0.2


def test_ellipticity_on_incomplete_sidecar_exits_2(small_config_file, tmp_path, capsys):
    path = small_config_file("forcing.scenario=calm")
    out = tmp_path / "run"
    assert cli_main(['simulate', '--config', path, '--out', str(out)]) == 0
    sidecar = out / "step_000000" / "snapshot.json"
    meta = json.loads(sidecar.read_text())
    del meta['fields']
    sidecar.write_text(json.dumps(meta))
    capsys.readouterr()
    assert cli_main(['ellipticity', '--config', path, '--state', str(out / "step_000000")]) == 2
    assert "cannot read snapshot" in capsys.readouterr().err
