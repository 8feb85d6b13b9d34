# tests/test_snapshots.py
import json
import os

import numpy as np
import pytest

from icelab.errors import SnapshotDimensionError, SnapshotError, SnapshotHashWarning, SnapshotVersionError
from icelab.models import State
from icelab.snapshots import SIDECAR, grid_metadata, read_snapshot, write_snapshot


@pytest.fixture()
def random_state(model, rng):
    s = model.zero_state(t=0.25)
    return State(**{name: rng.normal(size=arr.shape) for name, arr in s.fields().items()}, t=s.t)


def test_round_trip_is_bit_exact(tmp_path, model, random_state):
    path = str(tmp_path / "snap")
    write_snapshot(random_state, path, grid_metadata(model), "abc")
    back = read_snapshot(path, model=model, config_hash="abc")
    for name in State.FIELDS:
        assert np.array_equal(getattr(back, name), getattr(random_state, name))
    assert back.t == 0.25


def test_files_are_little_endian_x_fastest(tmp_path, random_state):
    path = str(tmp_path / "snap")
    write_snapshot(random_state, path)
    raw = np.fromfile(os.path.join(path, "h.f64"), dtype="<f8")
    assert raw[1] == random_state.h[0, 1]
    with open(os.path.join(path, SIDECAR)) as fh:
        meta = json.load(fh)
    assert meta['format_version'] == "1"
    assert meta['fields']['v_ocn'] == list(random_state.v_ocn.shape)


def test_rewrite_is_byte_identical(tmp_path, random_state):
    a, b = str(tmp_path / "a"), str(tmp_path / "b")
    write_snapshot(random_state, a, config_hash="h")
    write_snapshot(random_state, b, config_hash="h")
    for name in os.listdir(a):
        with open(os.path.join(a, name), 'rb') as fa, open(os.path.join(b, name), 'rb') as fb:
            assert fa.read() == fb.read()


def test_truncated_file_is_dimension_error(tmp_path, random_state):
    path = str(tmp_path / "snap")
    write_snapshot(random_state, path)
    target = os.path.join(path, "u_ice.f64")
    with open(target, 'rb') as fh:
        data = fh.read()
    with open(target, 'wb') as fh:
        fh.write(data[:-8])
    with pytest.raises(SnapshotDimensionError):
        read_snapshot(path)


def test_wrong_grid_is_dimension_error(tmp_path, random_state):
    from icelab.models import PhysParams
    from icelab.stepper import CoupledModel

    path = str(tmp_path / "snap")
    write_snapshot(random_state, path)
    other = CoupledModel.build(PhysParams(), nx=8, ny=8, nz_atm=5, nz_ocn=5)
    with pytest.raises(SnapshotDimensionError):
        read_snapshot(path, model=other)


def test_version_mismatch(tmp_path, random_state):
    path = str(tmp_path / "snap")
    write_snapshot(random_state, path)
    sidecar = os.path.join(path, SIDECAR)
    with open(sidecar) as fh:
        meta = json.load(fh)
    meta['format_version'] = "2"
    with open(sidecar, 'w') as fh:
        json.dump(meta, fh)
    with pytest.raises(SnapshotVersionError):
        read_snapshot(path)


def test_hash_mismatch_only_warns(tmp_path, random_state):
    path = str(tmp_path / "snap")
    write_snapshot(random_state, path, config_hash="old")
    with pytest.warns(SnapshotHashWarning):
        back = read_snapshot(path, config_hash="new")
    assert back.t == random_state.t


def test_missing_sidecar(tmp_path):
    with pytest.raises(SnapshotError):
        read_snapshot(str(tmp_path))


@pytest.mark.parametrize("key", ["fields", "time", "dtype"])
def test_sidecar_missing_key_is_snapshot_error(tmp_path, random_state, key):
    path = str(tmp_path / "snap")
    write_snapshot(random_state, path)
    sidecar = os.path.join(path, SIDECAR)
    with open(sidecar) as fh:
        meta = json.load(fh)
    del meta[key]
    with open(sidecar, 'w') as fh:
        json.dump(meta, fh)
    with pytest.raises(SnapshotError) as info:
        read_snapshot(path)
    assert key in str(info.value)


def test_sidecar_missing_field_shape(tmp_path, random_state):
    path = str(tmp_path / "snap")
    write_snapshot(random_state, path)
    sidecar = os.path.join(path, SIDECAR)
    with open(sidecar) as fh:
        meta = json.load(fh)
    del meta['fields']['v_ocn']
    with open(sidecar, 'w') as fh:
        json.dump(meta, fh)
    with pytest.raises(SnapshotError, match="v_ocn"):
        read_snapshot(path)
