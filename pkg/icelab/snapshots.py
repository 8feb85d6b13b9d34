# icelab/snapshots.py
"""Snapshot directories: one raw little-endian float64 file per field plus a JSON sidecar."""
import json
import logging
import os
import warnings

import numpy as np
from jsonschema import Draft7Validator

from .errors import SnapshotDimensionError, SnapshotError, SnapshotHashWarning, SnapshotVersionError
from .models import State

logger = logging.getLogger(__name__)

FORMAT_VERSION = "1"
SIDECAR = "snapshot.json"
DTYPE = "<f8"

_SHAPE = {'type': 'array', 'items': {'type': 'integer', 'minimum': 0}}

SIDECAR_SCHEMA = {
    'type': 'object',
    'required': ['format_version', 'dtype', 'time', 'fields'],
    'properties': {
        'format_version': {'type': 'string'},
        'dtype': {'const': DTYPE},
        'time': {'type': 'number'},
        'fields': {
            'type': 'object',
            'required': list(State.FIELDS),
            'properties': {name: _SHAPE for name in State.FIELDS},
        },
        'grid': {'type': 'object'},
        'config_hash': {'type': ['string', 'null']},
    },
}

_SIDECAR_VALIDATOR = Draft7Validator(SIDECAR_SCHEMA)


def grid_metadata(model):
    """Grid extents recorded in the sidecar."""
    return {
        'nx': model.ice.nx, 'ny': model.ice.ny, 'lx': model.ice.lx, 'ly': model.ice.ly,
        'atm': {'nz': model.atm.nz, 'z_lo': model.atm.z_lo, 'z_hi': model.atm.z_hi},
        'ocn': {'nz': model.ocn.nz, 'z_lo': model.ocn.z_lo, 'z_hi': model.ocn.z_hi},
    }


def write_snapshot(state, path, grid=None, config_hash=None):
    """Write `state` into directory `path`; arrays are row-major with x varying fastest."""
    os.makedirs(path, exist_ok=True)
    shapes = {}
    for name, arr in state.fields().items():
        data = np.ascontiguousarray(arr, dtype=DTYPE)
        data.tofile(os.path.join(path, f"{name}.f64"))
        shapes[name] = list(data.shape)
    meta = {
        'format_version': FORMAT_VERSION,
        'dtype': DTYPE,
        'time': float(state.t),
        'fields': shapes,
        'grid': grid or {},
        'config_hash': config_hash,
    }
    with open(os.path.join(path, SIDECAR), 'w', encoding='utf-8') as fh:
        json.dump(meta, fh, sort_keys=True, indent=2)
        fh.write("\n")
    logger.debug("snapshot t=%.6g written to %s", state.t, path)


def read_snapshot(path, model=None, config_hash=None):
    """Read a snapshot directory back into a State.

    With `model`, field shapes must match its grids; with `config_hash`, a differing
    recorded hash only warns.
    """
    sidecar = os.path.join(path, SIDECAR)
    try:
        with open(sidecar, encoding='utf-8') as fh:
            meta = json.load(fh)
    except FileNotFoundError:
        raise SnapshotError(f"{path}: missing {SIDECAR}")
    except json.JSONDecodeError as exc:
        raise SnapshotError(f"{sidecar}: unreadable sidecar ({exc})")

    if not isinstance(meta, dict):
        raise SnapshotError(f"{sidecar}: expected a JSON object")
    version = str(meta.get('format_version'))
    if version != FORMAT_VERSION:
        raise SnapshotVersionError(f"{sidecar}: format version {version!r}, expected {FORMAT_VERSION!r}")
    # 版本正确后再校验字段, 缺键不能以 KeyError 泄漏
    problems = [f"{'.'.join(str(p) for p in err.absolute_path) or '<root>'}: {err.message}"
                for err in sorted(_SIDECAR_VALIDATOR.iter_errors(meta), key=lambda e: [str(p) for p in e.absolute_path])]
    if problems:
        raise SnapshotError(f"{sidecar}: invalid sidecar: " + "; ".join(problems))

    expected = model.zero_state().fields() if model is not None else None
    arrays = {}
    for name in State.FIELDS:
        shape = tuple(meta['fields'][name])
        if expected is not None and shape != expected[name].shape:
            raise SnapshotDimensionError(f"{name}: recorded shape {shape}, grid needs {expected[name].shape}")
        try:
            data = np.fromfile(os.path.join(path, f"{name}.f64"), dtype=DTYPE)
        except FileNotFoundError:
            raise SnapshotError(f"{path}: missing {name}.f64")
        if data.size != int(np.prod(shape)):
            raise SnapshotDimensionError(f"{name}.f64 holds {data.size} values, shape {shape} needs {int(np.prod(shape))}")
        arrays[name] = data.reshape(shape).astype(float)

    recorded = meta.get('config_hash')
    if config_hash is not None and recorded != config_hash:
        warnings.warn(f"{path} was written under config {recorded}, current config is {config_hash}",
                      SnapshotHashWarning, stacklevel=2)
    return State(**arrays, t=float(meta['time']))
