"""JSON wire formats for matrices, density operators, phase tables and ensembles.

Matrix object: ``{"rows", "cols", "re", "im"}`` with row-major float arrays.
Density operators add ``"dims"``. Floats are written by :mod:`json`, which
uses the shortest repr that round-trips, so encode/decode is bit-exact.
"""

from __future__ import annotations

import json
import os
import tempfile

import numpy as np

from .errors import DimensionMismatchError, InvalidStateError
from .linalg import DensityOperator


def matrix_to_json(m) -> dict:
    m = np.asarray(m, dtype=complex)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2:
        raise DimensionMismatchError(f"expected a matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidStateError("non-finite entries cannot be serialized")
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "re": [float(x) for x in m.real.ravel()],
        "im": [float(x) for x in m.imag.ravel()],
    }


def matrix_from_json(obj) -> np.ndarray:
    try:
        rows, cols = int(obj["rows"]), int(obj["cols"])
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj["im"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidStateError(f"malformed matrix object: {exc}") from exc
    if re.shape != (rows * cols,) or im.shape != (rows * cols,):
        raise DimensionMismatchError(
            f"expected {rows * cols} entries, got re={re.size}, im={im.size}"
        )
    return (re + 1j * im).reshape(rows, cols)


def density_to_json(op) -> dict:
    obj = matrix_to_json(op)
    dims = op.dims if isinstance(op, DensityOperator) else (obj["rows"],)
    obj["dims"] = [int(d) for d in dims]
    return obj


def density_from_json(obj) -> DensityOperator:
    m = matrix_from_json(obj)
    return DensityOperator(m, obj.get("dims"))


def phase_table_to_json(c) -> list:
    c = np.asarray(c, dtype=complex)
    return [[[[float(z.real), float(z.imag)] for z in row] for row in plane] for plane in c]


def phase_table_from_json(obj) -> np.ndarray:
    try:
        arr = np.asarray(obj, dtype=float)
    except ValueError as exc:
        raise InvalidStateError(f"ragged phase table: {exc}") from exc
    if arr.ndim != 4 or arr.shape[-1] != 2:
        raise DimensionMismatchError(f"phase table must be a 3-index table of [re, im], got {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def ensemble_from_json(obj):
    """``{"members": [{"weight": w, "state": <matrix json, column>}, ...]}``."""
    from .states import EnsembleSpec

    try:
        members = [
            (float(m["weight"]), matrix_from_json(m["state"]).ravel()) for m in obj["members"]
        ]
    except (KeyError, TypeError) as exc:
        raise InvalidStateError(f"malformed ensemble: {exc}") from exc
    return EnsembleSpec(members)


def ensemble_to_json(spec) -> dict:
    return {
        "members": [{"weight": float(w), "state": matrix_to_json(psi)} for w, psi in spec.members]
    }


def load_json(path):
    with open(path) as fh:
        return json.load(fh)


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, allow_nan=False)


def write_atomic(path, text: str):
    """Write ``text`` to ``path`` via a temp file and rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".qtp-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
