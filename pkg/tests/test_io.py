import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qtp.errors import DimensionMismatchError, InvalidStateError
from qtp.io import (
    density_from_json,
    density_to_json,
    dumps,
    ensemble_from_json,
    ensemble_to_json,
    matrix_from_json,
    matrix_to_json,
    phase_table_from_json,
    phase_table_to_json,
    write_atomic,
)
from qtp.linalg import DensityOperator, random_density
from qtp.pure import random_phases
from qtp.states import EnsembleSpec
from qtp.weyl import basis

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@settings(max_examples=50, deadline=None)
@given(
    re=arrays(np.float64, st.tuples(st.integers(1, 4), st.integers(1, 4)), elements=finite),
    data=st.data(),
)
def test_matrix_round_trip_is_bit_exact(re, data):
    im = data.draw(arrays(np.float64, re.shape, elements=finite))
    m = re + 1j * im
    text = dumps(matrix_to_json(m))
    back = matrix_from_json(json.loads(text))
    assert back.tobytes() == m.tobytes()


def test_matrix_errors():
    with pytest.raises(DimensionMismatchError):
        matrix_from_json({"rows": 2, "cols": 2, "re": [1, 2, 3], "im": [0, 0, 0]})
    with pytest.raises(InvalidStateError):
        matrix_from_json({"rows": 2})
    with pytest.raises(InvalidStateError):
        matrix_to_json(np.array([[np.inf]]))
    with pytest.raises(ValueError):
        dumps({"x": float("nan")})


def test_density_round_trip_keeps_dims():
    rho = DensityOperator(random_density(6, seed=1), (2, 3))
    back = density_from_json(json.loads(dumps(density_to_json(rho))))
    assert back.dims == (2, 3)
    assert back.matrix.tobytes() == rho.matrix.tobytes()
    with pytest.raises(InvalidStateError):
        density_from_json(matrix_to_json(np.eye(2)))


def test_phase_table_round_trip():
    c = random_phases(3, 2, seed=4)
    assert phase_table_from_json(json.loads(dumps(phase_table_to_json(c)))).tobytes() == c.tobytes()
    with pytest.raises(DimensionMismatchError):
        phase_table_from_json([[1, 2]])


def test_ensemble_round_trip():
    b = basis(2)
    spec = EnsembleSpec([(0.25, b.bell(0, 0)), (0.75, b.bell(1, 1))])
    back = ensemble_from_json(json.loads(dumps(ensemble_to_json(spec))))
    assert [w for w, _ in back.members] == [0.25, 0.75]
    assert all(np.array_equal(p, q) for (_, p), (_, q) in zip(back.members, spec.members))
    with pytest.raises(InvalidStateError):
        ensemble_from_json({"members": [{"weight": 1.0}]})


def test_write_atomic(tmp_path):
    target = tmp_path / "out.json"
    write_atomic(target, "first")
    write_atomic(target, "second")
    assert target.read_text() == "second"
    assert [p.name for p in tmp_path.iterdir()] == ["out.json"]
