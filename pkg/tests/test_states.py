import json

import numpy as np
import pytest

from qtp.errors import DimensionMismatchError, InvalidStateError
from qtp.io import density_to_json, ensemble_to_json
from qtp.linalg import DensityOperator, haar_random_unitary, random_density
from qtp.states import (
    DescriptorError,
    EnsembleSpec,
    bell_diagonal,
    bell_projector,
    from_ensemble,
    input_from_descriptor,
    isotropic,
    normalize_amplitudes,
    parse_descriptor,
    resource_from_descriptor,
    rotated,
)
from qtp.weyl import basis, bell_weights


@pytest.mark.parametrize("n", [2, 3, 4])
def test_isotropic_bell_weights(n):
    F = 0.7
    w = bell_weights(isotropic(n, F)).ravel()
    assert w[0] == pytest.approx(F, abs=1e-12)
    assert np.allclose(w[1:], (1 - F) / (n * n - 1), atol=1e-12)


def test_isotropic_extremes():
    assert np.allclose(isotropic(2, 1).matrix, bell_projector(2).matrix)
    assert np.allclose(isotropic(3, 1 / 9).matrix, np.eye(9) / 9)
    with pytest.raises(ValueError):
        isotropic(2, 1.2)
    with pytest.raises(ValueError):
        isotropic(1, 0.5)


def test_bell_diagonal():
    assert np.allclose(bell_diagonal(2, [1, 0, 0, 0]).matrix, bell_projector(2).matrix)
    assert np.allclose(bell_diagonal(3, np.full(9, 1 / 9)).matrix, np.eye(9) / 9, atol=1e-15)
    w = np.array([0.1, 0.2, 0.3, 0.4])
    assert np.allclose(bell_weights(bell_diagonal(2, w)).ravel(), w)
    with pytest.raises(InvalidStateError):
        bell_diagonal(2, [0.5, 0.6, 0, 0])
    with pytest.raises(DimensionMismatchError):
        bell_diagonal(2, [1, 0, 0])


def test_rotated():
    chi = DensityOperator(random_density(9, seed=1), (3, 3))
    assert np.allclose(rotated(chi, np.eye(3)).matrix, chi.matrix)
    W = haar_random_unitary(3, seed=2)
    for side in ("left", "right"):
        r = rotated(chi, W, side)
        assert np.allclose(np.linalg.eigvalsh(r.matrix), np.linalg.eigvalsh(chi.matrix), atol=1e-12)
    x = basis(2).op(0, 1)
    assert np.allclose(rotated(bell_projector(2), x).matrix, bell_projector(2, 0, 1).matrix)
    with pytest.raises(DimensionMismatchError):
        rotated(chi, np.eye(2))
    with pytest.raises(ValueError):
        rotated(chi, W, "up")


def test_from_ensemble():
    b = basis(2)
    psi = b.bell(1, 0)
    assert np.allclose(from_ensemble(EnsembleSpec([(1.0, psi)])).matrix, np.outer(psi, psi.conj()))
    mix = from_ensemble(EnsembleSpec([(0.5, b.bell(0, 0)), (0.5, b.bell(1, 1))]))
    assert np.allclose(mix.matrix, bell_diagonal(2, [0.5, 0, 0, 0.5]).matrix)
    with pytest.raises(InvalidStateError):
        EnsembleSpec([(0.5, psi)])
    with pytest.raises(InvalidStateError):
        EnsembleSpec([(1.0, 2 * psi)])
    with pytest.raises(InvalidStateError):
        EnsembleSpec([])


def test_parse_descriptor():
    assert parse_descriptor("isotropic:n=2,F=0.8") == ("isotropic", {"n": "2", "F": "0.8"})
    assert parse_descriptor("bell-diagonal:n=2,w=0,1,0,0") == (
        "bell-diagonal",
        {"n": "2", "w": ["0", "1", "0", "0"]},
    )
    assert parse_descriptor("haar") == ("haar", {})
    for bad in ["", ":n=2", "x:1,n=2", "x:n=1,n=2", "x:n=2,,F=1"]:
        with pytest.raises(DescriptorError):
            parse_descriptor(bad)


def test_resource_descriptors(tmp_path):
    assert np.allclose(resource_from_descriptor("isotropic:n=2,F=0.8").matrix, isotropic(2, 0.8).matrix)
    assert np.allclose(
        resource_from_descriptor("bell-diagonal:n=2,w=0,1/2,1/2,0").matrix,
        bell_diagonal(2, [0, 0.5, 0.5, 0]).matrix,
    )
    a = resource_from_descriptor("random:n=3,rank=2", seed=4)
    assert np.array_equal(a.matrix, resource_from_descriptor("random:n=3,rank=2", seed=4).matrix)
    r = resource_from_descriptor("rotated:base=isotropic:n=2;F=0.9,W=x")
    assert np.allclose(r.matrix, rotated(isotropic(2, 0.9), basis(2).op(0, 1)).matrix)
    assert resource_from_descriptor("maximally-entangled:n=3").dims == (3, 3)

    raw = tmp_path / "raw.json"
    raw.write_text(json.dumps(density_to_json(isotropic(2, 0.6))))
    assert np.allclose(resource_from_descriptor(f"raw-file:path={raw}").matrix, isotropic(2, 0.6).matrix)
    ens = tmp_path / "ens.json"
    b = basis(2)
    ens.write_text(json.dumps(ensemble_to_json(EnsembleSpec([(0.25, b.bell(0, 0)), (0.75, b.bell(0, 1))]))))
    assert np.allclose(
        resource_from_descriptor(f"ensemble-file:path={ens}").matrix, bell_diagonal(2, [0.25, 0.75, 0, 0]).matrix
    )

    for bad in ["nope:n=2", "isotropic:n=2", "isotropic:n=2,F=0.5,x=1", "isotropic:n=two,F=0.5", "rotated:W=x"]:
        with pytest.raises(DescriptorError):
            resource_from_descriptor(bad)


def test_input_descriptors():
    rho, psi = input_from_descriptor("pure:amp=0.6,0.8j")
    assert np.allclose(psi, [0.6, 0.8j])
    assert np.allclose(rho.matrix, np.outer(psi, psi.conj()))
    _, psi = input_from_descriptor("basis:k=1", n=3)
    assert np.array_equal(psi, [0, 1, 0])
    _, psi = input_from_descriptor("haar", n=4, seed=1)
    assert psi.shape == (4,)
    rho, psi = input_from_descriptor("mixed:rank=2", n=3, seed=1)
    assert psi is None and rho.side == 3
    with pytest.raises(DimensionMismatchError):
        input_from_descriptor("pure:amp=1,0", n=3)
    with pytest.raises(DescriptorError):
        input_from_descriptor("basis:k=5", n=3)


def test_normalize_amplitudes(caplog):
    psi = normalize_amplitudes([0.6, 0.8000001])
    assert np.linalg.norm(psi) == pytest.approx(1, abs=1e-15)
    assert "renormalizing" in caplog.text
    with pytest.raises(InvalidStateError):
        normalize_amplitudes([0.6, 0.9])
    with pytest.raises(InvalidStateError):
        normalize_amplitudes([0, 0])
