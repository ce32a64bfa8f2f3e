import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import kron_loop, partial_trace_loop
from qtp.errors import DimensionMismatchError, InvalidStateError, NonUnitaryError
from qtp.linalg import (
    DensityOperator,
    bipartite_n,
    check_state,
    check_unitary,
    haar_random_state,
    haar_random_unitary,
    make_rng,
    partial_trace,
    random_density,
    random_matrix,
    schmidt_decompose,
    tensor,
    unitarity_defect,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.integers(min_value=1, max_value=4)


def test_make_rng_streams_are_stable_and_distinct():
    a = make_rng(3, "x").random(4)
    assert np.array_equal(a, make_rng(3, "x").random(4))
    assert not np.array_equal(a, make_rng(3, "y").random(4))
    assert not np.array_equal(a, make_rng(4, "x").random(4))
    g = np.random.default_rng(0)
    assert make_rng(g) is g
    with pytest.raises(ValueError):
        make_rng(g, "x")


@settings(max_examples=40, deadline=None)
@given(seed=seeds, da=dims, db=dims)
def test_tensor_matches_quadruple_loop(seed, da, db):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((da, da + 1)) + 1j * rng.standard_normal((da, da + 1))
    b = rng.standard_normal((db, db)) + 1j * rng.standard_normal((db, db))
    assert np.allclose(tensor(a, b), kron_loop(a, b), rtol=0, atol=1e-14 * (1 + np.abs(a).max() * np.abs(b).max()))


@settings(max_examples=40, deadline=None)
@given(seed=seeds, d0=dims, d1=dims)
def test_partial_trace_matches_loop(seed, d0, d1):
    m = random_matrix(d0 * d1, seed)
    for keep in (0, 1):
        got = partial_trace(m, keep, dims=(d0, d1))
        assert np.allclose(got, partial_trace_loop(m, d0, d1, keep), atol=1e-13)


@settings(max_examples=30, deadline=None)
@given(seed=seeds, d0=dims, d1=dims)
def test_partial_trace_of_product_and_trace_preservation(seed, d0, d1):
    a = random_density(d0, make_rng(seed, 0))
    b = random_density(d1, make_rng(seed, 1))
    ab = tensor(a, b)
    assert np.allclose(partial_trace(ab, 0, (d0, d1)), a, atol=1e-13)
    assert np.allclose(partial_trace(ab, 1, (d0, d1)), b, atol=1e-13)
    m = random_density(d0 * d1, seed)
    assert abs(np.trace(partial_trace(m, 1, (d0, d1))) - 1) < 1e-13


def test_partial_trace_bell_marginal_is_maximally_mixed():
    phi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    rho = np.outer(phi, phi)
    assert np.allclose(partial_trace(rho, 1, (2, 2)), np.eye(2) / 2, atol=1e-15)


def test_partial_trace_rejects_bad_dims():
    with pytest.raises(DimensionMismatchError):
        partial_trace(np.eye(6), 0, dims=(2, 2))
    with pytest.raises(ValueError):
        partial_trace(np.eye(4), 2, dims=(2, 2))


@settings(max_examples=30, deadline=None)
@given(seed=seeds, n2=st.integers(1, 4), n3=st.integers(1, 4))
def test_schmidt_matches_reduced_density_spectrum(seed, n2, n3):
    psi = haar_random_state(n2 * n3, seed)
    coeffs, left, right = schmidt_decompose(psi, (n2, n3))
    rebuilt = sum(c * np.kron(left[:, i], right[:, i]) for i, c in enumerate(coeffs))
    assert np.allclose(rebuilt, psi, atol=1e-12)
    # independent route: eigenvalues of the reduced state
    rho2 = partial_trace(np.outer(psi, psi.conj()), 0, (n2, n3))
    ev = np.sort(np.linalg.eigvalsh(rho2))[::-1][: len(coeffs)]
    assert np.allclose(coeffs**2, np.clip(ev, 0, None), atol=1e-12)
    assert np.all(np.diff(coeffs) <= 1e-15)


def test_schmidt_of_maximally_entangled():
    phi = np.eye(3).reshape(-1) / np.sqrt(3)
    coeffs, _, _ = schmidt_decompose(phi, (3, 3))
    assert np.allclose(coeffs, 1 / np.sqrt(3), atol=1e-15)


def test_haar_unitaries_are_unitary_and_reproducible():
    us = haar_random_unitary(4, seed=9, size=50)
    assert max(unitarity_defect(u) for u in us) < 1e-13
    assert np.array_equal(us, haar_random_unitary(4, seed=9, size=50))


@pytest.mark.parametrize("n", [2, 3])
def test_haar_unitary_moments(n):
    # E|U_ij|^2 = 1/n and E|U_ij|^4 = 2/(n(n+1)) for Haar measure
    us = haar_random_unitary(n, seed=1, size=40_000)
    p = np.abs(us) ** 2
    assert np.allclose(p.mean(axis=0), 1 / n, atol=0.01)
    assert np.allclose((p**2).mean(axis=0), 2 / (n * (n + 1)), atol=0.01)
    # QR without the phase fix would bias the diagonal phases
    ph = np.angle(np.diagonal(us, axis1=1, axis2=2))
    assert np.all(np.abs(np.mean(np.exp(1j * ph), axis=0)) < 0.02)


def test_haar_state_moments():
    psi = haar_random_state(3, seed=2, size=40_000)
    assert np.allclose(np.linalg.norm(psi, axis=1), 1, atol=1e-14)
    assert np.allclose((np.abs(psi) ** 2).mean(axis=0), 1 / 3, atol=0.01)
    assert np.allclose((np.abs(psi) ** 4).mean(axis=0), 2 / 12, atol=0.01)


def test_density_operator_validation():
    rho = DensityOperator(np.eye(4) / 4, (2, 2))
    assert rho.side == 4 and rho.dims == (2, 2)
    assert np.array_equal(np.asarray(rho), np.eye(4) / 4)
    with pytest.raises(InvalidStateError):
        DensityOperator(np.array([[1, 1], [0, 0]]))
    with pytest.raises(InvalidStateError):
        DensityOperator(np.eye(2))
    with pytest.raises(InvalidStateError):
        DensityOperator(np.diag([1.5, -0.5]))
    with pytest.raises(DimensionMismatchError):
        DensityOperator(np.eye(4) / 4, (3, 2))
    with pytest.raises(DimensionMismatchError):
        DensityOperator(np.ones((2, 3)))
    with pytest.raises(InvalidStateError):
        DensityOperator(np.array([[np.nan, 0], [0, 1]]))


def test_from_pure_and_bipartite_n():
    psi = haar_random_state(9, seed=0)
    rho = DensityOperator.from_pure(psi, (3, 3))
    assert bipartite_n(rho) == 3
    assert bipartite_n(np.eye(16)) == 4
    with pytest.raises(DimensionMismatchError):
        bipartite_n(np.eye(6))
    with pytest.raises(InvalidStateError):
        check_state(np.array([1.0, 1.0]))


def test_check_unitary():
    assert check_unitary(np.eye(3)).dtype == complex
    with pytest.raises(NonUnitaryError):
        check_unitary(np.diag([1.0, 2.0]))
    with pytest.raises(DimensionMismatchError):
        check_unitary(np.ones((2, 3)))


@settings(max_examples=25, deadline=None)
@given(seed=seeds, dim=st.integers(1, 6), rank=st.integers(1, 6))
def test_random_density_is_valid(seed, dim, rank):
    m = random_density(dim, seed, min(rank, dim))
    DensityOperator(m)
    assert np.linalg.matrix_rank(m, tol=1e-10) == min(rank, dim)
