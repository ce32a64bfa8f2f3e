"""Dense complex linear algebra and quantum-state primitives.

Matrices and state vectors are plain ``numpy`` arrays of dtype complex128.
:class:`DensityOperator` is a thin validated wrapper that also records the
subsystem dimensions; every function here accepts either form.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError, InvalidStateError, NonUnitaryError

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = -1e-10
NORM_TOL = 1e-12
UNITARY_TOL = 1e-12


# ---------------------------------------------------------------- seeding


def make_rng(seed, *stream) -> np.random.Generator:
    """Return a generator determined by ``seed`` and an optional stream id.

    Stream ids may be ints or strings; strings are hashed with CRC32 so the
    derived sub-stream is stable across interpreter runs.
    """
    if isinstance(seed, np.random.Generator):
        if stream:
            raise ValueError("cannot derive a sub-stream from a Generator")
        return seed
    if seed is None:
        return np.random.default_rng()
    key = [int(seed) & 0xFFFFFFFFFFFFFFFF]
    for s in stream:
        key.append(zlib.crc32(s.encode()) if isinstance(s, str) else int(s))
    return np.random.default_rng(np.random.SeedSequence(key))


# ---------------------------------------------------------------- checks


def max_abs(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def hermitian_defect(m) -> float:
    m = np.asarray(m)
    return max_abs(m - m.conj().T)


def unitarity_defect(u) -> float:
    u = np.asarray(u)
    return max_abs(u @ u.conj().T - np.eye(u.shape[0]))


def is_unitary(u, tol=UNITARY_TOL) -> bool:
    u = np.asarray(u)
    return u.ndim == 2 and u.shape[0] == u.shape[1] and unitarity_defect(u) <= tol


def check_unitary(u, tol=UNITARY_TOL):
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise DimensionMismatchError(f"unitary must be square, got shape {u.shape}")
    d = unitarity_defect(u)
    if d > tol:
        raise NonUnitaryError(f"unitarity defect {d:.3e} exceeds {tol:.0e}")
    return u


def check_state(psi, tol=NORM_TOL):
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1:
        raise DimensionMismatchError("state vector must be one-dimensional")
    if not np.all(np.isfinite(psi)):
        raise InvalidStateError("state vector has non-finite entries")
    defect = abs(np.linalg.norm(psi) - 1.0)
    if defect > tol:
        raise InvalidStateError(f"state norm defect {defect:.3e} exceeds {tol:.0e}")
    return psi


def density_defects(m) -> dict:
    """Hermiticity, trace and positivity defects of a candidate density matrix."""
    m = np.asarray(m)
    herm = hermitian_defect(m)
    sym = (m + m.conj().T) / 2
    return {
        "hermitian": herm,
        "trace": abs(np.trace(m) - 1.0),
        "min_eigenvalue": float(np.linalg.eigvalsh(sym)[0]),
    }


# ---------------------------------------------------------------- types


@dataclass(frozen=True)
class DensityOperator:
    """Validated density matrix with subsystem dimensions.

    ``dims`` defaults to a single subsystem spanning the whole matrix.
    """

    matrix: np.ndarray
    dims: tuple = field(default=None)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatchError(f"density matrix must be square, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise InvalidStateError("density matrix has non-finite entries")
        dims = (m.shape[0],) if self.dims is None else tuple(int(d) for d in self.dims)
        if int(np.prod(dims)) != m.shape[0]:
            raise DimensionMismatchError(f"dims {dims} do not factor side {m.shape[0]}")
        d = density_defects(m)
        if d["hermitian"] > HERMITIAN_TOL:
            raise InvalidStateError(f"not Hermitian (defect {d['hermitian']:.3e})")
        if d["trace"] > TRACE_TOL:
            raise InvalidStateError(f"trace defect {d['trace']:.3e}")
        if d["min_eigenvalue"] < PSD_TOL:
            raise InvalidStateError(f"negative eigenvalue {d['min_eigenvalue']:.3e}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", dims)

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)

    @property
    def side(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_pure(cls, psi, dims=None):
        psi = check_state(psi, tol=1e-10)
        return cls(np.outer(psi, psi.conj()), dims)


def as_matrix(op) -> np.ndarray:
    return np.asarray(op, dtype=complex)


def dims_of(op, dims=None, parts=None):
    """Subsystem dims of ``op``: explicit ``dims`` win, then the wrapper's, then
    an equal split into ``parts`` factors."""
    if dims is not None:
        return tuple(dims)
    if isinstance(op, DensityOperator) and len(op.dims) > 1:
        return op.dims
    side = np.asarray(op).shape[-1]
    if parts == 2:
        n = int(round(np.sqrt(side)))
        if n * n != side:
            raise DimensionMismatchError(f"side {side} is not a square n*n")
        return (n, n)
    return (side,)


def bipartite_n(chi) -> int:
    """Local dimension n of an n x n bipartite operator."""
    dims = dims_of(chi, parts=2)
    if len(dims) != 2 or dims[0] != dims[1]:
        raise DimensionMismatchError(f"expected an n x n bipartite operator, got dims {dims}")
    return dims[0]


# ---------------------------------------------------------------- operations


def tensor(a, b) -> np.ndarray:
    """Kronecker product; ``(a (x) b)[i*rb + k, j*cb + l] = a[i, j] * b[k, l]``."""
    return np.kron(as_matrix(a), as_matrix(b))


def partial_trace(op, keep: int, dims=None) -> np.ndarray:
    """Reduced operator on subsystem ``keep`` (0 or 1) of a bipartite operator."""
    m = as_matrix(op)
    dims = dims_of(op, dims)
    if len(dims) != 2:
        raise DimensionMismatchError(f"partial_trace needs two subsystems, got dims {dims}")
    if keep not in (0, 1):
        raise ValueError("keep must be 0 or 1")
    d0, d1 = dims
    if d0 * d1 != m.shape[0] or m.shape[0] != m.shape[1]:
        raise DimensionMismatchError(f"dims {dims} do not factor matrix of shape {m.shape}")
    t = m.reshape(d0, d1, d0, d1)
    if keep == 0:
        return np.einsum("ijkj->ik", t)
    return np.einsum("ijik->jk", t)


def schmidt_decompose(psi, dims):
    """Schmidt coefficients (descending) and the left/right bases as columns.

    Returns ``(coeffs, left, right)`` with ``psi = sum_i coeffs[i] *
    kron(left[:, i], right[:, i])``.
    """
    n2, n3 = dims
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (n2 * n3,):
        raise DimensionMismatchError(f"state of length {psi.shape} does not match dims {dims}")
    left, coeffs, right_h = np.linalg.svd(psi.reshape(n2, n3), full_matrices=False)
    return coeffs, left, right_h.T


def _ginibre(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def haar_random_state(dim: int, seed=None, size=None) -> np.ndarray:
    """Haar-uniform unit vector(s) of length ``dim``.

    With ``size`` given, returns an array of shape ``(size, dim)``.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = make_rng(seed)
    shape = (dim,) if size is None else (size, dim)
    z = _ginibre(rng, shape)
    return z / np.linalg.norm(z, axis=-1, keepdims=True)


def haar_random_unitary(dim: int, seed=None, size=None) -> np.ndarray:
    """Haar-distributed unitary via QR of a Ginibre matrix with R-phase fix."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = make_rng(seed)
    shape = (dim, dim) if size is None else (size, dim, dim)
    q, r = np.linalg.qr(_ginibre(rng, shape))
    d = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (d / np.abs(d))[..., None, :]


def random_density(dim: int, seed=None, rank=None) -> np.ndarray:
    """Random density matrix from the induced (Hilbert-Schmidt for full rank) measure."""
    rng = make_rng(seed)
    g = _ginibre(rng, (dim, dim if rank is None else rank))
    m = g @ g.conj().T
    m = (m + m.conj().T) / 2
    return m / np.trace(m).real


def random_matrix(dim: int, seed=None) -> np.ndarray:
    return _ginibre(make_rng(seed), (dim, dim))


def fidelity_up_to_phase(psi, phi) -> float:
    """``|<psi|phi>|`` for unit vectors; 1 iff equal up to a global phase."""
    return float(abs(np.vdot(psi, phi)))
