"""Weyl-Heisenberg operator basis and generalized Bell states.

For dimension n, ``h|j> = |j+1 mod n>`` and ``g|j> = w^j |j>`` with
``w = exp(-2 pi i / n)``. The basis operators are ``U[s, t] = h^t g^s`` and
the Bell vectors ``|Phi_st> = (1 (x) U[s, t]) |Phi>``. Tables are always
indexed ``(s, t)``; flattened labels use ``s * n + t``.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import DimensionMismatchError
from .linalg import as_matrix, bipartite_n, haar_random_unitary, make_rng


def canonical_omega(n: int) -> complex:
    return np.exp(-2j * np.pi / n)


def shift_clock(n: int, omega_sign: int = -1):
    """Cyclic shift ``h`` and clock ``g``.

    ``omega_sign=+1`` builds the clock with the conjugate root of unity; it
    exists only so the verification suite can inject a wrong convention.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    h = np.roll(np.eye(n, dtype=complex), 1, axis=0)
    omega = np.exp(omega_sign * 2j * np.pi / n)
    g = np.diag(omega ** np.arange(n))
    return h, g


class WeylBasis:
    """Precomputed ``U[s, t]`` and ``|Phi_st>`` for one dimension.

    ``ops`` has shape ``(n, n, n, n)`` (s, t, row, col) and ``bells`` shape
    ``(n, n, n*n)``. Instances are treated as immutable; use :func:`basis`
    for a cached one.
    """

    def __init__(self, n: int, omega_sign: int = -1):
        h, g = shift_clock(n, omega_sign)
        self.n = n
        self.omega = np.exp(omega_sign * 2j * np.pi / n)
        self.h, self.g = h, g
        hp = [np.linalg.matrix_power(h, t) for t in range(n)]
        gp = [np.linalg.matrix_power(g, s) for s in range(n)]
        ops = np.empty((n, n, n, n), dtype=complex)
        for s in range(n):
            for t in range(n):
                ops[s, t] = hp[t] @ gp[s]
        phi = np.eye(n, dtype=complex).reshape(-1) / np.sqrt(n)
        # (1 (x) U)|Phi> has coefficient matrix U^T / sqrt(n)
        bells = np.swapaxes(ops, -1, -2).reshape(n, n, n * n) / np.sqrt(n)
        for arr in (ops, bells, phi):
            arr.setflags(write=False)
        self.ops = ops
        self.bells = bells
        self.phi = phi

    def __repr__(self):
        return f"WeylBasis(n={self.n})"

    def _check(self, s, t):
        if not (0 <= s < self.n and 0 <= t < self.n):
            raise IndexError(f"(s, t) = ({s}, {t}) out of range for n = {self.n}")

    def op(self, s: int, t: int) -> np.ndarray:
        self._check(s, t)
        return self.ops[s, t]

    def bell(self, s: int, t: int) -> np.ndarray:
        self._check(s, t)
        return self.bells[s, t]

    @property
    def flat_ops(self) -> np.ndarray:
        """``(n*n, n, n)`` stack in ``s * n + t`` order."""
        return self.ops.reshape(self.n * self.n, self.n, self.n)

    @property
    def flat_bells(self) -> np.ndarray:
        """``(n*n, n*n)``; row ``s * n + t`` is ``|Phi_st>``."""
        return self.bells.reshape(self.n * self.n, self.n * self.n)


@lru_cache(maxsize=32)
def basis(n: int) -> WeylBasis:
    return WeylBasis(n)


def weyl_op(b: WeylBasis, s: int, t: int) -> np.ndarray:
    return b.op(s, t)


def bell_state(b: WeylBasis, s: int, t: int) -> np.ndarray:
    return b.bell(s, t)


def commutation_check(b: WeylBasis) -> float:
    """Max deviation of ``U_st U_s't' = w^(st' - ts') U_s't' U_st`` over all pairs.

    The phase uses the canonical ``w = exp(-2 pi i / n)``, not ``b.omega``.
    """
    n = b.n
    w = canonical_omega(n)
    ops = b.flat_ops
    labels = [(s, t) for s in range(n) for t in range(n)]
    lhs = np.einsum("aij,bjk->abik", ops, ops)
    rhs = np.einsum("bij,ajk->abik", ops, ops)
    phase = np.array([[w ** (s * tp - t * sp) for (sp, tp) in labels] for (s, t) in labels])
    return float(np.max(np.abs(lhs - phase[:, :, None, None] * rhs)))


def trace_orthogonality_defect(b: WeylBasis) -> float:
    """Max of ``|tr(U_st U_s't'^dag) - n delta delta|``."""
    ops = b.flat_ops
    gram = np.einsum("aij,bij->ab", ops, ops.conj())
    return float(np.max(np.abs(gram - b.n * np.eye(b.n**2))))


def trace_defect(b: WeylBasis) -> float:
    """Max of ``|tr U_st - n delta_s0 delta_t0|``."""
    tr = np.trace(b.ops, axis1=-2, axis2=-1)
    expected = np.zeros((b.n, b.n))
    expected[0, 0] = b.n
    return float(np.max(np.abs(tr - expected)))


def bell_gram_defect(b: WeylBasis) -> float:
    v = b.flat_bells
    return float(np.max(np.abs(v.conj() @ v.T - np.eye(b.n**2))))


def sandwich_sum(b: WeylBasis, a, dagger_first: bool = False) -> np.ndarray:
    """``sum_st U a U^dag`` (or ``sum_st U^dag a U`` with ``dagger_first``)."""
    ops = b.flat_ops
    a = as_matrix(a)
    if dagger_first:
        return np.einsum("kji,jl,klm->im", ops.conj(), a, ops)
    return np.einsum("kij,jl,kml->im", ops, a, ops.conj())


def decompose_in_weyl(w, b: WeylBasis | None = None) -> np.ndarray:
    """Coefficients ``c[s, t] = tr(U_st^dag w) / n`` so that ``w = sum c U``."""
    w = as_matrix(w)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got {w.shape}")
    b = b or basis(w.shape[0])
    if w.shape[0] != b.n:
        raise DimensionMismatchError(f"matrix side {w.shape[0]} != basis n {b.n}")
    return np.einsum("stij,ij->st", b.ops.conj(), w) / b.n


def reconstruct_from_weyl(coeffs, b: WeylBasis | None = None) -> np.ndarray:
    coeffs = np.asarray(coeffs)
    b = b or basis(coeffs.shape[0])
    return np.einsum("st,stij->ij", coeffs, b.ops)


def flip_operator(n: int) -> np.ndarray:
    """``P|ij> = |ji>``."""
    p = np.zeros((n * n, n * n))
    for i in range(n):
        for j in range(n):
            p[j * n + i, i * n + j] = 1.0
    return p


def twirl_coefficients(sigma):
    """``(alpha1, alpha2)`` of the U (x) U twirl of ``sigma``."""
    sigma = as_matrix(sigma)
    n = bipartite_n(sigma)
    if n < 2:
        raise ValueError("twirl is undefined for n = 1")
    p = flip_operator(n)
    tr_s = np.trace(sigma)
    tr_sp = np.trace(sigma @ p)
    denom = n**2 * (n**2 - 1)
    alpha1 = (n**2 * tr_s - n * tr_sp) / denom
    alpha2 = (n**2 * tr_sp - n * tr_s) / denom
    return alpha1, alpha2


def twirl_closed_form(sigma) -> np.ndarray:
    """Haar average of ``(U^dag (x) U^dag) sigma (U (x) U)`` as ``a1 I + a2 P``."""
    sigma = as_matrix(sigma)
    n = bipartite_n(sigma)
    if n < 2:
        raise ValueError("twirl is undefined for n = 1")
    a1, a2 = twirl_coefficients(sigma)
    return a1 * np.eye(n * n) + a2 * flip_operator(n)


def twirl_monte_carlo(sigma, samples: int, seed=None, batch: int = 10_000) -> np.ndarray:
    """Sampling estimate of the twirl using Haar unitaries."""
    sigma = as_matrix(sigma)
    n = bipartite_n(sigma)
    rng = make_rng(seed)
    s4 = sigma.reshape(n, n, n, n)
    acc = np.zeros((n, n, n, n), dtype=complex)
    done = 0
    while done < samples:
        k = min(batch, samples - done)
        u = haar_random_unitary(n, rng, size=k)
        # (U^dag (x) U^dag) sigma (U (x) U), entry [ab, cd]
        acc += np.einsum("zia,zjb,ijkl,zkc,zld->abcd", u.conj(), u.conj(), s4, u, u, optimize=True)
        done += k
    return (acc / samples).reshape(n * n, n * n)


def bell_overlap_matrix(chi, b: WeylBasis | None = None) -> np.ndarray:
    """``M[(s,t), (s',t')] = <Phi_st| chi |Phi_s't'>`` with flattened labels."""
    chi = as_matrix(chi)
    n = bipartite_n(chi)
    b = b or basis(n)
    if b.n != n:
        raise DimensionMismatchError(f"resource dimension {n} != basis n {b.n}")
    v = b.flat_bells
    return v.conj() @ chi @ v.T


def bell_weights(chi, b: WeylBasis | None = None) -> np.ndarray:
    """Diagonal ``<Phi_st| chi |Phi_st>`` as an ``(n, n)`` real table."""
    m = bell_overlap_matrix(chi, b)
    n = int(round(np.sqrt(m.shape[0])))
    return np.real(np.diag(m)).reshape(n, n)
