"""Pure-state teleportation protocols built from the sender constraint equation.

Conventions (all 0-based). Alice holds the unknown state on H1 (dim N1) and
the first half of the resource on H2 (dim N2); Bob holds H3 (dim N1). The
resource is ``sum_jk a[j, k] |j>|k>`` with coefficient matrix ``a`` of shape
``(N2, N1)``. The sender unitary acts on H1 (x) H2 as
``U|i j> = sum_st b[s, t, i, j] |s t>``; ``B[s, t]`` is the N1 x N2 block
``b[s, t, :, :]``. A phase table ``c`` has shape ``(N1, N1, N2)`` and is
indexed ``c[s, i, t]``.

For a resource that is maximally entangled on its support the constraint is
solved by ``b[s, t, i, (t + i) mod N] = c[s, i, t] / sqrt(N1)`` (up to the
support relabelling), and Bob's branch after outcome ``(s, t)`` is
``sum_i c[s, i, t] alpha_i |i + t>``; the correction shifts back by ``t``
and removes the phases.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatchError,
    InvalidStateError,
    NonUnitaryError,
    SupportViolationError,
    UnsolvableResourceError,
)
from .linalg import check_state, make_rng, max_abs

MAXIMAL_TOL = 1e-12
PHASE_TOL = 1e-12


# ---------------------------------------------------------------- resources


@dataclass(frozen=True)
class ResourceCoefficients:
    """Coefficient matrix ``a`` (N2 x N1) of a pure bipartite resource."""

    a: np.ndarray

    def __post_init__(self):
        a = np.array(self.a, dtype=complex)
        if a.ndim != 2:
            raise DimensionMismatchError(f"coefficient matrix must be 2-D, got {a.shape}")
        norm = np.sum(np.abs(a) ** 2)
        if abs(norm - 1.0) > 1e-12:
            raise InvalidStateError(f"sum |a_ij|^2 = {norm:.15g}, expected 1")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)

    @property
    def N1(self) -> int:
        return self.a.shape[1]

    @property
    def N2(self) -> int:
        return self.a.shape[0]

    @property
    def vector(self) -> np.ndarray:
        """Resource state on H2 (x) H3."""
        return self.a.reshape(-1)

    def schmidt_lambdas(self) -> np.ndarray:
        """Squared Schmidt coefficients, descending, length ``min(N1, N2)``."""
        return np.linalg.svd(self.a, compute_uv=False) ** 2


def diagonal_resource(n: int, aux_dim: int | None = None) -> ResourceCoefficients:
    """``a_ij = delta_ij / sqrt(n)``; with ``aux_dim > n`` the extra H2 rows are zero."""
    if n < 2:
        raise ValueError("n must be >= 2")
    n2 = n if aux_dim is None else aux_dim
    if n2 < n:
        raise DimensionMismatchError("aux_dim must be >= n")
    a = np.zeros((n2, n), dtype=complex)
    a[np.arange(n), np.arange(n)] = 1 / np.sqrt(n)
    return ResourceCoefficients(a)


def partial_support_resource(N1: int, support) -> ResourceCoefficients:
    """Maximally entangled resource between H2 (dim ``len(support)``) and the
    span of ``support`` in H3.

    Row ``m`` of the coefficient matrix carries ``1/sqrt(n1)`` in column
    ``support[m]``; a set is taken in ascending order.
    """
    if isinstance(support, (set, frozenset)):
        support = sorted(support)
    support = [int(k) for k in support]
    if not support:
        raise ValueError("support must be nonempty")
    if len(set(support)) != len(support) or not all(0 <= k < N1 for k in support):
        raise ValueError(f"support {support} must be distinct indices in [0, {N1})")
    n1 = len(support)
    a = np.zeros((n1, N1), dtype=complex)
    a[np.arange(n1), support] = 1 / np.sqrt(n1)
    return ResourceCoefficients(a)


def schmidt_resource(lambdas) -> ResourceCoefficients:
    """Diagonal resource ``sum_i sqrt(lambda_i) |ii>``."""
    lam = np.asarray(lambdas, dtype=float)
    return ResourceCoefficients(np.diag(np.sqrt(lam)))


# ---------------------------------------------------------------- phases


def ones_phases(N1: int, N2: int | None = None) -> np.ndarray:
    return np.ones((N1, N1, N1 if N2 is None else N2), dtype=complex)


def fourier_phases(N1: int, N2: int | None = None) -> np.ndarray:
    """``c[s, i, t] = w^(s i)`` with ``w = exp(-2 pi i / N1)``."""
    N2 = N1 if N2 is None else N2
    s, i = np.meshgrid(np.arange(N1), np.arange(N1), indexing="ij")
    c = np.exp(-2j * np.pi * s * i / N1)
    return np.repeat(c[:, :, None], N2, axis=2)


def pauli_n2_phases() -> np.ndarray:
    """The qubit sign choice that reproduces the CNOT + Hadamard protocol:
    every entry 1 except ``c[1, 1, t] = -1``."""
    c = ones_phases(2)
    c[1, 1, :] = -1
    return c


def random_phases(N1: int, N2: int | None = None, seed=None) -> np.ndarray:
    """Random admissible table: per ``t``, a Fourier matrix dressed with
    random diagonal phases on both sides and a random row permutation."""
    rng = make_rng(seed)
    N2 = N1 if N2 is None else N2
    base = fourier_phases(N1, 1)[:, :, 0]
    c = np.empty((N1, N1, N2), dtype=complex)
    for t in range(N2):
        left = np.exp(2j * np.pi * rng.random(N1))
        right = np.exp(2j * np.pi * rng.random(N1))
        perm = rng.permutation(N1)
        c[:, :, t] = (left[:, None] * base * right[None, :])[perm]
    return c


PHASE_PRESETS = {
    "ones": ones_phases,
    "fourier": fourier_phases,
    "pauli-n2": lambda N1, N2=None: _pauli_preset(N1, N2),
}


def _pauli_preset(N1, N2):
    if N1 != 2 or (N2 not in (None, 2)):
        raise ValueError("preset 'pauli-n2' exists only for N1 = N2 = 2")
    return pauli_n2_phases()


def phase_preset(name: str, N1: int, N2: int | None = None) -> np.ndarray:
    try:
        factory = PHASE_PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown phase preset {name!r}; known: {sorted(PHASE_PRESETS)}") from None
    return factory(N1, N2)


def check_phase_table(c, N1: int, N2: int) -> np.ndarray:
    c = np.asarray(c, dtype=complex)
    if c.shape != (N1, N1, N2):
        raise DimensionMismatchError(f"phase table shape {c.shape} != {(N1, N1, N2)}")
    d = max_abs(np.abs(c) - 1.0)
    if d > PHASE_TOL:
        raise InvalidStateError(f"phase table entries are not unimodular (defect {d:.3e})")
    return c


def hadamard_defect(c, ts=None) -> float:
    """Max over ``t`` of ``|C_t^dag C_t - N1 I|`` with ``C_t[s, i] = c[s, i, t]``.

    Zero is required for the sender transformation to be unitary.
    """
    c = np.asarray(c)
    N1 = c.shape[0]
    ts = range(c.shape[2]) if ts is None else ts
    worst = 0.0
    for t in ts:
        ct = c[:, :, t]
        worst = max(worst, max_abs(ct.conj().T @ ct - N1 * np.eye(N1)))
    return worst


# ---------------------------------------------------------------- necessity


@dataclass(frozen=True)
class MaximalityVerdict:
    solvable: bool
    defect: float
    lambdas: tuple


def maximality_necessity_check(lambdas) -> MaximalityVerdict:
    """Decide whether a Schmidt spectrum admits perfect teleportation.

    With ``a = diag(sqrt(lambda))`` the constraint forces
    ``N sqrt(lambda_i) |b| = 1`` on every nonzero sender entry, while
    unitarity fixes ``|b| = 1/sqrt(N)``. The certificate ``defect`` is the
    largest violation ``|sqrt(N lambda_i) - 1|``; it is zero iff the
    spectrum is flat.
    """
    lam = np.asarray(lambdas, dtype=float)
    if lam.ndim != 1 or lam.size == 0:
        raise ValueError("lambdas must be a nonempty list")
    if np.any(lam < -1e-15) or abs(lam.sum() - 1.0) > 1e-12:
        raise ValueError("lambdas must be nonnegative and sum to 1")
    N = lam.size
    lam = np.clip(lam, 0.0, None)
    solvable = bool(np.all(np.abs(lam - 1.0 / N) <= MAXIMAL_TOL))
    defect = float(np.max(np.abs(np.sqrt(N * lam) - 1.0)))
    return MaximalityVerdict(solvable, defect, tuple(float(x) for x in lam))


# ---------------------------------------------------------------- sender blocks


@dataclass(frozen=True)
class SenderBlocks:
    """Sender coefficients ``B[s, t, i, j]`` plus how the resource was embedded.

    ``support`` lists the H1/H3 indices of the teleportable subspace in rank
    order and ``rank`` its size; outcomes with ``t >= rank`` never occur.
    """

    B: np.ndarray
    N1: int
    N2: int
    rank: int
    support: tuple
    phases: np.ndarray = field(repr=False)
    phase_offsets: tuple = field(default=(), repr=False)

    def block(self, s: int, t: int) -> np.ndarray:
        return self.B[s, t]

    def trace_gram_defect(self) -> float:
        """``max |tr(B_st B_s't'^dag) - delta delta|``."""
        flat = self.B.reshape(self.N1 * self.N2, -1)
        return max_abs(flat @ flat.conj().T - np.eye(self.N1 * self.N2))


def _partial_permutation(a):
    """``(rows, cols, phases)`` if ``a`` is a scaled partial permutation, else None."""
    nz = np.abs(a) > 1e-14
    if np.any(nz.sum(axis=0) > 1) or np.any(nz.sum(axis=1) > 1):
        return None
    rows, cols = np.nonzero(nz)
    mags = np.abs(a[rows, cols])
    if max_abs(mags - 1 / np.sqrt(len(rows))) > MAXIMAL_TOL:
        return None
    return rows, cols, np.angle(a[rows, cols])


def solve_sender_blocks(resource: ResourceCoefficients, c) -> SenderBlocks:
    """Sender coefficients satisfying the constraint equation for ``resource``.

    Raises :class:`UnsolvableResourceError` if the resource is not maximally
    entangled on a support of size ``min(N1, N2)``, and
    :class:`NonUnitaryError` if some slice ``c[:, :, t]`` is not a complex
    Hadamard matrix (the sender transformation would not be unitary).
    """
    if not isinstance(resource, ResourceCoefficients):
        resource = ResourceCoefficients(resource)
    a = resource.a
    N1, N2 = resource.N1, resource.N2
    c = check_phase_table(c, N1, N2)

    sv = np.linalg.svd(a, compute_uv=False)
    full = min(N1, N2)
    lam = np.zeros(full)
    lam[: sv.size] = sv[:full] ** 2
    verdict = maximality_necessity_check(lam / lam.sum())
    if not verdict.solvable:
        raise UnsolvableResourceError(
            f"resource is not maximally entangled on its support "
            f"(Schmidt spectrum {np.round(lam, 12).tolist()}, defect {verdict.defect:.6g})",
            defect=verdict.defect,
        )
    r = full

    perm = _partial_permutation(a)
    if perm is None and N1 == N2:
        return _unitary_route(a, c)
    if perm is None:
        raise UnsolvableResourceError(
            "rectangular resources are supported only as scaled partial permutations"
        )
    rows, cols, theta = perm
    order = np.argsort(rows)
    rows, cols, theta = rows[order], cols[order], theta[order]

    bad = hadamard_defect(c, range(r))
    if bad > 1e-10:
        raise NonUnitaryError(
            f"phase table slices are not complex Hadamard matrices (defect {bad:.3e}); "
            "the sender transformation would not be unitary"
        )

    rank_of = np.arange(N1) % r
    rank_of[cols] = np.arange(r)
    B = np.zeros((N1, N2, N1, N2), dtype=complex)
    for t in range(r):
        for i in range(N1):
            m = (t + rank_of[i]) % r
            B[:, t, i, rows[m]] = c[:, i, t] / np.sqrt(N1) * np.exp(-1j * theta[m])
    unused = [j for j in range(N2) if j not in set(rows.tolist())]
    for idx, j in enumerate(unused):
        t = r + idx
        for i in range(N1):
            B[i, t, i, j] = 1.0
    return SenderBlocks(B, N1, N2, r, tuple(int(k) for k in cols), c)


def _unitary_route(a, c) -> SenderBlocks:
    """Square maximally entangled resource ``a = V / sqrt(N)``: reuse the
    diagonal solution ``B`` as ``sqrt(N) B a^dag`` so Bob's branches match."""
    N = a.shape[0]
    base = solve_sender_blocks(diagonal_resource(N), c)
    B = np.sqrt(N) * np.einsum("stij,kj->stik", base.B, a.conj())
    return SenderBlocks(B, N, N, N, tuple(range(N)), c)


def assemble_unitary(blocks: SenderBlocks) -> np.ndarray:
    """The N1*N2 square matrix with entry ``[(s,t), (i,j)] = b[s, t, i, j]``."""
    d = blocks.trace_gram_defect()
    if d > 1e-12:
        raise NonUnitaryError(f"sender blocks are not trace-orthonormal (defect {d:.3e})")
    n = blocks.N1 * blocks.N2
    return blocks.B.reshape(n, n).copy()


def bob_operator(blocks: SenderBlocks, resource: ResourceCoefficients, s: int, t: int):
    """Linear map from the input amplitudes to Bob's unnormalized branch
    after Alice obtains ``|s t>``: ``(B_st a)^T``."""
    return (blocks.B[s, t] @ resource.a).T


def constraint_residuals(blocks: SenderBlocks, resource: ResourceCoefficients) -> dict:
    """Residuals of the three perfect-teleportation conditions.

    ``orthonormality``: ``tr(B B^dag)`` Gram vs identity. ``branch``: every
    occurring branch operator restricted to the support satisfies
    ``K^dag K = |lambda|^2 I`` with ``|lambda|^2 = 1/(N1 r)``. ``maximal``:
    ``a a^dag`` equals ``1/r`` on its range. ``lambda_sum``: the branch
    weights add up to one.
    """
    N1, r = blocks.N1, blocks.rank
    sup = list(blocks.support)
    lam2 = 1.0 / (N1 * r)
    worst = 0.0
    total = 0.0
    for s in range(N1):
        for t in range(blocks.N2):
            k = bob_operator(blocks, resource, s, t)[:, sup]
            target = lam2 if t < r else 0.0
            worst = max(worst, max_abs(k.conj().T @ k - target * np.eye(len(sup))))
            total += target
    u, sv, _ = np.linalg.svd(resource.a)
    q = u[:, : r]
    aa = resource.a @ resource.a.conj().T
    return {
        "orthonormality": blocks.trace_gram_defect(),
        "branch": worst,
        "maximal": max_abs(aa - q @ q.conj().T / r),
        "lambda_sum": abs(total - 1.0),
    }


# ---------------------------------------------------------------- corrections


def correction_operator(i: int, k: int, c, N1: int, support=None) -> np.ndarray:
    """Bob's correction for outcome ``|i k>``: shift back by ``k`` then strip phases.

    Written as ``Pi^(-k) D`` with ``Pi|j> = |j+1>`` and
    ``D = diag(conj(c[i, (p - k) mod r, k]))`` over positions ``p`` of the
    teleportable subspace (``support``, default all of H1). Off the support
    it acts as the identity.
    """
    c = np.asarray(c)
    sup = list(range(N1)) if support is None else [int(x) for x in support]
    r = len(sup)
    if not (0 <= i < N1) or k < 0:
        raise IndexError(f"outcome ({i}, {k}) out of range")
    o = np.eye(N1, dtype=complex)
    if k >= r:
        return o
    for m in range(r):
        o[:, sup[m]] = 0.0
    for m in range(r):
        src = sup[(k + m) % r]
        o[sup[m], src] = np.conj(c[i, sup[m], k])
    return o


def shift_operator(n: int) -> np.ndarray:
    """``Pi|j> = |j+1 mod n>``."""
    return np.roll(np.eye(n, dtype=complex), 1, axis=0)


# ---------------------------------------------------------------- end to end


@dataclass(frozen=True)
class Outcome:
    s: int
    t: int
    probability: float
    branch: np.ndarray | None  # Bob's normalized state before correction
    correction: np.ndarray
    corrected: np.ndarray | None
    overlap: float  # |<psi0|corrected>|, 1 means recovered up to phase


def teleport_pure(psi0, resource: ResourceCoefficients, c) -> list:
    """Simulate the protocol for every measurement outcome.

    The joint state ``psi0 (x) resource`` is evolved by ``U (x) 1``,
    projected on each ``|s t>`` and Bob's branch is corrected. Outcomes are
    returned in ``(s, t)`` order; zero-probability outcomes carry ``None``
    states.
    """
    if not isinstance(resource, ResourceCoefficients):
        resource = ResourceCoefficients(resource)
    psi0 = check_state(psi0, tol=1e-10)
    N1, N2 = resource.N1, resource.N2
    if psi0.shape[0] != N1:
        raise DimensionMismatchError(f"input dimension {psi0.shape[0]} != N1 = {N1}")
    blocks = solve_sender_blocks(resource, c)
    off = np.ones(N1, dtype=bool)
    off[list(blocks.support)] = False
    leak = float(np.linalg.norm(psi0[off]))
    if leak > 1e-12:
        raise SupportViolationError(
            f"input has weight {leak:.3e} outside the teleportable subspace {list(blocks.support)}"
        )
    u = assemble_unitary(blocks)
    joint = np.kron(psi0, resource.vector)
    joint = np.kron(u, np.eye(N1)) @ joint
    joint = joint.reshape(N1, N2, N1)

    outcomes = []
    for s in range(N1):
        for t in range(N2):
            bob = joint[s, t]
            p = float(np.vdot(bob, bob).real)
            o = correction_operator(s, t, blocks.phases, N1, blocks.support)
            if p <= 1e-300:
                outcomes.append(Outcome(s, t, p, None, o, None, float("nan")))
                continue
            branch = bob / np.sqrt(p)
            fixed = o @ branch
            outcomes.append(Outcome(s, t, p, branch, o, fixed, float(abs(np.vdot(psi0, fixed)))))
    return outcomes


def recovery_error(outcomes) -> float:
    """``max (1 - |overlap|)`` over outcomes that occur."""
    return max(1.0 - o.overlap for o in outcomes if o.branch is not None)


# ---------------------------------------------------------------- named gates

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
Y = Z @ X  # real antisymmetric gate, Y = ZX
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
SIGMA_X = X
SIGMA_Y = np.array([[0, -1j], [1j, 0]])
SIGMA_Z = Z
