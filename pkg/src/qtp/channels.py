"""Teleportation channels over arbitrary mixed resources.

A correction family ``T`` is an ``(n, n, n, n)`` array, ``T[s, t]`` being the
unitary Bob uses after outcome ``(s, t)``; Bob applies it as
``T^dag rho T``. The standard protocol is ``T[s, t] = U[s, t]``.

All channel functions accept a single ``rho`` or a stack ``(..., n, n)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, InvalidStateError
from .linalg import as_matrix, bipartite_n, check_unitary, max_abs, partial_trace
from .weyl import basis, bell_overlap_matrix, bell_weights

TRACE_TOL = 1e-10
WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class ChannelOutput:
    rho_out: np.ndarray
    trace_defect: float
    method: str


def _output(rho_out, method) -> ChannelOutput:
    tr = np.trace(rho_out, axis1=-2, axis2=-1)
    return ChannelOutput(rho_out, max_abs(tr - 1.0), method)


def _check_pair(chi, rho):
    chi = as_matrix(chi)
    n = bipartite_n(chi)
    rho = as_matrix(rho)
    if rho.shape[-2:] != (n, n):
        raise DimensionMismatchError(f"input of shape {rho.shape[-2:]} does not match resource n = {n}")
    return chi, rho, n


# ---------------------------------------------------------------- families


def standard_family(n: int) -> np.ndarray:
    return np.array(basis(n).ops)


def rotated_family(w) -> np.ndarray:
    """``T[s, t] = W U[s, t]``."""
    w = check_unitary(w)
    return np.einsum("ij,stjk->stik", w, basis(w.shape[0]).ops)


def check_family(T, n: int) -> np.ndarray:
    T = np.asarray(T, dtype=complex)
    if T.shape == (n * n, n, n):
        T = T.reshape(n, n, n, n)
    if T.shape != (n, n, n, n):
        raise DimensionMismatchError(f"correction family shape {T.shape} != {(n, n, n, n)}")
    for s in range(n):
        for t in range(n):
            check_unitary(T[s, t])
    return T


# ---------------------------------------------------------------- closed forms


def kraus_form(chi):
    """Standard channel as ``[(p_st, U_st), ...]`` in ``(s, t)`` order."""
    chi = as_matrix(chi)
    n = bipartite_n(chi)
    p = bell_weights(chi).ravel()
    if np.any(p < -WEIGHT_TOL):
        raise InvalidStateError(f"negative Bell weight {p.min():.3e}; resource is not PSD")
    p = np.clip(p, 0.0, None)
    ops = basis(n).flat_ops
    return [(float(p[k]), ops[k]) for k in range(n * n)]


def standard_channel(chi, rho) -> np.ndarray:
    chi, rho, n = _check_pair(chi, rho)
    p = bell_weights(chi).ravel()
    ops = basis(n).flat_ops
    return np.einsum("k,kij,...jl,kml->...im", p, ops, rho, ops.conj())


def general_channel(chi, T, rho) -> np.ndarray:
    """Double Bell-overlap sum with corrections, evaluated term by term."""
    chi, rho, n = _check_pair(chi, rho)
    T = check_family(T, n).reshape(n * n, n, n)
    ops = basis(n).flat_ops
    m = bell_overlap_matrix(chi)
    # K[a, g] = T_g^dag U_a U_g
    k = np.einsum("gji,ajk,gkl->agil", T.conj(), ops, ops)
    out = np.einsum("ab,agij,...jk,bglk->...il", m, k, rho, k.conj(), optimize=True)
    return out / n**2


def apply_standard(chi, rho) -> ChannelOutput:
    return _output(standard_channel(chi, rho), "standard")


def apply_general(chi, T, rho) -> ChannelOutput:
    return _output(general_channel(chi, T, rho), "general")


def apply_optimal(chi, rho, W) -> ChannelOutput:
    """General channel with ``T[s, t] = W U[s, t]``."""
    return _output(general_channel(chi, rotated_family(W), rho), "optimal")


# ---------------------------------------------------------------- oracle


def simulate_protocol(chi, T, rho) -> ChannelOutput:
    """Brute-force protocol run on the three-party state ``rho (x) chi``.

    Alice's outcome ``(s, t)`` is the projector onto ``conj(|Phi_st>)`` on
    parties 1 and 2; with that labelling the standard correction
    ``T = U[s, t]`` undoes the outcome. Branches are left unnormalized and
    summed, which is the outcome-averaged channel.
    """
    chi, rho, n = _check_pair(chi, rho)
    if rho.ndim != 2:
        return _output(np.stack([simulate_protocol(chi, T, r).rho_out for r in rho]), "oracle")
    T = check_family(T, n)
    b = basis(n)
    full = np.kron(rho, chi)
    eye = np.eye(n)
    out = np.zeros((n, n), dtype=complex)
    for s in range(n):
        for t in range(n):
            v = b.bells[s, t].conj()
            proj = np.kron(np.outer(v, v.conj()), eye)
            branch = proj @ full @ proj
            bob = partial_trace(branch, keep=1, dims=(n * n, n))
            out += T[s, t].conj().T @ bob @ T[s, t]
    return _output(out, "oracle")


def bob_branches(a, T, phi):
    """Unnormalized Bob states after each outcome for the pure resource with
    coefficient matrix ``a`` (n x n) and input vector ``phi``, from the same
    three-party simulation; shape ``(n, n, n)``."""
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    T = check_family(T, n)
    b = basis(n)
    joint = np.kron(np.asarray(phi, dtype=complex), a.reshape(-1)).reshape(n * n, n)
    out = np.empty((n, n, n), dtype=complex)
    for s in range(n):
        for t in range(n):
            bob = b.bells[s, t] @ joint
            out[s, t] = T[s, t].conj().T @ bob
    return out
