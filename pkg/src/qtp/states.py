"""Named resource and input states, ensembles and the descriptor grammar.

A descriptor is ``family:key=value,key=value``. A comma-separated token
without ``=`` extends the previous key into a list, so
``bell-diagonal:n=2,w=0,1,0,0`` gives ``w = [0, 1, 0, 0]``.

Nested descriptors (``rotated:base=...``) write their own commas as ``;``.

Resource families: ``isotropic``, ``bell-diagonal``, ``bell``,
``maximally-entangled``, ``random``, ``rotated``, ``ensemble-file`` and
``raw-file``. Input families: ``pure`` (``amp=re+imj,...``), ``basis``,
``haar``, ``mixed`` and ``raw-file``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, InvalidStateError
from .io import density_from_json, ensemble_from_json, load_json
from .linalg import (
    DensityOperator,
    as_matrix,
    bipartite_n,
    check_unitary,
    haar_random_state,
    haar_random_unitary,
    make_rng,
    random_density,
)
from .weyl import basis

log = logging.getLogger(__name__)

WEIGHT_TOL = 1e-12
RENORMALIZE_TOL = 1e-6


class DescriptorError(ValueError):
    """Malformed state descriptor."""


# ---------------------------------------------------------------- ensembles


@dataclass(frozen=True)
class EnsembleSpec:
    """Weighted pure states ``[(p, psi), ...]`` on a common n*n space."""

    members: tuple

    def __post_init__(self):
        members = []
        for w, psi in self.members:
            psi = np.asarray(psi, dtype=complex).reshape(-1)
            w = float(w)
            if not (-WEIGHT_TOL <= w <= 1 + WEIGHT_TOL):
                raise InvalidStateError(f"ensemble weight {w} outside [0, 1]")
            norm = float(np.linalg.norm(psi))
            if abs(norm - 1.0) > 1e-12:
                raise InvalidStateError(f"ensemble member has norm {norm:.15g}")
            members.append((w, psi))
        if not members:
            raise InvalidStateError("ensemble is empty")
        if len({psi.shape for _, psi in members}) != 1:
            raise DimensionMismatchError("ensemble members have different dimensions")
        total = sum(w for w, _ in members)
        if abs(total - 1.0) > WEIGHT_TOL:
            raise InvalidStateError(f"ensemble weights sum to {total:.15g}")
        object.__setattr__(self, "members", tuple(members))


def from_ensemble(spec: EnsembleSpec) -> DensityOperator:
    if not isinstance(spec, EnsembleSpec):
        spec = EnsembleSpec(spec)
    dim = spec.members[0][1].shape[0]
    chi = sum(w * np.outer(psi, psi.conj()) for w, psi in spec.members)
    n = int(round(np.sqrt(dim)))
    dims = (n, n) if n * n == dim else None
    return DensityOperator(_hermitize(chi), dims)


def _hermitize(m):
    return (m + m.conj().T) / 2


# ---------------------------------------------------------------- resources


def _check_n(n):
    if int(n) != n or n < 2:
        raise ValueError(f"dimension must be an integer >= 2, got {n}")
    return int(n)


def isotropic(n: int, F: float) -> DensityOperator:
    """``F |Phi><Phi| + (1 - F)/(n^2 - 1) (I - |Phi><Phi|)``."""
    n = _check_n(n)
    F = float(F)
    if not (0.0 <= F <= 1.0):
        raise ValueError(f"F = {F} outside [0, 1]")
    phi = basis(n).phi
    p = np.outer(phi, phi.conj())
    chi = F * p + (1 - F) / (n * n - 1) * (np.eye(n * n) - p)
    return DensityOperator(chi, (n, n))


def bell_diagonal(n: int, weights) -> DensityOperator:
    """``sum_st w[s, t] |Phi_st><Phi_st|``; weights flat in ``s * n + t`` order or (n, n)."""
    n = _check_n(n)
    w = np.asarray(weights, dtype=float).reshape(-1)
    if w.size != n * n:
        raise DimensionMismatchError(f"need {n * n} weights, got {w.size}")
    if np.any(w < 0) or abs(w.sum() - 1.0) > WEIGHT_TOL:
        raise InvalidStateError("Bell weights must be nonnegative and sum to 1")
    v = basis(n).flat_bells
    chi = np.einsum("k,ki,kj->ij", w, v, v.conj())
    return DensityOperator(_hermitize(chi), (n, n))


def bell_projector(n: int, s: int = 0, t: int = 0) -> DensityOperator:
    v = basis(n).bell(s, t)
    return DensityOperator(np.outer(v, v.conj()), (n, n))


def rotated(chi, W, side: str = "right") -> DensityOperator:
    """``(1 (x) W) chi (1 (x) W^dag)`` or, with ``side="left"``, ``(W (x) 1) ...``."""
    m = as_matrix(chi)
    n = bipartite_n(chi)
    W = check_unitary(W, tol=1e-10)
    if W.shape != (n, n):
        raise DimensionMismatchError(f"rotation of side {W.shape[0]} on an n = {n} resource")
    if side == "right":
        r = np.kron(np.eye(n), W)
    elif side == "left":
        r = np.kron(W, np.eye(n))
    else:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    return DensityOperator(_hermitize(r @ m @ r.conj().T), (n, n))


def random_resource(n: int, seed=None, rank=None) -> DensityOperator:
    return DensityOperator(random_density(n * n, seed, rank), (n, n))


# ---------------------------------------------------------------- grammar


def parse_descriptor(text: str):
    """Split ``family:k=v,...`` into ``(family, {key: str | list[str]})``."""
    if not isinstance(text, str) or not text.strip():
        raise DescriptorError("empty descriptor")
    family, _, rest = text.strip().partition(":")
    family = family.strip()
    if not family:
        raise DescriptorError(f"missing family in {text!r}")
    params: dict = {}
    last = None
    for tok in (t.strip() for t in rest.split(",")) if rest.strip() else ():
        if not tok:
            raise DescriptorError(f"empty item in {text!r}")
        if "=" in tok:
            key, _, val = tok.partition("=")
            key = key.strip()
            if not key or key in params:
                raise DescriptorError(f"bad or repeated key {key!r} in {text!r}")
            params[key] = val.strip()
            last = key
        elif last is None:
            raise DescriptorError(f"value {tok!r} has no key in {text!r}")
        else:
            prev = params[last]
            params[last] = (prev if isinstance(prev, list) else [prev]) + [tok]
    return family, params


def _scalar(params, key, kind=float, default=None):
    if key not in params:
        if default is None:
            raise DescriptorError(f"missing parameter {key!r}")
        return default
    val = params[key]
    if isinstance(val, list):
        raise DescriptorError(f"parameter {key!r} takes one value")
    try:
        if kind is int:
            return int(val)
        if kind is complex:
            return complex(val.replace(" ", ""))
        return _number(val)
    except ValueError as exc:
        raise DescriptorError(f"parameter {key}={val!r}: {exc}") from None


def _number(tok: str) -> float:
    # allow simple fractions such as 1/4
    if "/" in tok:
        num, _, den = tok.partition("/")
        return float(num) / float(den)
    return float(tok)


def _list(params, key, kind=float):
    if key not in params:
        raise DescriptorError(f"missing parameter {key!r}")
    val = params[key]
    items = val if isinstance(val, list) else [val]
    try:
        if kind is complex:
            return [complex(v.replace(" ", "")) for v in items]
        return [_number(v) for v in items]
    except ValueError as exc:
        raise DescriptorError(f"parameter {key}: {exc}") from None


def _unknown(params, allowed, family):
    extra = set(params) - set(allowed)
    if extra:
        raise DescriptorError(f"unknown parameter(s) {sorted(extra)} for {family!r}")


def resource_from_descriptor(text: str, seed=None) -> DensityOperator:
    """Build a bipartite resource from a descriptor string."""
    family, p = parse_descriptor(text)
    if family == "isotropic":
        _unknown(p, {"n", "F"}, family)
        return isotropic(_scalar(p, "n", int), _scalar(p, "F"))
    if family == "bell-diagonal":
        _unknown(p, {"n", "w"}, family)
        return bell_diagonal(_scalar(p, "n", int), _list(p, "w"))
    if family == "bell":
        _unknown(p, {"n", "s", "t"}, family)
        return bell_projector(_scalar(p, "n", int), _scalar(p, "s", int, 0), _scalar(p, "t", int, 0))
    if family == "maximally-entangled":
        _unknown(p, {"n"}, family)
        return bell_projector(_scalar(p, "n", int))
    if family == "random":
        _unknown(p, {"n", "rank", "seed"}, family)
        n = _scalar(p, "n", int)
        rank = _scalar(p, "rank", int, 0) or None
        s = _scalar(p, "seed", int, -1)
        rng = make_rng(seed if s < 0 else s, "resource")
        return random_resource(n, rng, rank)
    if family == "rotated":
        # rotated:base=isotropic:n=2;F=0.8,W=haar,side=right
        _unknown(p, {"base", "W", "side", "seed"}, family)
        base = p.get("base")
        if not isinstance(base, str):
            raise DescriptorError("rotated needs base=<descriptor with ';' in place of ','>")
        chi = resource_from_descriptor(base.replace(";", ","), seed)
        n = bipartite_n(chi)
        side = p.get("side", "right")
        w = _rotation(p.get("W", "haar"), n, seed if "seed" not in p else _scalar(p, "seed", int))
        return rotated(chi, w, side)
    if family == "ensemble-file":
        _unknown(p, {"path"}, family)
        return from_ensemble(ensemble_from_json(load_json(_path(p))))
    if family == "raw-file":
        _unknown(p, {"path"}, family)
        op = density_from_json(load_json(_path(p)))
        bipartite_n(op.matrix)
        n = int(round(np.sqrt(op.side)))
        return DensityOperator(op.matrix, (n, n))
    raise DescriptorError(f"unknown resource family {family!r}")


def _path(p):
    if "path" not in p or isinstance(p["path"], list):
        raise DescriptorError("expected path=<file>")
    return p["path"]


def _rotation(name, n, seed):
    if isinstance(name, list):
        raise DescriptorError("W takes one value")
    b = basis(n)
    if name == "haar":
        return haar_random_unitary(n, make_rng(seed, "rotation"))
    if name == "x":
        return b.op(0, 1)
    if name == "z":
        return b.op(1, 0)
    raise DescriptorError(f"unknown rotation {name!r}; use haar, x or z")


def normalize_amplitudes(amps, tol: float = RENORMALIZE_TOL) -> np.ndarray:
    """Unit-normalize ``amps``; small defects are fixed with a warning."""
    psi = np.asarray(amps, dtype=complex).reshape(-1)
    norm = float(np.linalg.norm(psi))
    defect = abs(norm - 1.0)
    if defect > tol or norm == 0.0:
        raise InvalidStateError(f"amplitudes have norm {norm:.12g}; defect exceeds {tol:g}")
    if defect > 1e-15:
        log.warning("renormalizing input amplitudes (norm %.15g)", norm)
        psi = psi / norm
    return psi


def input_from_descriptor(text: str, n: int | None = None, seed=None):
    """Input state as a pure vector or a density matrix.

    Returns ``(rho, psi)``; ``psi`` is None for mixed inputs.
    """
    family, p = parse_descriptor(text)
    if family == "pure":
        _unknown(p, {"amp"}, family)
        psi = normalize_amplitudes(_list(p, "amp", complex))
    elif family == "basis":
        _unknown(p, {"n", "k"}, family)
        dim = _scalar(p, "n", int, n)
        k = _scalar(p, "k", int)
        if not (0 <= k < dim):
            raise DescriptorError(f"basis index {k} outside [0, {dim})")
        psi = np.zeros(dim, dtype=complex)
        psi[k] = 1
    elif family == "haar":
        _unknown(p, {"n", "seed"}, family)
        dim = _scalar(p, "n", int, n)
        s = _scalar(p, "seed", int, -1)
        psi = haar_random_state(dim, make_rng(seed if s < 0 else s, "input"))
    elif family == "mixed":
        _unknown(p, {"n", "rank", "seed"}, family)
        dim = _scalar(p, "n", int, n)
        rank = _scalar(p, "rank", int, 0) or None
        s = _scalar(p, "seed", int, -1)
        rho = random_density(dim, make_rng(seed if s < 0 else s, "input"), rank)
        return DensityOperator(rho), None
    elif family == "raw-file":
        _unknown(p, {"path"}, family)
        return density_from_json(load_json(_path(p))), None
    else:
        raise DescriptorError(f"unknown input family {family!r}")
    if n is not None and psi.shape[0] != n:
        raise DimensionMismatchError(f"input dimension {psi.shape[0]} != resource n = {n}")
    return DensityOperator.from_pure(psi), psi
