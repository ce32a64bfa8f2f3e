"""Shared brute-force oracles, written with explicit loops on purpose."""

import numpy as np
import pytest


def kron_loop(a, b):
    ra, ca = a.shape
    rb, cb = b.shape
    out = np.zeros((ra * rb, ca * cb), dtype=complex)
    for i in range(ra):
        for j in range(ca):
            for k in range(rb):
                for l in range(cb):
                    out[i * rb + k, j * cb + l] = a[i, j] * b[k, l]
    return out


def partial_trace_loop(m, d0, d1, keep):
    if keep == 0:
        out = np.zeros((d0, d0), dtype=complex)
        for i in range(d0):
            for k in range(d0):
                for j in range(d1):
                    out[i, k] += m[i * d1 + j, k * d1 + j]
    else:
        out = np.zeros((d1, d1), dtype=complex)
        for j in range(d1):
            for k in range(d1):
                for i in range(d0):
                    out[j, k] += m[i * d1 + j, i * d1 + k]
    return out


def weyl_loop(n, s, t):
    """``h^t g^s`` entry by entry: column j goes to row j + t with phase w^(s j)."""
    w = np.exp(-2j * np.pi / n)
    u = np.zeros((n, n), dtype=complex)
    for j in range(n):
        u[(j + t) % n, j] = w ** (s * j)
    return u


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
