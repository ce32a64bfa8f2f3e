"""Invariant sweep behind ``qtp verify``.

Every check yields a record ``{"check", "n", "deviation", "tolerance",
"pass"}``. Randomness is drawn from streams keyed by ``(seed, check, n)``, so
a report depends only on its arguments. Records carry no timing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import channels, fidelity, pure, states
from .linalg import haar_random_state, haar_random_unitary, make_rng, max_abs, random_density
from .weyl import (
    WeylBasis,
    bell_gram_defect,
    commutation_check,
    sandwich_sum,
    trace_defect,
    trace_orthogonality_defect,
    twirl_closed_form,
    twirl_monte_carlo,
)


@dataclass
class VerifyConfig:
    ns: tuple = (2, 3, 4)
    seed: int = 0
    samples: int = 20_000
    instances: int = 5
    restarts: int = 4
    omega_sign: int = -1  # +1 injects the conjugate root of unity


def _record(name, n, deviation, tolerance):
    deviation = float(deviation)
    return {
        "check": name,
        "n": n,
        "deviation": deviation,
        "tolerance": tolerance,
        "pass": bool(deviation <= tolerance),
    }


def _weyl_checks(b: WeylBasis, rng):
    n = b.n
    yield _record("commutation", n, commutation_check(b), 1e-12)
    yield _record("trace_orthogonality", n, trace_orthogonality_defect(b), 1e-12)
    yield _record("trace", n, trace_defect(b), 1e-12)
    yield _record("bell_orthonormality", n, bell_gram_defect(b), 1e-12)
    rho = random_density(n, rng)
    yield _record("completeness", n, max_abs(sandwich_sum(b, rho) - n * np.eye(n)), 1e-12)


def _channel_checks(n, rng, cfg):
    phi = states.bell_projector(n).matrix
    dev = 0.0
    for _ in range(cfg.instances):
        rho = random_density(n, rng)
        dev = max(dev, max_abs(channels.standard_channel(phi, rho) - rho))
    yield _record("noiseless_channel", n, dev, 1e-12)

    d_std = d_gen = 0.0
    for _ in range(cfg.instances):
        chi = random_density(n * n, rng)
        rho = random_density(n, rng)
        T = haar_random_unitary(n, rng, size=n * n)
        ref = channels.simulate_protocol(chi, channels.standard_family(n), rho).rho_out
        d_std = max(d_std, max_abs(channels.standard_channel(chi, rho) - ref))
        ref = channels.simulate_protocol(chi, T, rho).rho_out
        d_gen = max(d_gen, max_abs(channels.general_channel(chi, T, rho) - ref))
    yield _record("oracle_standard", n, d_std, 1e-10)
    yield _record("oracle_general", n, d_gen, 1e-10)


def _fidelity_checks(n, rng, cfg):
    dev = 0.0
    for F in (1 / n**2, 0.5, 0.8, 1.0):
        chi = states.isotropic(n, F)
        dev = max(dev, abs(fidelity.fidelity_standard(chi) - fidelity.affine_fidelity(F, n)))
    yield _record("fidelity_law", n, dev, 1e-12)

    # general closed form with the standard family reduces to the affine law
    chi = random_density(n * n, rng)
    dev = abs(fidelity.fidelity_general(chi, channels.standard_family(n)) - fidelity.fidelity_standard(chi))
    yield _record("fidelity_general_reduces", n, dev, 1e-12)

    est, se = fidelity.mc_average_fidelity(
        lambda r: channels.standard_channel(chi, r), n, cfg.samples, rng
    )
    yield _record("fidelity_monte_carlo_se", n, abs(est - fidelity.fidelity_standard(chi)) / se, 4.0)

    opt = fidelity.OptimizerConfig(restarts=cfg.restarts, seed=int(rng.integers(2**31)), safeguard_samples=2000)
    W = haar_random_unitary(n, rng)
    res = fidelity.fully_entangled_fraction(states.rotated(states.isotropic(n, 0.8), W), opt)
    yield _record("fef_rotated_isotropic", n, abs(res.value - 0.8), 1e-6)
    res = fidelity.fully_entangled_fraction(states.bell_projector(n, 1, n - 1), opt)
    yield _record("fef_bell_state", n, abs(res.value - 1.0), 1e-6)
    a = fidelity.analyze_resource(chi, opt)
    yield _record("optimal_dominance", n, max(a.f_standard - a.f_optimal, 0.0), 1e-9)


def _twirl_check(n, rng, cfg):
    sigma = random_density(n * n, rng)
    mc = twirl_monte_carlo(sigma, cfg.samples, rng)
    # entries scale like 1/sqrt(samples); 1.6/sqrt(1e5) is about 5e-3
    yield _record("twirl", n, max_abs(mc - twirl_closed_form(sigma)), float(1.6 / np.sqrt(cfg.samples)))


def _pure_checks(n, rng, cfg):
    res = pure.diagonal_resource(n)
    c = pure.phase_preset("fourier", n)
    err = 0.0
    for _ in range(cfg.instances):
        err = max(err, pure.recovery_error(pure.teleport_pure(haar_random_state(n, rng), res, c)))
    yield _record("pure_recovery", n, err, 1e-10)
    blocks = pure.solve_sender_blocks(res, c)
    resid = pure.constraint_residuals(blocks, res)
    yield _record("pure_constraints", n, max(resid.values()), 1e-12)


def run_checks(cfg: VerifyConfig):
    """Yield check records in a fixed order."""
    for n in cfg.ns:
        b = WeylBasis(n, omega_sign=cfg.omega_sign)
        yield from _weyl_checks(b, make_rng(cfg.seed, "weyl", n))
        yield from _channel_checks(n, make_rng(cfg.seed, "channel", n), cfg)
        yield from _fidelity_checks(n, make_rng(cfg.seed, "fidelity", n), cfg)
        yield from _pure_checks(n, make_rng(cfg.seed, "pure", n), cfg)
    yield from _twirl_check(2, make_rng(cfg.seed, "twirl", 2), cfg)


def verify(cfg: VerifyConfig | None = None, fail_fast: bool = False):
    """Run the suite; returns ``(records, first_failure_or_None)``."""
    cfg = cfg or VerifyConfig()
    records, first = [], None
    for rec in run_checks(cfg):
        records.append(rec)
        if not rec["pass"] and first is None:
            first = rec
            if fail_fast:
                break
    return records, first
