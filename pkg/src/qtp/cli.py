"""Command-line front end: ``qtp analyze | teleport | pure | verify``.

Exit codes: 0 success, 1 verification failure, 2 unparsable input,
3 invalid state or dimension mismatch, 4 oracle mismatch, 5 unsolvable
resource.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import __version__
from .channels import (
    apply_general,
    apply_optimal,
    apply_standard,
    check_family,
    rotated_family,
    simulate_protocol,
    standard_family,
)
from .errors import (
    DimensionMismatchError,
    InvalidStateError,
    NonUnitaryError,
    SupportViolationError,
    UnsolvableResourceError,
)
from .fidelity import OptimizerConfig, OptimizerReport, ResourceAnalysis, analyze_resource, fully_entangled_fraction
from .io import density_to_json, dumps, load_json, matrix_from_json, matrix_to_json, phase_table_from_json, write_atomic
from .linalg import bipartite_n, max_abs
from .pure import (
    I2,
    X,
    Y,
    Z,
    ResourceCoefficients,
    diagonal_resource,
    partial_support_resource,
    phase_preset,
    schmidt_resource,
    teleport_pure,
)
from .states import DescriptorError, input_from_descriptor, normalize_amplitudes, resource_from_descriptor
from .verify import VerifyConfig, verify

log = logging.getLogger("qtp")

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_PARSE = 2
EXIT_STATE = 3
EXIT_ORACLE = 4
EXIT_UNSOLVABLE = 5

ORACLE_TOL = 1e-10
SCHEMA_VERSION = 1


class UsageError(Exception):
    pass


class OracleMismatch(Exception):
    pass


# ---------------------------------------------------------------- reports


@dataclass
class AnalysisReport:
    """Resource analysis with provenance; ``wall_time`` is None unless requested."""

    input: str
    analysis: ResourceAnalysis
    version: str
    seed: int
    wall_time: float | None = None

    def to_json(self) -> dict:
        a = self.analysis
        return {
            "kind": "analysis",
            "schema_version": SCHEMA_VERSION,
            "input": self.input,
            "version": self.version,
            "seed": self.seed,
            "wall_time": self.wall_time,
            "analysis": {
                "n": a.n,
                "singlet_fraction": a.singlet_fraction,
                "fef": a.fef,
                "f_standard": a.f_standard,
                "f_optimal": a.f_optimal,
                "optimizer_W": matrix_to_json(a.optimizer_W),
                "optimizer_report": a.optimizer_report.to_dict(),
            },
        }

    @classmethod
    def from_json(cls, obj) -> "AnalysisReport":
        a = obj["analysis"]
        analysis = ResourceAnalysis(
            n=a["n"],
            singlet_fraction=a["singlet_fraction"],
            fef=a["fef"],
            optimizer_W=matrix_from_json(a["optimizer_W"]),
            f_standard=a["f_standard"],
            f_optimal=a["f_optimal"],
            optimizer_report=OptimizerReport(**a["optimizer_report"]),
        )
        return cls(obj["input"], analysis, obj["version"], obj["seed"], obj["wall_time"])


def _fmt(x) -> str:
    """12 significant digits; complex values as ``a+bj``."""
    if isinstance(x, (complex, np.complexfloating)):
        z = complex(x)
        # display only: drop rounding residue next to an O(1) component
        scale = max(abs(z), 1.0)
        re = 0.0 if abs(z.real) < 1e-14 * scale else z.real
        im = 0.0 if abs(z.imag) < 1e-14 * scale else z.imag
        z = complex(re, im)
        if z.imag == 0.0:
            return f"{z.real:.12g}"
        return f"{z.real:.12g}{z.imag:+.12g}j"
    return f"{float(x):.12g}"


def _fmt_vec(v) -> str:
    return "[" + ", ".join(_fmt(z) for z in v) + "]"


def _emit(args, report: dict, table: str):
    text = dumps(report)
    if args.out:
        write_atomic(args.out, text + "\n")
    sys.stdout.write(text + "\n" if args.json else table)


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("QTP_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"QTP_SEED={env!r} is not an integer") from None


def _optimizer(args, seed) -> OptimizerConfig:
    return OptimizerConfig(restarts=args.restarts, seed=seed, safeguard_samples=args.safeguard_samples)


# ---------------------------------------------------------------- commands


def cmd_analyze(args) -> int:
    seed = _seed(args)
    chi = resource_from_descriptor(args.resource, seed)
    start = time.perf_counter()
    analysis = analyze_resource(chi.matrix, _optimizer(args, seed))
    elapsed = time.perf_counter() - start
    report = AnalysisReport(args.resource, analysis, __version__, seed, elapsed if args.timing else None)
    r = analysis.optimizer_report
    table = (
        f"resource          {args.resource}\n"
        f"n                 {analysis.n}\n"
        f"singlet fraction  {_fmt(analysis.singlet_fraction)}\n"
        f"fully entangled   {_fmt(analysis.fef)}\n"
        f"f_standard        {_fmt(analysis.f_standard)}\n"
        f"f_optimal         {_fmt(analysis.f_optimal)}\n"
        f"optimizer         restarts={r.restarts_used} iterations={r.iterations} "
        f"|grad|={r.final_gradient_norm:.3g} capped={r.hit_max_iterations} "
        f"safeguard_restarts={r.safeguard_restarts}\n"
    )
    if args.timing:
        print(f"wall time {elapsed:.3f} s", file=sys.stderr)
    _emit(args, report.to_json(), table)
    return EXIT_OK


def _custom_family(path, n):
    obj = load_json(path)
    try:
        mats = [matrix_from_json(m) for m in obj["corrections"]]
    except (KeyError, TypeError) as exc:
        raise UsageError(f"{path}: expected {{'corrections': [matrix, ...]}}") from exc
    return check_family(np.array(mats), n)


def cmd_teleport(args) -> int:
    seed = _seed(args)
    chi = resource_from_descriptor(args.resource, seed)
    n = bipartite_n(chi.matrix)
    rho, _ = input_from_descriptor(args.state, n, seed)
    rho = rho.matrix
    if rho.shape != (n, n):
        raise DimensionMismatchError(f"input of side {rho.shape[0]} does not match resource n = {n}")

    proto = args.protocol
    extra = {}
    if proto == "standard":
        T = standard_family(n)
        out = apply_standard(chi.matrix, rho)
    elif proto == "optimal":
        res = fully_entangled_fraction(chi.matrix, _optimizer(args, seed))
        T = rotated_family(res.W)
        out = apply_optimal(chi.matrix, rho, res.W)
        extra = {"fef": res.value, "optimizer_W": matrix_to_json(res.W)}
    elif proto.startswith("custom:"):
        T = _custom_family(proto[len("custom:"):], n)
        out = apply_general(chi.matrix, T, rho)
    else:
        raise UsageError(f"unknown protocol {proto!r}; use standard, optimal or custom:<file>")

    overlap = float(np.real(np.trace(rho @ out.rho_out)))
    deviation = None
    if args.oracle:
        deviation = max_abs(simulate_protocol(chi.matrix, T, rho).rho_out - out.rho_out)

    report = {
        "kind": "teleport",
        "schema_version": SCHEMA_VERSION,
        "version": __version__,
        "seed": seed,
        "resource": args.resource,
        "state": args.state,
        "protocol": proto,
        "rho_out": density_to_json(out.rho_out),
        "overlap": overlap,
        "trace_defect": out.trace_defect,
        "oracle_deviation": deviation,
        **extra,
    }
    rows = "\n".join("  " + "  ".join(f"{_fmt(z):>24}" for z in row) for row in out.rho_out)
    table = (
        f"resource   {args.resource}\n"
        f"state      {args.state}\n"
        f"protocol   {proto}\n"
        f"rho_out\n{rows}\n"
        f"overlap    {_fmt(overlap)}\n"
    )
    if deviation is not None:
        table += f"oracle     max deviation {deviation:.3e}\n"
    _emit(args, report, table)
    if deviation is not None and deviation > ORACLE_TOL:
        raise OracleMismatch(f"oracle deviation {deviation:.3e} exceeds {ORACLE_TOL:g}")
    return EXIT_OK


_QUBIT_GATES = (("I", I2), ("X", X), ("Z", Z), ("Y", Y))


def _label(o) -> str:
    if o.shape == (2, 2):
        for name, g in _QUBIT_GATES:
            if max_abs(o - g) < 1e-12:
                return name
    return "O"


def _pure_resource(args) -> ResourceCoefficients:
    if args.lambdas is not None:
        return schmidt_resource(args.lambdas)
    if args.support is not None:
        return partial_support_resource(args.n, args.support)
    return diagonal_resource(args.n, args.aux_dim)


def cmd_pure(args) -> int:
    resource = _pure_resource(args)
    N1, N2 = resource.N1, resource.N2
    if args.phases:
        c = phase_table_from_json(load_json(args.phases))
    else:
        c = phase_preset(args.preset, N1, N2)
    if args.amplitudes is not None:
        psi = normalize_amplitudes(args.amplitudes)
    elif args.state is not None:
        _, psi = input_from_descriptor(args.state, N1, _seed(args))
        if psi is None:
            raise InvalidStateError("the pure protocol needs a pure input")
    else:
        psi = np.zeros(N1, dtype=complex)
        psi[resource.a.nonzero()[1][0]] = 1
    if psi.shape[0] != N1:
        raise DimensionMismatchError(f"{psi.shape[0]} amplitudes for N1 = {N1}")

    outcomes = teleport_pure(psi, resource, c)
    rows, lines = [], []
    for o in outcomes:
        occurs = o.branch is not None
        rows.append(
            {
                "s": o.s,
                "t": o.t,
                "probability": o.probability,
                "correction_label": _label(o.correction),
                "correction": matrix_to_json(o.correction),
                "branch": matrix_to_json(o.branch) if occurs else None,
                "corrected": matrix_to_json(o.corrected) if occurs else None,
                "fidelity": o.overlap**2 if occurs else None,
            }
        )
        if occurs:
            lines.append(
                f"{o.s:>2} {o.t:>2}  {_fmt(o.probability):>16}  {rows[-1]['correction_label']:>3}  "
                f"{_fmt_vec(o.branch)}  ->  {_fmt_vec(o.corrected)}  {_fmt(o.overlap**2)}"
            )
        else:
            lines.append(f"{o.s:>2} {o.t:>2}  {_fmt(0.0):>16}  (does not occur)")
    report = {
        "kind": "pure",
        "schema_version": SCHEMA_VERSION,
        "version": __version__,
        "N1": N1,
        "N2": N2,
        "preset": None if args.phases else args.preset,
        "input": matrix_to_json(psi),
        "outcomes": rows,
    }
    table = (
        f"N1={N1} N2={N2} input {_fmt_vec(psi)}\n"
        " s  t       probability  gate  branch  ->  corrected  fidelity\n" + "\n".join(lines) + "\n"
    )
    _emit(args, report, table)
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.n_min < 2 or args.n_max < args.n_min:
        raise UsageError("need 2 <= n-min <= n-max")
    cfg = VerifyConfig(
        ns=tuple(range(args.n_min, args.n_max + 1)),
        seed=_seed(args),
        samples=args.samples,
        instances=args.instances,
        restarts=args.restarts,
        omega_sign=+1 if args.inject_omega_flip else -1,
    )
    records, first = verify(cfg)
    text = "".join(dumps(r) + "\n" for r in records)
    if args.out:
        write_atomic(args.out, text)
    sys.stdout.write(text)
    if first is not None:
        print(f"FAIL: {first['check']} (n={first['n']}, deviation {first['deviation']:.3e})", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _complex_list(text):
    try:
        return [complex(tok.strip().replace(" ", "")) for tok in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad amplitude list {text!r}: {exc}") from None


def _int_list(text):
    try:
        return [int(tok) for tok in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad index list {text!r}") from exc


def _float_list(text):
    try:
        return [float(tok) for tok in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qtp", description="Teleportation channel analysis over mixed resources.")
    p.add_argument("--version", action="version", version=f"qtp {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="RNG seed (falls back to $QTP_SEED, then 0)")
    common.add_argument("--out", help="write the JSON report to this path")
    common.add_argument("--json", action="store_true", help="print JSON instead of a table")

    opt = argparse.ArgumentParser(add_help=False)
    opt.add_argument("--restarts", type=int, default=20)
    opt.add_argument("--safeguard-samples", type=int, default=10_000)

    a = sub.add_parser("analyze", parents=[common, opt], help="singlet fraction, FEF and both fidelities")
    a.add_argument("--resource", required=True)
    a.add_argument("--timing", action="store_true", help="record wall time (makes the report non-reproducible)")
    a.set_defaults(func=cmd_analyze)

    t = sub.add_parser("teleport", parents=[common, opt], help="apply a teleportation channel to an input")
    t.add_argument("--resource", required=True)
    t.add_argument("--state", required=True)
    t.add_argument("--protocol", default="standard", help="standard, optimal or custom:<file>")
    t.add_argument("--oracle", action="store_true", help="cross-check against the three-party simulation")
    t.set_defaults(func=cmd_teleport)

    q = sub.add_parser("pure", parents=[common], help="pure-resource protocol outcome table")
    q.add_argument("--n", type=int, default=2, help="input dimension N1")
    q.add_argument("--aux-dim", type=int, default=None, help="dimension N2 of Alice's resource half")
    q.add_argument("--support", type=_int_list, default=None, help="partial-support indices, e.g. 1,2")
    q.add_argument("--lambdas", type=_float_list, default=None, help="Schmidt weights of a diagonal resource")
    q.add_argument("--preset", default="fourier", help="phase preset: fourier, pauli-n2 or ones")
    q.add_argument("--phases", help="phase table JSON file (overrides --preset)")
    src = q.add_mutually_exclusive_group()
    src.add_argument("--amplitudes", type=_complex_list, help="comma-separated input amplitudes")
    src.add_argument("--state", help="input-state descriptor")
    q.set_defaults(func=cmd_pure)

    v = sub.add_parser("verify", parents=[common], help="run the invariant suite")
    v.add_argument("--n-min", type=int, default=2)
    v.add_argument("--n-max", type=int, default=4)
    v.add_argument("--samples", type=int, default=20_000)
    v.add_argument("--instances", type=int, default=5)
    v.add_argument("--restarts", type=int, default=4)
    v.add_argument("--inject-omega-flip", action="store_true", help=argparse.SUPPRESS)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="qtp: %(levelname)s: %(message)s",
    )
    try:
        return args.func(args)
    except (DescriptorError, UsageError, OSError, KeyError) as exc:
        print(f"qtp: error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OracleMismatch as exc:
        print(f"qtp: oracle mismatch: {exc}", file=sys.stderr)
        return EXIT_ORACLE
    except (UnsolvableResourceError, NonUnitaryError) as exc:
        print(f"qtp: unsolvable resource: {exc}", file=sys.stderr)
        return EXIT_UNSOLVABLE
    except (InvalidStateError, DimensionMismatchError, SupportViolationError) as exc:
        print(f"qtp: invalid state: {exc}", file=sys.stderr)
        return EXIT_STATE
    except ValueError as exc:
        print(f"qtp: error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
