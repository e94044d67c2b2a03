"""Command-line front end.

Problems are JSON files::

    {"A": [[...], ...], "B": [[...], ...], "R": [[...]],
     "tolerances": {"rank_tol": 1e-10, "resid_tol": 1e-8, "sym_tol": 1e-10},
     "seed": 0}

``R``, ``tolerances`` and ``seed`` are optional.  Reports are JSON on
standard output; diagnostics go to standard error.  Floats are written with
Python's shortest round-trip representation, so every emitted matrix parses
back bit-identically.

Exit codes: 0 success or in-family, 1 no Stein solution or spurious,
2 input error, 3 not a solution.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings

import numpy as np

from .errors import HareError, IndefiniteInnerTerm, NoSteinSolution
from .matrixcore import DEFAULT_TOL, TolerancePolicy
from .spectral import Completeness, enumerate_invariant_subspaces
from .steinriccati import (HareProblem, Verdict, classify_solution,
                           enumerate_families, hare_residual, is_solution,
                           solve_stein_set)

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_INPUT = 2
EXIT_NOT_SOLUTION = 3

_TOL_KEYS = ("rank_tol", "resid_tol", "sym_tol")


class InputError(Exception):
    """Malformed problem or solution file."""


# ---------------------------------------------------------------------------
# parsing


def _reject_constant(name):
    raise InputError(f"non-finite number {name} in input")


def _load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh, parse_constant=_reject_constant)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc


def _is_number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def parse_matrix(value, name: str) -> np.ndarray:
    """A rectangular, finite, non-empty array of arrays of numbers."""
    if not isinstance(value, list) or not value:
        raise InputError(f"{name} must be a non-empty array of arrays")
    width = None
    for i, row in enumerate(value):
        if not isinstance(row, list) or not row:
            raise InputError(f"{name} row {i} is not a non-empty array")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise InputError(f"{name} is ragged: row {i} has {len(row)} entries, "
                             f"expected {width}")
        for v in row:
            if not _is_number(v):
                raise InputError(f"{name} row {i} holds a non-number {v!r}")
            if not math.isfinite(v):
                raise InputError(f"{name} row {i} holds a non-finite number")
    return np.array(value, dtype=float)


def parse_problem(doc) -> tuple:
    """Validate a problem document; return ``(A, B, R, tol, seed)``."""
    if not isinstance(doc, dict):
        raise InputError("problem file must hold a JSON object")
    for key in ("A", "B"):
        if key not in doc:
            raise InputError(f"problem file lacks {key}")
    A = parse_matrix(doc["A"], "A")
    B = parse_matrix(doc["B"], "B")
    n, m = B.shape
    if A.shape != (n, n):
        raise InputError(f"A must be {n}x{n} to match B, got {A.shape[0]}x{A.shape[1]}")
    if doc.get("R") is None:
        R = np.eye(m)
    else:
        R = parse_matrix(doc["R"], "R")
        if R.shape != (m, m):
            raise InputError(f"R must be {m}x{m}, got {R.shape[0]}x{R.shape[1]}")

    overrides = doc.get("tolerances") or {}
    if not isinstance(overrides, dict):
        raise InputError("tolerances must be an object")
    unknown = set(overrides) - set(_TOL_KEYS)
    if unknown:
        raise InputError(f"unknown tolerance keys: {sorted(unknown)}")
    for k, v in overrides.items():
        if not _is_number(v):
            raise InputError(f"tolerance {k} must be a number")
    try:
        tol = DEFAULT_TOL.replace(**{k: float(v) for k, v in overrides.items()})
    except HareError as exc:
        raise InputError(str(exc)) from exc

    seed = doc.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise InputError("seed must be a non-negative integer")
    return A, B, R, tol, seed


def parse_solution(doc, n: int) -> np.ndarray:
    """``{"Q": [[...]]}`` or a bare array of arrays, ``n x n``."""
    if isinstance(doc, dict):
        if "Q" not in doc:
            raise InputError("solution file lacks Q")
        doc = doc["Q"]
    Q = parse_matrix(doc, "Q")
    if Q.shape != (n, n):
        raise InputError(f"Q must be {n}x{n}, got {Q.shape[0]}x{Q.shape[1]}")
    return Q


# ---------------------------------------------------------------------------
# report pieces


def _mat(M):
    return np.asarray(M, dtype=float).tolist()


def _num(x):
    # JSON has no infinity; an unbounded residual is reported as null
    x = float(x)
    return x if math.isfinite(x) else None


def _complex(z):
    return [float(z.real), float(z.imag)]


def _spectrum_payload(prob: HareProblem):
    spec = prob.spectrum
    return {
        "eigenvalues": [_complex(z) for z in spec.eigenvalues],
        "distinct": [{"value": _complex(z), "multiplicity": k}
                     for z, k in spec.distinct],
        "reciprocal_pairs": [[_complex(spec.distinct[i][0]),
                              _complex(spec.distinct[j][0])]
                             for i, j in spec.reciprocal_pairs],
        "is_unmixed": spec.is_unmixed,
        "is_nonsingular": spec.is_nonsingular,
        "at_most_one_simple_pair": spec.at_most_one_simple_pair,
        "reachable": prob.reachable,
    }


def _tol_payload(tol: TolerancePolicy):
    return {k: getattr(tol, k) for k in _TOL_KEYS}


# ---------------------------------------------------------------------------
# commands; each returns (payload, exit code)


def cmd_spectrum(prob, args, ctx):
    return {}, EXIT_OK


def cmd_stein(prob, args, ctx):
    st = solve_stein_set(prob)
    payload = {
        "exists": st.exists,
        "P0": _mat(st.particular),
        "delta_basis": [_mat(D) for D in st.delta_basis],
        "inconsistency": st.inconsistency,
    }
    return payload, EXIT_OK if st.exists else EXIT_NEGATIVE


def cmd_families(prob, args, ctx):
    st = solve_stein_set(prob)
    if not st.exists:
        return {"exists": False, "inconsistency": st.inconsistency,
                "solutions": []}, EXIT_NEGATIVE
    lattice = enumerate_invariant_subspaces(prob.A, prob.tol)
    if lattice.completeness is Completeness.USER_SUPPLIED_ONLY:
        ctx["warnings"].append(
            "A is derogatory; only the trivial invariant subspaces were used")
    try:
        found = enumerate_families(prob, st, lattice, samples=args.samples,
                                   seed=args.seed)
    except NoSteinSolution:  # pragma: no cover - guarded above
        return {"exists": False, "solutions": []}, EXIT_NEGATIVE
    payload = {
        "exists": True,
        "lattice_size": len(lattice),
        "lattice_completeness": lattice.completeness.value,
        "stein_kernel_dim": st.dim,
        "solutions": [{
            "Q": _mat(fs.Q),
            "kernel_dim": fs.kernel_dim,
            "residual_norm": fs.residual_norm,
            "stein_coeffs": [float(c) for c in np.atleast_1d(fs.coeffs)],
        } for fs in found],
    }
    return payload, EXIT_OK


def cmd_classify(prob, args, ctx):
    Q = ctx["solution"]
    c = classify_solution(prob, Q)
    payload = {"verdict": c.verdict.value, "residual_norm": _num(c.residual_norm)}
    if c.verdict is Verdict.IN_FAMILY:
        payload["kernel_dim"] = c.subspace.dim
        payload["witness"] = _mat(c.witness)
        return payload, EXIT_OK
    if c.verdict is Verdict.SPURIOUS:
        payload["kernel_dim"] = c.subspace.dim
        payload["inconsistency"] = c.inconsistency
        payload["fixed_entries"] = [{"index": list(ij), "value": float(v)}
                                    for ij, v in sorted(c.fixed_entries.items())]
        return payload, EXIT_NEGATIVE
    return payload, EXIT_NOT_SOLUTION


def cmd_verify(prob, args, ctx):
    Q = ctx["solution"]
    try:
        _, res = hare_residual(prob, Q)
        ok = is_solution(prob, Q)
    except IndefiniteInnerTerm as exc:
        return {"residual_norm": None, "is_solution": False,
                "reason": str(exc)}, EXIT_NOT_SOLUTION
    return {"residual_norm": res, "is_solution": ok}, \
        EXIT_OK if ok else EXIT_NOT_SOLUTION


COMMANDS = {
    "spectrum": cmd_spectrum,
    "stein": cmd_stein,
    "families": cmd_families,
    "classify": cmd_classify,
    "verify": cmd_verify,
}
_NEEDS_SOLUTION = ("classify", "verify")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="riccati-families",
        description="Solution families of homogeneous discrete-time Riccati equations.")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("problem", help="JSON problem file with A, B and optional R")
    parser.add_argument("--solution", help="JSON file holding Q (classify, verify)")
    parser.add_argument("--samples", type=int, default=8,
                        help="Stein solutions sampled by 'families' (default 8)")
    parser.add_argument("--seed", type=int, default=None,
                        help="sampling seed (default: the file's seed, else 0)")
    parser.add_argument("--tol", type=float, default=None,
                        help="override the residual tolerance")
    return parser


def run(argv=None) -> tuple:
    """Parse arguments and execute; return ``(report or None, exit code)``."""
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        A, B, R, tol, seed = parse_problem(_load_json(args.problem))
        if args.tol is not None:
            tol = tol.replace(resid_tol=args.tol)
        if args.seed is None:
            args.seed = seed
        if args.samples < 1:
            raise InputError("--samples must be positive")
        ctx = {"warnings": []}
        if args.command in _NEEDS_SOLUTION:
            if not args.solution:
                raise InputError(f"{args.command} needs --solution")
            ctx["solution"] = parse_solution(_load_json(args.solution), A.shape[0])
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            prob = HareProblem(A, B, R, tol=tol)
            payload, code = COMMANDS[args.command](prob, args, ctx)
            spectrum = _spectrum_payload(prob)
        ctx["warnings"].extend(str(w.message) for w in caught)
    except (InputError, HareError, ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return None, EXIT_INPUT

    report = {"command": args.command, "tolerances": _tol_payload(tol),
              "seed": args.seed, "spectrum": spectrum}
    report.update(payload)
    if ctx["warnings"]:
        report["warnings"] = ctx["warnings"]
        for w in ctx["warnings"]:
            print(f"warning: {w}", file=sys.stderr)
    return report, code


def main(argv=None) -> int:
    report, code = run(argv)
    if report is not None:
        sys.stdout.write(json.dumps(report, allow_nan=False) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
