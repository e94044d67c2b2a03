"""Homogeneous discrete-time Riccati equations and their solution families.

The equation studied here is

    Q = A^T Q A - A^T Q B (R + B^T Q B)^{-1} B^T Q A,

with symmetric unknown ``Q``.  Its nonsingular solutions are exactly the
inverses of the nonsingular solutions of the Stein equation

    A P A^T - P = B R^{-1} B^T,

and every Stein solution ``P`` generates a whole family of (possibly
singular) Riccati solutions, one per ``A``-invariant subspace ``S``:

    Q = [(I - Pi_S) P (I - Pi_S)]^+.

Solutions outside every family ("spurious" ones) can exist when ``A`` has
repeated reciprocal eigenvalues; :func:`classify_solution` detects them by
trying to extend the restriction of ``Q^+`` to a full Stein solution.
"""

from __future__ import annotations

import enum
import logging
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from .errors import (IndefiniteInnerTerm, InvalidInput, NoSteinSolution,
                     NumericalBreakdown, PreconditionViolated, SingularInput)
from .matrixcore import (DEFAULT_TOL, Affine, Inconsistent, MatrixOperator,
                         TolerancePolicy, Unique, as_matrix, as_symmetric,
                         frozen, orthogonal_complement, solve_vectorized,
                         sym_kernel, sym_pinv)
from .spectral import (InvariantLattice, SpectrumReport, Subspace,
                       _as_subspace, analyze_spectrum, check_invariant,
                       enumerate_invariant_subspaces, is_reachable)

log = logging.getLogger(__name__)

__all__ = [
    "HareProblem", "SteinSolutionSet", "FamilySolution", "Verdict",
    "Classification", "hare_residual", "is_solution", "stein_residual",
    "solves_stein", "solve_stein_set", "stein_to_riccati", "riccati_to_stein",
    "smw_gap", "family_solution", "default_delta_samples",
    "enumerate_families", "classify_solution", "families_cover_all_solutions",
]


def _sym(a):
    return 0.5 * (a + a.T)


@dataclass(frozen=True, eq=False)
class HareProblem:
    """Problem data ``(A, B, R)``; ``R`` defaults to the identity.

    ``R`` must be symmetric positive definite.  ``A`` may be singular at
    construction time, but every family-related operation rejects it.  An
    unreachable ``(A, B)`` only triggers a warning.
    """

    A: np.ndarray
    B: np.ndarray
    R: Optional[np.ndarray] = None
    tol: TolerancePolicy = DEFAULT_TOL

    def __post_init__(self):
        A = as_matrix(self.A, "A")
        B = as_matrix(self.B, "B")
        if A.shape[0] != A.shape[1]:
            raise InvalidInput(f"A must be square, got shape {A.shape}")
        if B.shape[0] != A.shape[0]:
            raise InvalidInput(f"B has {B.shape[0]} rows, A is {A.shape[0]}x{A.shape[0]}")
        m = B.shape[1]
        R = np.eye(m) if self.R is None else as_symmetric(self.R, self.tol, "R")
        if R.shape != (m, m):
            raise InvalidInput(f"R must be {m}x{m}, got {R.shape}")
        w = np.linalg.eigvalsh(R) if m else np.ones(1)
        if w.min() <= self.tol.rank_tol * max(w.max(), 0.0) or w.min() <= 0:
            raise InvalidInput("R must be positive definite")
        object.__setattr__(self, "A", frozen(A))
        object.__setattr__(self, "B", frozen(B))
        object.__setattr__(self, "R", frozen(R))
        if not self.reachable:
            warnings.warn("(A, B) is not reachable; Stein solutions may be "
                          "singular", stacklevel=3)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @cached_property
    def spectrum(self) -> SpectrumReport:
        return analyze_spectrum(self.A, self.tol)

    @cached_property
    def reachable(self) -> bool:
        return is_reachable(self.A, self.B, self.tol)

    @cached_property
    def solution_scale(self) -> float:
        """``||R||_2 / ||B||_2^2``, the size at which ``B^T Q B`` rivals ``R``."""
        nb = np.linalg.norm(self.B, 2) if self.B.size else 0.0
        return float(np.linalg.norm(self.R, 2) / nb ** 2) if nb > 0 else 0.0

    @cached_property
    def stein_rhs(self) -> np.ndarray:
        """``B R^{-1} B^T``."""
        return frozen(_sym(self.B @ np.linalg.solve(self.R, self.B.T)))

    def require_nonsingular(self):
        if not self.spectrum.is_nonsingular:
            raise InvalidInput("A must be nonsingular")


# ---------------------------------------------------------------------------
# residuals and the nonsingular bijection


def _check_square(prob, M, name):
    M = as_symmetric(M, prob.tol, name)
    if M.shape != (prob.n, prob.n):
        raise InvalidInput(f"{name} must be {prob.n}x{prob.n}, got {M.shape}")
    return M


def hare_residual(prob: HareProblem, Q, tol: Optional[TolerancePolicy] = None):
    """Residual ``A^T Q A - A^T Q B (R + B^T Q B)^{-1} B^T Q A - Q``.

    Returns
    -------
    residual : (n, n) ndarray
    norm : float
        Frobenius norm of ``residual``.

    Raises
    ------
    IndefiniteInnerTerm
        ``R + B^T Q B`` is singular under ``rank_tol``.
    """
    tol = tol or prob.tol
    Q = _check_square(prob, Q, "Q")
    A, B = prob.A, prob.B
    inner = _sym(prob.R + B.T @ Q @ B)
    s = np.linalg.svd(inner, compute_uv=False) if inner.size else np.ones(1)
    if s[-1] <= tol.rank_tol * s[0]:
        raise IndefiniteInnerTerm("R + B^T Q B is singular")
    QA = Q @ A
    BtQA = B.T @ QA
    res = _sym(A.T @ QA - BtQA.T @ np.linalg.solve(inner, BtQA) - Q)
    return res, float(np.linalg.norm(res))


def is_solution(prob: HareProblem, Q, tol: Optional[TolerancePolicy] = None) -> bool:
    tol = tol or prob.tol
    _, norm = hare_residual(prob, Q, tol)
    return bool(norm <= tol.resid_tol * (1.0 + np.linalg.norm(Q)))


def stein_residual(prob: HareProblem, P):
    """Residual ``A P A^T - P - B R^{-1} B^T`` and its Frobenius norm."""
    P = _check_square(prob, P, "P")
    res = _sym(prob.A @ P @ prob.A.T - P - prob.stein_rhs)
    return res, float(np.linalg.norm(res))


def _stein_scale(prob, P):
    return (1.0 + np.linalg.norm(prob.A, 2) ** 2 * np.linalg.norm(P)
            + np.linalg.norm(prob.stein_rhs))


def solves_stein(prob: HareProblem, P, tol: Optional[TolerancePolicy] = None) -> bool:
    """Stein residual within ``resid_tol`` relative to the size of its terms."""
    tol = tol or prob.tol
    _, norm = stein_residual(prob, P)
    return bool(norm <= tol.resid_tol * _stein_scale(prob, P))


def _checked_inverse(M, tol, what):
    s = np.linalg.svd(M, compute_uv=False)
    if s.size and s[-1] <= tol.rank_tol * s[0]:
        raise SingularInput(f"{what} is singular")
    return _sym(np.linalg.inv(M))


def smw_gap(prob: HareProblem, Q) -> float:
    """Defect of ``[Q - QB(R + B^T Q B)^{-1} B^T Q]^{-1} = Q^{-1} + B R^{-1} B^T``.

    Measured as ``||M (Q^{-1} + B R^{-1} B^T) - I||_F`` where ``M`` is the
    bracketed matrix, so it does not require inverting ``M``.
    """
    Q = _check_square(prob, Q, "Q")
    B = prob.B
    QB = Q @ B
    M = Q - QB @ np.linalg.solve(prob.R + B.T @ QB, QB.T)
    P = np.linalg.inv(Q)
    return float(np.linalg.norm(M @ (P + prob.stein_rhs) - np.eye(prob.n)))


def stein_to_riccati(prob: HareProblem, P, tol: Optional[TolerancePolicy] = None):
    """Map a nonsingular Stein solution ``P`` to the Riccati solution ``P^{-1}``.

    Raises
    ------
    SingularInput
        ``P`` is singular under ``rank_tol``.
    PreconditionViolated
        ``P`` does not solve the Stein equation.
    NumericalBreakdown
        The inverse fails the Woodbury identity or the Riccati residual test.
    """
    tol = tol or prob.tol
    prob.require_nonsingular()
    P = _check_square(prob, P, "P")
    Q = _checked_inverse(P, tol, "P")
    if not solves_stein(prob, P, tol):
        raise PreconditionViolated("P does not solve the Stein equation")
    _verify_pair(prob, Q, P, tol)
    return Q


def riccati_to_stein(prob: HareProblem, Q, tol: Optional[TolerancePolicy] = None):
    """Inverse of :func:`stein_to_riccati`: ``Q -> Q^{-1}``."""
    tol = tol or prob.tol
    prob.require_nonsingular()
    Q = _check_square(prob, Q, "Q")
    P = _checked_inverse(Q, tol, "Q")
    if not is_solution(prob, Q, tol):
        raise PreconditionViolated("Q does not solve the Riccati equation")
    _verify_pair(prob, Q, P, tol)
    return P


def _verify_pair(prob, Q, P, tol):
    gap = smw_gap(prob, Q)
    scale = 1.0 + np.linalg.norm(Q) * np.linalg.norm(P + prob.stein_rhs)
    if gap > tol.resid_tol * scale:
        raise NumericalBreakdown(f"Woodbury identity violated (gap {gap:.3e})")
    if not is_solution(prob, Q, tol):
        raise NumericalBreakdown("inverse fails the Riccati residual test")
    if not solves_stein(prob, P, tol):
        raise NumericalBreakdown("inverse fails the Stein residual test")


# ---------------------------------------------------------------------------
# Stein solution sets


@dataclass(frozen=True, eq=False)
class SteinSolutionSet:
    """All symmetric Stein solutions ``particular + sum_i c_i delta_basis[i]``.

    ``delta_basis`` spans ``{D = D^T : A D A^T = D}`` and each element has
    unit Frobenius norm.  When ``exists`` is False the equation is
    inconsistent, ``particular`` is the least-squares minimizer and the
    basis is empty.
    """

    particular: np.ndarray
    delta_basis: tuple
    exists: bool
    inconsistency: float = 0.0

    @property
    def dim(self) -> int:
        return len(self.delta_basis)

    def member(self, coeffs=()) -> np.ndarray:
        coeffs = np.atleast_1d(np.asarray(coeffs, dtype=float))
        if coeffs.size == 0:
            coeffs = np.zeros(self.dim)
        if coeffs.shape != (self.dim,):
            raise InvalidInput(
                f"expected {self.dim} coefficients, got {coeffs.size}")
        P = self.particular.copy()
        for c, D in zip(coeffs, self.delta_basis):
            P += c * D
        return _sym(P)


def solve_stein_set(prob: HareProblem,
                    tol: Optional[TolerancePolicy] = None) -> SteinSolutionSet:
    """Particular solution and homogeneous kernel of the Stein equation."""
    tol = tol or prob.tol
    prob.require_nonsingular()
    op = MatrixOperator.stein(prob.A, symmetric=True)
    sol = solve_vectorized(op, prob.stein_rhs, tol)
    if isinstance(sol, Unique):
        return SteinSolutionSet(frozen(sol.solution), (), True)
    if isinstance(sol, Affine):
        return SteinSolutionSet(frozen(sol.particular),
                                tuple(frozen(D) for D in sol.kernel_basis), True)
    return SteinSolutionSet(frozen(sol.least_squares), (), False, sol.residual_norm)


# ---------------------------------------------------------------------------
# families


@dataclass(frozen=True, eq=False)
class FamilySolution:
    """One member ``Q = [(I - Pi_S) P (I - Pi_S)]^+`` of the family of ``P``."""

    Q: np.ndarray
    P: np.ndarray
    subspace: Subspace
    coeffs: np.ndarray
    residual_norm: float

    @property
    def kernel_dim(self) -> int:
        return self.subspace.dim


def _complement_projector(S, tol):
    # I - Pi_S, built from a basis of S^perp so it is exactly 0 when S = R^n
    Sp = orthogonal_complement(S.basis, tol)
    return _sym(Sp @ Sp.T)


def family_solution(prob: HareProblem, P, S, tol: Optional[TolerancePolicy] = None,
                    coeffs=None) -> FamilySolution:
    """Riccati solution generated by the Stein solution ``P`` and subspace ``S``.

    ``S`` may be a :class:`Subspace` or any matrix whose columns span it.
    The kernel of the result is checked to be ``S`` (skipped when ``(A, B)``
    is unreachable, since ``P`` may then be singular on ``S^perp``).

    Raises
    ------
    PreconditionViolated
        ``S`` is not ``A``-invariant or ``P`` does not solve the Stein equation.
    NumericalBreakdown
        The result fails the kernel or residual check.
    """
    tol = tol or prob.tol
    prob.require_nonsingular()
    P = _check_square(prob, P, "P")
    S = _as_subspace(S, prob.n)
    if not check_invariant(prob.A, S, tol):
        raise PreconditionViolated("S is not A-invariant")
    if not solves_stein(prob, P, tol):
        raise PreconditionViolated("P does not solve the Stein equation")
    C = _complement_projector(S, tol)
    Q = sym_pinv(_sym(C @ P @ C), tol)
    if prob.reachable:
        K = Subspace(sym_kernel(Q, tol))
        if K.dim != S.dim or K.distance(S) > tol.resid_tol:
            raise NumericalBreakdown("kernel of the family solution differs from S")
    _, norm = hare_residual(prob, Q, tol)
    if norm > tol.resid_tol * (1.0 + np.linalg.norm(Q)):
        raise NumericalBreakdown(
            f"family solution has Riccati residual {norm:.3e}")
    c = np.zeros(0) if coeffs is None else np.atleast_1d(np.asarray(coeffs, float))
    return FamilySolution(frozen(Q), frozen(P), S, frozen(c.copy()), norm)


def default_delta_samples(k: int, samples: int = 8, seed: int = 0) -> list:
    """Zero, the ``+-1`` unit vectors, then ``samples`` uniform draws in ``[-1, 1]^k``."""
    if k == 0:
        return [np.zeros(0)]
    out = [np.zeros(k)]
    for i in range(k):
        for sign in (1.0, -1.0):
            e = np.zeros(k)
            e[i] = sign
            out.append(e)
    rng = np.random.default_rng(seed)
    out.extend(rng.uniform(-1.0, 1.0, size=(samples, k)))
    return out


def enumerate_families(prob: HareProblem,
                       stein_set: Optional[SteinSolutionSet] = None,
                       lattice: Optional[InvariantLattice] = None,
                       delta_samples: Optional[Sequence] = None, *,
                       samples: int = 8, seed: int = 0,
                       tol: Optional[TolerancePolicy] = None) -> list:
    """Distinct family solutions over sampled Stein solutions and a lattice.

    The Stein solution set is a continuum when the homogeneous kernel is
    nontrivial, so it is sampled at ``P_0 + sum_i c_i D_i`` for each
    coefficient vector in ``delta_samples`` (default:
    :func:`default_delta_samples`).  Solutions closer than
    ``resid_tol * (1 + max norm)`` in Frobenius norm are merged.
    """
    tol = tol or prob.tol
    if stein_set is None:
        stein_set = solve_stein_set(prob, tol)
    if not stein_set.exists:
        raise NoSteinSolution(
            f"Stein equation is inconsistent (residual {stein_set.inconsistency:.3e})")
    if lattice is None:
        lattice = enumerate_invariant_subspaces(prob.A, tol)
    if delta_samples is None:
        delta_samples = default_delta_samples(stein_set.dim, samples, seed)

    found = []
    stack = np.zeros((0, prob.n, prob.n))
    norms = np.zeros(0)
    skipped = 0
    for coeffs in delta_samples:
        P = stein_set.member(coeffs)
        for S in lattice:
            try:
                fs = family_solution(prob, P, S, tol, coeffs)
            except NumericalBreakdown:
                if prob.reachable:
                    raise
                skipped += 1
                continue
            qn = np.linalg.norm(fs.Q)
            if stack.shape[0]:
                dist = np.linalg.norm(stack - fs.Q, axis=(1, 2))
                if np.any(dist <= tol.resid_tol * (1.0 + np.maximum(norms, qn))):
                    continue
            found.append(fs)
            stack = np.concatenate([stack, fs.Q[None]])
            norms = np.append(norms, qn)
    if skipped:
        log.warning("skipped %d family members that failed verification", skipped)
    return found


# ---------------------------------------------------------------------------
# classification


class Verdict(enum.Enum):
    IN_FAMILY = "in-family"
    SPURIOUS = "spurious"
    NOT_A_SOLUTION = "not-a-solution"


@dataclass(frozen=True, eq=False)
class Classification:
    """Outcome of :func:`classify_solution`.

    For ``IN_FAMILY`` verdicts ``witness`` is a Stein solution that
    regenerates ``Q`` together with ``subspace = ker(Q)``.  For ``SPURIOUS``
    verdicts ``inconsistency`` is the least-squares residual of the
    extension system and ``fixed_entries`` lists the entries of
    ``A P A^T - P - B R^{-1} B^T`` that take the same nonzero value for
    every admissible extension ``P``.
    """

    verdict: Verdict
    residual_norm: float
    subspace: Optional[Subspace] = None
    witness: Optional[np.ndarray] = None
    inconsistency: float = 0.0
    fixed_entries: dict = field(default_factory=dict)


def classify_solution(prob: HareProblem, Q,
                      tol: Optional[TolerancePolicy] = None) -> Classification:
    """Decide whether ``Q`` belongs to some solution family.

    With ``S = ker(Q)`` and ``T = [S_perp | S]`` the problem is moved to
    coordinates where ``T^T A T = [[A1, 0], [A21, A2]]`` and
    ``T^T Q T = [[Q1, 0], [0, 0]]``.  ``Q`` belongs to a family exactly when
    ``P1 = Q1^{-1}`` extends to a symmetric Stein solution
    ``[[P1, X12], [X12^T, X2]]``.  The unknown blocks ``X12`` and ``X2`` are
    solved for jointly in one least-squares problem.
    """
    tol = tol or prob.tol
    prob.require_nonsingular()
    Q = _check_square(prob, Q, "Q")
    try:
        _, res = hare_residual(prob, Q, tol)
    except IndefiniteInnerTerm:
        return Classification(Verdict.NOT_A_SOLUTION, float("inf"))
    if res > tol.resid_tol * (1.0 + np.linalg.norm(Q)):
        return Classification(Verdict.NOT_A_SOLUTION, res)

    n = prob.n
    S = Subspace(sym_kernel(Q, tol, prob.solution_scale))
    if not check_invariant(prob.A, S, tol):
        raise NumericalBreakdown("kernel of a Riccati solution is not A-invariant")
    Sp = orthogonal_complement(S.basis, tol)
    r = Sp.shape[1]
    T = np.hstack([Sp, S.basis])
    P1 = np.linalg.inv(_sym(Sp.T @ Q @ Sp)) if r else np.zeros((0, 0))

    fixed_bar = np.zeros((n, n))
    fixed_bar[:r, :r] = P1
    P_fixed = _sym(T @ fixed_bar @ T.T)
    free = np.ones((n, n), bool)
    free[:r, :r] = False
    AT = prob.A @ T
    op = MatrixOperator(((1.0, AT, AT), (-1.0, T, T)), (n, n),
                        symmetric=True, free=free)
    rhs = prob.stein_rhs - (prob.A @ P_fixed @ prob.A.T - P_fixed)
    sol = solve_vectorized(op, _sym(rhs), tol)
    if isinstance(sol, Inconsistent):
        return Classification(Verdict.SPURIOUS, res, S,
                              inconsistency=sol.residual_norm,
                              fixed_entries=sol.fixed_entries)

    Y = sol.solution if isinstance(sol, Unique) else sol.particular
    witness = _sym(T @ (fixed_bar + Y) @ T.T)
    if not solves_stein(prob, witness, tol):
        raise NumericalBreakdown("extension does not solve the Stein equation")
    C = _complement_projector(S, tol)
    rebuilt = sym_pinv(_sym(C @ witness @ C), tol)
    if np.linalg.norm(rebuilt - Q) > tol.resid_tol * (1.0 + np.linalg.norm(Q)):
        raise NumericalBreakdown("witness does not reproduce Q")
    return Classification(Verdict.IN_FAMILY, res, S, frozen(witness))


def families_cover_all_solutions(prob: HareProblem,
                                 stein_set: Optional[SteinSolutionSet] = None) -> bool:
    """True when the families provably contain every Riccati solution.

    That holds for a reachable pair, nonsingular ``A``, ``R > 0`` (enforced
    by :class:`HareProblem`), a solvable Stein equation and at most one
    reciprocal eigenvalue pair made of simple eigenvalues.
    """
    spec = prob.spectrum
    if not (spec.is_nonsingular and prob.reachable and spec.at_most_one_simple_pair):
        return False
    if stein_set is None:
        stein_set = solve_stein_set(prob)
    return stein_set.exists
