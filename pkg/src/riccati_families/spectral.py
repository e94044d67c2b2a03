"""Spectral analysis of the dynamics matrix and its invariant subspaces.

Eigenvalues come from a real Schur decomposition.  Computed eigenvalues of a
Jordan block of size ``k`` scatter by roughly ``eps**(1/k)``, so they are
first clustered with :data:`CLUSTER_TOL` and each cluster is represented by
its mean, which is accurate to working precision.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InvalidInput, NumericalBreakdown, PreconditionViolated
from .matrixcore import (DEFAULT_TOL, TolerancePolicy, as_matrix, frozen,
                         numerical_rank, orthonormal_basis, projector)

__all__ = [
    "CLUSTER_TOL", "SpectrumReport", "Subspace", "Completeness",
    "InvariantLattice", "analyze_spectrum", "check_invariant",
    "enumerate_invariant_subspaces", "is_reachable",
]

#: relative distance below which two computed eigenvalues are the same one
CLUSTER_TOL = 1e-4


@dataclass(frozen=True, eq=False)
class SpectrumReport:
    """Eigenvalue structure of ``A`` relevant to the Riccati families.

    Attributes
    ----------
    eigenvalues : ndarray of complex, shape (n,)
        All eigenvalues, repeated by algebraic multiplicity (cluster means).
    distinct : tuple of (complex, int)
        Distinct eigenvalues with their algebraic multiplicities.
    reciprocal_pairs : tuple of (int, int)
        Index pairs ``(i, j)``, ``i <= j``, into ``distinct`` whose product is
        one.  ``i == j`` flags a self-reciprocal eigenvalue (``+1`` or ``-1``).
    is_unmixed : bool
        No reciprocal pairs at all.
    is_nonsingular : bool
    at_most_one_simple_pair : bool
        At most one reciprocal pair, and both of its eigenvalues are simple.
        Under this condition (plus reachability, ``R > 0`` and a solvable
        Stein equation) the solution families exhaust all solutions.
    """

    eigenvalues: np.ndarray
    distinct: tuple
    reciprocal_pairs: tuple
    is_unmixed: bool
    is_nonsingular: bool
    at_most_one_simple_pair: bool


def _square(A, name="A"):
    a = as_matrix(A, name)
    if a.shape[0] != a.shape[1]:
        raise InvalidInput(f"{name} must be square, got shape {a.shape}")
    return a


def _schur_eigenvalues(a):
    T = scipy.linalg.schur(a, output="real")[0]
    n = T.shape[0]
    vals = []
    i = 0
    while i < n:
        if i + 1 < n and T[i + 1, i] != 0.0:
            vals.extend(np.linalg.eigvals(T[i:i + 2, i:i + 2]))
            i += 2
        else:
            vals.append(complex(T[i, i]))
            i += 1
    return np.array(vals, dtype=complex)


def _cluster(vals):
    clusters = []  # [sum, members]
    for v in sorted(vals, key=lambda z: (z.real, z.imag)):
        for c in clusters:
            mean = c[0] / len(c[1])
            if abs(v - mean) <= CLUSTER_TOL * (1.0 + abs(mean)):
                c[0] += v
                c[1].append(v)
                break
        else:
            clusters.append([v, [v]])
    out = []
    for total, members in clusters:
        mean = total / len(members)
        if abs(mean.imag) <= CLUSTER_TOL * (1.0 + abs(mean)):
            mean = complex(mean.real, 0.0)
        out.append((complex(mean), len(members)))
    return out


def analyze_spectrum(A, tol: TolerancePolicy = DEFAULT_TOL) -> SpectrumReport:
    """Eigenvalues, reciprocal pairs and the unmixing verdict for ``A``.

    Two eigenvalues form a reciprocal pair when
    ``|l_i l_j - 1| <= resid_tol * (1 + |l_i l_j|)``.
    """
    a = _square(A)
    n = a.shape[0]
    if n == 0:
        return SpectrumReport(np.zeros(0, complex), (), (), True, True, True)
    distinct = tuple(_cluster(_schur_eigenvalues(a)))
    eigs = np.array([v for v, m in distinct for _ in range(m)], dtype=complex)
    pairs = []
    for i, (li, _) in enumerate(distinct):
        for j in range(i, len(distinct)):
            prod = li * distinct[j][0]
            if abs(prod - 1.0) <= tol.resid_tol * (1.0 + abs(prod)):
                pairs.append((i, j))
    mags = np.abs(eigs)
    nonsingular = bool(mags.min() > tol.rank_tol * mags.max()) if mags.max() > 0 else False
    simple = len(pairs) == 0 or (
        len(pairs) == 1
        and distinct[pairs[0][0]][1] == 1 and distinct[pairs[0][1]][1] == 1)
    return SpectrumReport(frozen(eigs), distinct, tuple(pairs), not pairs,
                          nonsingular, simple)


@dataclass(frozen=True, eq=False)
class Subspace:
    """A real subspace of ``R^n`` held as orthonormal basis columns."""

    basis: np.ndarray

    def __post_init__(self):
        b = as_matrix(self.basis, "basis")
        k = b.shape[1]
        if np.linalg.norm(b.T @ b - np.eye(k)) > DEFAULT_TOL.resid_tol:
            raise InvalidInput("subspace basis is not orthonormal")
        object.__setattr__(self, "basis", frozen(b))

    @classmethod
    def span(cls, V, tol: TolerancePolicy = DEFAULT_TOL) -> "Subspace":
        """The column span of an arbitrary ``n x k`` matrix."""
        return cls(orthonormal_basis(V, tol))

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(np.zeros((n, 0)))

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(np.eye(n))

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        return projector(self.basis)

    def distance(self, other: "Subspace") -> float:
        """Frobenius distance between the two orthogonal projectors."""
        return float(np.linalg.norm(self.projector() - other.projector()))

    def __repr__(self):
        return f"Subspace(dim={self.dim}, ambient_dim={self.ambient_dim})"


def _as_subspace(S, n):
    if not isinstance(S, Subspace):
        S = Subspace.span(S)
    if S.ambient_dim != n:
        raise InvalidInput(
            f"subspace lives in R^{S.ambient_dim}, matrix acts on R^{n}")
    return S


def check_invariant(A, S, tol: TolerancePolicy = DEFAULT_TOL) -> bool:
    """True iff ``||(I - S S^T) A S||_F <= resid_tol * (1 + ||A||_F)``."""
    a = _square(A)
    S = _as_subspace(S, a.shape[0])
    b = S.basis
    leak = a @ b - b @ (b.T @ (a @ b))
    return bool(np.linalg.norm(leak) <= tol.resid_tol * (1.0 + np.linalg.norm(a)))


class Completeness(enum.Enum):
    COMPLETE = "complete"
    USER_SUPPLIED_ONLY = "user-supplied-only"


@dataclass(frozen=True, eq=False)
class InvariantLattice:
    subspaces: tuple
    completeness: Completeness

    @property
    def complete(self) -> bool:
        return self.completeness is Completeness.COMPLETE

    def __len__(self):
        return len(self.subspaces)

    def __iter__(self):
        return iter(self.subspaces)


def _complex_rank(M, tol):
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s > tol.rank_tol * s[0])) if s[0] > 0 else 0


def _trailing_null_space(M, k):
    # the k right singular vectors belonging to the smallest singular values
    if k == 0:
        return np.zeros((M.shape[1], 0))
    _, _, Vt = np.linalg.svd(M)
    return Vt[-k:].T


def _chain_prefixes(a, lam, mult, tol):
    """Bases of the nested invariant subspaces attached to one eigenvalue.

    Returns ``None`` when the eigenvalue has geometric multiplicity > 1.
    For a complex ``lam`` the conjugate is handled jointly through the real
    quadratic factor, so every basis is real.
    """
    n = a.shape[0]
    eye = np.eye(n)
    if lam.imag == 0.0:
        N = a - lam.real * eye
        step = 1
        geometric = n - numerical_rank(N, tol)
    else:
        N = a @ a - 2.0 * lam.real * a + abs(lam) ** 2 * eye
        step = 2
        geometric = n - _complex_rank(a - lam * eye, tol)
    if geometric != 1:
        return None
    prefixes = [np.zeros((n, 0))]
    Nk = eye
    for k in range(1, mult + 1):
        Nk = Nk @ N
        prefixes.append(_trailing_null_space(Nk, step * k))
    return prefixes


def enumerate_invariant_subspaces(A, tol: TolerancePolicy = DEFAULT_TOL,
                                  extra=()) -> InvariantLattice:
    """All ``A``-invariant subspaces of a nonsingular, non-derogatory ``A``.

    For a non-derogatory matrix every eigenvalue owns a single Jordan chain,
    and the invariant subspaces are exactly the direct sums of one chain
    prefix per eigenvalue (complex-conjugate pairs taken together).  When
    some eigenvalue has geometric multiplicity above one the set of invariant
    subspaces is a continuum; the trivial lattice ``{0}, R^n`` plus any
    caller-supplied subspaces in ``extra`` is returned and flagged
    :attr:`Completeness.USER_SUPPLIED_ONLY`.

    Raises
    ------
    InvalidInput
        ``A`` is not square or is singular.
    PreconditionViolated
        A subspace in ``extra`` is not ``A``-invariant.
    """
    a = _square(A)
    n = a.shape[0]
    spec = analyze_spectrum(a, tol)
    if not spec.is_nonsingular:
        raise InvalidInput("A must be nonsingular to enumerate solution families")

    atoms = []
    for lam, mult in spec.distinct:
        if lam.imag < 0.0:
            continue
        prefixes = _chain_prefixes(a, lam, mult, tol)
        if prefixes is None:
            atoms = None
            break
        atoms.append(prefixes)

    if atoms is None:
        members = [Subspace.zero(n), Subspace.full(n)]
        completeness = Completeness.USER_SUPPLIED_ONLY
    else:
        members = []
        for choice in itertools.product(*atoms):
            V = np.hstack([np.zeros((n, 0)), *choice])
            basis = orthonormal_basis(V, tol) if V.shape[1] else V
            if basis.shape[1] != V.shape[1]:
                raise NumericalBreakdown(
                    "invariant subspace basis lost rank; eigenvectors are "
                    "too ill-conditioned for the rank tolerance")
            members.append(Subspace(basis))
        members.sort(key=lambda S: S.dim)
        completeness = Completeness.COMPLETE

    for S in members:
        if not check_invariant(a, S, tol):
            raise NumericalBreakdown(
                f"computed {S.dim}-dimensional subspace fails the invariance check")
    for S in extra:
        S = _as_subspace(S, n)
        if not check_invariant(a, S, tol):
            raise PreconditionViolated("supplied subspace is not A-invariant")
        if all(S.dim != T.dim or S.distance(T) > tol.resid_tol for T in members):
            members.append(S)
    return InvariantLattice(tuple(members), completeness)


def is_reachable(A, B, tol: TolerancePolicy = DEFAULT_TOL) -> bool:
    """True iff ``[B, AB, ..., A^{n-1} B]`` has full row rank."""
    a = _square(A)
    b = as_matrix(B, "B")
    n = a.shape[0]
    if b.shape[0] != n:
        raise InvalidInput(f"B has {b.shape[0]} rows, A is {n}x{n}")
    if n == 0:
        return True
    blocks = [b]
    for _ in range(n - 1):
        blocks.append(a @ blocks[-1])
    return numerical_rank(np.hstack(blocks), tol) == n
