"""Dense real-matrix kernels used throughout the package.

Everything here works on ``float64`` numpy arrays.  Rank decisions are
relative: a singular value (or eigenvalue magnitude) counts as zero when it
does not exceed ``rank_tol`` times the largest one.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import InvalidInput

__all__ = [
    "TolerancePolicy", "DEFAULT_TOL", "as_matrix", "as_symmetric", "frozen",
    "sym_pinv", "sym_kernel", "orthonormal_basis", "orthogonal_complement",
    "projector", "numerical_rank", "MatrixOperator", "Unique", "Affine",
    "Inconsistent", "solve_vectorized",
]


@dataclass(frozen=True)
class TolerancePolicy:
    """Relative tolerances used for rank, residual and symmetry decisions."""

    rank_tol: float = 1e-10
    resid_tol: float = 1e-8
    sym_tol: float = 1e-10

    def __post_init__(self):
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if not (isinstance(v, (int, float)) and 0.0 < v < 1.0):
                raise InvalidInput(f"{f.name} must lie in (0, 1), got {v!r}")

    def replace(self, **changes) -> "TolerancePolicy":
        return dataclasses.replace(self, **changes)


DEFAULT_TOL = TolerancePolicy()


def frozen(a: np.ndarray) -> np.ndarray:
    """Return ``a`` marked read-only (no copy)."""
    a.flags.writeable = False
    return a


def as_matrix(M, name: str = "matrix") -> np.ndarray:
    """Validate ``M`` as a finite 2-D real matrix and return a float copy."""
    try:
        a = np.array(M, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InvalidInput(f"{name}: not a real matrix ({exc})") from None
    if a.ndim != 2:
        raise InvalidInput(f"{name}: expected a 2-D array, got ndim={a.ndim}")
    if not np.all(np.isfinite(a)):
        raise InvalidInput(f"{name}: entries must be finite")
    return a


def as_symmetric(M, tol: TolerancePolicy = DEFAULT_TOL,
                 name: str = "matrix") -> np.ndarray:
    """Validate ``M`` as symmetric and return ``(M + M^T) / 2``."""
    a = as_matrix(M, name)
    if a.shape[0] != a.shape[1]:
        raise InvalidInput(f"{name}: expected a square matrix, got {a.shape}")
    if np.linalg.norm(a - a.T) > tol.sym_tol * (1.0 + np.linalg.norm(a)):
        raise InvalidInput(f"{name}: matrix is not symmetric")
    return 0.5 * (a + a.T)


def _sym(a):
    return 0.5 * (a + a.T)


def numerical_rank(M, tol: TolerancePolicy = DEFAULT_TOL) -> int:
    a = as_matrix(M)
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > tol.rank_tol * s[0]))


def sym_pinv(M, tol: TolerancePolicy = DEFAULT_TOL) -> np.ndarray:
    """Moore-Penrose pseudo-inverse of a symmetric matrix.

    Computed from the symmetric eigendecomposition ``M = V diag(w) V^T``:
    eigenvalues with ``|w| <= rank_tol * max|w|`` are treated as zero and
    the remaining ones are inverted.

    Parameters
    ----------
    M : (n, n) array_like
        Symmetric matrix (checked against ``tol.sym_tol``).
    tol : TolerancePolicy, optional

    Returns
    -------
    (n, n) ndarray
        The symmetric pseudo-inverse ``M^+``.
    """
    a = as_symmetric(M, tol)
    if a.size == 0:
        return a.copy()
    w, V = np.linalg.eigh(a)
    wmax = np.max(np.abs(w))
    keep = np.abs(w) > tol.rank_tol * wmax if wmax > 0 else np.zeros_like(w, bool)
    Vk = V[:, keep]
    return _sym((Vk / w[keep]) @ Vk.T)


def sym_kernel(M, tol: TolerancePolicy = DEFAULT_TOL, scale: float = 0.0) -> np.ndarray:
    """Orthonormal basis (columns) of the kernel of a symmetric matrix.

    Eigenvalues with ``|w| <= rank_tol * max(max|w|, scale)`` count as zero.
    A positive ``scale`` gives an absolute floor, so that a matrix that is
    negligible on the problem's own scale has the whole space as kernel.
    """
    a = as_symmetric(M, tol)
    n = a.shape[0]
    if n == 0:
        return np.zeros((0, 0))
    w, V = np.linalg.eigh(a)
    thresh = tol.rank_tol * max(np.max(np.abs(w)), scale)
    zero = np.abs(w) <= thresh
    if thresh == 0.0 or zero.all():
        return np.eye(n)
    return _canonical_signs(V[:, zero])


def _canonical_signs(S):
    # flip each column so its largest-magnitude entry is positive
    if S.size == 0:
        return S
    idx = np.argmax(np.abs(S), axis=0)
    signs = np.sign(S[idx, np.arange(S.shape[1])])
    signs[signs == 0] = 1.0
    return S * signs


def orthonormal_basis(V, tol: TolerancePolicy = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis for the column space of ``V``.

    The number of returned columns is the numerical rank of ``V``.  Columns
    are sign-normalized so the output is deterministic.
    """
    a = as_matrix(V, "V")
    n, k = a.shape
    if k == 0 or n == 0:
        return np.zeros((n, 0))
    U, s, _ = np.linalg.svd(a, full_matrices=False)
    if s[0] == 0.0:
        return np.zeros((n, 0))
    r = int(np.sum(s > tol.rank_tol * s[0]))
    return _canonical_signs(U[:, :r])


def orthogonal_complement(S, tol: TolerancePolicy = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of ``span(S)``."""
    a = as_matrix(S, "S")
    n = a.shape[0]
    if a.shape[1] == 0:
        return np.eye(n)
    r = numerical_rank(a, tol)
    U, _, _ = np.linalg.svd(a, full_matrices=True)
    return _canonical_signs(U[:, r:])


def projector(S, tol: TolerancePolicy = DEFAULT_TOL) -> np.ndarray:
    """Orthogonal projector ``S S^T`` onto the span of orthonormal columns ``S``."""
    a = as_matrix(S, "S")
    k = a.shape[1]
    if np.linalg.norm(a.T @ a - np.eye(k)) > tol.resid_tol:
        raise InvalidInput("projector: columns of S are not orthonormal")
    return _sym(a @ a.T)


# ---------------------------------------------------------------------------
# vectorized linear matrix equations


@dataclass(frozen=True, eq=False)
class MatrixOperator:
    """Linear map ``X -> sum_k c_k * L_k @ X @ M_k.T`` on ``p x q`` matrices.

    With ``symmetric=True`` the unknown is restricted to symmetric matrices
    and parametrized by its ``n(n+1)/2`` upper-triangular coordinates, so
    every solution and kernel element is symmetric by construction.  The
    optional boolean ``free`` mask pins the entries where it is False to
    zero; a symmetric operator needs a symmetric mask.
    """

    terms: tuple
    shape: tuple
    symmetric: bool = False
    free: Optional[np.ndarray] = None

    def __post_init__(self):
        p, q = self.shape
        if not self.terms:
            raise InvalidInput("operator needs at least one term")
        terms = []
        out = None
        for c, L, M in self.terms:
            L = as_matrix(L, "operator left factor")
            M = as_matrix(M, "operator right factor")
            if L.shape[1] != p or M.shape[1] != q:
                raise InvalidInput(
                    f"term factors {L.shape}, {M.shape} do not act on a "
                    f"{p}x{q} unknown")
            if out is None:
                out = (L.shape[0], M.shape[0])
            elif out != (L.shape[0], M.shape[0]):
                raise InvalidInput("operator terms disagree on output shape")
            terms.append((float(c), L, M))
        object.__setattr__(self, "terms", tuple(terms))
        if self.symmetric and p != q:
            raise InvalidInput("symmetric restriction needs a square unknown")
        if self.free is not None:
            free = np.asarray(self.free, dtype=bool)
            if free.shape != (p, q):
                raise InvalidInput("free mask shape does not match the unknown")
            if self.symmetric and not np.array_equal(free, free.T):
                raise InvalidInput("free mask must be symmetric")
            object.__setattr__(self, "free", free)

    @classmethod
    def stein(cls, M1, M2=None, *, symmetric=False, free=None):
        """The Stein-type operator ``X -> M1 @ X @ M2.T - X``."""
        M1 = as_matrix(M1, "M1")
        M2 = M1 if M2 is None else as_matrix(M2, "M2")
        shape = (M1.shape[1], M2.shape[1])
        if M1.shape[0] != shape[0] or M2.shape[0] != shape[1]:
            raise InvalidInput("Stein operator factors must be square")
        return cls(((1.0, M1, M2), (-1.0, np.eye(shape[0]), np.eye(shape[1]))),
                   shape, symmetric=symmetric, free=free)

    @property
    def out_shape(self):
        _, L, M = self.terms[0]
        return (L.shape[0], M.shape[0])

    def embedding(self) -> np.ndarray:
        """Columns are the row-major vectorizations of the coordinate basis."""
        p, q = self.shape
        free = np.ones((p, q), bool) if self.free is None else self.free
        cols = []
        if self.symmetric:
            for i in range(p):
                for j in range(i, p):
                    if not free[i, j]:
                        continue
                    E = np.zeros((p, p))
                    if i == j:
                        E[i, i] = 1.0
                    else:
                        E[i, j] = E[j, i] = 1.0 / math.sqrt(2.0)
                    cols.append(E.ravel())
        else:
            for i, j in zip(*np.nonzero(free)):
                E = np.zeros((p, q))
                E[i, j] = 1.0
                cols.append(E.ravel())
        if not cols:
            return np.zeros((p * q, 0))
        return np.column_stack(cols)

    def matrix(self) -> np.ndarray:
        """Vectorized operator acting on the coordinates of :meth:`embedding`."""
        K = sum(c * np.kron(L, M) for c, L, M in self.terms)
        return K @ self.embedding()

    def apply(self, X) -> np.ndarray:
        X = as_matrix(X, "X")
        return sum(c * L @ X @ M.T for c, L, M in self.terms)

    def unpack(self, coords) -> np.ndarray:
        X = (self.embedding() @ np.asarray(coords, float)).reshape(self.shape)
        return _sym(X) if self.symmetric else X


@dataclass(frozen=True, eq=False)
class Unique:
    solution: np.ndarray


@dataclass(frozen=True, eq=False)
class Affine:
    particular: np.ndarray
    kernel_basis: tuple


@dataclass(frozen=True, eq=False)
class Inconsistent:
    """No solution exists.

    ``least_squares`` is the minimum-norm least-squares minimizer and
    ``fixed_entries`` maps output positions whose residual does not depend
    on the unknown at all to that (nonzero) constant residual.
    """

    residual_norm: float
    least_squares: np.ndarray
    fixed_entries: dict


VectorizedSolution = Union[Unique, Affine, Inconsistent]


def solve_vectorized(op: MatrixOperator, rhs,
                     tol: TolerancePolicy = DEFAULT_TOL) -> VectorizedSolution:
    """Solve ``op(X) = rhs`` by Kronecker vectorization.

    The equation is solvable when the least-squares residual is at most
    ``resid_tol * (1 + ||rhs||_F)``; the kernel is the numerical null space
    of the vectorized operator under ``rank_tol``.  Kernel elements are
    returned with unit Frobenius norm.
    """
    b_mat = as_matrix(rhs, "rhs")
    if b_mat.shape != op.out_shape:
        raise InvalidInput(
            f"rhs has shape {b_mat.shape}, operator produces {op.out_shape}")
    b = b_mat.ravel()
    K = op.matrix()
    ncoord = K.shape[1]
    thresh = tol.resid_tol * (1.0 + np.linalg.norm(b))

    if ncoord == 0:
        zero = np.zeros(op.shape)
        res = float(np.linalg.norm(b))
        if res <= thresh:
            return Unique(zero)
        return Inconsistent(res, zero, _fixed_entries(K, b_mat, thresh, tol))

    U, s, Vt = np.linalg.svd(K, full_matrices=True)
    smax = s[0] if s.size else 0.0
    r = int(np.sum(s > tol.rank_tol * smax)) if smax > 0 else 0
    c = Vt[:r].T @ ((U[:, :r].T @ b) / s[:r])
    res = float(np.linalg.norm(K @ c - b))
    X = op.unpack(c)
    if res > thresh:
        return Inconsistent(res, X, _fixed_entries(K, b_mat, thresh, tol))
    if r == ncoord:
        return Unique(X)
    basis = []
    for v in Vt[r:]:
        D = op.unpack(v)
        D = D / np.linalg.norm(D)
        flat = D.ravel()
        if flat[np.argmax(np.abs(flat))] < 0:
            D = -D
        basis.append(D)
    return Affine(X, tuple(basis))


def _fixed_entries(K, b_mat, thresh, tol):
    # rows of the system the unknown cannot influence; residual there is -rhs
    scale = np.max(np.abs(K)) if K.size else 0.0
    fixed = {}
    for row in range(K.shape[0]):
        if K.shape[1] == 0 or np.max(np.abs(K[row])) <= tol.rank_tol * scale:
            val = -float(b_mat.flat[row])
            if abs(val) > thresh:
                fixed[tuple(int(i) for i in np.unravel_index(row, b_mat.shape))] = val
    return fixed
