"""Seeded random problem generators shared by the test modules."""

import numpy as np

from riccati_families.spectral import is_reachable


def _well_conditioned(rng, n, max_cond=20.0):
    while True:
        V = rng.standard_normal((n, n))
        if np.linalg.cond(V) < max_cond:
            return V


def _spd(rng, m):
    G = rng.standard_normal((m, m))
    return G @ G.T + 0.5 * np.eye(m)


def _sqrtm_spd(R):
    w, U = np.linalg.eigh(R)
    return (U * np.sqrt(w)) @ U.T


def _magnitude(rng):
    # |lambda| in [0.2, 0.8] or [1.25, 4]
    if rng.random() < 0.5:
        return rng.uniform(0.2, 0.8)
    return rng.uniform(1.25, 4.0)


def _far_from_reciprocal(vals, gap=0.1):
    vals = np.asarray(vals, complex)
    for i in range(len(vals)):
        for j in range(i, len(vals)):
            if abs(vals[i] * vals[j] - 1.0) < gap:
                return False
            if i != j and abs(vals[i] - vals[j]) < gap:
                return False
    return True


def random_eigenvalues(rng, n, pairs=0):
    """Real eigenvalues with ``pairs`` planted ``(l, 1/l)`` pairs, rest unmixed."""
    while True:
        vals = []
        for _ in range(pairs):
            lam = rng.uniform(1.25, 4.0) * rng.choice([-1.0, 1.0])
            vals += [lam, 1.0 / lam]
        free = [_magnitude(rng) * rng.choice([-1.0, 1.0]) for _ in range(n - 2 * pairs)]
        planted = vals[:]
        ok = _far_from_reciprocal(free) and all(
            abs(a * b - 1.0) > 0.1 and abs(a - b) > 0.1 for a in free for b in planted)
        ok = ok and all(abs(a - b) > 0.1 for i, a in enumerate(planted)
                        for b in planted[i + 1:])
        if ok:
            return np.array(vals + free), [(2 * k, 2 * k + 1) for k in range(pairs)]


def random_unmixed_2x2(rng):
    """A 2x2 with distinct unmixed eigenvalues (real or a complex pair)."""
    while True:
        if rng.random() < 0.75:
            vals = np.array([_magnitude(rng) * rng.choice([-1, 1]) for _ in range(2)])
            if not _far_from_reciprocal(vals):
                continue
            Lam = np.diag(vals)
        else:
            rho, theta = _magnitude(rng), rng.uniform(0.3, np.pi - 0.3)
            if abs(rho ** 2 - 1.0) < 0.1:
                continue
            a, b = rho * np.cos(theta), rho * np.sin(theta)
            Lam = np.array([[a, -b], [b, a]])
        V = _well_conditioned(rng, 2)
        return V @ Lam @ np.linalg.inv(V)


def reachability_margin(A, B):
    """Smallest over largest singular value of the controllability matrix."""
    blocks = [B]
    for _ in range(A.shape[0] - 1):
        blocks.append(A @ blocks[-1])
    s = np.linalg.svd(np.hstack(blocks), compute_uv=False)
    return s[-1] / s[0] if len(s) >= A.shape[0] else 0.0


def random_reachable_B(rng, A, m, margin=1e-2):
    while True:
        B = rng.standard_normal((A.shape[0], m))
        if is_reachable(A, B) and reachability_margin(A, B) >= margin:
            return B


def planted_instance(rng, n, pairs, m=None, diagonal=False):
    """Diagonalizable ``(A, B, R)`` with planted reciprocal pairs.

    With ``diagonal=True`` the eigenvector matrix is the identity.

    ``B R^{-1} B'`` is built so that, in eigen-coordinates, its entries at
    every planted pair vanish.  That is exactly what keeps the Stein
    equation consistent despite the reciprocal eigenvalues.
    """
    if m is None:
        m = int(rng.integers(2 if pairs else 1, n + 1))
    while True:
        vals, idx = random_eigenvalues(rng, n, pairs)
        V = np.eye(n) if diagonal else _well_conditioned(rng, n)
        A = V @ np.diag(vals) @ np.linalg.inv(V)
        G = rng.standard_normal((n, m))
        for i, j in idx:
            G[j] -= (G[j] @ G[i]) / (G[i] @ G[i]) * G[i]
        R = _spd(rng, m)
        B = V @ G @ _sqrtm_spd(R)
        if is_reachable(A, B):
            return A, B, R


def similar_jordan_example(rng):
    """The Jordan-structured counterexample problem under a random similarity."""
    A0 = np.array([[0.5, 0, 0, 0], [0, 2.0, 0, 0], [1.0, 0, 0.5, 0], [0, 1.0, 0, 2.0]])
    T = _well_conditioned(rng, 4, 10.0)
    Ti = np.linalg.inv(T)
    return Ti @ A0 @ T, Ti, np.eye(4)
