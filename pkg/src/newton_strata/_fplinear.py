"""Dense linear algebra over a prime field F_p (numpy int64, values in [0, p))."""

from __future__ import annotations

import numpy as np


def _inv_mod(a: int, p: int) -> int:
    return pow(int(a), p - 2, p)


def row_reduce(M: np.ndarray, p: int, ncols: int | None = None):
    """Reduced row echelon form of ``M`` mod p, pivoting only in the first ``ncols`` columns.

    Returns ``(R, pivots)`` with ``R`` a new array.
    """
    R = np.array(M, dtype=np.int64) % p
    rows, cols = R.shape
    ncols = cols if ncols is None else ncols
    pivots = []
    r = 0
    for c in range(ncols):
        if r == rows:
            break
        nz = np.flatnonzero(R[r:, c])
        if nz.size == 0:
            continue
        k = r + int(nz[0])
        if k != r:
            R[[r, k]] = R[[k, r]]
        if R[r, c] != 1:
            R[r] = R[r] * _inv_mod(R[r, c], p) % p
        others = np.flatnonzero(R[:, c])
        others = others[others != r]
        if others.size:
            R[others] = (R[others] - np.outer(R[others, c], R[r])) % p
        pivots.append(c)
        r += 1
    return R, pivots


def solve(A: np.ndarray, y: np.ndarray, p: int):
    """One solution of ``A x = y`` mod p, or None when inconsistent."""
    A = np.asarray(A, dtype=np.int64)
    rows, cols = A.shape
    aug = np.concatenate([A % p, (np.asarray(y, dtype=np.int64) % p).reshape(-1, 1)], axis=1)
    R, piv = row_reduce(aug, p, ncols=cols)
    rank = len(piv)
    if R[rank:, cols].any():
        return None
    x = np.zeros(cols, dtype=np.int64)
    for i, c in enumerate(piv):
        x[c] = R[i, cols]
    return x


def nullspace(A: np.ndarray, p: int) -> np.ndarray:
    """Basis of the right kernel of ``A`` mod p, as rows."""
    A = np.asarray(A, dtype=np.int64)
    cols = A.shape[1]
    R, piv = row_reduce(A, p)
    free = [c for c in range(cols) if c not in set(piv)]
    basis = np.zeros((len(free), cols), dtype=np.int64)
    for k, f in enumerate(free):
        basis[k, f] = 1
        for i, c in enumerate(piv):
            basis[k, c] = (-R[i, f]) % p
    return basis


def span_basis(vectors: np.ndarray, p: int) -> np.ndarray:
    """Row-echelon basis of the row span of ``vectors``."""
    V = np.asarray(vectors, dtype=np.int64)
    if V.size == 0:
        return V.reshape(0, V.shape[1] if V.ndim == 2 else 0)
    R, piv = row_reduce(V, p)
    return R[:len(piv)]


def rank(M: np.ndarray, p: int) -> int:
    return len(row_reduce(M, p)[1])


def in_span(basis: np.ndarray, v: np.ndarray, p: int) -> bool:
    if basis.shape[0] == 0:
        return not np.asarray(v).any()
    return rank(np.vstack([basis, v]), p) == rank(basis, p)
