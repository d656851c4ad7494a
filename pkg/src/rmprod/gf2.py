"""Dense linear algebra over GF(2) on numpy uint8 arrays.

Matrices are 2-D arrays of dtype uint8 holding 0/1 entries, vectors are
1-D.  Nothing in here knows about codes; it is the elimination plumbing
the rest of the package leans on.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "as_bits",
    "matmul",
    "kron",
    "rref",
    "rank",
    "inverse",
    "nullspace",
    "in_row_space",
]


def as_bits(a) -> np.ndarray:
    """Coerce ``a`` to a uint8 array and check every entry is 0 or 1."""
    out = np.asarray(a)
    if out.dtype != np.uint8:
        out = out.astype(np.uint8)
    if out.size and out.max() > 1:
        raise ValueError("entries must be 0 or 1")
    return out


def matmul(a, b) -> np.ndarray:
    """Matrix product over GF(2).

    Runs through float64 BLAS, which is exact as long as the inner
    dimension stays below 2**53; everything in this package is orders of
    magnitude smaller.
    """
    a = as_bits(a)
    b = as_bits(b)
    if a.shape[-1] != b.shape[0]:
        raise ValueError(f"shape mismatch: {a.shape} @ {b.shape}")
    prod = a.astype(np.float64) @ b.astype(np.float64)
    return (prod.astype(np.int64) & 1).astype(np.uint8)


def kron(a, b) -> np.ndarray:
    """Kronecker product of 0/1 matrices (or vectors) over GF(2)."""
    return np.kron(as_bits(a), as_bits(b))


def rref(m) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form.

    Returns the reduced matrix and the list of pivot columns.  Row
    operations are vectorised: one XOR broadcast per pivot clears the
    whole column.
    """
    m = as_bits(m).copy()
    rows, cols = m.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        hits = np.nonzero(m[r:, c])[0]
        if hits.size == 0:
            continue
        p = r + hits[0]
        if p != r:
            m[[r, p]] = m[[p, r]]
        others = np.nonzero(m[:, c])[0]
        others = others[others != r]
        if others.size:
            m[others] ^= m[r]
        pivots.append(c)
        r += 1
    return m, pivots


def rank(m) -> int:
    return len(rref(m)[1])


def inverse(m) -> np.ndarray:
    """Inverse of a square GF(2) matrix; raises if singular."""
    m = as_bits(m)
    k = m.shape[0]
    if m.shape != (k, k):
        raise ValueError("matrix must be square")
    aug = np.concatenate([m, np.eye(k, dtype=np.uint8)], axis=1)
    red, pivots = rref(aug)
    if pivots != list(range(k)):
        raise ValueError("matrix is singular over GF(2)")
    return red[:, k:].copy()


def nullspace(m) -> np.ndarray:
    """Basis of the right nullspace, one vector per row.

    For a generator matrix this is a parity-check matrix.  Returns a
    (n - rank, n) array; the zero-dimensional case gives an empty array
    with shape (0, n).
    """
    m = as_bits(m)
    n = m.shape[1]
    red, pivots = rref(m)
    free = [c for c in range(n) if c not in pivots]
    basis = np.zeros((len(free), n), dtype=np.uint8)
    for i, f in enumerate(free):
        basis[i, f] = 1
        for row, p in enumerate(pivots):
            basis[i, p] = red[row, f]
    if basis.size and matmul(m, basis.T).any():
        raise AssertionError("nullspace construction failed")
    return basis


def in_row_space(m, v) -> bool:
    """True iff vector ``v`` lies in the row space of ``m``."""
    m = as_bits(m)
    v = as_bits(v).reshape(1, -1)
    return rank(np.concatenate([m, v], axis=0)) == rank(m)
