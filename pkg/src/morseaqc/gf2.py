"""Dense GF(2) linear algebra.

Row echelon form, rank and matrix product over the two-element field,
done with XOR row operations on numpy uint8 arrays.
"""

from __future__ import annotations

import numpy as np


def gf2_matrix(M) -> np.ndarray:
    """Coerce to a uint8 matrix with entries reduced mod 2."""
    A = np.atleast_2d(np.asarray(M, dtype=np.int64)) % 2
    return A.astype(np.uint8)


def gf2_row_echelon(M) -> tuple[np.ndarray, list[int]]:
    """Row-reduce a binary matrix over GF(2).

    Returns (R, pivot_cols) where R is the echelon form and pivot_cols
    lists the pivot column indices; len(pivot_cols) is the GF(2) rank.
    """
    R = gf2_matrix(M).copy()
    m, n = R.shape
    pivot_cols: list[int] = []
    pivot_row = 0
    for col in range(n):
        if pivot_row >= m:
            break
        rows = np.nonzero(R[pivot_row:, col])[0]
        if rows.size == 0:
            continue
        found = pivot_row + int(rows[0])
        if found != pivot_row:
            R[[pivot_row, found]] = R[[found, pivot_row]]
        below = np.nonzero(R[pivot_row + 1:, col])[0] + pivot_row + 1
        R[below] ^= R[pivot_row]
        pivot_cols.append(col)
        pivot_row += 1
    return R, pivot_cols


def gf2_rank(M) -> int:
    """GF(2) rank of a dense binary matrix (0 for empty shapes)."""
    A = gf2_matrix(M)
    if A.size == 0:
        return 0
    _, pivots = gf2_row_echelon(A)
    return len(pivots)


def gf2_matmul(A, B) -> np.ndarray:
    """Matrix product over GF(2)."""
    A = gf2_matrix(A)
    B = gf2_matrix(B)
    if A.shape[1] != B.shape[0]:
        raise ValueError(f"shape mismatch: {A.shape} @ {B.shape}")
    if A.size == 0 or B.size == 0:
        return np.zeros((A.shape[0], B.shape[1]), dtype=np.uint8)
    return (A.astype(np.int64) @ B.astype(np.int64) % 2).astype(np.uint8)
