"""GF(2) linear algebra on uint8 matrices."""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np


def to_gf2(matrix: np.ndarray) -> np.ndarray:
    """Copy of the input reduced mod 2 as uint8."""
    return np.array(matrix, dtype=np.uint8) % 2


@dataclass(frozen=True)
class RowReduceResult:
    """Reduced row echelon form and the pivot bookkeeping.

    Attributes:
        matrix: Fully reduced matrix (zeros above and below every pivot).
        rank: Number of pivots.
        pivots: Pivot column of each of the first ``rank`` rows.
        transform: Row operations applied, so ``transform @ input == matrix``.
    """

    matrix: np.ndarray
    rank: int
    pivots: Tuple[int, ...]
    transform: np.ndarray


def gf2_row_reduce(matrix: np.ndarray) -> RowReduceResult:
    """Gauss-Jordan elimination over GF(2)."""
    mat = to_gf2(matrix)
    if mat.ndim != 2:
        raise ValueError("GF(2) row reduction needs a 2-D matrix")
    m, n = mat.shape
    transform = np.eye(m, dtype=np.uint8)
    pivots = []
    row = 0
    for col in range(n):
        if row == m:
            break
        candidates = np.flatnonzero(mat[row:, col]) + row
        if candidates.size == 0:
            continue
        pivot = int(candidates[0])
        if pivot != row:
            mat[[row, pivot]] = mat[[pivot, row]]
            transform[[row, pivot]] = transform[[pivot, row]]
        others = np.flatnonzero(mat[:, col])
        others = others[others != row]
        if others.size:
            mat[others] ^= mat[row]
            transform[others] ^= transform[row]
        pivots.append(col)
        row += 1
    return RowReduceResult(mat, row, tuple(pivots), transform)


def gf2_rank(matrix: np.ndarray) -> int:
    """Rank over GF(2)."""
    return gf2_row_reduce(matrix).rank


def gf2_solve(matrix: np.ndarray, vector: np.ndarray) -> Optional[np.ndarray]:
    """Find x with ``matrix @ x == vector`` (mod 2), or None if inconsistent.

    Free variables are set to zero.
    """
    mat = to_gf2(matrix)
    vec = to_gf2(vector).reshape(-1)
    reduced = gf2_row_reduce(mat)
    rhs = (reduced.transform.astype(np.int64) @ vec) % 2
    if np.any(rhs[reduced.rank :]):
        return None
    solution = np.zeros(mat.shape[1], dtype=np.uint8)
    for row, col in enumerate(reduced.pivots):
        solution[col] = rhs[row]
    return solution


def gf2_inverse(matrix: np.ndarray) -> np.ndarray:
    """Inverse of a square invertible matrix over GF(2)."""
    mat = to_gf2(matrix)
    if mat.shape[0] != mat.shape[1]:
        raise ValueError("Only square matrices have an inverse")
    reduced = gf2_row_reduce(mat)
    if reduced.rank != mat.shape[0]:
        raise ValueError("Matrix is singular over GF(2)")
    return reduced.transform


def gf2_matmul(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Matrix product mod 2."""
    return (to_gf2(left).astype(np.int64) @ to_gf2(right).astype(np.int64) % 2).astype(
        np.uint8
    )


def symplectic_inner(x1: np.ndarray, z1: np.ndarray, x2: np.ndarray, z2: np.ndarray) -> int:
    """Symplectic product of two Pauli bit vectors (0 when they commute)."""
    return int((np.dot(x1.astype(np.int64), z2) + np.dot(z1.astype(np.int64), x2)) % 2)
