"""Small dense real-matrix helpers shared by every scheme.

All routines operate on 2-D float64 numpy arrays. They are pure functions.
"""

import numpy as np

from .errors import DimensionMismatch, RankDeficient, SingularMatrix

__all__ = ["invert", "solve_least_squares", "condition_number", "is_near_singular"]

SINGULAR_RTOL = 1e-12
RANK_RTOL = 1e-10


def _as_matrix(m):
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.size == 0:
        raise DimensionMismatch(f"expected a nonempty 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def _det_scale(a):
    # product of row max-norms bounds |det| from above (Hadamard-type scale)
    return float(np.prod(np.max(np.abs(a), axis=1)))


def is_near_singular(m) -> bool:
    """Return True when ``|det(m)|`` falls below the relative singularity guard."""
    a = _as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"matrix must be square, got {a.shape}")
    scale = _det_scale(a)
    if scale == 0.0:
        return True
    return abs(np.linalg.det(a)) < SINGULAR_RTOL * scale


def invert(m) -> np.ndarray:
    """Inverse of a square real matrix.

    Raises
    ------
    SingularMatrix
        If ``|det(m)| < 1e-12 * prod_i max_j |m_ij|``.
    """
    a = _as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"matrix must be square, got {a.shape}")
    if is_near_singular(a):
        raise SingularMatrix("matrix is numerically singular")
    return np.linalg.inv(a)


def solve_least_squares(a, y) -> np.ndarray:
    """Minimize ``||a x - y||_2``.

    Parameters
    ----------
    a : array_like, shape (n, k)
        Tall or square coefficient matrix with full column rank.
    y : array_like, shape (n,) or (n, r)
        Right-hand side. Several right-hand sides can be solved at once by
        stacking them as columns.

    Returns
    -------
    x : ndarray, shape (k,) or (k, r)

    Raises
    ------
    RankDeficient
        If any singular value is below ``1e-10`` times the largest.
    """
    a = _as_matrix(a)
    y = np.asarray(y, dtype=float)
    n, k = a.shape
    if n < k:
        raise DimensionMismatch(f"system is underdetermined ({n} rows < {k} cols)")
    if y.shape[0] != n or y.ndim > 2:
        raise DimensionMismatch(f"rhs shape {y.shape} does not match {n} rows")
    x, _, rank, sv = np.linalg.lstsq(a, y, rcond=RANK_RTOL)
    if rank < k:
        raise RankDeficient(
            f"numerical rank {rank} < {k} columns (smallest/largest singular value "
            f"{sv[-1] / sv[0]:.3e})"
        )
    return x


def condition_number(a) -> float:
    """Ratio of largest to smallest singular value (``inf`` if the smallest is < 1e-300)."""
    a = _as_matrix(a)
    sv = np.linalg.svd(a, compute_uv=False)
    if sv[-1] < 1e-300:
        return float("inf")
    return float(sv[0] / sv[-1])
