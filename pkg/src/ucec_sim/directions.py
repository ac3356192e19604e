"""Index algebra for the transmit-direction lattice {0, ..., bound-1}^(K*K).

A direction is a tuple of K*K non-negative integers laid out row-major by
user then node: ``(p_11, p_12, ..., p_1K, p_21, ..., p_KK)``. Lattices are
enumerated in lexicographic order, and that order is the flat-index
convention shared by input labelling, decoder columns and coded results.
"""

from __future__ import annotations

import itertools

import numpy as np

from .errors import SizeOverflow

__all__ = [
    "OUT_OF_LATTICE",
    "DEFAULT_SIZE_CAP",
    "lattice_size",
    "enumerate_lattice",
    "flat_index",
    "coord",
    "decrement",
    "shift_table",
]

DEFAULT_SIZE_CAP = 10**6

#: Returned by :func:`decrement` when the shifted index leaves the N-lattice.
OUT_OF_LATTICE = None


def lattice_size(K: int, bound: int) -> int:
    return bound ** (K * K)


def _check(K, bound, cap):
    if K < 1 or bound < 1:
        raise ValueError(f"K and bound must be >= 1, got K={K}, bound={bound}")
    size = lattice_size(K, bound)
    if cap is not None and size > cap:
        raise SizeOverflow(f"lattice {bound}^{K * K} = {size} exceeds cap {cap}")
    return size


def enumerate_lattice(K: int, bound: int, cap: int | None = DEFAULT_SIZE_CAP) -> np.ndarray:
    """All directions of ``{0..bound-1}^(K*K)`` in lexicographic order.

    Returns
    -------
    ndarray of int, shape (bound**(K*K), K*K)
        Row ``j`` is the direction with flat index ``j``.
    """
    _check(K, bound, cap)
    rows = list(itertools.product(range(bound), repeat=K * K))
    return np.array(rows, dtype=np.int64).reshape(len(rows), K * K)


def coord(K: int, k: int, m: int) -> int:
    """Position of ``p_km`` inside a direction tuple (zero-based k, m)."""
    return k * K + m


def flat_index(p, bound: int) -> int:
    """Lexicographic rank of ``p`` inside the bound-lattice (mixed radix, base ``bound``)."""
    idx = 0
    for c in p:
        if not 0 <= c < bound:
            raise ValueError(f"direction {tuple(p)} is outside the {bound}-lattice")
        idx = idx * bound + int(c)
    return idx


def decrement(p, k: int, m: int, N: int):
    """Lower coordinate ``(k, m)`` of ``p`` by one.

    ``p`` is taken from the (N+1)-lattice. The result is returned as a tuple
    when it lies in the N-lattice; when any coordinate equals -1 or N the
    referenced input is defined to be zero and :data:`OUT_OF_LATTICE` is
    returned instead.
    """
    K = int(round(len(p) ** 0.5))
    if K * K != len(p):
        raise ValueError(f"direction length {len(p)} is not a perfect square")
    q = list(int(c) for c in p)
    q[coord(K, k, m)] -= 1
    if any(c < 0 or c >= N for c in q):
        return OUT_OF_LATTICE
    return tuple(q)


def shift_table(K: int, N: int, cap: int | None = DEFAULT_SIZE_CAP) -> np.ndarray:
    """Vectorised :func:`decrement` over the whole (N+1)-lattice.

    Returns
    -------
    ndarray of int, shape ((N+1)**(K*K), K, K)
        Entry ``[j, k, m]`` is the N-lattice flat index of the ``j``-th
        (N+1)-lattice direction decremented at ``(k, m)``, or -1 when out of
        lattice.
    """
    outer = enumerate_lattice(K, N + 1, cap)
    n_outer = outer.shape[0]
    weights = N ** np.arange(K * K - 1, -1, -1, dtype=np.int64)
    table = np.full((n_outer, K, K), -1, dtype=np.int64)
    for k in range(K):
        for m in range(K):
            shifted = outer.copy()
            shifted[:, coord(K, k, m)] -= 1
            ok = np.all((shifted >= 0) & (shifted < N), axis=1)
            table[ok, k, m] = shifted[ok] @ weights
    return table
