"""Time-varying real channel between M edge nodes and K users.

Gains ``h_km(t)`` are stored as ``gains[t, k, m]``. The communication phase
gets a :class:`CsiView` carrying ``B(t) = H(t)^-1``; following the usual
labelling, ``b_km(t)`` is entry ``(m, k)`` of ``H(t)^-1`` so that node ``m``
weights user ``k``'s results by ``b_km(t)``.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch
from .numerics import invert, is_near_singular

__all__ = [
    "ChannelRealization",
    "CsiView",
    "draw_channel",
    "transmit",
    "monomial_Q",
    "monomial_matrix",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ChannelRealization:
    gains: np.ndarray
    redraws: int = field(default=0, compare=False)

    def __post_init__(self):
        g = np.asarray(self.gains, dtype=float)
        if g.ndim != 3:
            raise DimensionMismatch(f"gains must have shape (T, K, M), got {g.shape}")
        if not np.all(np.isfinite(g)):
            raise ValueError("channel gains must be finite")
        g.setflags(write=False)
        object.__setattr__(self, "gains", g)

    @property
    def slots(self) -> int:
        return self.gains.shape[0]

    @property
    def users(self) -> int:
        return self.gains.shape[1]

    @property
    def nodes(self) -> int:
        return self.gains.shape[2]

    def H(self, t: int) -> np.ndarray:
        return self.gains[t]

    def window(self, start: int, stop: int) -> "ChannelRealization":
        """Slots ``start..stop-1`` as a new realization."""
        return ChannelRealization(self.gains[start:stop])

    def restrict(self, users, nodes) -> "ChannelRealization":
        return ChannelRealization(self.gains[:, list(users)][:, :, list(nodes)])

    def to_dict(self):
        T, K, M = self.gains.shape
        return {"T": T, "K": K, "M": M, "gains": self.gains.reshape(T, K * M).tolist()}

    @classmethod
    def from_dict(cls, data) -> "ChannelRealization":
        T, K, M = data["T"], data["K"], data["M"]
        return cls(np.asarray(data["gains"], dtype=float).reshape(T, K, M))

    def dump(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path) -> "ChannelRealization":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


class CsiView:
    """Channel knowledge handed to the communication phase (square K = M only)."""

    def __init__(self, channel: ChannelRealization):
        if channel.users != channel.nodes:
            raise DimensionMismatch(
                f"CSI inverse needs a square channel, got {channel.users}x{channel.nodes}"
            )
        self.channel = channel
        self.inverse = np.stack([invert(channel.H(t)) for t in range(channel.slots)])
        # b[t, k, m] = b_km(t) = (H(t)^-1)[m, k]
        self.b = np.ascontiguousarray(np.swapaxes(self.inverse, 1, 2))

    @property
    def slots(self) -> int:
        return self.channel.slots

    @property
    def K(self) -> int:
        return self.channel.users

    def b_flat(self) -> np.ndarray:
        """``b_km(t)`` for every slot, shape (T, K*K) in direction-coordinate order."""
        return self.b.reshape(self.slots, -1)


def draw_channel(K: int, M: int, T: int, rng: np.random.Generator) -> ChannelRealization:
    """Draw T slots of i.i.d. standard-normal gains.

    Square slots that fail the singularity guard are redrawn in place; the
    number of redraws is kept on the result.
    """
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    gains = rng.standard_normal((T, K, M))
    redraws = 0
    if K == M:
        for t in range(T):
            while is_near_singular(gains[t]):
                gains[t] = rng.standard_normal((K, M))
                redraws += 1
        if redraws:
            log.info("redrew %d near-singular channel slots", redraws)
    return ChannelRealization(gains, redraws=redraws)


def transmit(ch: ChannelRealization, X, noise_rng: np.random.Generator | None = None,
             noiseless: bool = False) -> np.ndarray:
    """Superpose node symbols over the channel.

    Parameters
    ----------
    ch : ChannelRealization
    X : array_like, shape (T, M)
        Symbol sent by each node in each slot.
    noise_rng : Generator
        Source of the unit-variance Gaussian receiver noise. Unused when
        ``noiseless`` is set.

    Returns
    -------
    Y : ndarray, shape (T, K)
    """
    X = np.asarray(X, dtype=float)
    if X.shape != (ch.slots, ch.nodes):
        raise DimensionMismatch(f"symbols have shape {X.shape}, expected {(ch.slots, ch.nodes)}")
    Y = np.einsum("tkm,tm->tk", ch.gains, X)
    if not noiseless:
        if noise_rng is None:
            raise ValueError("noise_rng is required unless noiseless=True")
        Y = Y + noise_rng.standard_normal(Y.shape)
    return Y


def monomial_Q(csi: CsiView, t: int, p) -> float:
    """``prod_{k,m} b_km(t) ** p_km`` with ``0 ** 0 == 1``."""
    p = np.asarray(p, dtype=np.int64)
    base = csi.b_flat()[t]
    if p.shape != base.shape:
        raise DimensionMismatch(f"direction has length {p.size}, expected {base.size}")
    return float(np.prod(np.power(base, p)))


def monomial_matrix(csi: CsiView, exponents) -> np.ndarray:
    """``Q(t)^p`` for every slot ``t`` and every row ``p`` of ``exponents``.

    Returns an array of shape (T, n_directions).
    """
    E = np.asarray(exponents, dtype=np.int64)
    base = csi.b_flat()
    out = np.ones((base.shape[0], E.shape[0]))
    for j in range(E.shape[1]):
        out *= np.power(base[:, j:j + 1], E[None, :, j])
    return out
