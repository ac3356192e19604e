"""Common record produced by every scheme run."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

__all__ = ["SchemeTranscript", "power_factor"]


def power_factor(U, P: float) -> float:
    """Scale ``gamma`` so that the busiest node's average power over the block is P.

    ``U`` holds the unnormalised symbols with shape (slots, nodes).
    """
    U = np.asarray(U, dtype=float)
    peak = float(np.max(np.mean(U**2, axis=0)))
    if peak == 0.0:
        return float(np.sqrt(P))
    return float(np.sqrt(P / peak))


@dataclass
class SchemeTranscript:
    """Everything a scheme computed, sent and decoded for one block.

    ``decoded`` has shape (K, F, B) and is directly comparable with
    :func:`ucec_sim.model.ground_truth`. ``X`` and ``Y`` hold all transmitted
    and received symbols, shape (T, M) and (T, K); ``power_blocks`` lists the
    ``(start, stop)`` slot ranges that share one power factor ``gamma``.
    """

    scheme: str
    users: int
    block_length: int
    outputs: int
    computed_functions: int
    slots: int
    decoded: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    gamma: list = field(default_factory=list)
    power_blocks: list = field(default_factory=list)
    condition_numbers: list = field(default_factory=list)
    compute_artifacts: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    channel: object = None

    @property
    def computation_load(self) -> Fraction:
        return Fraction(self.computed_functions, self.block_length * self.users * self.outputs)

    @property
    def communication_load(self) -> Fraction:
        return Fraction(self.slots, self.block_length * self.outputs)

    def block_powers(self) -> np.ndarray:
        """Average power per node in each power block, shape (n_blocks, M)."""
        return np.array([np.mean(self.X[a:b] ** 2, axis=0) for a, b in self.power_blocks])

    def to_dict(self) -> dict:
        out = {
            "scheme": self.scheme,
            "K": self.users,
            "F": self.block_length,
            "B": self.outputs,
            "computed_functions": self.computed_functions,
            "slots": self.slots,
            "gamma": [float(g) for g in self.gamma],
            "power_blocks": [list(map(int, pb)) for pb in self.power_blocks],
            "condition_numbers": [float(c) for c in self.condition_numbers],
            "X": self.X.tolist(),
            "Y": self.Y.tolist(),
            "decoded": self.decoded.tolist(),
        }
        out.update({k: np.asarray(v).tolist() for k, v in self.compute_artifacts.items()})
        return out

    def dump(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)
