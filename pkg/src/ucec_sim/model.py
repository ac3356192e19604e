"""System configuration, datasets, input blocks and linear output functions.

Indices are zero-based throughout: user ``k`` in ``0..K-1``, node ``m`` in
``0..M-1``, function ``b`` in ``0..B-1`` and block position ``i`` in ``0..F-1``.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ConfigInvalid, DimensionMismatch

__all__ = [
    "SystemConfig",
    "Dataset",
    "InputBlock",
    "LinearFunctionFamily",
    "generate_dataset",
    "generate_inputs",
    "evaluate",
    "ground_truth",
]


@dataclass(frozen=True)
class SystemConfig:
    """K users, M edge nodes, B output functions of R^Q inputs.

    ``direction_N`` is only read by the coded schemes. The receiver noise
    variance is fixed at 1.
    """

    users_K: int
    nodes_M: int
    outputs_B: int
    input_dim_Q: int
    direction_N: int = 1
    power_P: float = 1.0
    seed: int = 0
    noise_variance: float = 1.0

    def __post_init__(self):
        for name in ("users_K", "nodes_M", "outputs_B", "input_dim_Q", "direction_N"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ConfigInvalid(f"{name} must be a positive integer, got {value!r}")
        if not self.power_P > 0:
            raise ConfigInvalid(f"power_P must be > 0, got {self.power_P!r}")
        if self.noise_variance != 1.0:
            raise ConfigInvalid("noise_variance is fixed at 1.0")

    def replace(self, **changes) -> "SystemConfig":
        return SystemConfig(**{**asdict(self), **changes})


@dataclass(frozen=True)
class Dataset:
    """Dataset matrix ``A`` of shape (B, Q) stored at every edge node."""

    matrix_A: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.matrix_A, dtype=float)
        if a.ndim != 2:
            raise DimensionMismatch(f"dataset matrix must be 2-D, got shape {a.shape}")
        a.setflags(write=False)
        object.__setattr__(self, "matrix_A", a)

    @property
    def shape(self):
        return self.matrix_A.shape

    def to_dict(self):
        return {"B": self.shape[0], "Q": self.shape[1], "A": self.matrix_A.tolist()}


@dataclass(frozen=True)
class InputBlock:
    """Block of F input vectors per user, stored as an array of shape (K, F, Q)."""

    vectors: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=float)
        if v.ndim != 3:
            raise DimensionMismatch(f"input block must have shape (K, F, Q), got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("input block has non-finite entries")
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    @property
    def users(self) -> int:
        return self.vectors.shape[0]

    @property
    def block_length(self) -> int:
        return self.vectors.shape[1]

    @property
    def dim(self) -> int:
        return self.vectors.shape[2]

    def to_dict(self):
        K, F, Q = self.vectors.shape
        return {"K": K, "F": F, "Q": Q, "d": self.vectors.tolist()}


class LinearFunctionFamily:
    """The B linear output functions ``phi_b(v) = a_b . v``.

    Parameters
    ----------
    dataset : Dataset
        Row ``b`` of ``dataset.matrix_A`` defines ``phi_b``.
    """

    def __init__(self, dataset: Dataset):
        self.dataset = dataset

    @property
    def n_functions(self) -> int:
        return self.dataset.shape[0]

    @property
    def input_dim(self) -> int:
        return self.dataset.shape[1]

    def __call__(self, b: int, v) -> float:
        return evaluate(self, b, v)

    def apply_all(self, vectors) -> np.ndarray:
        """Evaluate every function on every vector; the last axis of ``vectors`` is Q.

        Returns an array with the last axis replaced by B.
        """
        v = np.asarray(vectors, dtype=float)
        if v.shape[-1] != self.input_dim:
            raise DimensionMismatch(f"vectors have dim {v.shape[-1]}, expected {self.input_dim}")
        # einsum keeps one summation order for single and batched calls
        return np.einsum("...q,bq->...b", v, self.dataset.matrix_A)


def generate_dataset(cfg: SystemConfig, rng: np.random.Generator) -> Dataset:
    return Dataset(rng.standard_normal((cfg.outputs_B, cfg.input_dim_Q)))


def generate_inputs(cfg: SystemConfig, F: int, rng: np.random.Generator) -> InputBlock:
    """Draw F i.i.d. standard-normal input vectors per user."""
    if F < 1:
        raise ValueError(f"block length must be >= 1, got {F}")
    return InputBlock(rng.standard_normal((cfg.users_K, F, cfg.input_dim_Q)))


def evaluate(fam: LinearFunctionFamily, b: int, v) -> float:
    """Return ``phi_b(v)``, the inner product of ``v`` with row ``b`` of A."""
    if not 0 <= b < fam.n_functions:
        raise DimensionMismatch(f"function index {b} outside 0..{fam.n_functions - 1}")
    v = np.asarray(v, dtype=float)
    if v.shape != (fam.input_dim,):
        raise DimensionMismatch(f"vector has shape {v.shape}, expected ({fam.input_dim},)")
    return float(fam.apply_all(v)[b])


def ground_truth(fam: LinearFunctionFamily, block: InputBlock) -> np.ndarray:
    """Uncoded outputs ``y[k, i, b] = phi_b(d_k[i])``, shape (K, F, B)."""
    return fam.apply_all(block.vectors)


def dump_json(dataset: Dataset, block: InputBlock, path) -> None:
    """Write dataset and inputs as row-major nested lists."""
    with open(path, "w") as fh:
        json.dump({"dataset": dataset.to_dict(), "inputs": block.to_dict()}, fh)
