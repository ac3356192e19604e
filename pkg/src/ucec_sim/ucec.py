"""Universal coded edge computing over K users and K edge nodes.

Input ``i`` of user ``k`` is the vector on the ``i``-th direction of the
N-lattice (lexicographic order, see :mod:`ucec_sim.directions`), so a block
holds ``F = N**(K*K)`` inputs per user.

Computation phase
    For every direction ``p`` of the (N+1)-lattice, node ``m`` forms the
    coded input ``L_m^p = sum_k d_k^(p - e_km)`` (terms that leave the
    N-lattice are zero) and evaluates every ``phi_b`` on it. No channel
    object is involved.

Communication phase
    For each ``b`` the nodes use ``d = (N+1)**(K*K)`` fresh slots. Node ``m``
    sends ``X_m(t) = gamma * sum_p Q(t)^p s_mb^p`` and the channel collapses
    the interference, leaving user ``k`` with
    ``Y_k(t) = gamma * sum_{p in N-lattice} Q(t)^p phi_b(d_k^p) + Z_k(t)``.
    Each user solves the resulting d x F system by least squares.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import directions
from .channel import CsiView, draw_channel, monomial_matrix, transmit
from .errors import BlockSizeMismatch, ConfigInvalid
from .model import InputBlock, LinearFunctionFamily, SystemConfig
from .numerics import condition_number, solve_least_squares
from .transcript import SchemeTranscript, power_factor

__all__ = [
    "ComputePhase",
    "CommBlock",
    "compute_phase",
    "communicate_phase",
    "decode",
    "run_ucec",
    "MUTATIONS",
]

# Deliberately broken transmitters, used as negative controls.
MUTATIONS = (None, "flip_exponent")
DECODERS = ("equilibrated", "ols")


@dataclass(frozen=True)
class ComputePhase:
    """Coded inputs and results held by the nodes after the computation phase.

    Attributes
    ----------
    coded_inputs : ndarray, shape (K, (N+1)**(K*K), Q)
        ``coded_inputs[m, j]`` is the coded input of node ``m`` on the
        ``j``-th (N+1)-lattice direction.
    coded_results : ndarray, shape (K, (N+1)**(K*K), B)
        ``phi_b`` applied to each coded input.
    """

    K: int
    N: int
    coded_inputs: np.ndarray
    coded_results: np.ndarray

    @property
    def computed_functions(self) -> int:
        return self.coded_results.size


@dataclass(frozen=True)
class CommBlock:
    X: np.ndarray
    Y: np.ndarray
    gamma: float


def compute_phase(cfg: SystemConfig, fam: LinearFunctionFamily, block: InputBlock) -> ComputePhase:
    K, N = cfg.users_K, cfg.direction_N
    if cfg.nodes_M != K:
        raise ConfigInvalid(f"UCEC needs K = M, got K={K}, M={cfg.nodes_M}")
    F = directions.lattice_size(K, N)
    if block.block_length != F or block.users != K:
        raise BlockSizeMismatch(
            f"UCEC with K={K}, N={N} needs {K} users x F={F} inputs, "
            f"got {block.users} x {block.block_length}"
        )
    table = directions.shift_table(K, N)
    d = block.vectors
    # pad with a zero vector so that out-of-lattice index -1 selects zeros
    padded = np.concatenate([d, np.zeros((K, 1, d.shape[2]))], axis=1)
    coded = np.zeros((K, table.shape[0], d.shape[2]))
    for m in range(K):
        for k in range(K):
            coded[m] += padded[k, table[:, k, m]]
    results = fam.apply_all(coded)
    coded.setflags(write=False)
    results.setflags(write=False)
    return ComputePhase(K=K, N=N, coded_inputs=coded, coded_results=results)


def communicate_phase(phase: ComputePhase, csi: CsiView, b: int, power: float,
                      noise_rng=None, noiseless: bool = False,
                      mutation: str | None = None) -> CommBlock:
    """Send function ``b`` over the ``d`` slots of ``csi``."""
    if mutation not in MUTATIONS:
        raise ValueError(f"unknown mutation {mutation!r}")
    K, N = phase.K, phase.N
    outer = directions.enumerate_lattice(K, N + 1)
    if csi.slots != outer.shape[0]:
        raise ValueError(f"need {outer.shape[0]} CSI slots, got {csi.slots}")
    exponents = -outer if mutation == "flip_exponent" else outer
    weights = monomial_matrix(csi, exponents)
    U = weights @ phase.coded_results[:, :, b].T
    gamma = power_factor(U, power)
    X = gamma * U
    Y = transmit(csi.channel, X, noise_rng, noiseless=noiseless)
    return CommBlock(X=X, Y=Y, gamma=gamma)


def decoding_matrix(csi: CsiView, N: int, gamma: float) -> np.ndarray:
    """Coefficients ``gamma * Q(t)^p`` for p in the N-lattice, shape (d, N**(K*K))."""
    inner = directions.enumerate_lattice(csi.K, N)
    return gamma * monomial_matrix(csi, inner)


def decode(Y, csi: CsiView, gamma: float, N: int, decoder: str = "equilibrated"):
    """Least-squares estimates of ``phi_b(d_k^p)`` for every user and N-lattice direction.

    ``decoder="equilibrated"`` scales rows and then columns of the monomial
    system to unit norm before solving. This is a weighted least-squares fit
    that stays accurate up to N = 3, where the unweighted system is
    numerically rank deficient. ``decoder="ols"`` only scales columns and
    returns the ordinary least-squares fit, which has lower noise variance
    but loses accuracy quickly as N grows.

    Returns
    -------
    estimates : ndarray, shape (K, N**(K*K))
    cond : float
        Condition number of the scaled matrix that was solved.
    """
    if decoder not in DECODERS:
        raise ValueError(f"decoder must be one of {DECODERS}, got {decoder!r}")
    A = decoding_matrix(csi, N, gamma)
    Y = np.asarray(Y, dtype=float)
    if decoder == "equilibrated":
        row = 1.0 / np.linalg.norm(A, axis=1)
        A = A * row[:, None]
        Y = Y * row[:, None]
    col = 1.0 / np.linalg.norm(A, axis=0)
    As = A * col
    x = solve_least_squares(As, Y)
    return (x * col[:, None]).T, condition_number(As)


def run_ucec(cfg: SystemConfig, fam: LinearFunctionFamily, block: InputBlock,
             channel_rng, noise_rng=None, noiseless: bool = False,
             mutation: str | None = None, channel=None,
             decoder: str = "equilibrated") -> SchemeTranscript:
    """Run both phases for all B functions.

    A fresh window of ``d`` channel slots is drawn for each function. A
    pre-drawn ``channel`` with ``d * B`` slots can be passed instead of
    ``channel_rng`` to replay a trial.
    """
    phase = compute_phase(cfg, fam, block)
    K, N, B = cfg.users_K, cfg.direction_N, fam.n_functions
    d = directions.lattice_size(K, N + 1)
    if channel is None:
        channel = draw_channel(K, K, d * B, channel_rng)
    elif channel.slots != d * B:
        raise ValueError(f"replayed channel has {channel.slots} slots, expected {d * B}")

    decoded = np.empty((K, block.block_length, B))
    X, Y, gammas, conds, bounds = [], [], [], [], []
    for b in range(B):
        csi = CsiView(channel.window(b * d, (b + 1) * d))
        comm = communicate_phase(phase, csi, b, cfg.power_P, noise_rng, noiseless, mutation)
        est, cond = decode(comm.Y, csi, comm.gamma, N, decoder)
        decoded[:, :, b] = est
        X.append(comm.X)
        Y.append(comm.Y)
        gammas.append(comm.gamma)
        conds.append(cond)
        bounds.append((b * d, (b + 1) * d))

    return SchemeTranscript(
        scheme="ucec",
        users=K,
        block_length=block.block_length,
        outputs=B,
        computed_functions=phase.computed_functions,
        slots=d * B,
        decoded=decoded,
        X=np.concatenate(X),
        Y=np.concatenate(Y),
        gamma=gammas,
        power_blocks=bounds,
        condition_numbers=conds,
        compute_artifacts={
            "coded_inputs": phase.coded_inputs,
            "coded_results": np.transpose(phase.coded_results, (0, 2, 1)),
        },
        diagnostics={"N": N, "decoder": decoder, "channel_redraws": channel.redraws},
        channel=channel,
    )
