"""Reference schemes sharing the :class:`SchemeTranscript` output.

* ``run_zf_ready``: K = M = 2, F = 1; coded computations are built from the
  channel of the slot that will carry them, so interference is zero-forced
  with load pair (1, 1). This is the non-universal control.
* ``run_ain22``: K = M = 2, F = 3; channel-free coded inputs, two slots per
  function and half-block, load pair (1, 4/3).
* ``run_tdma``: uncoded computation, one output per slot, load pair (1, K).
* ``run_partitioned_ucec``: UCEC on arbitrary K, M by serving user groups of
  size at most M one after another.
"""

from __future__ import annotations

import numpy as np

from . import directions
from .channel import draw_channel, transmit
from .errors import BlockSizeMismatch, ConfigInvalid, NearSingularEffectiveGain
from .model import InputBlock, LinearFunctionFamily, SystemConfig
from .numerics import is_near_singular, solve_least_squares
from .transcript import SchemeTranscript, power_factor
from .ucec import run_ucec

__all__ = [
    "run_zf_ready",
    "run_ain22",
    "run_tdma",
    "run_partitioned_ucec",
    "partition_sizes",
    "AIN22_FREE_DIRECTION",
]

AIN22_FREE_DIRECTION = np.array([1.0, 1.0])


def _require_two_by_two(cfg, block, F, scheme):
    if cfg.users_K != 2 or cfg.nodes_M != 2:
        raise ConfigInvalid(f"{scheme} requires K = M = 2, got K={cfg.users_K}, M={cfg.nodes_M}")
    if block.users != 2 or block.block_length != F:
        raise BlockSizeMismatch(
            f"{scheme} needs 2 users x F={F} inputs, got {block.users} x {block.block_length}"
        )


def zf_ready_coded_inputs(block: InputBlock, channel) -> np.ndarray:
    """Coded inputs of shape (2, T, Q); slot ``t`` uses the gains of slot ``t``."""
    d1, d2 = block.vectors[0, 0], block.vectors[1, 0]
    h = channel.gains
    L1 = -h[:, 1, 1, None] * d1 + h[:, 0, 1, None] * d2
    L2 = h[:, 1, 0, None] * d1 - h[:, 0, 0, None] * d2
    return np.stack([L1, L2])


def run_zf_ready(cfg: SystemConfig, fam: LinearFunctionFamily, block: InputBlock,
                 channel_rng, noise_rng=None, noiseless: bool = False,
                 channel=None) -> SchemeTranscript:
    """Channel-aware coded computing over T = B slots.

    Slot ``t`` carries function ``t``. With a single power factor over the
    block, user ``k`` receives ``-gamma * det H(t) * phi_t(d_k)`` plus noise.
    """
    _require_two_by_two(cfg, block, 1, "zf-ready")
    B = fam.n_functions
    if channel is None:
        channel = draw_channel(2, 2, B, channel_rng)
    for t in range(B):
        if is_near_singular(channel.H(t)):
            raise NearSingularEffectiveGain(f"slot {t} has a near-singular channel")

    # computation phase: needs the channel in advance
    coded = zf_ready_coded_inputs(block, channel)
    A = fam.dataset.matrix_A
    s = np.einsum("mtq,tq->tm", coded, A)

    gamma = power_factor(s, cfg.power_P)
    X = gamma * s
    Y = transmit(channel, X, noise_rng, noiseless=noiseless)
    gain = -gamma * np.linalg.det(channel.gains)
    decoded = (Y / gain[:, None]).T.reshape(2, 1, B)

    return SchemeTranscript(
        scheme="zf-ready",
        users=2,
        block_length=1,
        outputs=B,
        computed_functions=s.size,
        slots=B,
        decoded=decoded,
        X=X,
        Y=Y,
        gamma=[gamma],
        power_blocks=[(0, B)],
        compute_artifacts={"coded_inputs": coded, "coded_results": s.T},
        diagnostics={"effective_gain": gain.tolist(), "channel_redraws": channel.redraws},
        channel=channel,
    )


def ain22_coded_inputs(block: InputBlock) -> np.ndarray:
    """Coded inputs for both half-blocks, shape (2 halves, 3, Q).

    Per half the rows are node 1's ``P1`` and ``P2 + S`` followed by node 2's
    ``P1 + S``, where ``P1, P2`` are the two inputs served to the primary user
    and ``S`` the one input of the secondary user. The second half swaps the
    user roles.
    """
    d = block.vectors
    halves = []
    for P1, P2, S in ((d[0, 0], d[0, 1], d[1, 0]), (d[1, 1], d[1, 2], d[0, 2])):
        halves.append(np.stack([P1, P2 + S, P1 + S]))
    return np.stack(halves)


# (primary user, primary block indices, secondary user, secondary block index)
_AIN22_ROLES = ((0, (0, 1), 1, 0), (1, (1, 2), 0, 2))


def run_ain22(cfg: SystemConfig, fam: LinearFunctionFamily, block: InputBlock,
              channel_rng, noise_rng=None, noiseless: bool = False,
              channel=None) -> SchemeTranscript:
    """Two-user scheme with F = 3 and communication load 4/3.

    For every half and function, node 1 sends ``v11 s^(1) + v12 s^(2)`` and
    node 2 sends ``v2 s^(1)`` over two slots, with ``v2 = (1, 1)``,
    ``v12 = -H11^-1 H12 v2`` and ``v11 = -H21^-1 H22 v2`` (diagonal per-slot
    gains, user indices in primary/secondary role order). The primary user
    solves a 2x2 system for its two outputs; the secondary user solves a 2x2
    system for its output and a nuisance term.
    """
    _require_two_by_two(cfg, block, 3, "ain22")
    B = fam.n_functions
    T = 4 * B
    if channel is None:
        channel = draw_channel(2, 2, T, channel_rng)
    elif channel.slots != T:
        raise ValueError(f"replayed channel has {channel.slots} slots, expected {T}")

    coded = ain22_coded_inputs(block)
    results = fam.apply_all(coded)  # (half, 3, B)
    v2 = AIN22_FREE_DIRECTION

    decoded = np.empty((2, 3, B))
    X = np.empty((T, 2))
    Y = np.empty((T, 2))
    gammas, bounds, leaks = [], [], []
    for half, (pu, (pi1, pi2), su, si) in enumerate(_AIN22_ROLES):
        for b in range(B):
            start = (half * B + b) * 2
            sl = slice(start, start + 2)
            G = channel.gains[sl][:, [pu, su], :]  # rows reordered to (primary, secondary)
            v12 = -G[:, 0, 1] * v2 / G[:, 0, 0]
            v11 = -G[:, 1, 1] * v2 / G[:, 1, 0]
            s1, s2, s3 = results[half, :, b]
            U = np.column_stack([v11 * s1 + v12 * s2, v2 * s3])
            gamma = power_factor(U, cfg.power_P)
            X[sl] = gamma * U
            Y[sl] = transmit(channel.window(start, start + 2), X[sl], noise_rng, noiseless)

            primary = gamma * np.column_stack([G[:, 0, 0] * v11 + G[:, 0, 1] * v2, G[:, 0, 0] * v12])
            secondary = gamma * np.column_stack([G[:, 1, 0] * v12, G[:, 1, 0] * v12 + G[:, 1, 1] * v2])
            y1, y2 = solve_least_squares(primary, Y[sl, pu])
            _, y3 = solve_least_squares(secondary, Y[sl, su])
            decoded[pu, pi1, b] = y1
            decoded[pu, pi2, b] = y2
            decoded[su, si, b] = y3

            gammas.append(gamma)
            bounds.append((start, start + 2))
            leaks.append((gamma * (G[:, 1, 0] * v11 + G[:, 1, 1] * v2)).tolist())

    return SchemeTranscript(
        scheme="ain22",
        users=2,
        block_length=3,
        outputs=B,
        computed_functions=results.size,
        slots=T,
        decoded=decoded,
        X=X,
        Y=Y,
        gamma=gammas,
        power_blocks=bounds,
        compute_artifacts={"coded_inputs": coded, "coded_results": results},
        diagnostics={"secondary_leak": leaks, "channel_redraws": channel.redraws},
        channel=channel,
    )


def run_tdma(cfg: SystemConfig, fam: LinearFunctionFamily, block: InputBlock,
             channel_rng, noise_rng=None, noiseless: bool = False,
             channel=None) -> SchemeTranscript:
    """Uncoded outputs sent one per slot, ordered by (user, block index, function).

    User ``k``'s outputs are computed and sent by node ``k % M``.
    """
    K, M = cfg.users_K, cfg.nodes_M
    if block.users != K:
        raise BlockSizeMismatch(f"block has {block.users} users, config has {K}")
    F, B = block.block_length, fam.n_functions
    T = K * F * B
    if channel is None:
        channel = draw_channel(K, M, T, channel_rng)
    elif channel.slots != T:
        raise ValueError(f"replayed channel has {channel.slots} slots, expected {T}")

    outputs = fam.apply_all(block.vectors)  # uncoded computation, (K, F, B)
    user = np.repeat(np.arange(K), F * B)
    node = user % M
    t = np.arange(T)
    U = np.zeros((T, M))
    U[t, node] = outputs.reshape(-1)
    gamma = power_factor(U, cfg.power_P)
    X = gamma * U
    Y = transmit(channel, X, noise_rng, noiseless=noiseless)
    gain = gamma * channel.gains[t, user, node]
    decoded = (Y[t, user] / gain).reshape(K, F, B)

    return SchemeTranscript(
        scheme="tdma",
        users=K,
        block_length=F,
        outputs=B,
        computed_functions=outputs.size,
        slots=T,
        decoded=decoded,
        X=X,
        Y=Y,
        gamma=[gamma],
        power_blocks=[(0, T)],
        compute_artifacts={"coded_results": outputs},
        diagnostics={"channel_redraws": channel.redraws},
        channel=channel,
    )


def partition_sizes(K: int, M: int) -> list[int]:
    """User-group sizes: ``ceil(K/M)`` groups of M, the last one holding the remainder."""
    if M >= K:
        return [K]
    sizes = [M] * (K // M)
    if K % M:
        sizes.append(K % M)
    return sizes


def run_partitioned_ucec(cfg: SystemConfig, fam: LinearFunctionFamily, block: InputBlock,
                         channel_rng, noise_rng=None, noiseless: bool = False) -> SchemeTranscript:
    """UCEC for arbitrary K and M.

    Users are split into consecutive groups (see :func:`partition_sizes`) and
    each group of size ``m`` is served by nodes ``0..m-1``. The block length
    is ``F = N**(s*s)`` with ``s = min(K, M)``; a group of size ``m`` runs
    UCEC ``F / N**(m*m)`` times to cover its users' whole block. Groups run
    one after another, so ``X`` has one column per node in ``0..s-1`` and
    ``Y`` is zero for users outside the active group.
    """
    K, M, N = cfg.users_K, cfg.nodes_M, cfg.direction_N
    sizes = partition_sizes(K, M)
    s = max(sizes)
    F = directions.lattice_size(s, N)
    if block.users != K or block.block_length != F:
        raise BlockSizeMismatch(
            f"partitioned UCEC with K={K}, M={M}, N={N} needs {K} users x F={F} inputs, "
            f"got {block.users} x {block.block_length}"
        )

    decoded = np.empty((K, F, fam.n_functions))
    X, Y, gammas, conds, bounds = [], [], [], [], []
    computed = slots = 0
    first = 0
    for m in sizes:
        users = list(range(first, first + m))
        first += m
        Fm = directions.lattice_size(m, N)
        sub_cfg = cfg.replace(users_K=m, nodes_M=m)
        for rep in range(F // Fm):
            sub_block = InputBlock(block.vectors[users, rep * Fm:(rep + 1) * Fm])
            tr = run_ucec(sub_cfg, fam, sub_block, channel_rng, noise_rng, noiseless)
            decoded[users, rep * Fm:(rep + 1) * Fm] = tr.decoded
            x = np.zeros((tr.slots, s))
            x[:, :m] = tr.X
            y = np.zeros((tr.slots, K))
            y[:, users] = tr.Y
            X.append(x)
            Y.append(y)
            gammas.extend(tr.gamma)
            conds.extend(tr.condition_numbers)
            bounds.extend((a + slots, b + slots) for a, b in tr.power_blocks)
            computed += tr.computed_functions
            slots += tr.slots

    return SchemeTranscript(
        scheme="partitioned-ucec",
        users=K,
        block_length=F,
        outputs=fam.n_functions,
        computed_functions=computed,
        slots=slots,
        decoded=decoded,
        X=np.concatenate(X),
        Y=np.concatenate(Y),
        gamma=gammas,
        power_blocks=bounds,
        condition_numbers=conds,
        diagnostics={"N": N, "partitions": sizes},
    )
