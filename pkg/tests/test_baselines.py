from fractions import Fraction

import numpy as np
import pytest

from conftest import make_instance, rel_err
from ucec_sim.baselines import (ain22_coded_inputs, partition_sizes, run_ain22,
                                run_partitioned_ucec, run_tdma, run_zf_ready)
from ucec_sim.errors import BlockSizeMismatch, ConfigInvalid
from ucec_sim.model import Dataset, InputBlock, LinearFunctionFamily, SystemConfig, ground_truth
from ucec_sim.ucec import run_ucec


# ---- zero-forcing ready

def test_zf_ready_loads_and_recovery():
    cfg = SystemConfig(2, 2, 4, 3)
    fam, block, rng = make_instance(cfg, 1, 0)
    tr = run_zf_ready(cfg, fam, block, rng, noiseless=True)
    assert (tr.computation_load, tr.communication_load) == (1, 1)
    assert rel_err(tr.decoded, ground_truth(fam, block)) <= 1e-6


def test_zf_ready_effective_gain_is_minus_gamma_det():
    cfg = SystemConfig(2, 2, 5, 3)
    fam, block, rng = make_instance(cfg, 1, 1)
    tr = run_zf_ready(cfg, fam, block, rng, noiseless=True)
    truth = ground_truth(fam, block)
    gamma = tr.gamma[0]
    for t in range(5):
        h = tr.channel.H(t)
        det = h[0, 0] * h[1, 1] - h[0, 1] * h[1, 0]
        for k in range(2):
            expected = -gamma * det * truth[k, 0, t]
            assert abs(tr.Y[t, k] - expected) <= 1e-9 * max(1.0, abs(expected))


def test_zf_ready_zero_inputs():
    cfg = SystemConfig(2, 2, 2, 3)
    fam = LinearFunctionFamily(Dataset(np.ones((2, 3))))
    tr = run_zf_ready(cfg, fam, InputBlock(np.zeros((2, 1, 3))), np.random.default_rng(0),
                      noiseless=True)
    assert np.all(tr.Y == 0)


def test_zf_ready_computation_depends_on_channel():
    cfg = SystemConfig(2, 2, 2, 3)
    fam, block, _ = make_instance(cfg, 1, 2)
    a = run_zf_ready(cfg, fam, block, np.random.default_rng(1), noiseless=True)
    b = run_zf_ready(cfg, fam, block, np.random.default_rng(2), noiseless=True)
    assert not np.array_equal(a.compute_artifacts["coded_inputs"], b.compute_artifacts["coded_inputs"])


def test_zf_ready_requires_two_users():
    cfg = SystemConfig(3, 3, 2, 3)
    fam, block, rng = make_instance(cfg, 1, 0)
    with pytest.raises(ConfigInvalid):
        run_zf_ready(cfg, fam, block, rng)


# ---- two-user aligned neutralization example

def test_ain22_coded_inputs_follow_the_example():
    block = InputBlock(np.arange(2 * 3 * 2, dtype=float).reshape(2, 3, 2))
    d = block.vectors
    coded = ain22_coded_inputs(block)
    np.testing.assert_array_equal(coded[0], [d[0, 0], d[0, 1] + d[1, 0], d[0, 0] + d[1, 0]])
    np.testing.assert_array_equal(coded[1], [d[1, 1], d[1, 2] + d[0, 2], d[1, 1] + d[0, 2]])


def test_ain22_loads():
    cfg = SystemConfig(2, 2, 5, 3)
    fam, block, rng = make_instance(cfg, 3, 0)
    tr = run_ain22(cfg, fam, block, rng, noiseless=True)
    # (2 + 1) * B * 2 / (3 * 2 * B) and 2 * B * 2 / (3 * B)
    assert tr.computation_load == Fraction((2 + 1) * 5 * 2, 3 * 2 * 5) == 1
    assert tr.communication_load == Fraction(4, 3)


def test_ain22_secondary_user_sees_no_primary_interference():
    cfg = SystemConfig(2, 2, 3, 3)
    fam, block, rng = make_instance(cfg, 3, 1)
    tr = run_ain22(cfg, fam, block, rng, noiseless=True)
    for leak, gamma in zip(tr.diagnostics["secondary_leak"], tr.gamma):
        assert np.max(np.abs(leak)) <= 1e-9 * gamma


def test_ain22_leak_measured_from_signals():
    # zero every input except the primary user's first one: the secondary user must hear nothing
    cfg = SystemConfig(2, 2, 2, 3)
    fam, block, rng = make_instance(cfg, 3, 2)
    v = np.zeros_like(block.vectors)
    v[0, 0] = block.vectors[0, 0]
    tr = run_ain22(cfg, fam, InputBlock(v), rng, noiseless=True)
    first_half = slice(0, 4)
    assert np.max(np.abs(tr.Y[first_half, 1])) <= 1e-9 * np.max(np.abs(tr.Y[first_half, 0]))


def test_ain22_recovers_all_outputs():
    cfg = SystemConfig(2, 2, 4, 5)
    for seed in range(10):
        fam, block, rng = make_instance(cfg, 3, seed)
        tr = run_ain22(cfg, fam, block, rng, noiseless=True)
        assert rel_err(tr.decoded, ground_truth(fam, block)) <= 1e-6


def test_ain22_computation_is_channel_free():
    cfg = SystemConfig(2, 2, 2, 3)
    fam, block, _ = make_instance(cfg, 3, 3)
    arts = [run_ain22(cfg, fam, block, np.random.default_rng(s), noiseless=True).compute_artifacts
            for s in range(4)]
    for a in arts[1:]:
        np.testing.assert_array_equal(a["coded_inputs"], arts[0]["coded_inputs"])
        np.testing.assert_array_equal(a["coded_results"], arts[0]["coded_results"])


def test_ain22_block_size():
    cfg = SystemConfig(2, 2, 2, 3)
    fam, block, rng = make_instance(cfg, 2, 0)
    with pytest.raises(BlockSizeMismatch):
        run_ain22(cfg, fam, block, rng)


# ---- TDMA

@pytest.mark.parametrize("K", [1, 2, 3])
def test_tdma_loads(K):
    cfg = SystemConfig(K, K, 3, 2)
    fam, block, rng = make_instance(cfg, 2, K)
    tr = run_tdma(cfg, fam, block, rng, noiseless=True)
    assert tr.communication_load == K
    assert tr.computation_load == 1
    assert rel_err(tr.decoded, ground_truth(fam, block)) <= 1e-9


def test_tdma_uneven_nodes():
    cfg = SystemConfig(3, 2, 2, 2)
    fam, block, rng = make_instance(cfg, 1, 0)
    tr = run_tdma(cfg, fam, block, rng, noiseless=True)
    assert tr.communication_load == 3
    # exactly one node is active per slot
    assert np.all(np.count_nonzero(tr.X, axis=1) <= 1)


# ---- partitioned UCEC

def test_partition_sizes():
    assert partition_sizes(3, 2) == [2, 1]
    assert partition_sizes(4, 2) == [2, 2]
    assert partition_sizes(2, 4) == [2]
    assert partition_sizes(5, 5) == [5]


def ratio(m, N):
    return Fraction((N + 1) ** (m * m), N ** (m * m))


@pytest.mark.parametrize("N", [1, 2])
def test_partitioned_loads_k3_m2(N):
    cfg = SystemConfig(3, 2, 2, 2, direction_N=N)
    fam, block, rng = make_instance(cfg, N**4, 0)
    tr = run_partitioned_ucec(cfg, fam, block, rng, noiseless=True)
    assert tr.communication_load == ratio(2, N) + ratio(1, N)
    assert tr.computation_load == Fraction(2, 3) * ratio(2, N) + Fraction(1, 3) * ratio(1, N)
    assert rel_err(tr.decoded, ground_truth(fam, block)) <= 1e-6


def test_partitioned_k4_m2_tends_to_two():
    loads = []
    for N in (1, 2):
        cfg = SystemConfig(4, 2, 1, 2, direction_N=N)
        fam, block, rng = make_instance(cfg, N**4, 0)
        tr = run_partitioned_ucec(cfg, fam, block, rng, noiseless=True)
        assert tr.communication_load == 2 * ratio(2, N)
        loads.append(tr.communication_load)
    assert loads[0] > loads[1] > 2
    # the exact count is 2 * ((N+1)/N)^4, whose limit is ceil(4/2) = 2
    assert abs(float(2 * ratio(2, 10**6)) - 2) < 1e-4


def test_partitioned_with_spare_nodes_equals_plain_ucec():
    cfg = SystemConfig(2, 4, 2, 3, direction_N=1)
    fam, block, _ = make_instance(cfg, 1, 5)
    part = run_partitioned_ucec(cfg, fam, block, np.random.default_rng(3), np.random.default_rng(4))
    plain = run_ucec(cfg.replace(nodes_M=2), fam, block, np.random.default_rng(3), np.random.default_rng(4))
    for name in ("decoded", "X", "Y"):
        np.testing.assert_array_equal(getattr(part, name), getattr(plain, name))
    assert part.gamma == plain.gamma
    assert (part.computed_functions, part.slots) == (plain.computed_functions, plain.slots)
