"""Acceptance criteria, one test each.

Every test prints a single ``[PASS]`` or ``[FAIL]`` line and the lines are
repeated in the pytest terminal summary. The reference values are computed
here from first principles (explicit per-slot loops, closed-form loads) and
not from the helpers the package uses internally.

Run directly with ``python3 tests/test_acceptance.py`` for just the lines.
"""

import itertools
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import make_instance, rel_err
from ucec_sim import cli
from ucec_sim.baselines import run_ain22, run_partitioned_ucec, run_tdma, run_zf_ready
from ucec_sim.metrics import measure_distortion
from ucec_sim.model import InputBlock, SystemConfig, ground_truth
from ucec_sim.schemes import get_scheme
from ucec_sim.ucec import run_ucec

RESULTS = {}


def report(num, title, ok, detail, elapsed, limit):
    ok = bool(ok) and elapsed < limit
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {title}: {detail} ({elapsed:.2f}s < {limit:g}s)"
    RESULTS[num] = line
    print(line)
    return ok


def lattice(K, N):
    return list(itertools.product(range(N), repeat=K * K))


def expected_reception(gains, gamma, N, truth_b):
    """gamma * sum_p Q(t)^p phi_b(d_k^p), written out slot by slot.

    ``gains`` is (T, K, K), ``truth_b`` is (K, F) with input i on the i-th
    direction of the lexicographic lattice.
    """
    T, K, _ = gains.shape
    out = np.zeros((T, K))
    dirs = lattice(K, N)
    for t in range(T):
        inv = np.linalg.inv(gains[t])
        for i, p in enumerate(dirs):
            q = 1.0
            for k in range(K):
                for m in range(K):
                    # b_km is the (m, k) entry of H^{-1}
                    q *= inv[m, k] ** p[k * K + m]
            out[t] += gamma * q * truth_b[:, i]
    return out


# 1 ------------------------------------------------------------------------

def test_criterion_1_interference_neutralization():
    t0 = time.perf_counter()
    worst = leak = 0.0
    for N in (1, 2):
        cfg = SystemConfig(2, 2, 2, 4, direction_N=N)
        for seed in range(20):
            fam, block, rng = make_instance(cfg, N**4, seed)
            tr = run_ucec(cfg, fam, block, rng, noiseless=True)
            truth = ground_truth(fam, block)
            for b, (a, z) in enumerate(tr.power_blocks):
                want = expected_reception(tr.channel.gains[a:z], tr.gamma[b], N, truth[:, :, b])
                worst = max(worst, rel_err(tr.Y[a:z], want))
            for k in range(2):
                v = np.array(block.vectors)
                v[k] = 0.0
                tz = run_ucec(cfg, fam, InputBlock(v), None, noiseless=True, channel=tr.channel)
                leak = max(leak, float(np.max(np.abs(tz.Y[:, k])) / np.max(np.abs(tz.Y))))
    ok = worst <= 1e-8 and leak <= 1e-8
    assert report(1, "interference neutralization", ok,
                  f"max rel residual {worst:.1e}, zeroed-user reception {leak:.1e} (tol 1e-8)",
                  time.perf_counter() - t0, 5)


# 2 ------------------------------------------------------------------------

def test_criterion_2_load_formulas():
    t0 = time.perf_counter()
    bad = []
    for K, N in ((1, 1), (1, 3), (2, 1), (2, 2), (2, 3)):
        cfg = SystemConfig(K, K, 2, 2, direction_N=N)
        fam, block, rng = make_instance(cfg, N ** (K * K), 0)
        tr = run_ucec(cfg, fam, block, rng, noiseless=True)
        want = Fraction((N + 1) ** (K * K), N ** (K * K))
        # also count directly: every node computes B outputs per outer direction
        counted_r = Fraction(K * (N + 1) ** (K * K) * 2, N ** (K * K) * K * 2)
        if not (tr.computation_load == tr.communication_load == want == counted_r):
            bad.append(f"K={K},N={N}")
    seq = [run_ucec(SystemConfig(2, 2, 1, 2, direction_N=N), *make_instance(
        SystemConfig(2, 2, 1, 2, direction_N=N), N**4, 0)[:2], np.random.default_rng(0),
        noiseless=True).communication_load for N in (1, 2, 3)]
    monotone = seq[0] > seq[1] > seq[2] > 1
    assert report(2, "load formulas", not bad and monotone,
                  f"mismatches {bad or 'none'}, L over N=1..3 = {[str(x) for x in seq]}",
                  time.perf_counter() - t0, 5)


# 3 ------------------------------------------------------------------------

def test_criterion_3_two_user_scheme():
    t0 = time.perf_counter()
    cfg = SystemConfig(2, 2, 3, 4)
    loads = set()
    worst = 0.0
    for seed in range(20):
        fam, block, rng = make_instance(cfg, 3, seed)
        tr = run_ain22(cfg, fam, block, rng, noiseless=True)
        loads.add((tr.computation_load, tr.communication_load))
        # six input vectors (2 users x 3 inputs), each with B outputs
        truth = np.einsum("kfq,bq->kfb", block.vectors, fam.dataset.matrix_A)
        assert tr.decoded.shape == truth.shape == (2, 3, 3)
        worst = max(worst, rel_err(tr.decoded, truth))
    ok = loads == {(Fraction(1), Fraction(4, 3))} and worst <= 1e-6
    assert report(3, "two-user aligned scheme", ok,
                  f"(r, L) {sorted((str(r), str(l)) for r, l in loads)}, max rel error {worst:.1e}",
                  time.perf_counter() - t0, 5)


# 4 ------------------------------------------------------------------------

def test_criterion_4_zero_forcing_ready():
    t0 = time.perf_counter()
    cfg = SystemConfig(2, 2, 4, 3)
    worst = 0.0
    loads = set()
    for seed in range(10):
        fam, block, rng = make_instance(cfg, 1, seed)
        tr = run_zf_ready(cfg, fam, block, rng, noiseless=True)
        loads.add((tr.computation_load, tr.communication_load))
        truth = np.einsum("kq,bq->kb", block.vectors[:, 0], fam.dataset.matrix_A)
        for t in range(cfg.outputs_B):
            h = tr.channel.gains[t]
            gain = -tr.gamma[0] * (h[0, 0] * h[1, 1] - h[0, 1] * h[1, 0])
            for k in range(2):
                worst = max(worst, abs(tr.Y[t, k] / truth[k, t] - gain) / abs(gain))
    ok = loads == {(1, 1)} and worst <= 1e-9
    assert report(4, "zero-forcing-ready example", ok,
                  f"(r, L) in {{{', '.join(f'({r}, {l})' for r, l in loads)}}}, effective gain rel error {worst:.1e}",
                  time.perf_counter() - t0, 2)


# 5 ------------------------------------------------------------------------

def test_criterion_5_tdma():
    t0 = time.perf_counter()
    got = {}
    for K in (1, 2, 3):
        cfg = SystemConfig(K, K, 2, 2)
        fam, block, rng = make_instance(cfg, 2, K)
        got[K] = run_tdma(cfg, fam, block, rng, noiseless=True).communication_load
    ok = all(got[K] == K and isinstance(got[K], Fraction) for K in got)
    assert report(5, "TDMA baseline", ok, f"L = {[str(got[K]) for K in got]} for K=1,2,3",
                  time.perf_counter() - t0, 2)


# 6 ------------------------------------------------------------------------

def test_criterion_6_partitioned():
    t0 = time.perf_counter()
    details, ok = [], True
    for N in (1, 2):
        cfg = SystemConfig(3, 2, 2, 2, direction_N=N)
        fam, block, rng = make_instance(cfg, N**4, 0)
        tr = run_partitioned_ucec(cfg, fam, block, rng, noiseless=True)
        # groups {0,1} and {2}
        ratio = {m: Fraction((N + 1) ** (m * m), N ** (m * m)) for m in (1, 2)}
        want_L = ratio[2] + ratio[1]
        want_r = Fraction(2, 3) * ratio[2] + Fraction(1, 3) * ratio[1]
        ok &= tr.communication_load == want_L and tr.computation_load == want_r
        details.append(f"N={N}: ({tr.computation_load}, {tr.communication_load})")

    cfg = SystemConfig(2, 4, 2, 3)
    fam, block, _ = make_instance(cfg, 1, 9)
    part = run_partitioned_ucec(cfg, fam, block, np.random.default_rng(5), np.random.default_rng(6))
    plain = run_ucec(cfg.replace(nodes_M=2), fam, block, np.random.default_rng(5), np.random.default_rng(6))
    same = all(np.array_equal(getattr(part, n), getattr(plain, n)) for n in ("X", "Y", "decoded"))
    same &= part.gamma == plain.gamma and part.slots == plain.slots
    ok &= same
    details.append(f"K=2,M=4 equals plain UCEC: {same}")
    assert report(6, "partitioned wrapper", ok, "; ".join(details), time.perf_counter() - t0, 10)


# 7 ------------------------------------------------------------------------

def ols_slope(x, y):
    x, y = np.asarray(x), np.asarray(y)
    xc = x - x.mean()
    return float(np.sum(xc * (y - y.mean())) / np.sum(xc * xc))


@pytest.mark.slow
def test_criterion_7_dof_slope():
    t0 = time.perf_counter()
    cfg = SystemConfig(2, 2, 2, 4, direction_N=1)
    powers = [1e2, 1e4, 1e6]
    slopes = {}
    for label, name, mutation in (("ucec", "ucec", None), ("zf-ready", "zf-ready", None),
                                  ("control", "ucec", "flip_exponent")):
        scheme = get_scheme(name, mutation)
        means = [measure_distortion(scheme, cfg, P, 200, seed=2024).mean for P in powers]
        slopes[label] = ols_slope(np.log(powers), -np.log(means))
    ok = (0.85 <= slopes["ucec"] <= 1.1 and 0.85 <= slopes["zf-ready"] <= 1.1
          and slopes["control"] < 0.5)
    assert report(7, "DoF slope", ok,
                  ", ".join(f"{k} {v:.4f}" for k, v in slopes.items())
                  + " (want [0.85, 1.1], control < 0.5)", time.perf_counter() - t0, 600)


# 8 ------------------------------------------------------------------------

def test_criterion_8_universality():
    t0 = time.perf_counter()
    verdict = {}
    for name, cfg, F, runner in (
        ("ucec", SystemConfig(2, 2, 2, 3, direction_N=2), 16, run_ucec),
        ("ain22", SystemConfig(2, 2, 2, 3), 3, run_ain22),
        ("zf-ready", SystemConfig(2, 2, 2, 3), 1, run_zf_ready),
    ):
        fam, block, _ = make_instance(cfg, F, 42)
        arts = [runner(cfg, fam, block, np.random.default_rng([100, s]), noiseless=True).compute_artifacts
                for s in range(10)]
        verdict[name] = all(
            np.array_equal(a[key], arts[0][key]) for a in arts[1:] for key in ("coded_inputs", "coded_results"))
    ok = verdict["ucec"] and verdict["ain22"] and not verdict["zf-ready"]
    assert report(8, "universality", ok,
                  f"identical across 10 channel seeds: {verdict}", time.perf_counter() - t0, 5)


# 9 ------------------------------------------------------------------------

def test_criterion_9_determinism(tmp_path):
    t0 = time.perf_counter()
    runs = [
        ["--scheme", "ucec", "--N", "1", "--B", "4", "--Q", "8", "--powers", "1e2,1e4,1e6",
         "--trials", "50", "--seed", "7"],
        ["--scheme", "ain22", "--B", "2", "--Q", "4", "--trials", "20", "--seed", "1"],
        ["--scheme", "partitioned-ucec", "--users", "3", "--nodes", "2", "--B", "2", "--Q", "3",
         "--trials", "10", "--seed", "3"],
    ]
    same = []
    for j, argv in enumerate(runs):
        out = []
        for rep in range(2):
            d = tmp_path / f"{j}-{rep}"
            assert cli.main(["run", *argv, "--out-dir", str(d)]) == 0
            out.append((d / "results.csv").read_bytes())
        same.append(out[0] == out[1])
    assert report(9, "determinism", all(same), f"byte-identical CSV for {sum(same)}/{len(same)} commands",
                  time.perf_counter() - t0, 60)


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
