"""Self-checks run by ``ucec-sim verify``.

Each check returns a :class:`CheckResult`; none of them raise on failure.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import directions
from .baselines import partition_sizes
from .channel import CsiView
from .metrics import compute_loads, dof_slope, trial_streams
from .model import (InputBlock, LinearFunctionFamily, SystemConfig, generate_dataset,
                    generate_inputs, ground_truth)
from .schemes import get_scheme
from .ucec import decoding_matrix, run_ucec

__all__ = ["CheckResult", "neutralization_residual", "QUICK_CHECKS", "FULL_CHECKS", "run_checks"]

NEUTRALIZATION_RTOL = 1e-8
DOF_POWERS = (1e2, 1e4, 1e6)
DOF_TRIALS = 200


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def _instance(cfg, seed):
    rng = trial_streams(seed, 1)[0]
    fam = LinearFunctionFamily(generate_dataset(cfg, rng["dataset"]))
    F = directions.lattice_size(cfg.users_K, cfg.direction_N)
    return fam, generate_inputs(cfg, F, rng["inputs"]), rng


def neutralization_residual(transcript, fam, block) -> float:
    """Largest deviation of noiseless UCEC reception from its interference-free form.

    The reference is ``gamma * sum_{p in N-lattice} Q(t)^p phi_b(d_k^p)``
    computed from ground truth; the deviation is relative to the largest
    reference magnitude.
    """
    N = transcript.diagnostics["N"]
    truth = ground_truth(fam, block)
    worst = 0.0
    for b, (start, stop) in enumerate(transcript.power_blocks):
        csi = CsiView(transcript.channel.window(start, stop))
        expected = decoding_matrix(csi, N, transcript.gamma[b]) @ truth[:, :, b].T
        scale = max(np.max(np.abs(expected)), np.finfo(float).tiny)
        worst = max(worst, float(np.max(np.abs(transcript.Y[start:stop] - expected)) / scale))
    return worst


def check_neutralization(seeds=range(20), Ns=(1, 2), mutation=None) -> CheckResult:
    worst = 0.0
    silent = 0.0
    for N in Ns:
        cfg = SystemConfig(2, 2, 2, 4, direction_N=N)
        for seed in seeds:
            fam, block, rng = _instance(cfg, seed)
            tr = run_ucec(cfg, fam, block, rng["channel"], noiseless=True, mutation=mutation)
            worst = max(worst, neutralization_residual(tr, fam, block))
            for k in range(2):
                v = np.array(block.vectors)
                v[k] = 0.0
                tz = run_ucec(cfg, fam, InputBlock(v), None, noiseless=True,
                              mutation=mutation, channel=tr.channel)
                scale = max(np.max(np.abs(tz.Y)), np.finfo(float).tiny)
                silent = max(silent, float(np.max(np.abs(tz.Y[:, k])) / scale))
    ok = worst <= NEUTRALIZATION_RTOL and silent <= NEUTRALIZATION_RTOL
    return CheckResult("interference neutralization", ok,
                       f"max residual {worst:.2e}, zeroed-user leak {silent:.2e} "
                       f"(tol {NEUTRALIZATION_RTOL:g})")


def expected_ucec_load(K: int, N: int) -> Fraction:
    return Fraction((N + 1) ** (K * K), N ** (K * K))


def check_loads() -> CheckResult:
    bad = []
    for K, N in ((1, 1), (1, 3), (2, 1), (2, 2), (2, 3)):
        cfg = SystemConfig(K, K, 2, 2, direction_N=N)
        fam, block, rng = _instance(cfg, 0)
        loads = compute_loads(run_ucec(cfg, fam, block, rng["channel"], noiseless=True))
        want = expected_ucec_load(K, N)
        if loads.computation_r != want or loads.communication_L != want:
            bad.append(f"K={K},N={N}: got ({loads.computation_r}, {loads.communication_L})")
    for name, cfg, want in (
        ("zf-ready", SystemConfig(2, 2, 3, 2), (1, 1)),
        ("ain22", SystemConfig(2, 2, 3, 2), (1, Fraction(4, 3))),
        ("tdma", SystemConfig(3, 3, 2, 2), (1, 3)),
    ):
        scheme = get_scheme(name)
        rng = trial_streams(0, 1)[0]
        fam = LinearFunctionFamily(generate_dataset(cfg, rng["dataset"]))
        block = generate_inputs(cfg, scheme.block_length(cfg), rng["inputs"])
        loads = compute_loads(scheme.run(cfg, fam, block, rng["channel"], None, True))
        if (loads.computation_r, loads.communication_L) != want:
            bad.append(f"{name}: got ({loads.computation_r}, {loads.communication_L})")
    return CheckResult("load accounting", not bad, "; ".join(bad) or "all exact")


def check_partitioned() -> CheckResult:
    cfg = SystemConfig(3, 2, 2, 2, direction_N=2)
    scheme = get_scheme("partitioned-ucec")
    rng = trial_streams(0, 1)[0]
    fam = LinearFunctionFamily(generate_dataset(cfg, rng["dataset"]))
    block = generate_inputs(cfg, scheme.block_length(cfg), rng["inputs"])
    loads = compute_loads(scheme.run(cfg, fam, block, rng["channel"], None, True))
    sizes = partition_sizes(3, 2)
    want_L = sum(expected_ucec_load(m, 2) for m in sizes)
    want_r = sum(Fraction(m, 3) * expected_ucec_load(m, 2) for m in sizes)
    ok = loads.communication_L == want_L and loads.computation_r == want_r
    return CheckResult("partitioned loads", ok,
                       f"({loads.computation_r}, {loads.communication_L}) vs ({want_r}, {want_L})")


def check_noiseless_recovery(rtol=1e-6) -> CheckResult:
    worst = {}
    for name, cfg in (
        ("ucec", SystemConfig(2, 2, 2, 4, direction_N=2)),
        ("zf-ready", SystemConfig(2, 2, 3, 4)),
        ("ain22", SystemConfig(2, 2, 3, 4)),
        ("tdma", SystemConfig(2, 2, 3, 4)),
    ):
        scheme = get_scheme(name)
        for seed in range(5):
            rng = trial_streams(seed, 1)[0]
            fam = LinearFunctionFamily(generate_dataset(cfg, rng["dataset"]))
            block = generate_inputs(cfg, scheme.block_length(cfg), rng["inputs"])
            tr = scheme.run(cfg, fam, block, rng["channel"], None, True)
            truth = ground_truth(fam, block)
            err = float(np.max(np.abs(tr.decoded - truth)) / np.max(np.abs(truth)))
            worst[name] = max(worst.get(name, 0.0), err)
    ok = all(v <= rtol for v in worst.values())
    return CheckResult("noiseless recovery", ok,
                       ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + f" (tol {rtol:g})")


def check_dof(trials=DOF_TRIALS, seed=2024) -> list[CheckResult]:
    cfg = SystemConfig(2, 2, 2, 4, direction_N=1)
    out = []
    for name, mutation, lo, hi in (("ucec", None, 0.85, 1.1), ("zf-ready", None, 0.85, 1.1),
                                   ("ucec", "flip_exponent", -np.inf, 0.5)):
        slope = dof_slope(get_scheme(name, mutation), cfg, DOF_POWERS, trials, seed)
        label = f"DoF slope {name}" + (f" [{mutation}]" if mutation else "")
        out.append(CheckResult(label, bool(lo <= slope <= hi), f"{slope:.4f} in [{lo}, {hi}]"))
    return out


QUICK_CHECKS = (check_neutralization, check_loads, check_partitioned, check_noiseless_recovery)


def run_checks(level: str = "quick") -> list[CheckResult]:
    if level not in ("quick", "full"):
        raise ValueError(f"level must be 'quick' or 'full', got {level!r}")
    results = [check() for check in QUICK_CHECKS]
    if level == "full":
        results.extend(check_dof())
    return results


FULL_CHECKS = QUICK_CHECKS + (check_dof,)
