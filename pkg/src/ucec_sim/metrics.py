"""Load accounting, Monte-Carlo distortion and the DoF slope estimate."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import RankDeficient, SingularMatrix
from .model import LinearFunctionFamily, SystemConfig, generate_dataset, generate_inputs, ground_truth

__all__ = [
    "LoadPair",
    "DistortionReport",
    "compute_loads",
    "trial_streams",
    "measure_distortion",
    "dof_fit",
    "dof_slope",
    "STREAMS",
]

log = logging.getLogger(__name__)

#: Per-trial sub-streams, in spawn order.
STREAMS = ("dataset", "inputs", "channel", "noise")


@dataclass(frozen=True)
class LoadPair:
    computation_r: Fraction
    communication_L: Fraction


def compute_loads(transcript) -> LoadPair:
    """Exact ``r = computed / (F K B)`` and ``L = T / (F B)``."""
    return LoadPair(transcript.computation_load, transcript.communication_load)


def trial_streams(seed: int, trials: int):
    """Split a master seed into independent generators for each trial.

    ``SeedSequence(seed).spawn(trials)[i].spawn(4)`` gives trial ``i`` its
    dataset, inputs, channel and noise streams. The split does not depend on
    the transmit power, so sweeps over P reuse the same realizations.
    """
    out = []
    for child in np.random.SeedSequence(seed).spawn(trials):
        out.append({name: np.random.default_rng(s) for name, s in zip(STREAMS, child.spawn(len(STREAMS)))})
    return out


@dataclass
class DistortionReport:
    power: float
    per_entry: np.ndarray
    trials: int
    discarded: int
    signal_scale: float
    noiseless: bool = False
    condition_numbers: list = field(default_factory=list)

    @property
    def mean(self) -> float:
        return float(np.mean(self.per_entry))

    def to_dict(self) -> dict:
        return {
            "power": self.power,
            "mean_distortion": self.mean,
            "per_entry": self.per_entry.tolist(),
            "trials": self.trials,
            "discarded": self.discarded,
            "signal_scale": self.signal_scale,
            "noiseless": self.noiseless,
        }


def measure_distortion(scheme, cfg: SystemConfig, power: float, trials: int, seed: int,
                       noiseless: bool = False, transcripts: list | None = None) -> DistortionReport:
    """Average squared decoding error over ``trials`` fresh realizations.

    Trials that hit a rank-deficient or singular system are excluded and
    counted in ``discarded``. If ``transcripts`` is a list, every kept
    transcript is appended to it.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    cfg = cfg.replace(power_P=power)
    F = scheme.block_length(cfg)
    sq_err, scale, conds = [], [], []
    discarded = 0
    for i, rng in enumerate(trial_streams(seed, trials)):
        fam = LinearFunctionFamily(generate_dataset(cfg, rng["dataset"]))
        block = generate_inputs(cfg, F, rng["inputs"])
        try:
            tr = scheme.run(cfg, fam, block, rng["channel"], rng["noise"], noiseless)
        except (RankDeficient, SingularMatrix) as exc:
            log.warning("trial %d discarded: %s", i, exc)
            discarded += 1
            continue
        truth = ground_truth(fam, block)
        sq_err.append((tr.decoded - truth) ** 2)
        scale.append(float(np.mean(truth**2)))
        conds.extend(tr.condition_numbers)
        if transcripts is not None:
            transcripts.append(tr)
    if not sq_err:
        raise RankDeficient(f"all {trials} trials were discarded")
    return DistortionReport(
        power=float(power),
        per_entry=np.mean(np.stack(sq_err), axis=0),
        trials=len(sq_err),
        discarded=discarded,
        signal_scale=float(np.mean(scale)),
        noiseless=noiseless,
        condition_numbers=conds,
    )


def dof_fit(reports):
    """Least-squares slope of ``log(1/D)`` against ``log(P)``.

    Returns the slope of the aggregate mean distortion and an array of
    per-entry slopes with the shape of ``per_entry``.
    """
    logP = np.log([r.power for r in reports])
    agg = -np.log([r.mean for r in reports])
    slope = float(np.polyfit(logP, agg, 1)[0])
    per = -np.log(np.stack([r.per_entry for r in reports]))
    flat = per.reshape(len(reports), -1)
    per_slopes = np.polyfit(logP, flat, 1)[0].reshape(reports[0].per_entry.shape)
    return slope, per_slopes


def check_power_grid(powers) -> None:
    powers = np.asarray(powers, dtype=float)
    if powers.size < 3:
        raise ValueError(f"need at least 3 power points, got {powers.size}")
    if np.any(powers <= 0):
        raise ValueError("powers must be positive")
    if np.log10(powers.max() / powers.min()) < 4 - 1e-12:
        raise ValueError("power points must span at least 4 decades")


def dof_slope(scheme, cfg: SystemConfig, powers, trials: int, seed: int) -> float:
    """DoF slope of ``scheme`` from Monte-Carlo distortion at each power."""
    check_power_grid(powers)
    reports = [measure_distortion(scheme, cfg, P, trials, seed) for P in powers]
    return dof_fit(reports)[0]
