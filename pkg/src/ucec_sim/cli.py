"""Command-line harness: ``ucec-sim run | sweep | verify``.

Exit status is 0 on success, 1 when a verification check fails and 2 on an
invalid configuration. Output files go to ``--out-dir``, falling back to
``$UCEC_SIM_OUTPUT_DIR`` and then the current directory.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import logging
import os
import sys
import time
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigInvalid, RankDeficient
from .metrics import (STREAMS, compute_loads, dof_fit, measure_distortion, trial_streams)
from .model import SystemConfig, dump_json, generate_dataset, generate_inputs
from .schemes import SCHEMES, get_scheme
from .verification import run_checks

log = logging.getLogger("ucec_sim")

OUTPUT_ENV = "UCEC_SIM_OUTPUT_DIR"

CSV_COLUMNS = [
    "scheme", "K", "M", "N", "B", "Q", "F", "P", "trials", "seed",
    "r_num", "r_den", "L_num", "L_den",
    "mean_distortion", "dof_slope", "cond_median", "discarded",
]


@dataclass(frozen=True)
class ExperimentSpec:
    scheme: str = "ucec"
    users: int = 2
    nodes: int = 2
    N: int = 1
    B: int = 4
    Q: int = 8
    powers: tuple = (1e4,)
    trials: int = 100
    seed: int = 0
    noiseless: bool = False
    mutation: str | None = None

    def system_config(self) -> SystemConfig:
        return SystemConfig(self.users, self.nodes, self.B, self.Q, direction_N=self.N,
                            power_P=self.powers[0], seed=self.seed)

    def validate(self) -> None:
        """Raise :class:`ConfigInvalid` with a readable reason."""
        if self.scheme not in SCHEMES:
            raise ConfigInvalid(f"unknown scheme {self.scheme!r}; choose from {sorted(SCHEMES)}")
        if not self.powers:
            raise ConfigInvalid("at least one power is required")
        if any(not p > 0 for p in self.powers):
            raise ConfigInvalid(f"powers must be positive, got {list(self.powers)}")
        if self.trials < 1:
            raise ConfigInvalid(f"trials must be >= 1, got {self.trials}")
        cfg = self.system_config()
        scheme = get_scheme(self.scheme, self.mutation)
        scheme.validate(cfg)

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["powers"] = list(self.powers)
        return d


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    F: int
    loads: object
    reports: list
    dof_slope: float | None
    dof_per_entry: list | None
    conditions: list = field(default_factory=list)
    wall_clock: float = 0.0

    def csv_rows(self) -> list[dict]:
        s = self.spec
        cond = _median(self.conditions)
        rows = []
        for rep in self.reports:
            rows.append({
                "scheme": s.scheme if s.mutation is None else f"{s.scheme}[{s.mutation}]",
                "K": s.users, "M": s.nodes, "N": s.N, "B": s.B, "Q": s.Q, "F": self.F,
                "P": repr(rep.power), "trials": s.trials, "seed": s.seed,
                "r_num": self.loads.computation_r.numerator,
                "r_den": self.loads.computation_r.denominator,
                "L_num": self.loads.communication_L.numerator,
                "L_den": self.loads.communication_L.denominator,
                "mean_distortion": repr(rep.mean),
                "dof_slope": "" if self.dof_slope is None else repr(self.dof_slope),
                "cond_median": "" if cond is None else repr(cond),
                "discarded": rep.discarded,
            })
        return rows

    def report(self) -> dict:
        conds = np.asarray(self.conditions, dtype=float)
        return {
            "spec": self.spec.to_dict(),
            "F": self.F,
            "loads": {
                "r": str(self.loads.computation_r),
                "L": str(self.loads.communication_L),
            },
            "distortion": [r.to_dict() for r in self.reports],
            "dof_slope": self.dof_slope,
            "dof_slope_per_entry": self.dof_per_entry,
            "condition_number": None if conds.size == 0 else {
                "min": float(conds.min()), "median": float(np.median(conds)), "max": float(conds.max()),
            },
            "discarded": sum(r.discarded for r in self.reports),
            "wall_clock_s": self.wall_clock,
            "version": __version__,
            "seed_schedule": {
                "master": self.spec.seed,
                "split": "SeedSequence(master).spawn(trials)[i].spawn(4)",
                "streams": list(STREAMS),
                "shared_across_powers": True,
            },
            "input_labeling": "input i of each user sits on the i-th direction in lexicographic order",
        }


def _median(values):
    return None if not values else float(np.median(values))


def execute(spec: ExperimentSpec, dump_dir: Path | None = None) -> ExperimentResult:
    """Run one experiment across all powers; nothing is written except optional dumps."""
    spec.validate()
    t0 = time.perf_counter()
    cfg = spec.system_config()
    scheme = get_scheme(spec.scheme, spec.mutation)
    F = scheme.block_length(cfg)
    reports, conditions, first = [], [], []
    for P in spec.powers:
        kept = [] if not first else None
        try:
            rep = measure_distortion(scheme, cfg, P, spec.trials, spec.seed,
                                     noiseless=spec.noiseless, transcripts=kept)
        except RankDeficient as exc:
            raise ConfigInvalid(f"every trial was discarded at P={P}: {exc}") from exc
        if kept:
            first.append(kept[0])
        reports.append(rep)
        conditions.extend(rep.condition_numbers)
    loads = compute_loads(first[0])

    slope = per_entry = None
    if len(spec.powers) >= 3 and not spec.noiseless:
        slope, per = dof_fit(reports)
        per_entry = per.tolist()

    if dump_dir is not None:
        _dump_first_trial(spec, cfg, F, first[0], dump_dir)
    return ExperimentResult(spec, F, loads, reports, slope, per_entry, conditions,
                            wall_clock=time.perf_counter() - t0)


def _dump_first_trial(spec, cfg, F, transcript, dump_dir: Path):
    dump_dir.mkdir(parents=True, exist_ok=True)
    rng = trial_streams(spec.seed, 1)[0]
    dataset = generate_dataset(cfg, rng["dataset"])
    block = generate_inputs(cfg, F, rng["inputs"])
    dump_json(dataset, block, dump_dir / "inputs.json")
    transcript.dump(dump_dir / "transcript.json")
    if transcript.channel is not None:
        transcript.channel.dump(dump_dir / "channel.json")


def _csv_text(rows) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def _write_atomic(path: Path, text: str):
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def run_command(spec: ExperimentSpec, out_dir: Path, dump_dir: Path | None = None):
    """Execute ``spec`` and write ``report.json`` and ``results.csv`` to ``out_dir``."""
    result = execute(spec, dump_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_atomic(out_dir / "report.json", json.dumps(result.report(), indent=2))
    _write_atomic(out_dir / "results.csv", _csv_text(result.csv_rows()))
    return result


def point_seed(seed: int, index: int) -> int:
    """Seed for the ``index``-th grid point, derived from the shared base seed."""
    return int(np.random.SeedSequence([seed, index]).generate_state(1, np.uint32)[0])


def expand_grid(base: ExperimentSpec, vary: dict) -> list[ExperimentSpec]:
    if not vary or any(len(v) == 0 for v in vary.values()):
        raise ConfigInvalid("sweep grid is empty")
    names = list(vary)
    points = []
    for j, combo in enumerate(itertools.product(*(vary[n] for n in names))):
        spec = replace(base, seed=point_seed(base.seed, j), **dict(zip(names, combo)))
        try:
            spec.validate()
        except ConfigInvalid as exc:
            point = ", ".join(f"{n}={v}" for n, v in zip(names, combo))
            raise ConfigInvalid(f"grid point {j} ({point}): {exc}") from exc
        points.append(spec)
    return points


def sweep_command(base: ExperimentSpec, vary: dict, out_dir: Path):
    """Run every grid point (row-major over ``vary``) and write ``sweep.csv``."""
    points = expand_grid(base, vary)
    rows, reports = [], []
    for spec in points:
        result = execute(spec)
        rows.extend(result.csv_rows())
        reports.append(result.report())
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_atomic(out_dir / "sweep.json", json.dumps(reports, indent=2))
    _write_atomic(out_dir / "sweep.csv", _csv_text(rows))
    return rows


def verify_command(level: str, stream=None) -> int:
    stream = stream or sys.stdout
    results = run_checks(level)
    for r in results:
        print(r.line(), file=stream)
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed", file=stream)
    return 0 if failed == 0 else 1


# ---------------------------------------------------------------- argparse

_INT_FIELDS = {"users", "nodes", "N", "B", "Q", "trials", "seed"}


def _floats(text):
    return tuple(float(x) for x in text.split(",") if x.strip())


def _parse_vary(items):
    vary = {}
    for item in items or ():
        if "=" not in item:
            raise ConfigInvalid(f"--vary expects NAME=v1,v2,..., got {item!r}")
        name, values = item.split("=", 1)
        name = name.strip()
        if name not in {f.name for f in fields(ExperimentSpec)} or name == "powers":
            raise ConfigInvalid(f"cannot vary {name!r}")
        vals = [v.strip() for v in values.split(",") if v.strip()]
        if name in _INT_FIELDS:
            try:
                vals = [int(v) for v in vals]
            except ValueError:
                raise ConfigInvalid(f"--vary {name} needs integers, got {values!r}") from None
        vary[name] = vals
    return vary


def _add_spec_args(p):
    p.add_argument("--config", type=Path, help="JSON file with spec fields; flags override it")
    p.add_argument("--scheme", choices=sorted(SCHEMES))
    p.add_argument("--users", type=int)
    p.add_argument("--nodes", type=int)
    p.add_argument("--N", type=int, dest="N")
    p.add_argument("--B", type=int, dest="B")
    p.add_argument("--Q", type=int, dest="Q")
    p.add_argument("--powers", type=_floats, help="comma-separated list, e.g. 1e2,1e4,1e6")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--noiseless", action="store_true", default=None)
    p.add_argument("--mutation", choices=["flip_exponent"], help="broken UCEC transmitter (negative control)")
    p.add_argument("--out-dir", type=Path)


def _spec_from_args(args) -> ExperimentSpec:
    values = {}
    if args.config is not None:
        try:
            values.update(json.loads(args.config.read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigInvalid(f"cannot read config {args.config}: {exc}") from exc
    for f in fields(ExperimentSpec):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = v
    unknown = set(values) - {f.name for f in fields(ExperimentSpec)}
    if unknown:
        raise ConfigInvalid(f"unknown config fields: {sorted(unknown)}")
    if "powers" in values:
        p = values["powers"]
        values["powers"] = tuple(float(x) for x in (p if isinstance(p, (list, tuple)) else [p]))
    return ExperimentSpec(**values)


def _out_dir(args) -> Path:
    if args.out_dir is not None:
        return args.out_dir
    return Path(os.environ.get(OUTPUT_ENV, "."))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ucec-sim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scheme over powers x trials")
    _add_spec_args(p_run)
    p_run.add_argument("--dump-dir", type=Path, help="write inputs/channel/transcript JSON of trial 0")

    p_sweep = sub.add_parser("sweep", help="run a parameter grid")
    _add_spec_args(p_sweep)
    p_sweep.add_argument("--vary", action="append", metavar="NAME=v1,v2",
                         help="grid axis; repeat for a product grid")

    p_verify = sub.add_parser("verify", help="run built-in invariant checks")
    p_verify.add_argument("--level", choices=["quick", "full"], default="quick")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "verify":
            return verify_command(args.level)
        spec = _spec_from_args(args)
        if args.command == "run":
            result = run_command(spec, _out_dir(args), args.dump_dir)
            print(f"{spec.scheme}: r={result.loads.computation_r} L={result.loads.communication_L} "
                  f"mean distortion {[f'{r.mean:.3e}' for r in result.reports]}"
                  + ("" if result.dof_slope is None else f" dof slope {result.dof_slope:.4f}"))
        else:
            rows = sweep_command(spec, _parse_vary(args.vary), _out_dir(args))
            print(f"wrote {len(rows)} rows")
        return 0
    except (ConfigInvalid, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
