"""Registry tying scheme tags to runners, block lengths and config checks."""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Callable

from . import directions
from .baselines import partition_sizes, run_ain22, run_partitioned_ucec, run_tdma, run_zf_ready
from .errors import ConfigInvalid
from .model import SystemConfig
from .ucec import MUTATIONS, run_ucec

__all__ = ["Scheme", "SCHEMES", "get_scheme"]


def _ucec_block(cfg):
    return directions.lattice_size(cfg.users_K, cfg.direction_N)


def _partitioned_block(cfg):
    return directions.lattice_size(max(partition_sizes(cfg.users_K, cfg.nodes_M)), cfg.direction_N)


def _check_square(cfg, name):
    if cfg.users_K != cfg.nodes_M:
        raise ConfigInvalid(f"{name} requires K = M, got K={cfg.users_K}, M={cfg.nodes_M}")


def _check_two_by_two(cfg, name):
    if (cfg.users_K, cfg.nodes_M) != (2, 2):
        raise ConfigInvalid(f"{name} requires K = M = 2, got K={cfg.users_K}, M={cfg.nodes_M}")


def _check_lattice(cfg, name, size):
    d = directions.lattice_size(size, cfg.direction_N + 1)
    if d > directions.DEFAULT_SIZE_CAP:
        raise ConfigInvalid(
            f"{name} with K={size}, N={cfg.direction_N} needs {d} slots per function, "
            f"above the cap {directions.DEFAULT_SIZE_CAP}"
        )


@dataclass(frozen=True)
class Scheme:
    """A runnable scheme.

    ``run(cfg, fam, block, channel_rng, noise_rng, noiseless)`` returns a
    :class:`~ucec_sim.transcript.SchemeTranscript`; ``block_length(cfg)`` is
    the number of inputs per user the scheme consumes; ``validate(cfg)``
    raises :class:`ConfigInvalid` on unsupported configurations.
    """

    name: str
    run: Callable
    block_length: Callable[[SystemConfig], int]
    validate: Callable[[SystemConfig], None]


def _validate_ucec(cfg):
    _check_square(cfg, "ucec")
    _check_lattice(cfg, "ucec", cfg.users_K)


def _validate_partitioned(cfg):
    _check_lattice(cfg, "partitioned-ucec", max(partition_sizes(cfg.users_K, cfg.nodes_M)))


SCHEMES = {
    "ucec": Scheme("ucec", run_ucec, _ucec_block, _validate_ucec),
    "zf-ready": Scheme("zf-ready", run_zf_ready, lambda cfg: 1,
                       lambda cfg: _check_two_by_two(cfg, "zf-ready")),
    "ain22": Scheme("ain22", run_ain22, lambda cfg: 3,
                    lambda cfg: _check_two_by_two(cfg, "ain22")),
    "tdma": Scheme("tdma", run_tdma, lambda cfg: 1, lambda cfg: None),
    "partitioned-ucec": Scheme("partitioned-ucec", run_partitioned_ucec,
                               _partitioned_block, _validate_partitioned),
}


def get_scheme(name: str, mutation: str | None = None) -> Scheme:
    """Look up a scheme tag; ``mutation`` selects a deliberately broken UCEC transmitter."""
    if name not in SCHEMES:
        raise ConfigInvalid(f"unknown scheme {name!r}; choose from {sorted(SCHEMES)}")
    scheme = SCHEMES[name]
    if mutation is None:
        return scheme
    if name != "ucec" or mutation not in MUTATIONS:
        raise ConfigInvalid(f"mutation {mutation!r} is not available for scheme {name!r}")
    return Scheme(f"ucec[{mutation}]", functools.partial(run_ucec, mutation=mutation),
                  scheme.block_length, scheme.validate)
