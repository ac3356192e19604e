"""Coded edge computing simulator: UCEC and reference schemes over simulated channels."""

__version__ = "0.1.0"

from .baselines import run_ain22, run_partitioned_ucec, run_tdma, run_zf_ready
from .channel import ChannelRealization, CsiView, draw_channel, transmit
from .metrics import LoadPair, compute_loads, dof_slope, measure_distortion
from .model import (Dataset, InputBlock, LinearFunctionFamily, SystemConfig, generate_dataset,
                    generate_inputs, ground_truth)
from .schemes import SCHEMES, get_scheme
from .ucec import run_ucec

__all__ = [
    "ChannelRealization", "CsiView", "Dataset", "InputBlock", "LinearFunctionFamily",
    "LoadPair", "SCHEMES", "SystemConfig", "compute_loads", "dof_slope", "draw_channel",
    "generate_dataset", "generate_inputs", "get_scheme", "ground_truth", "measure_distortion",
    "run_ain22", "run_partitioned_ucec", "run_tdma", "run_ucec", "run_zf_ready", "transmit",
]
