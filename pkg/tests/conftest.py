import sys

import numpy as np
import pytest

from ucec_sim.model import LinearFunctionFamily, generate_dataset, generate_inputs


def make_instance(cfg, F, seed):
    """Dataset, input block and a channel generator drawn from one seed."""
    rng = np.random.default_rng(seed)
    fam = LinearFunctionFamily(generate_dataset(cfg, rng))
    block = generate_inputs(cfg, F, rng)
    return fam, block, np.random.default_rng([seed, 1])


def rel_err(a, b):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))


@pytest.fixture
def instance():
    return make_instance


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[num])
