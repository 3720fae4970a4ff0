import warnings
from functools import lru_cache

import numpy as np
import pytest

from phasedistill.fock import (FockDensityMatrix, PhaseNoiseModel, SqueezedVacuumSpec,
                               TruncationWarning, dephase, squeezed_vacuum_dm)

# Acceptance outcomes collected by the report hook below, keyed by criterion.
_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number")
    config.addinivalue_line("markers", "slow: takes more than a few seconds")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    n, title = marker.args
    ok = call.excinfo is None
    prev = _ACCEPTANCE.get(n, (title, True, []))
    detail = prev[2] + ([] if ok else [item.name])
    _ACCEPTANCE[n] = (title, prev[1] and ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        title, ok, failed = _ACCEPTANCE[n]
        line = f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {title}"
        if failed:
            line += f"  (failing: {', '.join(failed)})"
        terminalreporter.write_line(line)


@lru_cache(maxsize=None)
def gaussian(Vx, Vp, cutoff=40):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        return squeezed_vacuum_dm(SqueezedVacuumSpec(Vx, Vp), cutoff)


def dephased(Vx, Vp, sigma, cutoff=40):
    return dephase(gaussian(Vx, Vp, cutoff), PhaseNoiseModel(sigma))


def random_state(dim, seed):
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    return FockDensityMatrix(rho / np.trace(rho).real)


@pytest.fixture
def fig2_state():
    """Dephased input of the standard parameter set, sigma = 0.5."""
    return dephased(0.2, 2.0, 0.5)
