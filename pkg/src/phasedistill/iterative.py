"""
Iterated two-copy purification of phase-diffused squeezed vacuum.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import warnings
from dataclasses import asdict, dataclass, replace
from typing import Sequence

from . import analysis
from .engine import purify_step
from .fock import (DEFAULT_CUTOFF, FockDensityMatrix, PhaseNoiseModel,
                   SqueezedVacuumSpec, TruncationWarning, bs_tensor, dephase,
                   squeezed_vacuum_dm)
from .measurement import RANDOMIZED, conditioning_povm

log = logging.getLogger(__name__)

MAX_ITERATIONS = 12


@dataclass(frozen=True)
class IterationConfig:
    """Parameters of a k-step run.

    ``angle`` is the conditioned quadrature angle or "randomized". k steps
    consume 2**k copies of the initial state.
    """

    spec: SqueezedVacuumSpec
    noise: PhaseNoiseModel
    window: float = 0.45
    eta: float = 0.85
    angle: float | str = 0.0
    iterations: int = 4
    cutoff: int = DEFAULT_CUTOFF
    verify_eta: float = 1.0

    def __post_init__(self):
        if not self.window > 0:
            raise ValueError("window must be positive")
        if not 0 < self.eta <= 1 or not 0 < self.verify_eta <= 1:
            raise ValueError("efficiencies must lie in (0, 1]")
        if not 0 <= self.iterations <= MAX_ITERATIONS:
            raise ValueError(f"iterations must be in [0, {MAX_ITERATIONS}]")
        if self.angle != RANDOMIZED and not isinstance(self.angle, (int, float)):
            raise ValueError(f"angle must be a number or {RANDOMIZED!r}")
        if self.cutoff < 1:
            raise ValueError("cutoff must be at least 1")

    def state_key(self, k: int) -> str:
        """Content hash of everything that determines rho^(k).

        verify_eta and the iteration count beyond k do not enter.
        """
        payload = {
            "Vx": self.spec.Vx, "Vp": self.spec.Vp, "sigma": self.noise.sigma,
            "window": self.window, "eta": self.eta, "angle": self.angle,
            "cutoff": self.cutoff, "k": k,
        }
        blob = json.dumps(payload, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


@dataclass(frozen=True)
class IterationReport:
    k: int
    cumulative_success: float
    step_success: float
    joint_success: float
    variance_x: float
    variance_p: float
    purity: float
    gaussian_fidelity: float
    trace_deficit: float

    def as_dict(self) -> dict:
        return asdict(self)


def initial_state(config: IterationConfig) -> FockDensityMatrix:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        g = squeezed_vacuum_dm(config.spec, config.cutoff)
    return dephase(g, config.noise)


def describe(rho: FockDensityMatrix, k: int, step_success: float,
             joint_success: float, deficit: float,
             verify_eta: float = 1.0) -> IterationReport:
    cm = analysis.covariance_matrix(rho)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        fid = analysis.gaussian_fidelity(rho)
    return IterationReport(
        k=k,
        cumulative_success=rho.trace,
        step_success=step_success,
        joint_success=joint_success,
        variance_x=analysis.verified_variance(cm.Vx, verify_eta),
        variance_p=analysis.verified_variance(cm.Vp, verify_eta),
        purity=analysis.purity(rho),
        gaussian_fidelity=fid,
        trace_deficit=deficit,
    )


def iterate_states(config: IterationConfig, cache=None,
                   truncation_tol: float = 1e-6) -> list[tuple[FockDensityMatrix, float]]:
    """States rho^(0..k) with the trace lost to truncation at each step.

    Each step divides the raw two-copy output by Tr rho^(k-1), so the trace of
    rho^(k) is the product of the per-step conditional success rates, i.e. the
    success rate per produced copy.

    ``cache`` is any object with ``get(key) -> (rho, deficit) | None`` and
    ``put(key, rho, deficit)``; it only short-circuits the contraction.
    """
    bs = bs_tensor(config.cutoff)
    povm = conditioning_povm(config.window, config.cutoff, config.eta, config.angle)
    rho = initial_state(config)
    states = [(rho, 1.0 - rho.trace)]
    for k in range(1, config.iterations + 1):
        key = config.state_key(k)
        hit = cache.get(key) if cache is not None else None
        if hit is not None and hit[0].cutoff == config.cutoff:
            log.info("cache hit for step %d (%s)", k, key[:12])
            rho, deficit = hit
        else:
            raw, lost = purify_step(rho, bs, povm)
            deficit = lost / rho.trace**2
            rho = raw.scaled(1.0 / rho.trace)
            if cache is not None:
                cache.put(key, rho, deficit)
        if deficit > truncation_tol:
            warnings.warn(
                f"step {k}: truncation lost a fraction {deficit:.3e} of the two-mode trace",
                TruncationWarning, stacklevel=2,
            )
            rho = rho.with_label(rho.label + "|truncated")
        states.append((rho, deficit))
    return states


def run_iterations(config: IterationConfig, cache=None) -> list[IterationReport]:
    states = iterate_states(config, cache)
    reports = []
    prev_trace = None
    joint = 1.0
    for k, (rho, deficit) in enumerate(states):
        step = 1.0 if prev_trace is None else rho.trace / prev_trace
        # all 2**k - 1 conditionings succeed
        joint = joint**2 * step if k else 1.0
        reports.append(describe(rho, k, step, joint, deficit, config.verify_eta))
        prev_trace = rho.trace
    return reports


def tradeoff_sweep(config: IterationConfig, windows: Sequence[float],
                   cache=None) -> list[dict]:
    """Final-step success rate, variance and purity for each window X."""
    rows = []
    for X in windows:
        final = run_iterations(replace(config, window=X), cache)[-1]
        rows.append({
            "window": X,
            "success": final.cumulative_success,
            "variance_x": final.variance_x,
            "purity": final.purity,
        })
    return rows


def sigma_grid(start: float = 0.1, stop: float = 1.5, step: float = 0.1) -> list[float]:
    n = int(round((stop - start) / step))
    return [round(start + i * step, 10) for i in range(n + 1)]


def angle_value(angle: float | str) -> float:
    return math.nan if angle == RANDOMIZED else float(angle)
