"""
Dispatch of validated configurations to the engines, grid sweeps and output.

Grid points are independent; they may run in worker processes, and rows are
always assembled in grid order so the output does not depend on scheduling.
"""

from __future__ import annotations

import itertools
import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from importlib import resources
from pathlib import Path

from . import __version__
from .analysis import DegenerateStateError, NumericalPSDError
from .asymptotic import asymptotic_general
from .cache import StateCache
from .collective import (MAX_TENSOR_DIMS, ConditioningSpec, balanced_beamsplitter_transmittances,
                         balanced_superposition_transmittances, build_interferometer,
                         collective_variance_general, collective_variance_mc,
                         collective_variance_x, dephased_variance_x)
from .config import ExperimentConfig, load
from .fock import PhaseNoiseModel, SqueezedVacuumSpec, TruncationWarning
from .iterative import IterationConfig, run_iterations
from .measurement import RANDOMIZED
from .phase_average import AUTO, MONTE_CARLO, AccuracyError, IntegrationConfig
from .results import ResultTable, format_value

log = logging.getLogger(__name__)

PRESET_PACKAGE = "phasedistill.presets"


class PointError(RuntimeError):
    """A numerical failure at an identified grid point."""

    def __init__(self, point: dict, cause: Exception):
        self.point = point
        self.cause = cause
        where = ", ".join(f"{k}={format_value(v)}" for k, v in point.items())
        super().__init__(f"at grid point ({where}): {cause}")


ITERATE_COLUMNS = [
    ("k", "1"), ("cumulative_success", "1"), ("step_success", "1"), ("joint_success", "1"),
    ("variance_x", "1"), ("variance_p", "1"), ("purity", "1"), ("gaussian_fidelity", "1"),
    ("trace_deficit", "1"),
]
LIMIT_COLUMNS = [("variance_x_limit", "1"), ("purity_limit", "1")]
TRADEOFF_COLUMNS = [("success", "1"), ("variance_x", "1"), ("purity", "1")]
COLLECTIVE_COLUMNS = [("variance_in", "1"), ("variance_out", "1"), ("stderr", "1")]
ASYMPTOTIC_COLUMNS = [
    ("Vx_lim", "1"), ("Vp_lim", "1"), ("Cxp_lim", "1"), ("purity_lim", "1"),
    ("physical", ""), ("convergence_gap", "1"),
]
AXIS_UNITS = {"Vx": "1", "Vp": "1", "eta": "1", "verify_eta": "1", "window": "1",
              "theta": "rad", "sigma": "rad", "scheme": "", "N": "1", "strategy": "rad"}


def list_presets() -> list[str]:
    names = [p.name[:-5] for p in resources.files(PRESET_PACKAGE).iterdir()
             if p.name.endswith(".yaml")]
    return sorted(names)


def preset_path(name: str) -> Path:
    entry = resources.files(PRESET_PACKAGE) / f"{name}.yaml"
    if not entry.is_file():
        raise FileNotFoundError(name)
    return Path(str(entry))


def load_preset(name: str, overrides: dict | None = None) -> ExperimentConfig:
    from .config import ConfigError
    try:
        path = preset_path(name)
    except FileNotFoundError:
        if Path(name).is_file():
            return load(name, overrides)
        raise ConfigError(f"unknown figure preset {name!r}; available: {', '.join(list_presets())}")
    return load(path, overrides)


def _integration(v: dict, min_nodes: int = 8) -> IntegrationConfig:
    return IntegrationConfig(method=v["integration"], nodes=max(v["nodes"], min_nodes),
                             samples=v["samples"], seed=v["seed"], tol=v["quad_tol"])


def _iterate_point(v: dict, p: dict, cache) -> list[tuple]:
    cfg = IterationConfig(
        spec=SqueezedVacuumSpec(p["Vx"], p["Vp"]), noise=PhaseNoiseModel(p["sigma"]),
        window=p["window"], eta=p["eta"], angle=p["theta"], iterations=v["iterations"],
        cutoff=v["cutoff"], verify_eta=p["verify_eta"],
    )
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", TruncationWarning)
        reports = run_iterations(cfg, cache)
    for w in caught:
        log.warning("%s", w.message)
    extra = ()
    if v["limit"]:
        if p["theta"] == RANDOMIZED:
            extra = (math.nan, math.nan)
        else:
            lim = asymptotic_general(cfg.spec, cfg.noise, p["theta"], p["eta"],
                                     verify_eta=p["verify_eta"], r_schedule=v["r_schedule"],
                                     integ=_integration(v, 64))
            extra = (lim.Vx_lim, lim.purity_lim)
    return [(r.k, r.cumulative_success, r.step_success, r.joint_success, r.variance_x,
             r.variance_p, r.purity, r.gaussian_fidelity, r.trace_deficit) + extra
            for r in reports]


def _tradeoff_point(v: dict, p: dict, cache) -> list[tuple]:
    rows = _iterate_point(dict(v, limit=False), p, cache)
    final = rows[-1]
    return [(final[1], final[4], final[6])]


def _transmittances(v: dict, scheme: str, N: int) -> list[float]:
    if scheme == "superposition":
        return balanced_superposition_transmittances(N)
    if scheme == "balanced":
        return balanced_beamsplitter_transmittances(N)
    return list(v["transmittances"])


def _collective_point(v: dict, p: dict, cache) -> list[tuple]:
    N = p["N"]
    sv = SqueezedVacuumSpec(p["Vx"], p["Vp"])
    noise = PhaseNoiseModel(p["sigma"])
    spec = build_interferometer(_transmittances(v, p["scheme"], N))
    angles = p["strategy"] if p["strategy"] is not None else (p["theta"],) * (N - 1)
    cond = ConditioningSpec(angles, p["eta"])
    integ = _integration(v)
    err = math.nan
    sampled = integ.method == MONTE_CARLO or (integ.method == AUTO and N > MAX_TENSOR_DIMS)
    if sampled and noise.sigma > 0:
        out, err = collective_variance_mc(spec, cond, sv, noise, integ.samples, integ.seed)
    elif all(a == 0 for a in angles) and cond.eta == 1:
        out = collective_variance_x(spec, sv, noise, integ)
    else:
        out = collective_variance_general(spec, cond, sv, noise, integ)
    return [(dephased_variance_x(sv, noise), out, err)]


def _asymptotic_point(v: dict, p: dict, cache) -> list[tuple]:
    res = asymptotic_general(SqueezedVacuumSpec(p["Vx"], p["Vp"]), PhaseNoiseModel(p["sigma"]),
                             p["theta"], p["eta"], verify_eta=p["verify_eta"],
                             r_schedule=v["r_schedule"], integ=_integration(v, 64))
    return [(res.Vx_lim, res.Vp_lim, float(res.Sigma_lim[0, 1]), res.purity_lim,
             res.physical, res.convergence_gap)]


POINT_FUNCS = {
    "iterate": _iterate_point,
    "tradeoff": _tradeoff_point,
    "collective": _collective_point,
    "asymptotic": _asymptotic_point,
}


def result_columns(config: ExperimentConfig) -> list[tuple[str, str]]:
    axes = [(k, AXIS_UNITS[k]) for k, _ in config.axes()]
    mode = config.mode
    if mode == "iterate":
        return axes + ITERATE_COLUMNS + (LIMIT_COLUMNS if config["limit"] else [])
    if mode == "tradeoff":
        return axes + TRADEOFF_COLUMNS
    if mode == "collective":
        return axes + COLLECTIVE_COLUMNS
    return axes + ASYMPTOTIC_COLUMNS


def grid_points(config: ExperimentConfig) -> list[dict]:
    axes = config.axes()
    names = [k for k, _ in axes]
    return [dict(zip(names, combo)) for combo in itertools.product(*(vals for _, vals in axes))]


def _run_point(args) -> list[tuple]:
    mode, values, point, cache_dir = args
    cache = StateCache(cache_dir) if cache_dir else None
    try:
        rows = POINT_FUNCS[mode](values, point, cache)
    except (AccuracyError, NumericalPSDError, DegenerateStateError, ValueError) as exc:
        raise PointError(point, exc) from exc
    if cache is not None and (cache.hits or cache.misses):
        log.info("point %s: %d cache hits, %d misses",
                 ", ".join(f"{k}={format_value(x)}" for k, x in point.items()),
                 cache.hits, cache.misses)
    return rows


def provenance(config: ExperimentConfig) -> list[str]:
    return [f"phasedistill {__version__}", f"config_sha256 {config.digest()}",
            f"mode {config.mode}"] + config.header_lines()


def run(config: ExperimentConfig, cache_dir=None, threads: int = 1) -> ResultTable:
    """Evaluate every grid point of ``config``; rows come back in grid order."""
    points = grid_points(config)
    cache_dir = str(cache_dir) if cache_dir else None
    jobs = [(config.mode, config.values, p, cache_dir) for p in points]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_run_point, jobs))
    else:
        results = [_run_point(j) for j in jobs]
    table = ResultTable(result_columns(config), provenance=provenance(config))
    for p, rows in zip(points, results):
        head = tuple(p.values())
        table.rows.extend(head + tuple(r) for r in rows)
    return table


def panel_tables(config: ExperimentConfig, table: ResultTable) -> dict[str, ResultTable]:
    """Split a table into the panels listed in the config (or keep it whole)."""
    panels = config["panels"]
    if not panels:
        return {config.output_name: table}
    keys = [k for k, _ in config.axes()]
    if config.mode == "iterate":
        keys.append("k")
    out = {}
    for pname, col in panels.items():
        sub = table.select(keys + [col])
        sub.provenance.append(f"panel {pname}: {col}")
        out[f"{config.output_name}_{pname}"] = sub
    return out


def write_outputs(config: ExperimentConfig, table: ResultTable, out_dir,
                  plot: bool = False) -> list[Path]:
    out_dir = Path(out_dir)
    written = []
    for name, sub in panel_tables(config, table).items():
        written.append(sub.write(out_dir / f"{name}.csv"))
        if plot:
            from .plotting import plot_table
            col = sub.names[-1]
            written.append(plot_table(sub, out_dir / f"{name}.svg", x=config["plot_x"],
                                      y=col, series=config["plot_series"] or None,
                                      title=name))
    return written
