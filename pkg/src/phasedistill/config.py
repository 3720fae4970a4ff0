"""
Experiment configuration: a flat YAML mapping validated against a fixed schema.

Every key has a type, a default and a unit; list values on sweepable keys
become grid axes. Errors carry the offending key and its line in the file.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import yaml

from .fock import DEFAULT_CUTOFF
from .iterative import MAX_ITERATIONS, sigma_grid
from .measurement import RANDOMIZED
from .phase_average import AUTO, GAUSS_HERMITE, MONTE_CARLO, PERIODIC

MODES = ("iterate", "collective", "asymptotic", "tradeoff")
SCHEMES = ("superposition", "balanced", "custom")


class ConfigError(ValueError):
    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        self.key = key
        self.line = line
        where = ""
        if key is not None:
            where = f"{key}: "
        if line is not None:
            where = f"line {line}: " + where
        super().__init__(where + message)


_ANGLE = re.compile(r"^([-+]?(?:\d+\.?\d*|\.\d+)?)\s*\*?\s*pi\s*(?:/\s*(\d+(?:\.\d*)?))?$")


def parse_angle(value) -> float | str:
    """Number, 'randomized', or an expression like 'pi/2', '3*pi/4', '0.25pi'."""
    if isinstance(value, bool):
        raise ValueError(f"not an angle: {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    text = str(value).strip().lower()
    if text == RANDOMIZED:
        return RANDOMIZED
    try:
        return float(text)
    except ValueError:
        pass
    m = _ANGLE.match(text)
    if not m:
        raise ValueError(f"not an angle: {value!r}")
    coef = {"": 1.0, "+": 1.0, "-": -1.0}.get(m.group(1))
    if coef is None:
        coef = float(m.group(1))
    out = coef * math.pi
    if m.group(2):
        out /= float(m.group(2))
    return out


def _as_float(v):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValueError(f"expected a number, got {v!r}")
    return float(v)


def _as_int(v):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ValueError(f"expected an integer, got {v!r}")
    return v


def _as_bool(v):
    if not isinstance(v, bool):
        raise ValueError(f"expected true or false, got {v!r}")
    return v


def _as_str(v):
    if not isinstance(v, str):
        raise ValueError(f"expected a string, got {v!r}")
    return v


def _choice(options):
    def conv(v):
        v = _as_str(v)
        if v not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {v!r}")
        return v
    return conv


def _float_list(v):
    if not isinstance(v, list):
        raise ValueError(f"expected a list of numbers, got {v!r}")
    return [_as_float(x) for x in v]


def _strategy(v):
    v = _as_str(v)
    return tuple(parse_angle(part) for part in v.split(","))


def _panels(v):
    if not isinstance(v, dict) or not v:
        raise ValueError("expected a mapping panel_name: column")
    return {str(k): _as_str(c) for k, c in v.items()}


@dataclass(frozen=True)
class Field:
    convert: Any
    default: Any
    unit: str = "1"
    sweep: bool = False
    doc: str = ""


# order matters: it is the order of grid axes and of the echoed header
SCHEMA: dict[str, Field] = {
    "mode": Field(_choice(MODES), None, "", doc="engine to run"),
    "figure": Field(_as_str, "", "", doc="preset name, informational"),
    "name": Field(_as_str, "", "", doc="output base name (default: figure or mode)"),
    "Vx": Field(_as_float, 0.2, "1", True, "initial x variance (vacuum = 1/2)"),
    "Vp": Field(_as_float, 2.0, "1", True, "initial p variance"),
    "sigma": Field(_as_float, sigma_grid(), "rad", True, "phase noise standard deviation"),
    "sigma_range": Field(_float_list, None, "rad", doc="[start, stop, step], overrides sigma"),
    "window": Field(_as_float, None, "1", True, "acceptance half-width X (0: zero-width limit)"),
    "eta": Field(_as_float, 0.85, "1", True, "conditioning detector efficiency"),
    "verify_eta": Field(_as_float, 1.0, "1", True, "verification detector efficiency"),
    "theta": Field(parse_angle, 0.0, "rad", True, "conditioning angle or 'randomized'"),
    "theta_range": Field(_float_list, None, "rad", doc="[start, stop, count] (linspace), overrides theta"),
    "iterations": Field(_as_int, 4, "1", doc="two-copy steps k"),
    "cutoff": Field(_as_int, DEFAULT_CUTOFF, "1", doc="Fock truncation"),
    "N": Field(_as_int, [2, 3, 4], "1", True, "copies in the collective scheme"),
    "scheme": Field(_choice(SCHEMES), "superposition", "", True, "beamsplitter chain"),
    "transmittances": Field(_float_list, None, "1", doc="amplitude transmittances for scheme=custom"),
    "strategy": Field(_strategy, None, "rad", True, "comma separated per-detector angles"),
    "limit": Field(_as_bool, False, "", doc="add the infinite-iteration limit to iterate tables"),
    "r_schedule": Field(_float_list, [6.0, 8.0, 10.0, 12.0], "1", doc="squeezing values for the limit"),
    "integration": Field(_choice((AUTO, GAUSS_HERMITE, PERIODIC, MONTE_CARLO)), AUTO, "",
                         doc="phase-average rule"),
    "nodes": Field(_as_int, 32, "1", doc="quadrature nodes per phase"),
    "samples": Field(_as_int, 1_000_000, "1", doc="Monte Carlo samples"),
    "quad_tol": Field(_as_float, 1e-6, "1", doc="node-doubling tolerance"),
    "seed": Field(_as_int, 0, "1", doc="Monte Carlo seed"),
    "panels": Field(_panels, None, "", doc="panel_name: column, one CSV per panel"),
    "plot_x": Field(_as_str, "sigma", "", doc="plot abscissa column"),
    "plot_series": Field(_as_str, "", "", doc="column distinguishing plotted curves"),
}

AXES = {
    "iterate": ("Vx", "Vp", "eta", "verify_eta", "window", "theta", "sigma"),
    "tradeoff": ("Vx", "Vp", "eta", "verify_eta", "theta", "sigma", "window"),
    "collective": ("Vx", "Vp", "eta", "scheme", "N", "strategy", "theta", "sigma"),
    "asymptotic": ("Vx", "Vp", "eta", "verify_eta", "theta", "sigma"),
}


@dataclass(frozen=True)
class ExperimentConfig:
    values: dict
    explicit: frozenset
    source: str = ""

    def __getitem__(self, key):
        return self.values[key]

    @property
    def mode(self) -> str:
        return self.values["mode"]

    @property
    def output_name(self) -> str:
        return self.values["name"] or self.values["figure"] or self.mode

    def axes(self) -> list[tuple[str, list]]:
        out = []
        for key in AXES[self.mode]:
            v = self.values[key]
            out.append((key, list(v) if isinstance(v, list) else [v]))
        return out

    def canonical(self) -> dict:
        return {k: _jsonable(v) for k, v in self.values.items()}

    def digest(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def header_lines(self) -> list[str]:
        """One 'key = value' line per schema key; defaults are marked."""
        lines = []
        for key in SCHEMA:
            tag = "" if key in self.explicit else "  (default)"
            lines.append(f"{key} = {json.dumps(_jsonable(self.values[key]))}{tag}")
        return lines


def _jsonable(v):
    if isinstance(v, tuple):
        return [_jsonable(x) for x in v]
    if isinstance(v, list):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    return v


def _key_lines(text: str) -> dict[str, int]:
    try:
        node = yaml.compose(text)
    except yaml.YAMLError:
        return {}
    if not isinstance(node, yaml.MappingNode):
        return {}
    return {k.value: k.start_mark.line + 1 for k, _ in node.value if hasattr(k, "value")}


def parse_text(text: str, source: str = "<string>", overrides: dict | None = None) -> ExperimentConfig:
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        line = getattr(getattr(exc, "problem_mark", None), "line", None)
        raise ConfigError(f"invalid YAML in {source}: {exc}",
                          line=None if line is None else line + 1) from None
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{source} must contain a mapping of keys to values")
    lines = _key_lines(text)
    raw = dict(raw)
    for k, v in (overrides or {}).items():
        if v is not None:
            raw[k] = v
            lines.pop(k, None)
    return build(raw, lines, source)


def load(path, overrides: dict | None = None) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_text(text, str(path), overrides)


def build(raw: dict, lines: dict | None = None, source: str = "") -> ExperimentConfig:
    lines = lines or {}
    values = {}
    for key in raw:
        if key not in SCHEMA:
            raise ConfigError("unknown key", str(key), lines.get(key))
    for key, fld in SCHEMA.items():
        if key not in raw:
            values[key] = fld.default
            continue
        v = raw[key]
        try:
            if fld.sweep and isinstance(v, list):
                if not v:
                    raise ValueError("empty list")
                values[key] = [fld.convert(x) for x in v]
            else:
                values[key] = fld.convert(v)
        except ValueError as exc:
            raise ConfigError(str(exc), key, lines.get(key)) from None
    explicit = set(raw)

    def fail(msg, key):
        raise ConfigError(msg, key, lines.get(key))

    if values["mode"] is None:
        fail("is required", "mode")
    mode = values["mode"]
    if values["sigma_range"] is not None:
        r = values["sigma_range"]
        if len(r) != 3 or r[2] <= 0 or r[1] < r[0]:
            fail("expected [start, stop, step] with step > 0", "sigma_range")
        values["sigma"] = sigma_grid(*r)
    if values["theta_range"] is not None:
        r = values["theta_range"]
        if len(r) != 3 or r[2] < 2 or r[2] != int(r[2]):
            fail("expected [start, stop, count] with count >= 2", "theta_range")
        n = int(r[2])
        values["theta"] = [r[0] + (r[1] - r[0]) * i / (n - 1) for i in range(n)]
    if values["window"] is None:
        values["window"] = 0.45 if mode in ("iterate", "tradeoff") else 0.0

    def each(key):
        v = values[key]
        return v if isinstance(v, list) else [v]

    for s in each("sigma"):
        if s < 0:
            fail("phase noise must be non-negative", "sigma")
    for key in ("Vx", "Vp"):
        if any(v <= 0 for v in each(key)):
            fail("variances must be positive", key)
    for vx in each("Vx"):
        for vp in each("Vp"):
            if vx * vp < 0.25 - 1e-12:
                fail(f"Vx*Vp = {vx * vp:g} violates the uncertainty bound 1/4", "Vx")
    for key in ("eta", "verify_eta"):
        if any(not 0 < v <= 1 for v in each(key)):
            fail("efficiencies must lie in (0, 1]", key)
    if mode in ("iterate", "tradeoff"):
        if any(w <= 0 for w in each("window")):
            fail("the Fock engine needs a positive window; use collective or asymptotic for X = 0",
                 "window")
        if not 0 <= values["iterations"] <= MAX_ITERATIONS:
            fail(f"must lie in [0, {MAX_ITERATIONS}]", "iterations")
        if not 1 <= values["cutoff"] <= 80:
            fail("must lie in [1, 80]", "cutoff")
    else:
        if any(w != 0 for w in each("window")):
            fail(f"{mode} mode implements only zero-width conditioning (window 0)", "window")
    if mode == "collective":
        if any(n < 2 for n in each("N")):
            fail("need at least two copies", "N")
        if any(a == RANDOMIZED for a in each("theta")):
            fail("randomized conditioning is not available for the collective scheme", "theta")
        if values["strategy"] is not None:
            for strat in each("strategy"):
                if any(a == RANDOMIZED for a in strat):
                    fail("strategy angles must be numbers", "strategy")
                for n in each("N"):
                    if len(strat) != n - 1:
                        fail(f"{len(strat)} angles given for N = {n} (need N - 1)", "strategy")
        if "custom" in each("scheme"):
            t = values["transmittances"]
            if t is None:
                fail("scheme=custom requires transmittances", "scheme")
            if any(not 0 < v < 1 for v in t):
                fail("transmittances must lie in (0, 1)", "transmittances")
            if any(n != len(t) + 1 for n in each("N")):
                fail(f"{len(t)} transmittances fix N = {len(t) + 1}", "N")
    if mode == "asymptotic" and any(a == RANDOMIZED for a in each("theta")):
        fail("the limit is defined for a fixed conditioning angle", "theta")
    if values["nodes"] < 8:
        fail("need at least 8 nodes", "nodes")
    if values["samples"] < 10_000:
        fail("need at least 1e4 samples", "samples")
    if not 0 <= values["seed"] < 2**64:
        fail("must be an unsigned 64-bit integer", "seed")
    if not values["quad_tol"] > 0:
        fail("must be positive", "quad_tol")
    rs = values["r_schedule"]
    if len(rs) < 2 or any(b <= a for a, b in zip(rs, rs[1:])):
        fail("must be increasing with at least two entries", "r_schedule")
    return ExperimentConfig(values, frozenset(explicit), source)
