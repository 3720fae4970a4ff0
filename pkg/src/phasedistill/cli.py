"""
Command line runner.

    phasedistill iterate|collective|asymptotic|tradeoff [--config FILE]
    phasedistill figure NAME
    phasedistill sweep --config FILE

Exit codes: 0 success, 2 configuration error, 3 numerical accuracy failure,
4 I/O failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

import yaml

from .config import ConfigError, load, parse_text
from .runner import PointError, list_presets, load_preset, run, write_outputs

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

log = logging.getLogger("phasedistill")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="YAML configuration file")
    p.add_argument("--out", default="results", help="output directory (default: results)")
    p.add_argument("--plot", action="store_true", help="also write one SVG per panel")
    p.add_argument("--cache", help="directory for cached Fock states")
    p.add_argument("--threads", type=int, default=1, help="worker processes for grid points")
    p.add_argument("--seed", type=int, help="Monte Carlo seed (unsigned 64-bit)")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config key (YAML value syntax); repeatable")
    p.add_argument("-v", "--verbose", action="count", default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phasedistill",
                                     description="Purification of phase-diffused squeezed light.")
    sub = parser.add_subparsers(dest="command", required=True)
    for mode in ("iterate", "collective", "asymptotic", "tradeoff"):
        _common(sub.add_parser(mode, help=f"run the {mode} engine"))
    fig = sub.add_parser("figure", help="run a committed figure preset")
    fig.add_argument("name", nargs="?", help="preset name (see --list) or a preset file")
    fig.add_argument("--list", action="store_true", help="list available presets")
    _common(fig)
    sw = sub.add_parser("sweep", help="run the grid described by a config file")
    _common(sw)
    return parser


def _overrides(args) -> dict:
    out = {}
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, text = item.split("=", 1)
        try:
            out[key.strip()] = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"--set {key}: {exc}") from None
    if args.seed is not None:
        out["seed"] = args.seed
    return out


def _resolve(args):
    overrides = _overrides(args)
    if args.command == "figure":
        if not args.name:
            raise ConfigError("figure needs a preset name (see --list)")
        return load_preset(args.name, overrides)
    if args.command == "sweep":
        if not args.config:
            raise ConfigError("sweep needs --config")
        return load(args.config, overrides)
    if args.config:
        cfg = load(args.config, overrides)
        if "mode" in cfg.explicit and cfg.mode != args.command:
            raise ConfigError(f"config declares mode {cfg.mode!r} but command is {args.command!r}",
                              "mode")
        if cfg.mode == args.command:
            return cfg
        return load(args.config, dict(overrides, mode=args.command))
    return parse_text("", "<defaults>", dict(overrides, mode=args.command))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "figure" and args.list:
        print("\n".join(list_presets()))
        return EXIT_OK
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        config = _resolve(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        table = run(config, cache_dir=args.cache, threads=args.threads)
    except PointError as exc:
        print(f"numerical failure {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        paths = write_outputs(config, table, args.out, plot=args.plot)
    except (OSError, ImportError) as exc:
        print(f"I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    for p in paths:
        print(p)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
