"""Command-line entry point: ``scan``, ``validate``, ``spectrum`` and ``figdata``."""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .convertibility import alpha_c_profile
from .errors import (
    CapacityError,
    ConfigError,
    DomainError,
    GridError,
    InvalidBipartitionError,
    InvalidSizeError,
    SectorAmbiguityError,
    ValidationFailure,
)
from .scan import ScanConfig, config_from_mapping, parse_config_text, run_scan, spectrum_for
from .validation import DEFAULT_SEED, DEFAULT_TOL, SUITES, run_suite

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_CAPACITY = 3
EXIT_CONFIG = 4

FIGURE_PRESETS = {
    # single plaquette, infinite lattice
    "fig4": dict(model="rowfield-thin", L="3", bipartition="plaquette:0", lam="linspace:0.1:2.0:39"),
    # two adjacent stars, infinite lattice, with the inverse-gap column
    "fig5": dict(model="rowfield-bulk", L="4", bipartition="twostar:5", lam="linspace:0.05:2.0:40"),
    # plaquette plus two spins under V3 along lam_x = lam_z
    "fig7": dict(model="v3-ed", L="3", bipartition="plaqplus2:4", lam="0.01,0.02,0.03,0.04,0.05"),
    # 3x3 block of a 6x3 cluster-state torus
    "fig8": dict(model="cluster-ed", lx="6", ly="3", block="0,0,3,3", lam="0.02,0.04,0.06,0.08,0.1"),
}


def load_config(path: str | None, overrides: list[str]) -> ScanConfig:
    values: dict = {}
    if path:
        try:
            with open(path) as fh:
                values.update(parse_config_text(fh.read()))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override must be key=value, got {item!r}")
        k, v = item.split("=", 1)
        values[k.strip()] = v.strip()
    return config_from_mapping(values)


def _apply_flags(cfg: ScanConfig, args) -> ScanConfig:
    kw = {}
    if getattr(args, "threads", None):
        kw["threads"] = args.threads
    if getattr(args, "tol", None) is not None:
        kw["epsilon"] = args.tol
    if getattr(args, "out", None):
        kw["out"] = args.out
    return cfg.replace(**kw) if kw else cfg


def _write(text: str, path: str | None) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _alpha_c_summary(result) -> str:
    if result.signs is None:
        return ""
    lines = []
    for i, ac in enumerate(alpha_c_profile(result.signs)):
        if ac is not None:
            p = result.surface.parameter_grid[i]
            lines.append(f"# alpha_c at {np.round(p, 6).tolist()}: {ac:.4f}")
    return "\n".join(lines)


def cmd_scan(args) -> int:
    cfg = _apply_flags(load_config(args.config, args.overrides), args)
    result = run_scan(cfg)
    _write(result.to_csv(), cfg.out)
    summary = _alpha_c_summary(result)
    if summary:
        print(summary, file=sys.stderr)
    return EXIT_OK


def cmd_validate(args) -> int:
    report = run_suite(args.suite, seed=args.seed, tol=args.tol if args.tol is not None else DEFAULT_TOL)
    _write(report.render(), args.out)
    return EXIT_OK if report.passed else EXIT_VALIDATION


def cmd_spectrum(args) -> int:
    cfg = load_config(args.config, args.overrides)
    values = spectrum_for(cfg, args.index)
    text = "\n".join(repr(float(v)) for v in values) + "\n"
    _write(text, args.out)
    return EXIT_OK


def cmd_figdata(args) -> int:
    preset = dict(FIGURE_PRESETS[args.figure])
    for item in args.overrides:
        if "=" not in item:
            raise ConfigError(f"override must be key=value, got {item!r}")
        k, v = item.split("=", 1)
        preset[k.strip()] = v.strip()
    cfg = _apply_flags(config_from_mapping(preset), args)
    out = cfg.out or f"{args.figure}.csv"
    result = run_scan(cfg.replace(out=out))
    _write(result.to_csv(), out)
    summary = _alpha_c_summary(result)
    if summary:
        print(summary, file=sys.stderr)
    print(f"wrote {os.path.abspath(out)}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="toric-dlocc",
                                     description="Renyi-entropy convertibility scans of perturbed toric codes.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_tol=True):
        p.add_argument("--threads", type=int, default=None, help="worker threads for scan points")
        if with_tol:
            p.add_argument("--tol", type=float, default=None, help="sign dead zone / validation tolerance")
        p.add_argument("--out", default=None, help="output path (default: stdout)")

    p = sub.add_parser("scan", help="scan a model and write the CSV table")
    p.add_argument("config", nargs="?", help="flat key = value config file")
    p.add_argument("overrides", nargs="*", help="key=value overrides")
    common(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("validate", help="run an oracle comparison suite")
    p.add_argument("suite", choices=SUITES)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("spectrum", help="dump one entanglement spectrum")
    p.add_argument("config", nargs="?")
    p.add_argument("overrides", nargs="*")
    p.add_argument("--index", type=int, default=0, help="grid point to evaluate")
    common(p, with_tol=False)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("figdata", help="write the data behind a named figure")
    p.add_argument("figure", choices=sorted(FIGURE_PRESETS))
    p.add_argument("overrides", nargs="*", help="key=value overrides of the preset")
    common(p)
    p.set_defaults(func=cmd_figdata)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    # a config path containing '=' is really an override
    if getattr(args, "config", None) and "=" in args.config:
        args.overrides = [args.config] + list(args.overrides)
        args.config = None
    try:
        return args.func(args)
    except ValidationFailure as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except CapacityError as exc:
        print(f"capacity exceeded: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (ConfigError, InvalidBipartitionError, InvalidSizeError, DomainError, GridError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SectorAmbiguityError as exc:
        print(f"sector ambiguity: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
