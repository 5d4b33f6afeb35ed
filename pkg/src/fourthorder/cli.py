"""Command-line entry point: ``fourthorder run | list-scenarios | validate``."""

from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

from . import __version__
from .harness import (
    ConfigError,
    SweepPointError,
    bundled_config_path,
    bundled_configs,
    emit_outputs,
    load_config,
    run_sweep,
    Z_MAX,
)
from .interferometer import RegimeWarning, ScenarioKind


def _resolve(spec: str) -> Path:
    p = Path(spec)
    if p.exists():
        return p
    return bundled_config_path(spec)


def _cmd_run(args) -> int:
    cfg = load_config(_resolve(args.config)).with_overrides(args.realizations, args.seed)
    with warnings.catch_warnings():
        warnings.simplefilter("always", RegimeWarning)
        report = run_sweep(cfg, workers=args.workers)
    data, summary = emit_outputs(report, output_dir=args.output_dir)
    print(f"{cfg.name}: {len(report.rows)} points, max |z| = {report.max_abs_z:.3f}, "
          f"fraction |z| <= 3 = {report.fraction_within:.3f}")
    if report.fit is not None:
        f = report.fit
        print(f"  fringe fit: visibility = {f.visibility:.4f} +/- {f.visibility_err:.4f}, "
              f"period = {f.period:.6g} +/- {f.period_err:.2g}")
    print(f"  wrote {data}")
    print(f"  wrote {summary}")
    status = "PASS" if report.passed else "FAIL"
    print(f"  {status} (max |z| threshold {Z_MAX:g})")
    return 0 if report.passed else 1


def _cmd_list(args) -> int:
    print("scenario kinds:")
    for k in ScenarioKind:
        print(f"  {k.value}")
    print("bundled configs:")
    for name in bundled_configs():
        cfg = load_config(bundled_config_path(name))
        print(f"  {name:24s} {cfg.scenario.value:22s} sweep {cfg.sweep.variable}")
    return 0


def _cmd_validate(args) -> int:
    cfg = load_config(_resolve(args.config)).with_overrides(args.realizations, args.seed)
    print(f"{cfg.name}: valid ({cfg.scenario.value}, sweep {cfg.sweep.variable} "
          f"x{cfg.sweep.steps}, {cfg.ensemble.realizations} realizations, seed {cfg.ensemble.seed})")
    if cfg.applied_defaults:
        print("  defaults applied: " + ", ".join(cfg.applied_defaults))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fourthorder", description=__doc__)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("config", help="path to a YAML config, or the name of a bundled config")
        sp.add_argument("--realizations", type=int, default=None, help="override ensemble.realizations")
        sp.add_argument("--seed", type=int, default=None, help="override ensemble.seed")

    r = sub.add_parser("run", help="run a sweep and write data and summary files")
    common(r)
    r.add_argument("--output-dir", default=".", help="directory for relative output paths")
    r.add_argument("--workers", type=int, default=1, help="worker processes (results do not depend on it)")
    r.set_defaults(func=_cmd_run)

    v = sub.add_parser("validate", help="check a config without running it")
    common(v)
    v.set_defaults(func=_cmd_validate)

    ls = sub.add_parser("list-scenarios", help="list scenario kinds and bundled configs")
    ls.set_defaults(func=_cmd_list)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "workers", 1) is not None and getattr(args, "workers", 1) < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SweepPointError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
