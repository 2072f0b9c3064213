"""Command-line front end.

    sfctl run CONFIG [--out DIR]
    sfctl compare CONFIG CONFIG [...] [--out DIR]
    sfctl sweep CONFIG --param section.key --values v1,v2,... [--out DIR]

Exit codes: 0 success, 2 configuration error, 3 divergence during a run.
Logging verbosity comes from ``SFCTL_LOG_LEVEL`` (error, info or debug).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from .config import ConfigError, ExperimentConfig, _split, parse_config
from .sim import METRIC_NAMES, RunResult, SimulationDiverged, _unique_labels, compare_runs, run_experiment

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3

LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}

log = logging.getLogger("sfctl")


def _setup_logging() -> None:
    name = os.environ.get("SFCTL_LOG_LEVEL", "error").strip().lower()
    level = LOG_LEVELS.get(name, logging.ERROR)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if name not in LOG_LEVELS:
        log.warning("unknown SFCTL_LOG_LEVEL %r, using error", name)


def _load(path: str, args: argparse.Namespace) -> ExperimentConfig:
    try:
        cfg = parse_config(path)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if args.dt is not None:
        cfg = cfg.with_value("experiment.dt", args.dt)
    if args.horizon is not None:
        cfg = cfg.with_value("experiment.horizon", args.horizon)
    return cfg


def _write_result(out: Path, stem: str, result: RunResult) -> None:
    result.log.write_csv(out / f"{stem}.csv")
    (out / f"{stem}.metrics.txt").write_text(result.metrics.to_text(), encoding="utf-8")


def _write_partial(out: Path, stem: str, exc: SimulationDiverged) -> None:
    if exc.log is not None:
        exc.log.write_csv(out / f"{stem}.partial.csv")
    print(f"error: run {stem!r} diverged at t={exc.t:.6g}: {exc}", file=sys.stderr)


def cmd_run(args: argparse.Namespace) -> int:
    cfg = _load(args.config, args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        result = run_experiment(cfg)
    except SimulationDiverged as exc:
        _write_partial(out, cfg.name, exc)
        return EXIT_DIVERGED
    _write_result(out, cfg.name, result)
    print(result.metrics.to_text(), end="")
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    configs = [_load(p, args) for p in args.configs]
    if len(configs) < 2:
        raise ConfigError("compare needs at least two configs")
    labels = _unique_labels(configs)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        comparison = compare_runs(configs, labels)
    except ValueError as exc:
        if isinstance(exc, SimulationDiverged):
            raise
        raise ConfigError(str(exc)) from None
    for label, result in zip(labels, comparison.results):
        _write_result(out, label, result)
    table = comparison.table()
    (out / "comparison.txt").write_text(table, encoding="utf-8")
    print(table, end="")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    base = _load(args.config, args)
    values = _split(args.values)
    if not values:
        raise ConfigError("--values needs at least one entry")
    # validate every point before running any of them
    configs = [base.with_value(args.param, v) for v in values]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = [",".join(["value", "status", *METRIC_NAMES])]
    status = EXIT_OK
    for k, (raw, cfg) in enumerate(zip(values, configs)):
        stem = f"{base.name}_{k + 1}"
        try:
            result = run_experiment(cfg)
        except SimulationDiverged as exc:
            _write_partial(out, stem, exc)
            rows.append(",".join([raw, "diverged"] + ["nan"] * len(METRIC_NAMES)))
            status = EXIT_DIVERGED
            continue
        _write_result(out, stem, result)
        metrics = [format(getattr(result.metrics, name), ".17g") for name in METRIC_NAMES]
        rows.append(",".join([raw, "ok", *metrics]))
    text = f"# param = {args.param}\n" + "\n".join(rows) + "\n"
    (out / "sweep.csv").write_text(text, encoding="utf-8")
    print(text, end="")
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sfctl", description="Adaptive backstepping controller simulations.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=".", help="output directory (created if missing)")
    common.add_argument("--dt", help="override experiment.dt")
    common.add_argument("--horizon", help="override experiment.horizon")
    common.add_argument("--seed", type=int, help="reserved; runs are deterministic and ignore it")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", parents=[common], help="run one experiment")
    p.add_argument("config")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", parents=[common], help="run several configs and tabulate metrics")
    p.add_argument("configs", nargs="+")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep", parents=[common], help="run one config across values of a parameter")
    p.add_argument("config")
    p.add_argument("--param", required=True, help="section.key, e.g. gains.beta_z")
    p.add_argument("--values", required=True, help="comma-separated values")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse usage errors count as configuration errors
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
