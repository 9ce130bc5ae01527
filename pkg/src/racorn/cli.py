"""Command-line entry point: ``racorn backtest | validate | sweep``."""

from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

import numpy as np

from racorn.backtest import (
    BASELINES,
    EG,
    BacktestReport,
    format_table,
    metrics_table_csv,
    run,
    write_report,
)
from racorn.config import ConfigError, RunConfig, _check_key, load_config
from racorn.ensemble import RACORN_C, STRATEGIES, CornEnsemble
from racorn.market_data import DataError, PriceSeries, derive_relatives, load_csv

SUSPICIOUS_HIGH = 5.0
SUSPICIOUS_LOW = 0.2


def _load_series(cfg: RunConfig):
    if not cfg.data:
        raise ConfigError("no dataset given (use --data or [data] data = ...)")
    loaded = load_csv(cfg.data, cfg.mode)
    return derive_relatives(loaded) if isinstance(loaded, PriceSeries) else loaded


def _strategy(cfg: RunConfig, name: str):
    if name in STRATEGIES:
        return CornEnsemble(cfg.ensemble(name), workers=cfg.workers)
    if name == "EG":
        return EG(cfg.eg_eta)
    return BASELINES[name]()


def _run_one(cfg: RunConfig, series, name: str) -> BacktestReport:
    strat = _strategy(cfg, name)
    try:
        prov = cfg.provenance()
        prov["strategies"] = [name]
        return run(series, strat, prov, cfg.risk_free_rate, cfg.periods_per_year)
    finally:
        if isinstance(strat, CornEnsemble):
            strat.close()


def _resolve(args) -> RunConfig:
    cfg = load_config(args.config)
    direct = {"data": args.data, "mode": args.mode, "out": args.out, "workers": args.workers}
    for key, value in direct.items():
        if value is not None:
            cfg = cfg.override(key, str(value))
    if getattr(args, "strategy", None):
        cfg = cfg.override("strategies", ",".join(args.strategy))
    for item in args.set or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        cfg = cfg.override(key.strip(), value)
    return cfg


class _Outputs:
    """Tracks written files so a failed run can remove them."""

    def __init__(self):
        self.paths: list[Path] = []

    def write(self, path: Path, text: str) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        self.paths.append(path)

    def rollback(self) -> None:
        for p in self.paths:
            p.unlink(missing_ok=True)


def cmd_backtest(args) -> int:
    outputs = _Outputs()
    try:
        cfg = _resolve(args)
        series = _load_series(cfg)
        out = Path(cfg.out)
        reports = []
        for name in cfg.strategies:
            report = _run_one(cfg, series, name)
            outputs.paths.extend(write_report(report, out))
            reports.append(report)
        outputs.write(out / "metrics.csv", metrics_table_csv(reports))
    except (ConfigError, DataError, OSError, ValueError) as exc:
        outputs.rollback()
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"{series.n} periods x {series.m} assets")
    print(format_table([(r.strategy, r.metrics) for r in reports]))
    return 0


def lint_csv(path: str | Path, mode: str) -> tuple[dict, list[str], list[str]]:
    """Scan a dataset and collect every violation instead of stopping at the first."""
    path = Path(path)
    errors: list[str] = []
    warnings: list[str] = []
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            rows = [(i, r) for i, r in enumerate(csv.reader(fh), start=1) if any(c.strip() for c in r)]
    except (OSError, UnicodeDecodeError) as exc:
        return {}, [f"cannot read {path}: {exc}"], warnings
    if len(rows) < 2:
        return {}, [f"{path}: empty file or header only"], warnings
    header = [h.strip() for h in rows[0][1]]
    first = rows[1][1][0].strip()
    try:
        float(first)
        dated = False
    except ValueError:
        dated = True
    names = header[1:] if dated else header
    grid = []
    for lineno, row in rows[1:]:
        cells = [c.strip() for c in row][1 if dated else 0 :]
        if len(cells) != len(names):
            errors.append(f"line {lineno}: expected {len(names)} values, got {len(cells)}")
            continue
        vals = []
        for name, c in zip(names, cells):
            try:
                v = float(c)
            except ValueError:
                errors.append(f"line {lineno}, column {name!r}: non-numeric cell {c!r}")
                v = math.nan
            else:
                if not (math.isfinite(v) and v > 0):
                    errors.append(f"line {lineno}, column {name!r}: non-positive or non-finite value {c}")
                elif mode == "relatives" and not SUSPICIOUS_LOW <= v <= SUSPICIOUS_HIGH:
                    warnings.append(f"line {lineno}, column {name!r}: suspicious relative {v:g}")
            vals.append(v)
        grid.append(vals)
    info = {"assets": len(names), "rows": len(rows) - 1}
    good = np.array([r for r in grid if all(math.isfinite(v) and v > 0 for v in r)], dtype=float)
    if good.size:
        rel = good if mode == "relatives" else good[1:] / good[:-1]
        if rel.size:
            info["min"] = float(rel.min())
            info["max"] = float(rel.max())
    info["periods"] = info["rows"] if mode == "relatives" else info["rows"] - 1
    return info, errors, warnings


def cmd_validate(args) -> int:
    mode = args.mode or "relatives"
    if not args.data:
        print("error: --data is required", file=sys.stderr)
        return 2
    info, errors, warnings = lint_csv(args.data, mode)
    if info:
        print(f"{args.data}: {info['periods']} periods x {info['assets']} assets ({mode})")
        if "min" in info:
            print(f"relatives: min {info['min']:.4f}, max {info['max']:.4f}")
    for w in warnings:
        print(f"warning: {w}")
    for e in errors:
        print(f"violation: {e}")
    print("valid" if not errors else f"invalid: {len(errors)} violation(s)")
    return 0 if not errors else 1


def _sweep_config(cfg: RunConfig, strategy: str, axis: str, value: str) -> RunConfig:
    if axis == "lambda_max":
        top = float(value)
        key = "lambda_grid_c" if strategy == RACORN_C else "lambda_grid"
        steps = int(round(top / 0.01))
        return replace(cfg, **{key: tuple(round(i * 0.01, 10) for i in range(steps + 1))})
    return cfg.override(axis, value)


def cmd_sweep(args) -> int:
    outputs = _Outputs()
    try:
        cfg = _resolve(args)
        if len(cfg.strategies) != 1:
            raise ConfigError("sweep needs exactly one --strategy")
        strategy = cfg.strategies[0]
        if args.axis != "lambda_max":
            _check_key(args.axis)
        values = args.value
        if not values:
            raise ConfigError("sweep needs at least one --value")
        series = _load_series(cfg)
        rows = []
        reports = []
        for v in values:
            vcfg = _sweep_config(cfg, strategy, args.axis, v)
            report = _run_one(vcfg, series, strategy)
            report.strategy = f"{strategy}[{args.axis}={v}]"
            reports.append(report)
            rows.append((v, report.metrics))
        out = Path(cfg.out)
        outputs.write(out / f"sweep_{strategy}_{args.axis}.csv", metrics_table_csv(reports, key="run"))
    except (ConfigError, DataError, OSError, ValueError) as exc:
        outputs.rollback()
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(format_table(rows, label=args.axis))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="racorn", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, strategies=True):
        sp.add_argument("--config", help="INI config file")
        sp.add_argument("--data", help="dataset CSV")
        sp.add_argument("--mode", choices=("prices", "relatives"), help="how to read --data")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--workers", type=int, help="threads for expert solves")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
        if strategies:
            sp.add_argument(
                "--strategy", action="append",
                help=f"strategy to run (repeatable): {', '.join(STRATEGIES + tuple(BASELINES))}",
            )

    bt = sub.add_parser("backtest", help="run strategies and write reports")
    common(bt)
    bt.set_defaults(func=cmd_backtest)

    va = sub.add_parser("validate", help="check a dataset file")
    va.add_argument("--data", required=True)
    va.add_argument("--mode", choices=("prices", "relatives"))
    va.set_defaults(func=cmd_validate)

    sw = sub.add_parser("sweep", help="vary one setting for one strategy")
    common(sw)
    sw.add_argument("--axis", required=True, help="config key, or lambda_max")
    sw.add_argument("--value", action="append", help="axis value (repeatable)")
    sw.set_defaults(func=cmd_sweep)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
