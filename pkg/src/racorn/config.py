"""Run configuration: INI-style file with strict keys and standard default grids.

Example::

    [data]
    data = djia.csv
    mode = relatives

    [strategy]
    strategies = CORN-K, RACORN-K, RACORN-C-K
    rho_grid = 0:0.9:0.1     # inclusive start:stop:step
    lambda_grid = 0, 0.01, 0.02, 0.03

Grid values are comma lists or inclusive ``start:stop:step`` ranges.
"""

from __future__ import annotations

import configparser
import difflib
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any

from racorn.backtest import BASELINES
from racorn.ensemble import (
    CORN,
    DEFAULT_LAMBDA_GRID,
    DEFAULT_RHO_GRID,
    DEFAULT_W_GRID,
    INNER_WEIGHTINGS,
    RACORN,
    RACORN_C,
    STRATEGIES,
    EnsembleConfig,
)
from racorn.optimize import SolverOptions


class ConfigError(ValueError):
    pass


def parse_grid(text: str) -> tuple[float, ...]:
    text = text.strip()
    if not text:
        raise ConfigError("empty grid")
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0 or parts[1] < parts[0]:
            raise ConfigError(f"bad range {text!r}; use start:stop:step with step > 0")
        start, stop, step = parts
        n = int(round((stop - start) / step))
        return tuple(round(start + i * step, 10) for i in range(n + 1))
    return tuple(float(p) for p in text.split(",") if p.strip())


def _names(text: str) -> tuple[str, ...]:
    return tuple(p.strip() for p in text.split(",") if p.strip())


@dataclass(frozen=True)
class RunConfig:
    data: str = ""
    mode: str = "relatives"
    strategies: tuple[str, ...] = (CORN, RACORN, RACORN_C)
    w_grid: tuple[int, ...] = DEFAULT_W_GRID
    rho_grid: tuple[float, ...] = DEFAULT_RHO_GRID
    lambda_grid: tuple[float, ...] = DEFAULT_LAMBDA_GRID[RACORN]
    lambda_grid_c: tuple[float, ...] = DEFAULT_LAMBDA_GRID[RACORN_C]
    top_fraction: float = 0.10
    inner_weighting: str = "unnormalized"
    eg_eta: float = 0.05
    tolerance: float = SolverOptions.tolerance
    improvement_tolerance: float = SolverOptions.improvement_tolerance
    max_iterations: int = SolverOptions.max_iterations
    smoothing: float = SolverOptions.smoothing
    risk_free_rate: float = 0.0
    periods_per_year: int = 252
    out: str = "results"
    workers: int = 1

    def __post_init__(self) -> None:
        if self.mode not in ("prices", "relatives"):
            raise ConfigError(f"mode must be 'prices' or 'relatives', got {self.mode!r}")
        known = STRATEGIES + tuple(BASELINES)
        for s in self.strategies:
            if s not in known:
                raise ConfigError(f"unknown strategy {s!r}; choose from {', '.join(known)}")
        if not self.strategies:
            raise ConfigError("no strategies selected")
        if self.inner_weighting not in INNER_WEIGHTINGS:
            raise ConfigError(f"inner_weighting must be one of {INNER_WEIGHTINGS}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.periods_per_year < 1:
            raise ConfigError("periods_per_year must be >= 1")
        for s in self.strategies:
            if s in STRATEGIES:
                try:
                    self.ensemble(s)
                except ValueError as exc:
                    raise ConfigError(str(exc)) from None

    @property
    def solver(self) -> SolverOptions:
        return SolverOptions(
            self.tolerance, self.improvement_tolerance, self.max_iterations, self.smoothing
        )

    def ensemble(self, strategy: str) -> EnsembleConfig:
        lam = {CORN: None, RACORN: self.lambda_grid, RACORN_C: self.lambda_grid_c}[strategy]
        return EnsembleConfig(
            strategy, self.w_grid, self.rho_grid, lam,
            self.top_fraction, self.inner_weighting, self.solver,
        )

    def provenance(self) -> dict[str, Any]:
        """Resolved settings that determine results (excludes paths and worker count)."""
        d = asdict(self)
        for k in ("out", "workers", "data"):
            d.pop(k)
        return d

    def override(self, key: str, value: str) -> RunConfig:
        return replace(self, **{_check_key(key): _convert(key, value)})


SECTIONS: dict[str, tuple[str, ...]] = {
    "data": ("data", "mode"),
    "strategy": (
        "strategies", "w_grid", "rho_grid", "lambda_grid", "lambda_grid_c",
        "top_fraction", "inner_weighting", "eg_eta",
    ),
    "solver": ("tolerance", "improvement_tolerance", "max_iterations", "smoothing"),
    "metrics": ("risk_free_rate", "periods_per_year"),
    "output": ("out", "workers"),
}
KEYS = {k: s for s, ks in SECTIONS.items() for k in ks}
assert set(KEYS) == {f.name for f in fields(RunConfig)}


def _suggest(word: str, options) -> str:
    close = difflib.get_close_matches(word, list(options), n=1)
    return f"; did you mean {close[0]!r}?" if close else ""


def _check_key(key: str) -> str:
    if key not in KEYS:
        raise ConfigError(f"unknown config key {key!r}{_suggest(key, KEYS)}")
    return key


def _convert(key: str, value: str) -> Any:
    value = value.strip()
    try:
        if key == "strategies":
            return _names(value)
        if key == "w_grid":
            grid = parse_grid(value)
            if any(int(w) != w for w in grid):
                raise ConfigError(f"w_grid must hold integers, got {value!r}")
            return tuple(int(w) for w in grid)
        if key.endswith("_grid") or key == "lambda_grid_c":
            return parse_grid(value)
        if key in ("max_iterations", "periods_per_year", "workers"):
            return int(value)
        if key in ("data", "mode", "inner_weighting", "out"):
            return value
        return float(value)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad value for {key}: {value!r} ({exc})") from None


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    values: dict[str, Any] = {}
    for section in parser.sections():
        if section not in SECTIONS:
            raise ConfigError(f"{source}: unknown section [{section}]{_suggest(section, SECTIONS)}")
        for key, raw in parser.items(section):
            _check_key(key)
            if KEYS[key] != section:
                raise ConfigError(f"{source}: key {key!r} belongs in [{KEYS[key]}], not [{section}]")
            values[key] = _convert(key, raw)
    return RunConfig(**values)


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return RunConfig()
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, str(path))


def dump_config(cfg: RunConfig) -> str:
    """Render ``cfg`` in the file format, every key explicit."""
    d = asdict(cfg)
    lines = []
    for section, keys in SECTIONS.items():
        lines.append(f"[{section}]")
        for k in keys:
            v = d[k]
            text = ", ".join(str(x) for x in v) if isinstance(v, tuple) else str(v)
            lines.append(f"{k} = {text}")
        lines.append("")
    return "\n".join(lines)
