"""Sequential replay, naive baselines and performance metrics."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Protocol, Sequence

import numpy as np

from racorn.market_data import PriceRelativeSeries


class Strategy(Protocol):
    name: str

    def reset(self) -> None: ...

    def step(self, history: np.ndarray) -> np.ndarray: ...

    def observe(self, x: np.ndarray) -> None: ...


class UBAH:
    """Uniform buy-and-hold: buy 1/m of each asset once, then let weights drift."""

    name = "UBAH"

    def reset(self) -> None:
        self._b = None

    def step(self, history: np.ndarray) -> np.ndarray:
        if self._b is None:
            self._b = np.full(history.shape[1], 1.0 / history.shape[1])
        return self._b

    def observe(self, x: np.ndarray) -> None:
        grown = self._b * x
        self._b = grown / grown.sum()


class UCRP:
    """Uniform constant rebalanced portfolio."""

    name = "UCRP"

    def reset(self) -> None:
        pass

    def step(self, history: np.ndarray) -> np.ndarray:
        return np.full(history.shape[1], 1.0 / history.shape[1])

    def observe(self, x: np.ndarray) -> None:
        pass


class EG:
    """Exponentiated gradient (Helmbold et al.) with learning rate ``eta``."""

    name = "EG"

    def __init__(self, eta: float = 0.05):
        self.eta = eta

    def reset(self) -> None:
        self._b = None

    def step(self, history: np.ndarray) -> np.ndarray:
        if self._b is None:
            self._b = np.full(history.shape[1], 1.0 / history.shape[1])
        return self._b

    def observe(self, x: np.ndarray) -> None:
        b = self._b * np.exp(self.eta * x / (self._b @ x))
        self._b = b / b.sum()


BASELINES = {"UBAH": UBAH, "UCRP": UCRP, "EG": EG}


@dataclass(frozen=True)
class WealthCurve:
    values: np.ndarray
    period_labels: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size < 1 or not np.all(v > 0):
            raise ValueError("wealth curve must be a non-empty, strictly positive sequence")
        object.__setattr__(self, "values", v)


@dataclass
class BacktestReport:
    strategy: str
    config: dict[str, Any]
    wealth: WealthCurve
    portfolios: np.ndarray
    metrics: dict[str, float]
    unconverged: int = 0
    asset_names: tuple[str, ...] = field(default=())


def max_drawdown(curve: WealthCurve | Sequence[float]) -> float:
    v = curve.values if isinstance(curve, WealthCurve) else np.asarray(curve, dtype=np.float64)
    peaks = np.maximum.accumulate(v)
    return float(max(0.0, np.max(1.0 - v / peaks)))


def sharpe_ratio(
    curve: WealthCurve | Sequence[float], rf: float = 0.0, periods_per_year: int = 252
) -> float:
    """Annualized Sharpe ratio of the per-period simple returns.

    Uses the sample standard deviation. When the returns do not vary the
    ratio is +/-inf by the sign of the mean excess return, or nan when that
    mean is zero.
    """
    v = curve.values if isinstance(curve, WealthCurve) else np.asarray(curve, dtype=np.float64)
    if v.size < 3:
        raise ValueError("Sharpe ratio needs at least two returns")
    r = v[1:] / v[:-1] - 1.0
    excess = r.mean() - rf / periods_per_year
    sd = r.std(ddof=1)
    if sd <= 1e-14 * max(1.0, abs(r.mean())):
        return math.nan if excess == 0 else math.copysign(math.inf, excess)
    return float(excess / sd * math.sqrt(periods_per_year))


def run(
    series: PriceRelativeSeries,
    strategy: Strategy,
    config: dict[str, Any] | None = None,
    rf: float = 0.0,
    periods_per_year: int = 252,
) -> BacktestReport:
    """Replay ``strategy`` over ``series``; period ``t`` sees rows ``< t`` only."""
    rel = series.relatives
    n, m = rel.shape
    if n < 2:
        raise ValueError(f"backtest needs at least 2 periods, got {n}")
    strategy.reset()
    wealth = np.empty(n + 1)
    wealth[0] = 1.0
    portfolios = np.empty((n, m))
    for t in range(n):
        b = np.asarray(strategy.step(rel[:t] if t else rel[:0]), dtype=np.float64)
        if b.shape != (m,) or not np.all(b >= 0) or abs(b.sum() - 1.0) > 1e-9:
            raise ValueError(f"period {t}: {strategy.name} emitted an invalid portfolio {b!r}")
        portfolios[t] = b
        ret = float(b @ rel[t])
        if not ret > 0:
            raise ValueError(f"period {t}: non-positive portfolio return {ret!r}")
        wealth[t + 1] = wealth[t] * ret
        strategy.observe(rel[t])
    curve = WealthCurve(wealth, (series.start_label, *series.period_labels))
    metrics = {
        "ret": float(wealth[-1]),
        "sharpe": sharpe_ratio(curve, rf, periods_per_year),
        "mdd": max_drawdown(curve),
    }
    return BacktestReport(
        strategy.name,
        dict(config or {}),
        curve,
        portfolios,
        metrics,
        int(getattr(strategy, "unconverged", 0)),
        series.asset_names,
    )


def _num(x: float) -> float | str:
    x = float(x)
    if math.isfinite(x):
        return x
    return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def report_to_json(report: BacktestReport) -> str:
    """Deterministic JSON; floats use the shortest repr that round-trips."""
    doc = {
        "strategy": report.strategy,
        "config": _jsonable(report.config),
        "metrics": _jsonable(report.metrics),
        "unconverged": report.unconverged,
        "assets": list(report.asset_names),
        "period_labels": list(report.wealth.period_labels),
        "wealth": [_num(v) for v in report.wealth.values],
        "portfolios": [[_num(v) for v in row] for row in report.portfolios],
    }
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def wealth_csv(report: BacktestReport) -> str:
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(["period_label", "wealth"])
    labels = report.wealth.period_labels or tuple(str(i) for i in range(report.wealth.values.size))
    for label, v in zip(labels, report.wealth.values):
        out.writerow([label, format(v, ".17g")])
    return buf.getvalue()


def metrics_table_csv(reports: Sequence[BacktestReport], key: str = "strategy") -> str:
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow([key, "RET", "SR", "MDD"])
    for r in reports:
        out.writerow([r.strategy] + [format(r.metrics[k], ".17g") for k in ("ret", "sharpe", "mdd")])
    return buf.getvalue()


def _fmt(x: float, digits: int) -> str:
    if math.isnan(x):
        return "undefined"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.{digits}f}"


def format_table(rows: Sequence[tuple[str, dict[str, float]]], label: str = "strategy") -> str:
    """Human-readable RET / SR / MDD table."""
    width = max([len(label)] + [len(name) for name, _ in rows])
    lines = [f"{label:<{width}}  {'RET':>10}  {'SR':>8}  {'MDD':>6}"]
    for name, m in rows:
        lines.append(
            f"{name:<{width}}  {_fmt(m['ret'], 4):>10}  {_fmt(m['sharpe'], 2):>8}  {_fmt(m['mdd'], 2):>6}"
        )
    return "\n".join(lines)


def write_report(report: BacktestReport, out_dir: str | Path, stem: str | None = None) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = stem or report.strategy
    paths = [out_dir / f"{stem}.json", out_dir / f"{stem}_wealth.csv"]
    paths[0].write_text(report_to_json(report), encoding="utf-8")
    paths[1].write_text(wealth_csv(report), encoding="utf-8")
    return paths
