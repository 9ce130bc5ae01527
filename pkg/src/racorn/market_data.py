"""Price series, price relatives, CSV I/O and market windows.

CSV layout: a header row of asset tickers, then one row per trading period.
The first column may hold a date label; it is detected by a non-numeric
first cell in the first data row (the header cell above it is ignored).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Sequence

import numpy as np


class DataError(ValueError):
    """Raised for malformed or invalid market data."""


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PriceSeries:
    """Closing prices, one row per period and one column per asset."""

    closes: np.ndarray
    asset_names: tuple[str, ...]
    period_labels: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        closes = _freeze(self.closes)
        if closes.ndim != 2 or closes.shape[0] < 2 or closes.shape[1] < 1:
            raise DataError(f"prices must be an n x m grid with n >= 2, got shape {closes.shape}")
        _check_positive(closes, "close")
        object.__setattr__(self, "closes", closes)
        object.__setattr__(self, "asset_names", _names(self.asset_names, closes.shape[1]))
        object.__setattr__(self, "period_labels", _labels(self.period_labels, closes.shape[0]))

    @property
    def n_raw(self) -> int:
        return self.closes.shape[0]

    @property
    def m(self) -> int:
        return self.closes.shape[1]


@dataclass(frozen=True)
class PriceRelativeSeries:
    """Per-period price relatives ``x[t, i] = P(t, i) / P(t-1, i)``.

    ``period_labels[t]`` names the period whose close ends relative ``t``;
    ``start_label`` names the period before the first relative.
    """

    relatives: np.ndarray
    asset_names: tuple[str, ...]
    period_labels: tuple[str, ...] = field(default=())
    start_label: str = "start"

    def __post_init__(self) -> None:
        rel = _freeze(self.relatives)
        if rel.ndim != 2 or rel.shape[0] < 1 or rel.shape[1] < 1:
            raise DataError(f"relatives must be a non-empty n x m grid, got shape {rel.shape}")
        _check_positive(rel, "relative")
        object.__setattr__(self, "relatives", rel)
        object.__setattr__(self, "asset_names", _names(self.asset_names, rel.shape[1]))
        object.__setattr__(self, "period_labels", _labels(self.period_labels, rel.shape[0]))

    @property
    def n(self) -> int:
        return self.relatives.shape[0]

    @property
    def m(self) -> int:
        return self.relatives.shape[1]

    def head(self, t: int) -> PriceRelativeSeries:
        """The first ``t`` periods."""
        return PriceRelativeSeries(
            self.relatives[:t], self.asset_names, self.period_labels[:t], self.start_label
        )


@dataclass(frozen=True)
class MarketWindow:
    """Rows ``anchor-width .. anchor-1`` flattened day by day."""

    flat: np.ndarray
    anchor: int
    width: int


def _names(names: Sequence[str], m: int) -> tuple[str, ...]:
    names = tuple(str(s) for s in names) if names else tuple(f"A{i}" for i in range(m))
    if len(names) != m:
        raise DataError(f"expected {m} asset names, got {len(names)}")
    return names


def _labels(labels: Sequence[str], n: int) -> tuple[str, ...]:
    labels = tuple(str(s) for s in labels) if labels else tuple(str(i) for i in range(n))
    if len(labels) != n:
        raise DataError(f"expected {n} period labels, got {len(labels)}")
    return labels


def _check_positive(a: np.ndarray, what: str) -> None:
    bad = ~(np.isfinite(a) & (a > 0))
    if bad.any():
        row, col = np.argwhere(bad)[0]
        raise DataError(
            f"non-positive or non-finite {what} at row {row}, column {col}: {float(a[row, col])!r}"
        )


def derive_relatives(prices: PriceSeries) -> PriceRelativeSeries:
    closes = prices.closes
    return PriceRelativeSeries(
        closes[1:] / closes[:-1],
        prices.asset_names,
        prices.period_labels[1:],
        prices.period_labels[0],
    )


def window(series: PriceRelativeSeries | np.ndarray, t: int, w: int) -> MarketWindow:
    """Market window for period ``t`` (zero-based): rows ``t-w .. t-1``."""
    rel = series.relatives if isinstance(series, PriceRelativeSeries) else series
    if w < 1 or t < w or t > rel.shape[0]:
        raise IndexError(f"window(t={t}, w={w}) out of range for {rel.shape[0]} periods")
    return MarketWindow(rel[t - w : t].reshape(-1).copy(), t, w)


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def load_csv(
    path: str | Path, mode: Literal["prices", "relatives"]
) -> PriceSeries | PriceRelativeSeries:
    """Read a price or price-relative CSV.

    Line numbers in errors count the header as line 1.
    """
    if mode not in ("prices", "relatives"):
        raise ValueError(f"mode must be 'prices' or 'relatives', got {mode!r}")
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [(i, r) for i, r in enumerate(csv.reader(fh), start=1) if any(c.strip() for c in r)]
    if not rows:
        raise DataError(f"{path}: empty file")
    _, header = rows[0]
    body = rows[1:]
    if not body:
        raise DataError(f"{path}: no data rows after header")
    has_dates = not _is_number(body[0][1][0].strip()) if body[0][1] else False
    names = [h.strip() for h in (header[1:] if has_dates else header)]
    m = len(names)
    labels, values = [], []
    for lineno, row in body:
        cells = [c.strip() for c in row]
        if has_dates:
            labels.append(cells[0])
            cells = cells[1:]
        if len(cells) != m or any(c == "" for c in cells):
            raise DataError(f"{path}: line {lineno}: expected {m} values, got {sum(1 for c in cells if c)}")
        try:
            parsed = [float(c) for c in cells]
        except ValueError:
            bad = next(c for c in cells if not _is_number(c))
            raise DataError(f"{path}: line {lineno}: non-numeric cell {bad!r}") from None
        for col, v in enumerate(parsed):
            if not (math.isfinite(v) and v > 0):
                raise DataError(
                    f"{path}: line {lineno}, column {names[col]!r}: non-positive or non-finite value {v!r}"
                )
        values.append(parsed)
    grid = np.array(values, dtype=np.float64)
    if mode == "prices":
        if grid.shape[0] < 2:
            raise DataError(f"{path}: prices mode needs at least 2 rows")
        return PriceSeries(grid, tuple(names), tuple(labels))
    return PriceRelativeSeries(grid, tuple(names), tuple(labels))


def write_csv(path: str | Path, series: PriceSeries | PriceRelativeSeries) -> None:
    """Write ``series`` in the layout :func:`load_csv` reads.

    The label column is omitted when the first label is numeric, since the
    reader could not tell it apart from a price.
    """
    if isinstance(series, PriceSeries):
        grid, labels = series.closes, series.period_labels
    else:
        grid, labels = series.relatives, series.period_labels
    dated = not _is_number(labels[0])
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow((["date"] if dated else []) + list(series.asset_names))
        for label, row in zip(labels, grid):
            out.writerow(([label] if dated else []) + [format(v, ".17g") for v in row])
