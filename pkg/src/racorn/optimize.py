"""Log-optimal and risk-penalized portfolios over a set of matched samples.

The objective for a long-only portfolio ``b`` over sample rows ``x`` is::

    value(b) = mean_x log(b.x) - lam * std_x log(b.x)

with the population standard deviation. ``lam = 0`` gives the log-optimal
(BCRP) portfolio of the samples.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from racorn._backend import kernels

CLIP_TOL = 1e-12


class OptimizerError(RuntimeError):
    pass


@dataclass(frozen=True)
class Objective:
    """Sample rows (``|C| x m``) and the risk-aversion coefficient."""

    match_rows: np.ndarray
    lam: float = 0.0

    def __post_init__(self) -> None:
        rows = np.ascontiguousarray(self.match_rows, dtype=np.float64)
        if rows.ndim != 2 or rows.shape[0] < 1:
            raise ValueError("objective needs at least one sample row")
        if not np.all(rows > 0) or not np.all(np.isfinite(rows)):
            raise ValueError("sample rows must be finite and strictly positive")
        if not self.lam >= 0:
            raise ValueError(f"risk aversion must be >= 0, got {self.lam}")
        rows.setflags(write=False)
        object.__setattr__(self, "match_rows", rows)
        object.__setattr__(self, "lam", float(self.lam))

    @property
    def m(self) -> int:
        return self.match_rows.shape[1]


@dataclass(frozen=True)
class SolverOptions:
    tolerance: float = 1e-8
    improvement_tolerance: float = 1e-10
    max_iterations: int = 2000
    smoothing: float = 1e-12


class Evaluation(NamedTuple):
    value: float
    mean_log: float
    risk: float


@dataclass(frozen=True)
class OptimizeResult:
    weights: np.ndarray
    converged: bool
    iterations: int
    pg_norm: float


def uniform(m: int) -> np.ndarray:
    return np.full(m, 1.0 / m)


def project_simplex(v) -> np.ndarray:
    return kernels.project_simplex(np.ascontiguousarray(v, dtype=np.float64))


def cleanup(b: np.ndarray) -> np.ndarray:
    """Clip round-off negatives to zero and renormalize."""
    b = np.asarray(b, dtype=np.float64)
    if b.min() < -CLIP_TOL:
        raise OptimizerError(f"portfolio weight {b.min()!r} below clip tolerance")
    b = np.where(b < 0, 0.0, b)
    return b / b.sum()


def evaluate(obj: Objective, b) -> Evaluation:
    b = np.asarray(b, dtype=np.float64)
    logs = np.log(obj.match_rows @ b)
    mean = logs.sum() / logs.size
    dev = logs - mean
    risk = math.sqrt((dev @ dev) / logs.size)
    value = mean - obj.lam * risk
    if not math.isfinite(value):
        raise OptimizerError("non-finite objective value")
    return Evaluation(float(value), float(mean), risk)


def objective_gradient(obj: Objective, b, smoothing: float = 0.0) -> np.ndarray:
    """Gradient of :func:`evaluate`'s value w.r.t. ``b`` (unconstrained)."""
    b = np.asarray(b, dtype=np.float64)
    rows = obj.match_rows
    r = rows @ b
    ratios = rows / r[:, None]
    n = r.size
    grad = ratios.sum(axis=0) / n
    if obj.lam:
        logs = np.log(r)
        dev = logs - logs.sum() / n
        sd = math.sqrt((dev @ dev) / n + smoothing)
        grad = grad - obj.lam * (dev @ ratios) / (n * sd)
    return grad


def _single_point(rows: np.ndarray) -> bool:
    return bool(np.all(rows == rows[0]))


def optimize(obj: Objective, opts: SolverOptions | None = None) -> OptimizeResult:
    """Maximize the objective over the simplex from the uniform portfolio.

    When every sample row is identical the risk term is constant and the
    optimum is the vertex of the largest relative (lowest index on ties).
    The result is never worse than the uniform portfolio.
    """
    opts = opts or SolverOptions()
    rows = obj.match_rows
    m = obj.m
    if _single_point(rows):
        b = np.zeros(m)
        b[int(np.argmax(rows[0]))] = 1.0
        return OptimizeResult(b, True, 0, 0.0)
    b, iterations, converged, pg_norm = kernels.solve_simplex(
        rows, obj.lam, opts.tolerance, opts.improvement_tolerance,
        opts.max_iterations, opts.smoothing,
    )
    b = cleanup(b)
    u = uniform(m)
    if evaluate(obj, b).value < evaluate(obj, u).value:
        b = u
    return OptimizeResult(b, bool(converged), int(iterations), float(pg_norm))


def simplex_grid(m: int, step: float) -> np.ndarray:
    """All simplex points with coordinates on multiples of ``step``, in lexicographic order."""
    k = round(1.0 / step)
    if not math.isclose(k * step, 1.0, rel_tol=1e-9):
        raise ValueError(f"grid step {step} does not divide 1")
    pts = [
        c + (k - sum(c),)
        for c in itertools.product(range(k + 1), repeat=m - 1)
        if sum(c) <= k
    ]
    return np.array(pts, dtype=np.float64) / k


def grid_oracle(obj: Objective, step: float) -> tuple[np.ndarray, float]:
    """Brute-force maximizer over a regular simplex grid (m <= 4).

    Ties resolve to the lexicographically smallest weight vector.
    """
    if obj.m > 4:
        raise ValueError(f"grid oracle refuses m={obj.m} > 4")
    grid = simplex_grid(obj.m, step)
    logs = np.log(grid @ obj.match_rows.T)
    mean = logs.mean(axis=1)
    risk = np.sqrt(((logs - mean[:, None]) ** 2).mean(axis=1))
    values = mean - obj.lam * risk
    best = int(np.argmax(values))
    return grid[best], float(values[best])
