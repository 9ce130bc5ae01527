"""Expert grids and ensembles for CORN-K, RACORN-K and RACORN(C)-K.

Each expert ``(w, rho[, lam])`` proposes a portfolio from the samples that
followed windows correlated with the current one. The ensemble keeps the
experts with the largest accumulated wealth and averages their portfolios
weighted by that wealth.

RACORN(C)-K first merges, for every ``(w, rho)``, the portfolios obtained
under each ``lam`` using weights ``exp(sum_j log(b.x_j))`` over the matched
samples (or the per-sample mean of the logs in the ``normalized`` variant),
then ensembles the merged ``(w, rho)`` experts as CORN-K does.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from racorn.market_data import PriceRelativeSeries
from racorn.optimize import Objective, SolverOptions, optimize, uniform
from racorn.pattern import matches_from_correlations, window_correlations

CORN = "CORN-K"
RACORN = "RACORN-K"
RACORN_C = "RACORN-C-K"
STRATEGIES = (CORN, RACORN, RACORN_C)

INNER_WEIGHTINGS = ("unnormalized", "normalized")


def _steps(start: float, stop: float, step: float) -> tuple[float, ...]:
    n = int(round((stop - start) / step))
    return tuple(round(start + i * step, 10) for i in range(n + 1))


DEFAULT_W_GRID = (1, 2, 3, 4, 5)
DEFAULT_RHO_GRID = _steps(0.0, 0.9, 0.1)
DEFAULT_LAMBDA_GRID = {CORN: (0.0,), RACORN: _steps(0.0, 0.03, 0.01), RACORN_C: _steps(0.0, 0.1, 0.01)}


@dataclass(frozen=True, order=True)
class ExpertSpec:
    w: int
    rho: float
    lam: float = 0.0

    def __post_init__(self) -> None:
        if int(self.w) != self.w or self.w < 1:
            raise ValueError(f"window width must be a positive integer, got {self.w}")
        if not 0.0 <= self.rho < 1.0:
            raise ValueError(f"correlation threshold must lie in [0, 1), got {self.rho}")
        if not self.lam >= 0.0:
            raise ValueError(f"risk aversion must be >= 0, got {self.lam}")


@dataclass(frozen=True)
class ExpertState:
    spec: ExpertSpec
    wealth: float = 1.0
    last_portfolio: np.ndarray | None = None


class Decision(NamedTuple):
    weights: np.ndarray
    status: str  # "warmup" | "empty" | "converged" | "unconverged"


@dataclass(frozen=True)
class EnsembleConfig:
    strategy: str = CORN
    w_grid: tuple[int, ...] = DEFAULT_W_GRID
    rho_grid: tuple[float, ...] = DEFAULT_RHO_GRID
    lambda_grid: tuple[float, ...] | None = None
    top_fraction: float = 0.10
    inner_weighting: str = "unnormalized"
    solver: SolverOptions = field(default_factory=SolverOptions)

    def __post_init__(self) -> None:
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}; expected one of {STRATEGIES}")
        lam = DEFAULT_LAMBDA_GRID[self.strategy] if self.lambda_grid is None else self.lambda_grid
        object.__setattr__(self, "w_grid", tuple(int(w) for w in self.w_grid))
        object.__setattr__(self, "rho_grid", tuple(float(r) for r in self.rho_grid))
        object.__setattr__(self, "lambda_grid", tuple(float(x) for x in lam))
        if not (self.w_grid and self.rho_grid and self.lambda_grid):
            raise ValueError("parameter grids must be non-empty")
        if not 0.0 < self.top_fraction <= 1.0:
            raise ValueError(f"top_fraction must lie in (0, 1], got {self.top_fraction}")
        if self.inner_weighting not in INNER_WEIGHTINGS:
            raise ValueError(f"inner_weighting must be one of {INNER_WEIGHTINGS}")
        if self.strategy == CORN and self.lambda_grid != (0.0,):
            raise ValueError("CORN-K takes no risk-aversion grid")
        self.expert_specs()  # validates every grid point

    def expert_specs(self) -> list[ExpertSpec]:
        """Experts in grid order; RACORN-C-K's outer experts carry lam = 0."""
        lams = self.lambda_grid if self.strategy == RACORN else (0.0,)
        specs = [ExpertSpec(w, r, l) for w, r, l in itertools.product(self.w_grid, self.rho_grid, lams)]
        expected = len(self.w_grid) * len(self.rho_grid) * len(lams)
        assert len(specs) == expected
        return specs


def _rel(series: PriceRelativeSeries | np.ndarray) -> np.ndarray:
    rel = series.relatives if isinstance(series, PriceRelativeSeries) else series
    return np.ascontiguousarray(rel, dtype=np.float64)


def _solve(rel: np.ndarray, idx: np.ndarray, lam: float, opts: SolverOptions) -> Decision:
    res = optimize(Objective(rel[idx], lam), opts)
    return Decision(res.weights, "converged" if res.converged else "unconverged")


def expert_portfolio(
    series: PriceRelativeSeries | np.ndarray,
    t: int,
    spec: ExpertSpec,
    opts: SolverOptions | None = None,
) -> Decision:
    """Portfolio of one expert for period ``t`` using rows ``< t`` only."""
    rel = _rel(series)
    m = rel.shape[1]
    if t < spec.w:
        return Decision(uniform(m), "warmup")
    idx = matches_from_correlations(window_correlations(rel, t, spec.w), spec.w, spec.rho)
    if idx.size == 0:
        return Decision(uniform(m), "empty")
    return _solve(rel, idx, spec.lam, opts or SolverOptions())


def update_wealth(state: ExpertState, x) -> ExpertState:
    ret = float(np.dot(state.last_portfolio, x))
    if not ret > 0:
        raise ValueError(f"non-positive period return {ret!r} for {state.spec}")
    return replace(state, wealth=state.wealth * ret)


def top_count(n: int, top_fraction: float) -> int:
    return max(1, min(n, math.ceil(top_fraction * n - 1e-9)))


def topk_combine(
    experts: Sequence[ExpertState], portfolios: Sequence[np.ndarray], top_fraction: float
) -> np.ndarray:
    """Wealth-weighted average of the top experts' portfolios.

    Ties in wealth go to the smaller ``(w, rho, lam)``; the sum runs in the
    given (grid) order.
    """
    if not experts:
        raise ValueError("no experts to combine")
    if len(experts) != len(portfolios):
        raise ValueError("one portfolio per expert required")
    k = top_count(len(experts), top_fraction)
    ranked = sorted(range(len(experts)), key=lambda i: (-experts[i].wealth, experts[i].spec))
    chosen = sorted(ranked[:k])
    if k == 1:
        return np.array(portfolios[chosen[0]], dtype=np.float64)
    acc = np.zeros(len(portfolios[chosen[0]]))
    total = 0.0
    for i in chosen:
        acc += experts[i].wealth * np.asarray(portfolios[i])
        total += experts[i].wealth
    return acc / total


def combine_lambda_portfolios(
    rows: np.ndarray, portfolios: Sequence[np.ndarray], normalized: bool = False
) -> np.ndarray:
    """Merge per-lam portfolios by their in-sample growth on ``rows``."""
    scores = np.array([np.log(rows @ b).sum() for b in portfolios])
    if normalized:
        scores /= rows.shape[0]
    weights = np.exp(scores - scores.max())
    total = weights.sum()
    assert total > 0
    acc = np.zeros(rows.shape[1])
    for wgt, b in zip(weights, portfolios):
        acc += wgt * b
    return acc / total


def racorn_c_inner(
    series: PriceRelativeSeries | np.ndarray,
    t: int,
    w: int,
    rho: float,
    lambda_grid: Iterable[float],
    opts: SolverOptions | None = None,
    normalized: bool = False,
) -> np.ndarray:
    rel = _rel(series)
    m = rel.shape[1]
    if t < w:
        return uniform(m)
    idx = matches_from_correlations(window_correlations(rel, t, w), w, rho)
    if idx.size == 0:
        return uniform(m)
    opts = opts or SolverOptions()
    bs = [_solve(rel, idx, lam, opts).weights for lam in lambda_grid]
    return combine_lambda_portfolios(rel[idx], bs, normalized)


class CornEnsemble:
    """Stateful CORN-K / RACORN-K / RACORN(C)-K strategy.

    ``step(history)`` receives rows ``0 .. t-1`` and returns the portfolio for
    period ``t``; ``observe(x_t)`` then credits every expert with period ``t``.
    """

    def __init__(self, config: EnsembleConfig | None = None, workers: int = 1):
        self.config = config or EnsembleConfig()
        self.name = self.config.strategy
        self.workers = max(1, int(workers))
        self._pool = ThreadPoolExecutor(self.workers) if self.workers > 1 else None
        self.reset()

    def reset(self) -> None:
        self.experts = [ExpertState(s) for s in self.config.expert_specs()]
        self.unconverged = 0
        self.solves = 0

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def _map(self, fn, items):
        if self._pool is None or len(items) < 2:
            return [fn(it) for it in items]
        return list(self._pool.map(fn, items))

    def step(self, history: PriceRelativeSeries | np.ndarray) -> np.ndarray:
        rel = _rel(history)
        t, m = rel.shape
        cfg = self.config
        corr = {w: window_correlations(rel, t, w) for w in cfg.w_grid if t >= w}

        # (w, rho) -> matched indices; identical sets share their solves
        matches = {}
        for w, c in corr.items():
            for rho in cfg.rho_grid:
                matches[w, rho] = matches_from_correlations(c, w, rho)
        lams = cfg.lambda_grid if cfg.strategy != CORN else (0.0,)
        jobs = {}
        for idx in matches.values():
            if idx.size:
                key = idx.tobytes()
                for lam in lams:
                    jobs.setdefault((key, lam), idx)
        keys = list(jobs)
        results = self._map(lambda k: _solve(rel, jobs[k], k[1], cfg.solver), keys)
        solved = dict(zip(keys, results))
        self.solves += len(results)
        self.unconverged += sum(r.status == "unconverged" for r in results)

        u = uniform(m)
        portfolios = []
        for e in self.experts:
            s = e.spec
            idx = matches.get((s.w, s.rho))
            if idx is None or idx.size == 0:
                portfolios.append(u)
            elif cfg.strategy == RACORN_C:
                bs = [solved[idx.tobytes(), lam].weights for lam in lams]
                portfolios.append(
                    combine_lambda_portfolios(rel[idx], bs, cfg.inner_weighting == "normalized")
                )
            else:
                portfolios.append(solved[idx.tobytes(), s.lam].weights)
        self.experts = [replace(e, last_portfolio=b) for e, b in zip(self.experts, portfolios)]
        return topk_combine(self.experts, portfolios, cfg.top_fraction)

    def observe(self, x) -> None:
        self.experts = [update_wealth(e, x) for e in self.experts]
