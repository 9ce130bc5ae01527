"""CORN-K pattern-matching portfolio selection with risk-aversion variants.

Strategies: CORN-K, RACORN-K and RACORN(C)-K, plus UBAH, UCRP and EG
baselines, a sequential backtest engine and RET / Sharpe / max-drawdown
metrics.
"""

from racorn._backend import BACKEND
from racorn.backtest import (
    EG,
    UBAH,
    UCRP,
    BacktestReport,
    WealthCurve,
    max_drawdown,
    run,
    sharpe_ratio,
)
from racorn.ensemble import (
    CornEnsemble,
    EnsembleConfig,
    ExpertSpec,
    ExpertState,
    expert_portfolio,
    racorn_c_inner,
    topk_combine,
    update_wealth,
)
from racorn.market_data import (
    DataError,
    MarketWindow,
    PriceRelativeSeries,
    PriceSeries,
    derive_relatives,
    load_csv,
    window,
    write_csv,
)
from racorn.optimize import (
    Evaluation,
    Objective,
    SolverOptions,
    evaluate,
    grid_oracle,
    objective_gradient,
    optimize,
)
from racorn.pattern import MatchSet, find_matches, pearson

__all__ = [
    "BACKEND", "EG", "UBAH", "UCRP", "BacktestReport", "WealthCurve", "max_drawdown", "run",
    "sharpe_ratio", "CornEnsemble", "EnsembleConfig", "ExpertSpec", "ExpertState",
    "expert_portfolio", "racorn_c_inner", "topk_combine", "update_wealth", "DataError",
    "MarketWindow", "PriceRelativeSeries", "PriceSeries", "derive_relatives", "load_csv",
    "window", "write_csv", "Evaluation", "Objective", "SolverOptions", "evaluate",
    "grid_oracle", "objective_gradient", "optimize", "MatchSet", "find_matches", "pearson",
]
