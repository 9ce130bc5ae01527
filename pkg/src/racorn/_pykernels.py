"""Pure-numpy implementations of the hot kernels.

Used when the compiled ``_ckernels`` extension is unavailable or when
``RACORN_PURE_PYTHON=1`` is set. Both backends implement the same algorithms
step for step; they agree to rounding, not bit for bit, because numpy's
reductions use pairwise summation.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

ARMIJO = 1e-4
MIN_STEP = 1e-16
MAX_STEP = 1e10


def window_correlations(rel: np.ndarray, t: int, w: int) -> np.ndarray:
    """Pearson correlation of the window ending before ``t`` with every earlier window.

    Entry ``i`` holds the correlation between the flattened rows ``t-w..t-1``
    and the flattened rows ``k-w..k-1`` for ``k = w + i``, ``k < t``.
    Zero-variance windows correlate as 0.
    """
    n_cand = t - w
    if n_cand <= 0:
        return np.empty(0)
    m = rel.shape[1]
    flat = sliding_window_view(rel[:t], (w, m))[:, 0].reshape(t - w + 1, w * m)
    cur = flat[-1]
    cand = flat[:-1]
    if cur.max() == cur.min():
        return np.zeros(n_cand)
    cc = cur - cur.sum() / cur.size
    ss_cur = float(cc @ cc)
    centered = cand - cand.sum(axis=1, keepdims=True) / cur.size
    ss = np.einsum("ij,ij->i", centered, centered)
    cross = centered @ cc
    flat_rows = cand.max(axis=1) == cand.min(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        corr = cross / np.sqrt(ss * ss_cur)
    corr[flat_rows] = 0.0
    return np.clip(corr, -1.0, 1.0)


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort-based)."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    idx = np.arange(1, v.size + 1)
    cond = u - (css - 1.0) / idx > 0
    r = idx[cond][-1]
    theta = (css[r - 1] - 1.0) / r
    return np.maximum(v - theta, 0.0)


def _value(rows: np.ndarray, b: np.ndarray, lam: float, smoothing: float) -> float:
    logs = np.log(rows @ b)
    mean = logs.sum() / logs.size
    if lam == 0.0:
        return float(mean)
    dev = logs - mean
    var = (dev @ dev) / logs.size
    return float(mean - lam * math.sqrt(var + smoothing))


def _value_grad(
    rows: np.ndarray, b: np.ndarray, lam: float, smoothing: float
) -> tuple[float, np.ndarray]:
    r = rows @ b
    logs = np.log(r)
    n = logs.size
    ratios = rows / r[:, None]
    mean = logs.sum() / n
    grad = ratios.sum(axis=0) / n
    if lam == 0.0:
        return float(mean), grad
    dev = logs - mean
    sd = math.sqrt((dev @ dev) / n + smoothing)
    grad = grad - lam * (dev @ ratios) / (n * sd)
    return float(mean - lam * sd), grad


def solve_simplex(
    rows: np.ndarray,
    lam: float,
    tol: float,
    improvement_tol: float,
    max_iter: int,
    smoothing: float,
) -> tuple[np.ndarray, int, bool, float]:
    """Projected gradient ascent of ``mean log(b.x) - lam * std log(b.x)``.

    Returns ``(b, iterations, converged, pg_norm)``. Trial steps follow the
    Barzilai-Borwein rule (first trial 1.0) and are halved until an Armijo
    sufficient-increase test passes.
    """
    m = rows.shape[1]
    b = np.full(m, 1.0 / m)
    f, g = _value_grad(rows, b, lam, smoothing)
    step = 1.0
    prev_b = prev_g = None
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        pg_norm = float(np.linalg.norm(project_simplex(b + g) - b))
        if pg_norm < tol:
            converged = True
            break
        if prev_b is not None:
            sb = b - prev_b
            sy = float(sb @ (g - prev_g))
            step = float(sb @ sb) / -sy if sy < 0.0 else 2.0 * step
            step = min(max(step, 1e-10), MAX_STEP)
        while True:
            cand = project_simplex(b + step * g)
            fc = _value(rows, cand, lam, smoothing)
            if fc >= f + ARMIJO * float(g @ (cand - b)):
                break
            step *= 0.5
            if step < MIN_STEP:
                break
        if step < MIN_STEP:
            converged = True
            break
        prev_b, prev_g = b, g
        gain = fc - f
        b = cand
        f, g = _value_grad(rows, b, lam, smoothing)
        if gain <= improvement_tol * max(1.0, abs(f)):
            converged = True
            break
    pg_norm = float(np.linalg.norm(project_simplex(b + g) - b))
    return b, it, converged, pg_norm
