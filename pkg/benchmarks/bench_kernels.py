"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from racorn import _pykernels

try:
    from racorn import _ckernels
except ImportError:
    _ckernels = None

CASES = {
    "window_correlations (500x30, w=5)": lambda k, rel, rows: k.window_correlations(rel, 500, 5),
    "solve_simplex (40x30, lam=0.05)": lambda k, rel, rows: k.solve_simplex(rows, 0.05, 1e-8, 1e-10, 2000, 1e-12),
}

FULL_RUN = """
import time
from racorn import CornEnsemble, EnsembleConfig, PriceRelativeSeries, run
import numpy as np
rel = np.exp(np.random.default_rng(0).normal(0, 0.02, (250, 10)))
ens = CornEnsemble(EnsembleConfig("CORN-K"))
t = time.perf_counter()
run(PriceRelativeSeries(rel, ()), ens)
print(time.perf_counter() - t)
"""


def full_run(pure: bool) -> float:
    env = dict(os.environ, RACORN_PURE_PYTHON="1" if pure else "0")
    out = subprocess.run([sys.executable, "-c", FULL_RUN], env=env, capture_output=True, text=True, check=True)
    return float(out.stdout)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()

    rng = np.random.default_rng(1)
    rel = np.ascontiguousarray(np.exp(rng.normal(0, 0.02, (500, 30))))
    rows = np.ascontiguousarray(rel[:40])
    backends = [("python", _pykernels)] + ([("cython", _ckernels)] if _ckernels else [])

    print(f"{'case':40s} " + " ".join(f"{name:>12s}" for name, _ in backends) + "   speedup")
    for label, fn in CASES.items():
        times = [min(timeit.repeat(lambda: fn(k, rel, rows), number=1, repeat=args.repeat)) for _, k in backends]
        speed = f"{times[0] / times[1]:8.1f}x" if len(times) > 1 else ""
        print(f"{label:40s} " + " ".join(f"{t * 1e3:10.3f}ms" for t in times) + f"  {speed}")

    py = full_run(pure=True)
    line = f"{'CORN-K run (250x10, default grid)':40s} {py:11.3f}s"
    if _ckernels:
        cy = full_run(pure=False)
        line += f" {cy:11.3f}s  {py / cy:8.1f}x"
    print(line)


if __name__ == "__main__":
    main()
