"""Fetch the DJIA and MSCI datasets and write them as price-relative CSVs.

The files come from the ``universal-portfolios`` wheel, which stores each
dataset as prices normalized so that every asset starts at 1 before the
first row. Prepending that row of ones and taking ratios gives the
relatives (507 x 30 for DJIA, 1043 x 24 for MSCI).

Usage: python scripts/fetch_olps_data.py [OUT_DIR]   (default tests/data)
"""

from __future__ import annotations

import subprocess
import sys
import tempfile
import zipfile
from pathlib import Path

import numpy as np

WHEEL = "universal-portfolios==0.4.16"
DATASETS = ("djia", "msci")


def convert(csv_text: str) -> tuple[list[str], np.ndarray]:
    lines = csv_text.strip().splitlines()
    names = lines[0].split(",")
    prices = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    prices = np.vstack([np.ones(prices.shape[1]), prices])
    return names, prices[1:] / prices[:-1]


def main(out_dir: str = "tests/data") -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run(
            [sys.executable, "-m", "pip", "download", WHEEL, "--no-deps", "-d", tmp, "-q"],
            check=True,
        )
        wheel = next(Path(tmp).glob("*.whl"))
        with zipfile.ZipFile(wheel) as zf:
            for name in DATASETS:
                names, rel = convert(zf.read(f"universal/data/{name}.csv").decode())
                target = out / f"{name}.csv"
                with target.open("w", encoding="utf-8") as fh:
                    fh.write(",".join(names) + "\n")
                    for row in rel:
                        fh.write(",".join(format(v, ".17g") for v in row) + "\n")
                print(f"{target}: {rel.shape[0]} periods x {rel.shape[1]} assets")


if __name__ == "__main__":
    main(*sys.argv[1:])
