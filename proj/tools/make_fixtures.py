"""Regenerates the CSV fixtures under tests/fixtures."""
import datetime as dt
import pathlib

import numpy as np

out = pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def two_lines():
    rng = np.random.default_rng(2024)
    rows = []
    for label, slope in enumerate((2.0, -3.0)):
        for x in rng.uniform(0.1, 2.0, 100):
            rows.append((x, slope * x, label))
    with open(out / "two_lines.csv", "w") as f:
        f.write("x1,y,label\n")
        for x, y, label in rows:
            f.write(f"{float(x)!r},{float(y)!r},{label}\n")


def regime_series(n=2000, gap=0.3, sigma=0.01):
    # Two noisy logistic-map regimes offset by `gap`, alternating in blocks of
    # 150-350 steps. The maps never cross, but their ranges overlap.
    rng = np.random.default_rng(1)
    v = [0.3]
    regime = 0
    left = rng.integers(150, 350)
    while len(v) < n:
        if left == 0:
            regime = 1 - regime
            left = rng.integers(150, 350)
        left -= 1
        x = v[-1]
        y = (gap if regime == 0 else 0.0) + (1.0 - gap) * 4.0 * x * (1.0 - x) + rng.normal(0.0, sigma)
        v.append(min(1.0, max(0.0, y)))
    start = dt.date(2015, 1, 1)
    with open(out / "regime_series.csv", "w") as f:
        f.write("series_id,timestamp,value\n")
        for i, x in enumerate(v):
            f.write(f"regimes,{(start + dt.timedelta(days=i)).isoformat()},{float(x)!r}\n")


if __name__ == "__main__":
    two_lines()
    regime_series()
