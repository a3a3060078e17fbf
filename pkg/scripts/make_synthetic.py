"""Generate the committed synthetic benchmark series.

A 180-month seasonal count series with exponential-like dispersion (monthly
SNR in the 1-2 band, matching the kind of route data the forecaster targets),
a historical crisis episode in 2015-16, and a late level shift in 2022-10 into
a regime above most historical values. Written as canonical CSV to
tests/data/synthetic_benchmark.csv; regenerating with unchanged parameters is
byte-identical.
"""

from __future__ import annotations

import math
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from rangecast.dataio import MonthlySeries, TimePoint, serialize_route_csv

ROUTE = "SYNWAR"
START = TimePoint(2009, 1)
MONTHS = 180
BASE = 300.0
TREND_PER_MONTH = 0.002
SEASON_AMPLITUDE = 0.35
SEASON_PHASE = 7  # peak month
NOISE_SIGMA = 0.55  # lognormal; keeps per-month SNR in the realistic 1-2 band
CRISIS = (72, 90, 3.0)  # 2015-01 .. 2016-06, tripled level
SHIFT_MONTH_INDEX = 165  # 0-based; 2022-10 onward is the new regime
SHIFT_FACTOR = 1.6
SEED = 104


def generate() -> MonthlySeries:
    rng = np.random.Generator(np.random.PCG64(SEED))
    values = []
    for i in range(MONTHS):
        month = START.plus(i).month
        season = 1.0 + SEASON_AMPLITUDE * math.sin(
            2.0 * math.pi * (month - SEASON_PHASE) / 12.0
        )
        level = BASE * (1.0 + TREND_PER_MONTH) ** i * season
        if CRISIS[0] <= i < CRISIS[1]:
            level *= CRISIS[2]
        if i >= SHIFT_MONTH_INDEX:
            level *= SHIFT_FACTOR
        noise = math.exp(rng.normal(-NOISE_SIGMA * NOISE_SIGMA / 2.0, NOISE_SIGMA))
        values.append(max(1, int(round(level * noise))))
    return MonthlySeries(ROUTE, START, tuple(values))


def main() -> None:
    series = generate()
    out = Path(__file__).resolve().parents[1] / "tests" / "data" / "synthetic_benchmark.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(serialize_route_csv([series]))
    shift_tp = START.plus(SHIFT_MONTH_INDEX)
    print(f"wrote {out}")
    print(f"  {series.route_id}: {series.start}..{series.end} ({len(series)} months)")
    print(f"  crisis {START.plus(CRISIS[0])}..{START.plus(CRISIS[1] - 1)} "
          f"(factor {CRISIS[2]})")
    print(f"  regime shift at {shift_tp} (factor {SHIFT_FACTOR})")
    print(f"  pre-shift max {max(series.values[:SHIFT_MONTH_INDEX])}, "
          f"post-shift mean {np.mean(series.values[SHIFT_MONTH_INDEX:]):.0f}")


if __name__ == "__main__":
    main()
