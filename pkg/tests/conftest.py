from __future__ import annotations

import math
from pathlib import Path

import hypothesis
import numpy as np
import pytest

from rangecast.dataio import MonthlySeries, TimePoint

hypothesis.settings.register_profile(
    "suite", max_examples=50, deadline=None, derandomize=True
)
hypothesis.settings.load_profile("suite")

DATA_DIR = Path(__file__).parent / "data"


def seasonal_series(
    route_id: str = "SYN",
    start: TimePoint = TimePoint(2009, 1),
    months: int = 120,
    base: float = 200.0,
    amplitude: float = 0.6,
    trend: float = 0.003,
    noise: float = 0.10,
    seed: int = 7,
) -> MonthlySeries:
    """Positive seasonal counts with mild trend and lognormal noise."""
    rng = np.random.Generator(np.random.PCG64(seed))
    values = []
    for i in range(months):
        month = start.plus(i).month
        season = 1.0 + amplitude * math.sin(2.0 * math.pi * month / 12.0)
        level = base * season * (1.0 + trend * i)
        values.append(int(round(level * math.exp(rng.normal(0.0, noise)))))
    return MonthlySeries(route_id, start, tuple(values))


@pytest.fixture
def series_10y() -> MonthlySeries:
    return seasonal_series(months=120)


def mini_dataset_csv() -> str:
    """Two dispersed 64-month routes; deterministic, used by CLI/service tests."""
    from rangecast.dataio import serialize_route_csv

    routes = []
    for route_id, base, seed in (("ALPHA", 160.0, 11), ("BETA", 420.0, 12)):
        rng = np.random.Generator(np.random.PCG64(seed))
        values = []
        for i in range(64):
            month = TimePoint(2018, 1).plus(i).month
            season = 1.0 + 0.3 * math.sin(2.0 * math.pi * month / 12.0)
            noise = math.exp(rng.normal(-0.125, 0.5))
            values.append(max(1, int(round(base * season * noise))))
        routes.append(MonthlySeries(route_id, TimePoint(2018, 1), tuple(values)))
    return serialize_route_csv(routes)


MINI_CONFIG = """\
data = mini_dataset.csv
out = out
seed = 4242
cutoff = 2022-02
spec.hidden = 3
sieve.initial = 16
sieve.survivors = 8
sieve.reduction = 2
sieve.stage_epochs = 3
sieve.final_epochs = 25
bootstrap.samples = 500
cv.repetitions = 2
cv.train_epochs = 20
"""


@pytest.fixture
def mini_workspace(tmp_path) -> Path:
    """Directory holding the mini dataset and a fast config file."""
    (tmp_path / "mini_dataset.csv").write_text(mini_dataset_csv())
    (tmp_path / "run.cfg").write_text(MINI_CONFIG)
    return tmp_path
