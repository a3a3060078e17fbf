"""Run the end-to-end synthetic benchmark and print its headline numbers.

Trains the per-window ensembles once, then scores the three class cases plus
the raised-cap variant against the same ensembles (training never sees the
horizon classes). The acceptance suite asserts on exactly this routine.
"""

from __future__ import annotations

import sys
import time
from dataclasses import dataclass
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from rangecast.classify import ClassCase
from rangecast.dataio import MonthlySeries, TimePoint, parse_route_csv
from rangecast.evaluate import BacktestConfig, MetricsReport, score_case, train_windows
from rangecast.neuralnet import TrainOptions, pipeline_spec
from rangecast.sieve import SieveOptions

FIXTURE = Path(__file__).resolve().parents[1] / "tests" / "data" / "synthetic_benchmark.csv"
BENCHMARK_SEED = 1303
BENCHMARK_CUTOFF = TimePoint(2020, 5)
SHIFT_START = TimePoint(2022, 10)

#: Windows with at least half their horizon in the shifted regime.
POST_SHIFT_FROM = SHIFT_START.plus(-6)


def benchmark_config(seed: int = BENCHMARK_SEED, workers: int = 1) -> BacktestConfig:
    return BacktestConfig(
        cutoff=BENCHMARK_CUTOFF,
        seed=seed,
        spec=pipeline_spec((8,)),
        sieve=SieveOptions(
            seed=0,
            initial_candidates=40,
            survivor_target=20,
            reduction_factor=2.0,
            stage_epochs=(8,),
            final_epochs=60,
        ),
        train=TrainOptions(max_epochs=0),
        bootstrap_samples=10_000,
        workers=workers,
    )


def post_shift_hits(report: MetricsReport) -> int:
    return sum(
        1 for w in report.windows if w.window.start >= POST_SHIFT_FROM and w.error == 0
    )


@dataclass
class BenchmarkResult:
    precise: MetricsReport
    mean: MetricsReport
    approx: MetricsReport
    precise_cap12: MetricsReport


def load_series() -> MonthlySeries:
    return parse_route_csv(FIXTURE.read_text())[0]


def run(seed: int = BENCHMARK_SEED, workers: int = 1) -> BenchmarkResult:
    series = load_series()
    config = benchmark_config(seed=seed, workers=workers)
    artifacts = train_windows(series, config)
    return BenchmarkResult(
        precise=score_case(series.route_id, artifacts, ClassCase.PRECISE, config),
        mean=score_case(series.route_id, artifacts, ClassCase.MEAN, config),
        approx=score_case(series.route_id, artifacts, ClassCase.APPROXIMATED, config),
        precise_cap12=score_case(
            series.route_id, artifacts, ClassCase.PRECISE, config, class_cap=1.2
        ),
    )


def main() -> None:
    start = time.time()
    out = run(workers=4)
    elapsed = time.time() - start
    for name, report in [
        ("precise", out.precise), ("mean", out.mean),
        ("approx", out.approx), ("precise cap 1.2", out.precise_cap12),
    ]:
        print(
            f"{name:>16}: precision {report.precision_hits}/{report.n_windows}  "
            f"MAE {report.mae:8.1f}  MAPE {report.mape_pct:5.2f}%  "
            f"EV {report.explained_variance:6.3f}  "
            f"post-shift hits {post_shift_hits(report)}"
        )
    print(f"elapsed {elapsed:.1f}s")


if __name__ == "__main__":
    main()
