"""Rolling backtest over the validation tail, error metrics, hyperparameter
tuning by repeated random sub-sampling, and the three-case sensitivity runner.

Scoring uses the nearest-bound convention: a window inside its forecast range
contributes zero error, otherwise the distance to the closest endpoint.
"""

from __future__ import annotations

import csv
import dataclasses
import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .classify import (
    CLASS_LEVELS,
    ClassCase,
    alter_case,
    classify_series,
    classify_value,
    monthly_stats,
)
from .dataio import (
    MIN_TRAINING_MONTHS,
    CovariateRow,
    MonthlySeries,
    ScalingParams,
    TimePoint,
    ValidationWindow,
    build_design,
    covariate_rows,
    fit_scaling,
    make_windows,
)
from .forecast import DEFAULT_BOOTSTRAP_SAMPLES, HorizonRequest, forecast_route
from .neuralnet import (
    NetworkSpec,
    TrainOptions,
    forward,
    init_weights,
    lm_train,
    pipeline_spec,
)
from .sieve import Ensemble, SieveOptions, derive_seed, sieve_select


def default_grid() -> tuple[NetworkSpec, ...]:
    """One hidden layer of 4/8/12/16 neurons, tanh and logistic."""
    return tuple(
        pipeline_spec((h,), activation=act)
        for act in ("tanh", "logistic")
        for h in (4, 8, 12, 16)
    )


@dataclass(frozen=True)
class CvOptions:
    """Repeated random sub-sampling settings for hyperparameter tuning."""

    repetitions: int = 20
    holdout_fraction: float = 0.15
    seed: int = 0
    train_epochs: int = 150
    tie_tol: float = 0.0  # RMSE/MAE within this of the best count as tied

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if not 0 < self.holdout_fraction < 1:
            raise ValueError("holdout_fraction must be in (0, 1)")


@dataclass(frozen=True)
class GridEntry:
    spec: NetworkSpec
    mean_rmse: float
    mean_mae: float


@dataclass(frozen=True)
class TuneResult:
    chosen: NetworkSpec
    grid: tuple[GridEntry, ...]


@dataclass(frozen=True)
class WindowResult:
    window: ValidationWindow
    low: float
    high: float
    residual: float
    error: float


@dataclass(frozen=True)
class MetricsReport:
    route_id: str
    case: ClassCase
    precision_hits: int
    n_windows: int
    mae: float
    mape_pct: float
    explained_variance: float
    windows: tuple[WindowResult, ...]


@dataclass(frozen=True)
class WindowArtifact:
    """Everything trained or frozen for one validation window."""

    window: ValidationWindow
    ensemble: Ensemble
    precise_classes: tuple[float, ...]
    forecast_seed: int


@dataclass(frozen=True)
class BacktestConfig:
    """Split, architecture, budgets and seeds for one route's backtest."""

    cutoff: TimePoint  # training cutoff for the first window (tail starts next month)
    seed: int
    horizon: int = 12
    spec: NetworkSpec | None = None  # fixed architecture; None tunes on window 1
    grid: tuple[NetworkSpec, ...] = ()
    cv: CvOptions = CvOptions()
    sieve: SieveOptions = SieveOptions(seed=0)  # seed is replaced per window
    train: TrainOptions = TrainOptions(max_epochs=0)  # LM schedule template
    bootstrap_samples: int = DEFAULT_BOOTSTRAP_SAMPLES
    class_cap: float = 1.0
    full_history_thresholds: bool = False
    workers: int = 1


def nearest_bound_error(actual_sum: float, low: float, high: float) -> tuple[float, float]:
    """Signed distance to the nearest range bound (zero inside) and its magnitude."""
    if not low <= high:
        raise ValueError(f"invalid range [{low}, {high}]")
    if actual_sum < low:
        residual = actual_sum - low
    elif actual_sum > high:
        residual = actual_sum - high
    else:
        residual = 0.0
    return residual, abs(residual)


def metrics(
    route_id: str, case: ClassCase, results: Sequence[WindowResult]
) -> MetricsReport:
    """Precision, MAE, MAPE (percent) and explained variance over window results."""
    if not results:
        raise ValueError("need at least one window result")
    actuals = np.array([r.window.actual_sum for r in results], dtype=float)
    residuals = np.array([r.residual for r in results], dtype=float)
    errors = np.array([r.error for r in results], dtype=float)
    if np.any(actuals == 0):
        raise ValueError("a window has actual sum 0; percentage error is undefined")
    var_actual = float(np.var(actuals))
    if var_actual == 0:
        raise ValueError("constant actual sums make explained variance undefined")
    return MetricsReport(
        route_id=route_id,
        case=case,
        precision_hits=int(np.sum(errors == 0)),
        n_windows=len(results),
        mae=float(np.mean(errors)),
        mape_pct=float(np.mean(errors / actuals) * 100.0),
        explained_variance=1.0 - float(np.var(residuals)) / var_actual,
        windows=tuple(results),
    )


def _scaled_subset(
    rows: Sequence[CovariateRow], targets: np.ndarray, idx: np.ndarray
) -> tuple[np.ndarray, np.ndarray, ScalingParams]:
    sub_rows = [rows[i] for i in idx]
    sub_targets = targets[idx]
    scaling = fit_scaling(sub_rows, sub_targets)
    X = np.array(
        [[scaling.year.apply(r.year), r.month_sin, r.month_cos, r.class_value] for r in sub_rows]
    )
    y = scaling.target.apply(sub_targets)
    return X, y, scaling


def tune_hyperparams(
    rows: Sequence[CovariateRow],
    targets: Sequence[float],
    grid: Sequence[NetworkSpec],
    cv: CvOptions,
) -> TuneResult:
    """Pick the architecture with the best mean holdout RMSE over shared random splits.

    Splits and initial weights are shared across specs (paired comparison), so
    permuting the grid cannot change the outcome. Ties within ``tie_tol`` fall
    back to mean MAE, then to the smaller weight count.
    """
    if not grid:
        raise ValueError("hyperparameter grid is empty")
    targets = np.asarray(targets, dtype=float)
    n = len(rows)
    if n < 30:
        raise ValueError(f"need at least 30 training rows to tune, got {n}")
    n_holdout = max(1, round(cv.holdout_fraction * n))

    splits = []
    for rep in range(cv.repetitions):
        rng = np.random.Generator(np.random.PCG64(derive_seed(cv.seed, rep)))
        perm = rng.permutation(n)
        splits.append((perm[n_holdout:], perm[:n_holdout]))

    entries = []
    for spec in grid:
        rmses, maes = [], []
        for rep, (train_idx, hold_idx) in enumerate(splits):
            X_train, y_train, scaling = _scaled_subset(rows, targets, train_idx)
            hold_targets = targets[hold_idx]
            if np.all(hold_targets == hold_targets[0]):
                raise ValueError(f"holdout of repetition {rep} has constant targets")
            w0 = init_weights(spec, derive_seed(cv.seed, rep))
            net = lm_train(spec, w0, X_train, y_train, TrainOptions(max_epochs=cv.train_epochs))
            X_hold = np.array(
                [
                    [scaling.year.apply(rows[i].year), rows[i].month_sin,
                     rows[i].month_cos, rows[i].class_value]
                    for i in hold_idx
                ]
            )
            pred = scaling.target.invert(forward(spec, net.weights, X_hold))
            err = pred - hold_targets
            rmses.append(float(np.sqrt(np.mean(err**2))))
            maes.append(float(np.mean(np.abs(err))))
        entries.append(GridEntry(spec, float(np.mean(rmses)), float(np.mean(maes))))

    best_rmse = min(e.mean_rmse for e in entries)
    tied = [e for e in entries if e.mean_rmse <= best_rmse + cv.tie_tol]
    best_mae = min(e.mean_mae for e in tied)
    tied = [e for e in tied if e.mean_mae <= best_mae + cv.tie_tol]
    chosen = min(
        tied, key=lambda e: (e.spec.n_weights, e.spec.layer_sizes, e.spec.hidden_activation)
    )
    return TuneResult(chosen=chosen.spec, grid=tuple(entries))


def apply_class_cap(values: Sequence[float], cap: float) -> list[float]:
    """Replace top-level classes with ``cap`` so the horizon can extrapolate."""
    if cap == CLASS_LEVELS[-1]:
        return list(values)
    return [cap if v == CLASS_LEVELS[-1] else v for v in values]


def _tune_if_needed(series: MonthlySeries, config: BacktestConfig) -> NetworkSpec:
    if config.spec is not None:
        return config.spec
    grid = config.grid or default_grid()
    span = series.through(config.cutoff)
    stats = monthly_stats(span)
    classes = classify_series(span, stats)
    rows = covariate_rows(span, classes)
    cv = dataclasses.replace(config.cv, seed=derive_seed(config.seed, 0))
    return tune_hyperparams(rows, span.values, grid, cv).chosen


def train_windows(series: MonthlySeries, config: BacktestConfig) -> list[WindowArtifact]:
    """Train one ensemble per validation window on data strictly before it.

    Training never sees the window's class case, so artifacts are shared by all
    three cases (and by any class cap) when scoring.
    """
    tail = series.tail_after(config.cutoff)
    windows = make_windows(tail, config.horizon)
    spec = _tune_if_needed(series, config)
    full_stats = monthly_stats(series) if config.full_history_thresholds else None

    artifacts = []
    for window in windows:
        train_end = window.start.plus(-1)
        span = series.through(train_end)
        if len(span) < MIN_TRAINING_MONTHS:
            raise ValueError(
                f"window {window.index}: training span has {len(span)} months, "
                f"need {MIN_TRAINING_MONTHS}"
            )
        stats = monthly_stats(span)
        train_classes = classify_series(span, stats)
        rows = covariate_rows(span, train_classes)
        scaling = fit_scaling(rows, span.values)
        X, y = build_design(span, train_classes, scaling)
        sieve_opts = dataclasses.replace(
            config.sieve, seed=derive_seed(config.seed, 2 * window.index)
        )
        ensemble = sieve_select(
            spec,
            X,
            y,
            sieve_opts,
            route_id=series.route_id,
            scaling=scaling,
            monthly_s=stats.s_by_month,
            training_cutoff=train_end,
            train_options=config.train,
            workers=config.workers,
        )
        threshold_stats = full_stats if full_stats is not None else stats
        precise = tuple(
            classify_value(float(v), threshold_stats.s_for(window.start.plus(i).month))
            for i, v in enumerate(window.actual_monthly)
        )
        artifacts.append(
            WindowArtifact(
                window=window,
                ensemble=ensemble,
                precise_classes=precise,
                forecast_seed=derive_seed(config.seed, 2 * window.index + 1),
            )
        )
    return artifacts


def score_case(
    route_id: str,
    artifacts: Sequence[WindowArtifact],
    case: ClassCase,
    config: BacktestConfig,
    class_cap: float | None = None,
) -> MetricsReport:
    """Forecast every window under one class case and aggregate the metrics."""
    cap = config.class_cap if class_cap is None else class_cap
    results = []
    for art in artifacts:
        capped = apply_class_cap(art.precise_classes, cap)
        if len(capped) == 12:
            horizon_classes = tuple(alter_case(capped, case).values)
        elif case is ClassCase.PRECISE:
            horizon_classes = tuple(capped)  # no half structure to average
        else:
            raise ValueError(
                f"case {case.value!r} needs a 12-month horizon for its 6-month "
                f"halves, got {len(capped)} months"
            )
        request = HorizonRequest(
            route_id=route_id,
            start=art.window.start,
            class_vector=horizon_classes,
            months=len(art.window.actual_monthly),
        )
        fr = forecast_route(
            art.ensemble, request, samples=config.bootstrap_samples, seed=art.forecast_seed
        )
        low, high = fr.range
        residual, error = nearest_bound_error(float(art.window.actual_sum), low, high)
        results.append(
            WindowResult(window=art.window, low=low, high=high, residual=residual, error=error)
        )
    return metrics(route_id, case, results)


def backtest(series: MonthlySeries, config: BacktestConfig, case: ClassCase) -> MetricsReport:
    """Full rolling-origin backtest of one route under one class case."""
    artifacts = train_windows(series, config)
    return score_case(series.route_id, artifacts, case, config)


def sensitivity(
    series: MonthlySeries, config: BacktestConfig
) -> dict[ClassCase, MetricsReport]:
    """All three class cases scored against identical per-window ensembles."""
    artifacts = train_windows(series, config)
    return {
        case: score_case(series.route_id, artifacts, case, config) for case in ClassCase
    }


# ---------------------------------------------------------------------------
# Report emitters


def format_metric_values(report: MetricsReport, proportional_mape: bool = False) -> list[str]:
    mape = report.mape_pct / 100.0 if proportional_mape else report.mape_pct
    return [
        f"{report.precision_hits}/{report.n_windows}",
        f"{report.explained_variance:.2f}",
        f"{report.mae:.0f}",
        f"{mape:.2g}",
    ]


def validation_table_text(reports: Sequence[MetricsReport]) -> str:
    """Per-route validation summary (precision, EV, MAE, MAPE %)."""
    header = ["Route", "Precision", "Explained Variance", "MAE", "MAPE (%)"]
    rows = [[r.route_id, *format_metric_values(r)] for r in reports]
    return _format_table(header, rows)


def sensitivity_table_text(by_route: dict[str, dict[ClassCase, MetricsReport]]) -> str:
    """Three case columns per metric, one row per route (proportional MAPE)."""
    cases = [ClassCase.MEAN, ClassCase.APPROXIMATED, ClassCase.PRECISE]
    header = ["Route/Case"]
    for metric in ("Precision", "Explained Variance", "MAE", "MAPE"):
        header.extend(f"{metric} ({c.value})" for c in cases)
    rows = []
    for route_id, reports in by_route.items():
        values = [format_metric_values(reports[c], proportional_mape=True) for c in cases]
        row = [route_id]
        for metric_idx in range(4):
            row.extend(values[case_idx][metric_idx] for case_idx in range(3))
        rows.append(row)
    return _format_table(header, rows)


def metrics_csv(reports: Sequence[MetricsReport]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(
        ["route", "case", "precision_hits", "windows", "explained_variance", "mae", "mape_pct"]
    )
    for r in reports:
        writer.writerow(
            [
                r.route_id,
                r.case.value,
                r.precision_hits,
                r.n_windows,
                repr(r.explained_variance),
                repr(r.mae),
                repr(r.mape_pct),
            ]
        )
    return out.getvalue()


def windows_csv(report: MetricsReport) -> str:
    """Per-window plot data: ``window_start,low,high,actual``."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["window_start", "low", "high", "actual"])
    for w in report.windows:
        writer.writerow([str(w.window.start), repr(w.low), repr(w.high), w.window.actual_sum])
    return out.getvalue()


def _format_table(header: list[str], rows: list[list[str]]) -> str:
    widths = [len(h) for h in header]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    lines = [
        "  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip(),
        "  ".join("-" * w for w in widths),
    ]
    for row in rows:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"
