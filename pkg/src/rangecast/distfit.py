"""Weibull fits per route-month, SNR analytics, and Monte Carlo class-frequency
bands comparing the empirical classification against the fitted distribution."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .classify import monthly_stats
from .dataio import MonthlySeries

#: Continuity correction applied to zero counts before fitting (positive support).
ZERO_REPLACEMENT = 0.5

#: Repetitions are simulated in fixed-size blocks, each with its own keyed
#: stream, so thread count can never change the draws.
_CHUNK = 512


class FitError(RuntimeError):
    """Degenerate sample or non-convergent likelihood maximization."""


@dataclass(frozen=True)
class WeibullFit:
    """Maximum-likelihood shape/scale for one route-month (or stationary) sample."""

    shape: float
    scale: float
    sample_n: int
    route_id: str | None = None
    month: int | None = None  # None marks the stationary (all-months) block


@dataclass(frozen=True)
class ClassBand:
    """5%/95% Monte Carlo frequency quantiles per class, with context."""

    q05: tuple[float, float, float]
    q95: tuple[float, float, float]
    snr: float
    sample_n: int
    reps_used: int
    rounded: bool


@dataclass(frozen=True)
class BlockStats:
    """Empirical SNR and class frequencies for one month (or stationary) block."""

    month: int | None
    n: int
    mean: float
    s: float
    snr: float
    freq: tuple[float, float, float]


@dataclass(frozen=True)
class RouteClassStats:
    route_id: str
    stationary: BlockStats
    monthly: tuple[BlockStats, ...]


def weibull_log_likelihood(values: np.ndarray, shape: float, scale: float) -> float:
    x = np.asarray(values, dtype=float)
    n = len(x)
    return float(
        n * (math.log(shape) - shape * math.log(scale))
        + (shape - 1.0) * np.sum(np.log(x))
        - np.sum((x / scale) ** shape)
    )


def _moment_start(values: np.ndarray) -> float:
    # Justus approximation of the method-of-moments shape from the CV.
    mean = float(np.mean(values))
    std = float(np.std(values, ddof=1))
    return min(max((mean / std) ** 1.086, 0.02), 500.0)


def fit_weibull(
    values: Sequence[float],
    route_id: str | None = None,
    month: int | None = None,
    max_iter: int = 100,
    rel_tol: float = 1e-10,
) -> WeibullFit:
    """MLE via safeguarded Newton on the shape profile equation.

    The scale follows in closed form from the shape. Needs at least five
    strictly positive, non-identical values.
    """
    x = np.asarray(list(values), dtype=float)
    if len(x) < 5:
        raise FitError(f"need at least 5 values to fit, got {len(x)}")
    if np.any(x <= 0):
        raise FitError("all values must be strictly positive (replace zeros first)")
    if np.all(x == x[0]):
        raise FitError("all values are equal; the likelihood has no interior maximum")

    ln_x = np.log(x)
    mean_ln = float(np.mean(ln_x))
    k = _moment_start(x)
    converged = False
    for _ in range(max_iter):
        xk = x**k
        a = float(np.sum(xk * ln_x))
        b = float(np.sum(xk))
        g = a / b - 1.0 / k - mean_ln
        a_prime = float(np.sum(xk * ln_x * ln_x))
        g_prime = (a_prime * b - a * a) / (b * b) + 1.0 / (k * k)
        step = g / g_prime
        k_new = k - step
        if k_new <= 0:
            k_new = k / 2.0  # safeguard: stay in the positive half-line
        if abs(k_new - k) / k_new < rel_tol:
            k = k_new
            converged = True
            break
        k = k_new
    if not converged:
        raise FitError(f"shape iteration did not converge within {max_iter} steps")
    scale = float(np.mean(x**k) ** (1.0 / k))
    return WeibullFit(shape=k, scale=scale, sample_n=len(x), route_id=route_id, month=month)


def weibull_snr(shape: float) -> float:
    """Scale-free mean/std of a Weibull with the given shape."""
    if not shape > 0:
        raise ValueError(f"shape must be > 0, got {shape}")
    # SNR = 1/sqrt(R - 1) with R = Gamma(1 + 2/k) / Gamma(1 + 1/k)^2, via
    # log-gamma to stay finite for small shapes.
    log_r = math.lgamma(1.0 + 2.0 / shape) - 2.0 * math.lgamma(1.0 + 1.0 / shape)
    return 1.0 / math.sqrt(math.expm1(log_r))


def _class_counts(draws: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-repetition class counts against each repetition's own sample s.

    Returns (counts[reps, 3], valid mask); rows with zero dispersion are masked.
    """
    s = draws.std(axis=1, ddof=1)
    valid = s > 0
    s_col = np.where(valid, s, 1.0)[:, None]
    c0 = np.sum(draws < s_col, axis=1)
    c1 = np.sum(draws >= 2.0 * s_col, axis=1)
    c_mid = draws.shape[1] - c0 - c1
    return np.stack([c0, c_mid, c1], axis=1), valid


def simulate_class_frequencies(
    fit: WeibullFit,
    n: int,
    reps: int,
    round_to_integer: bool,
    seed: int,
) -> tuple[np.ndarray, int]:
    """Class-count matrix (kept repetitions x 3) and the number discarded."""
    if n < 2:
        raise ValueError("sample size must be >= 2")
    counts = []
    discarded = 0
    key_word = abs(int(seed)) % (1 << 64)
    for chunk_start in range(0, reps, _CHUNK):
        chunk = min(_CHUNK, reps - chunk_start)
        rng = np.random.Generator(
            np.random.Philox(key=np.array([key_word, chunk_start], dtype=np.uint64))
        )
        draws = fit.scale * rng.weibull(fit.shape, size=(chunk, n))
        if round_to_integer:
            draws = np.rint(draws)
        chunk_counts, valid = _class_counts(draws)
        discarded += int(np.sum(~valid))
        counts.append(chunk_counts[valid])
    return np.concatenate(counts, axis=0), discarded


def mc_class_bands(
    fit: WeibullFit,
    n: int,
    reps: int = 10_000,
    round_to_integer: bool = False,
    seed: int = 0,
) -> ClassBand:
    """90% Monte Carlo band of class frequencies under the fitted Weibull.

    Each repetition draws ``n`` values, optionally rounds them to integers,
    and classifies them against that sample's own standard deviation.
    Repetitions whose (rounded) sample has zero variance are discarded;
    more than 10% discarded is an error.
    """
    counts, discarded = simulate_class_frequencies(fit, n, reps, round_to_integer, seed)
    if discarded > 0.10 * reps:
        raise FitError(
            f"{discarded} of {reps} repetitions had zero sample variance; "
            "the fitted distribution is too discrete at this sample size"
        )
    freqs = counts / float(n)
    q05 = np.quantile(freqs, 0.05, axis=0)
    q95 = np.quantile(freqs, 0.95, axis=0)
    return ClassBand(
        q05=tuple(float(v) for v in q05),
        q95=tuple(float(v) for v in q95),
        snr=weibull_snr(fit.shape),
        sample_n=n,
        reps_used=reps - discarded,
        rounded=round_to_integer,
    )


def _block_stats(month: int | None, values: Sequence[float]) -> BlockStats:
    x = np.asarray(list(values), dtype=float)
    mean = float(np.mean(x))
    s = float(np.std(x, ddof=1))
    if s == 0:
        raise FitError(f"block {month if month else 'stationary'} has zero dispersion")
    f0 = float(np.mean(x < s))
    f1 = float(np.mean(x >= 2.0 * s))
    return BlockStats(
        month=month,
        n=len(x),
        mean=mean,
        s=s,
        snr=mean / s,
        freq=(f0, 1.0 - f0 - f1, f1),
    )


def class_frequency_table(dataset: Sequence[MonthlySeries]) -> list[RouteClassStats]:
    """Stationary and per-calendar-month SNR plus empirical class frequencies."""
    out = []
    for series in dataset:
        monthly_stats(series)  # enforces >= 2 observations per calendar month
        by_month: dict[int, list[int]] = {m: [] for m in range(1, 13)}
        for tp, v in zip(series.timepoints(), series.values):
            by_month[tp.month].append(v)
        out.append(
            RouteClassStats(
                route_id=series.route_id,
                stationary=_block_stats(None, series.values),
                monthly=tuple(_block_stats(m, by_month[m]) for m in range(1, 13)),
            )
        )
    return out


def stats_table_text(table: Sequence[RouteClassStats]) -> str:
    """Human-readable per-route SNR / class-frequency report."""
    lines = []
    for route in table:
        st = route.stationary
        lines.append(f"{route.route_id}  (stationary: N={st.n})")
        lines.append(
            f"  SNR {st.snr:.3g}   class frequencies "
            f"{st.freq[0] * 100:.1f}% / {st.freq[1] * 100:.1f}% / {st.freq[2] * 100:.1f}%"
        )
        lines.append("  month   n   SNR     f(0)    f(0.5)  f(1)")
        for block in route.monthly:
            lines.append(
                f"  {block.month:>5}  {block.n:>2}  {block.snr:<6.3g} "
                f" {block.freq[0]:<7.3g} {block.freq[1]:<7.3g} {block.freq[2]:<7.3g}"
            )
        lines.append("")
    return "\n".join(lines)


def positive_counts(values: Sequence[int]) -> np.ndarray:
    """Counts with zeros replaced by the continuity correction for fitting."""
    x = np.asarray(list(values), dtype=float)
    x[x == 0] = ZERO_REPLACEMENT
    return x


def band_figure_csv(
    dataset: Sequence[MonthlySeries],
    reps: int = 10_000,
    seed: int = 0,
    round_to_integer: bool = True,
) -> str:
    """Per route-month-class rows of empirical vs Weibull-band frequencies.

    Columns: route,month,snr,class,freq_empirical,freq_weibull_q05,freq_weibull_q95,n
    """
    table = class_frequency_table(dataset)
    by_route = {series.route_id: series for series in dataset}
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(
        ["route", "month", "snr", "class",
         "freq_empirical", "freq_weibull_q05", "freq_weibull_q95", "n"]
    )
    for route in table:
        series = by_route[route.route_id]
        by_month: dict[int, list[int]] = {m: [] for m in range(1, 13)}
        for tp, v in zip(series.timepoints(), series.values):
            by_month[tp.month].append(v)
        for block in route.monthly:
            fit = fit_weibull(
                positive_counts(by_month[block.month]),
                route_id=route.route_id,
                month=block.month,
            )
            band = mc_class_bands(
                fit,
                n=block.n,
                reps=reps,
                round_to_integer=round_to_integer,
                seed=seed,
            )
            for class_idx, level in enumerate(("0", "0.5", "1")):
                writer.writerow(
                    [
                        route.route_id,
                        block.month,
                        repr(block.snr),
                        level,
                        repr(block.freq[class_idx]),
                        repr(band.q05[class_idx]),
                        repr(band.q95[class_idx]),
                        block.n,
                    ]
                )
    return out.getvalue()
