"""Ensemble predictions to the final annual [min, max] range.

Each network is evaluated per horizon month, outputs are inverse-scaled to count
units and clamped at zero, the per-month distributions are trimmed to the
10-90 quantile band, and 10,000 bootstrap resamples of monthly values are summed;
the min and max of those sums are the contractual range.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .dataio import AffineScaler, ScalingParams, TimePoint, horizon_design
from .neuralnet import NetworkSpec, TrainedNetwork, _forward_pass
from .sieve import Ensemble

SCHEMA_VERSION = 1
DEFAULT_BOOTSTRAP_SAMPLES = 10_000


class ArtifactError(ValueError):
    """Model artifact missing, malformed, or from an incompatible schema."""


@dataclass(frozen=True)
class HorizonRequest:
    """A forecast horizon plus its (expert-assigned) class vector."""

    route_id: str
    start: TimePoint
    class_vector: tuple[float, ...]
    months: int = 12

    def __post_init__(self):
        object.__setattr__(self, "class_vector", tuple(float(c) for c in self.class_vector))
        if self.months < 1:
            raise ValueError("months must be >= 1")
        if len(self.class_vector) != self.months:
            raise ValueError(
                f"class vector has {len(self.class_vector)} entries for "
                f"{self.months} months"
            )


@dataclass(frozen=True)
class BootstrapSummary:
    samples: int
    min_sum: float
    max_sum: float
    sums: np.ndarray = field(repr=False, compare=False)


@dataclass(frozen=True)
class ForecastRange:
    """Trimmed per-month values and the bootstrap-aggregated annual range."""

    per_month: tuple[np.ndarray, ...]
    bootstrap: BootstrapSummary

    @property
    def range(self) -> tuple[float, float]:
        return (self.bootstrap.min_sum, self.bootstrap.max_sum)


def predict_months(ensemble: Ensemble, request: HorizonRequest) -> np.ndarray:
    """Matrix of nonnegative count-unit predictions, one row per network."""
    X = horizon_design(request.start, request.class_vector, ensemble.scaling)
    out = np.empty((len(ensemble.networks), request.months), dtype=float)
    for i, net in enumerate(ensemble.networks):
        scaled, _ = _forward_pass(ensemble.spec, net.weights, X)
        out[i] = ensemble.scaling.target.invert(scaled)
    np.maximum(out, 0.0, out=out)  # counts are nonnegative
    return out


def trim_quantiles(
    matrix: np.ndarray, q_lo: float = 0.10, q_hi: float = 0.90
) -> list[np.ndarray]:
    """Per month, keep values inside the inclusive linear-interpolation quantile band."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] < 2:
        raise ValueError("need a matrix with at least two values per month")
    retained = []
    for m in range(matrix.shape[1]):
        col = matrix[:, m]
        lo = np.quantile(col, q_lo, method="linear")
        hi = np.quantile(col, q_hi, method="linear")
        retained.append(np.sort(col[(col >= lo) & (col <= hi)]))
    return retained


def bootstrap_range(
    trimmed: Sequence[np.ndarray],
    samples: int = DEFAULT_BOOTSTRAP_SAMPLES,
    seed: int = 0,
) -> BootstrapSummary:
    """Min and max of ``samples`` sums of one uniformly resampled value per month.

    Draws come from a Philox stream keyed by the seed, so results depend only on
    (seed, month sizes, samples) and never on evaluation order.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    for m, values in enumerate(trimmed):
        if len(values) == 0:
            raise ValueError(f"month {m + 1} has no retained values")
    rng = np.random.Generator(np.random.Philox(key=abs(int(seed)) % (1 << 128)))
    sums = np.zeros(samples, dtype=float)
    for values in trimmed:
        values = np.asarray(values, dtype=float)
        idx = rng.integers(0, len(values), size=samples)
        sums += values[idx]
    return BootstrapSummary(
        samples=samples, min_sum=float(sums.min()), max_sum=float(sums.max()), sums=sums
    )


def forecast_route(
    ensemble: Ensemble,
    request: HorizonRequest,
    samples: int = DEFAULT_BOOTSTRAP_SAMPLES,
    seed: int | None = None,
) -> ForecastRange:
    """Predict, trim, and bootstrap-aggregate; deterministic given the seed."""
    matrix = predict_months(ensemble, request)
    trimmed = trim_quantiles(matrix)
    effective_seed = ensemble.seed if seed is None else seed
    summary = bootstrap_range(trimmed, samples=samples, seed=effective_seed)
    return ForecastRange(per_month=tuple(trimmed), bootstrap=summary)


def month_summary(values: np.ndarray) -> dict[str, float]:
    """min/q10/median/q90/max plus the retained count for one month's values."""
    values = np.asarray(values, dtype=float)
    return {
        "min": float(values.min()),
        "q10": float(np.quantile(values, 0.10, method="linear")),
        "median": float(np.quantile(values, 0.50, method="linear")),
        "q90": float(np.quantile(values, 0.90, method="linear")),
        "max": float(values.max()),
        "retained": int(len(values)),
    }


def ensemble_to_dict(ensemble: Ensemble) -> dict:
    """JSON-ready artifact document; floats keep full round-trip precision."""
    return {
        "schema_version": SCHEMA_VERSION,
        "route_id": ensemble.route_id,
        "training_cutoff": {
            "year": ensemble.training_cutoff.year,
            "month": ensemble.training_cutoff.month,
        },
        "spec": {
            "layer_sizes": list(ensemble.spec.layer_sizes),
            "hidden_activation": ensemble.spec.hidden_activation,
            "output_activation": ensemble.spec.output_activation,
        },
        "scaling": {
            "year": {
                "observed_min": ensemble.scaling.year.observed_min,
                "observed_max": ensemble.scaling.year.observed_max,
            },
            "target": {
                "observed_min": ensemble.scaling.target.observed_min,
                "observed_max": ensemble.scaling.target.observed_max,
            },
        },
        "monthly_s": list(ensemble.monthly_s),
        "seed": ensemble.seed,
        "networks": [
            {
                "weights": [float(w) for w in net.weights],
                "final_sse": net.final_sse,
                "epochs_run": net.epochs_run,
            }
            for net in ensemble.networks
        ],
    }


def ensemble_from_dict(doc: dict) -> Ensemble:
    try:
        version = doc["schema_version"]
        if version != SCHEMA_VERSION:
            raise ArtifactError(
                f"artifact schema version {version} does not match supported "
                f"version {SCHEMA_VERSION}"
            )
        spec = NetworkSpec(
            layer_sizes=tuple(doc["spec"]["layer_sizes"]),
            hidden_activation=doc["spec"]["hidden_activation"],
            output_activation=doc["spec"]["output_activation"],
        )
        scaling = ScalingParams(
            year=AffineScaler(**doc["scaling"]["year"]),
            target=AffineScaler(**doc["scaling"]["target"]),
        )
        networks = tuple(
            TrainedNetwork(
                spec=spec,
                weights=np.array(net["weights"], dtype=float),
                final_sse=float(net["final_sse"]),
                epochs_run=int(net["epochs_run"]),
            )
            for net in doc["networks"]
        )
        return Ensemble(
            route_id=doc["route_id"],
            spec=spec,
            scaling=scaling,
            monthly_s=tuple(float(s) for s in doc["monthly_s"]),
            networks=networks,
            training_cutoff=TimePoint(
                doc["training_cutoff"]["year"], doc["training_cutoff"]["month"]
            ),
            seed=int(doc["seed"]),
        )
    except ArtifactError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ArtifactError(f"malformed model artifact: {exc}") from exc


def save_ensemble(path: str | Path, ensemble: Ensemble) -> Path:
    """Write the model artifact JSON; round-trips losslessly via load_ensemble."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(ensemble_to_dict(ensemble), indent=1) + "\n")
    return path


def load_ensemble(path: str | Path) -> Ensemble:
    path = Path(path)
    if not path.exists():
        raise ArtifactError(f"no model artifact at {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ArtifactError(f"artifact is not valid JSON: {exc}") from exc
    return ensemble_from_dict(doc)
