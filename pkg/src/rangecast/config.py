"""Run configuration: a flat ``key = value`` text file.

Paths are resolved relative to the config file. The master seed is mandatory so
no run ever depends on the wall clock.

Recognized keys (defaults in parentheses):

    data                      path to the canonical route-month CSV   [required]
    out                       output directory ("out")
    seed                      master seed, integer                    [required]
    routes                    comma list filter (all routes)
    cutoff                    training cutoff YYYY-MM (2021-01)
    horizon                   forecast months per window (12)
    class_cap                 top-class value for horizon vectors (1.0)
    full_history_thresholds   true/false (false)
    workers                   worker threads (1)
    bootstrap.samples         bootstrap replicates (10000)
    spec.hidden               fixed layer widths, e.g. "8" or "8,4" (unset: tune)
    spec.activation           tanh|logistic (tanh)
    grid.hidden               tuning grid widths ("4,8,12,16")
    grid.activations          tuning grid activations ("tanh,logistic")
    cv.repetitions            tuning repetitions (20)
    cv.holdout_fraction       holdout share (0.15)
    cv.train_epochs           epochs per tuning fit (150)
    sieve.initial             initial candidates (400)
    sieve.survivors           surviving networks (100)
    sieve.reduction           per-stage reduction factor (2)
    sieve.stage_epochs        comma list of stage budgets ("10,20")
    sieve.final_epochs        budget for survivors (200)
    lm.mu0 / lm.mu_up / lm.mu_down / lm.mu_max / lm.grad_tol
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .dataio import TimePoint
from .evaluate import BacktestConfig, CvOptions
from .neuralnet import NetworkSpec, TrainOptions, pipeline_spec
from .sieve import SieveOptions


class ConfigError(ValueError):
    """Missing, unknown, or unusable configuration key; names the key."""


_KNOWN_KEYS = {
    "data", "out", "seed", "routes", "cutoff", "horizon", "class_cap",
    "full_history_thresholds", "workers", "bootstrap.samples",
    "spec.hidden", "spec.activation", "grid.hidden", "grid.activations",
    "cv.repetitions", "cv.holdout_fraction", "cv.train_epochs",
    "sieve.initial", "sieve.survivors", "sieve.reduction",
    "sieve.stage_epochs", "sieve.final_epochs",
    "lm.mu0", "lm.mu_up", "lm.mu_down", "lm.mu_max", "lm.grad_tol",
}


@dataclass(frozen=True)
class RunConfig:
    data: Path
    out: Path
    seed: int
    routes: tuple[str, ...] | None = None
    cutoff: TimePoint = TimePoint(2021, 1)
    horizon: int = 12
    class_cap: float = 1.0
    full_history_thresholds: bool = False
    workers: int = 1
    bootstrap_samples: int = 10_000
    spec: NetworkSpec | None = None
    grid: tuple[NetworkSpec, ...] = ()
    cv: CvOptions = CvOptions()
    sieve: SieveOptions = field(default_factory=lambda: SieveOptions(seed=0))
    train: TrainOptions = TrainOptions(max_epochs=0)

    def backtest_config(self) -> BacktestConfig:
        return BacktestConfig(
            cutoff=self.cutoff,
            seed=self.seed,
            horizon=self.horizon,
            spec=self.spec,
            grid=self.grid,
            cv=self.cv,
            sieve=self.sieve,
            train=self.train,
            bootstrap_samples=self.bootstrap_samples,
            class_cap=self.class_cap,
            full_history_thresholds=self.full_history_thresholds,
            workers=self.workers,
        )


def _parse_pairs(text: str) -> dict[str, str]:
    pairs: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        pairs[key] = value.strip()
    return pairs


def _get(pairs: dict[str, str], key: str, default: str | None = None) -> str:
    if key in pairs:
        return pairs[key]
    if default is None:
        raise ConfigError(f"missing required key {key!r}")
    return default


def _int(pairs, key, default=None) -> int:
    raw = _get(pairs, key, default)
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"key {key!r}: expected integer, got {raw!r}") from None


def _float(pairs, key, default=None) -> float:
    raw = _get(pairs, key, default)
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"key {key!r}: expected number, got {raw!r}") from None


def _bool(pairs, key, default) -> bool:
    raw = _get(pairs, key, default).lower()
    if raw in ("true", "yes", "1"):
        return True
    if raw in ("false", "no", "0"):
        return False
    raise ConfigError(f"key {key!r}: expected true/false, got {raw!r}")


def _int_list(raw: str) -> tuple[int, ...]:
    return tuple(int(part.strip()) for part in raw.split(",") if part.strip())


def load_config(path: str | Path) -> RunConfig:
    """Parse and validate a run configuration file."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    pairs = _parse_pairs(path.read_text())
    base = path.parent

    data = (base / _get(pairs, "data")).resolve()
    if not data.exists():
        raise ConfigError(f"key 'data': file not found: {data}")
    out = (base / _get(pairs, "out", "out")).resolve()

    try:
        cutoff = TimePoint.parse(_get(pairs, "cutoff", "2021-01"))
    except ValueError as exc:
        raise ConfigError(f"key 'cutoff': {exc}") from None

    routes_raw = pairs.get("routes", "")
    routes = tuple(r.strip() for r in routes_raw.split(",") if r.strip()) or None

    spec = None
    if "spec.hidden" in pairs:
        try:
            spec = pipeline_spec(
                _int_list(pairs["spec.hidden"]),
                activation=_get(pairs, "spec.activation", "tanh"),
            )
        except ValueError as exc:
            raise ConfigError(f"key 'spec.hidden': {exc}") from None

    grid_hidden = _int_list(_get(pairs, "grid.hidden", "4,8,12,16"))
    grid_acts = [
        a.strip() for a in _get(pairs, "grid.activations", "tanh,logistic").split(",") if a.strip()
    ]
    try:
        grid = tuple(pipeline_spec((h,), activation=a) for a in grid_acts for h in grid_hidden)
    except ValueError as exc:
        raise ConfigError(f"hyperparameter grid: {exc}") from None

    try:
        cv = CvOptions(
            repetitions=_int(pairs, "cv.repetitions", "20"),
            holdout_fraction=_float(pairs, "cv.holdout_fraction", "0.15"),
            train_epochs=_int(pairs, "cv.train_epochs", "150"),
        )
        sieve = SieveOptions(
            seed=0,
            initial_candidates=_int(pairs, "sieve.initial", "400"),
            survivor_target=_int(pairs, "sieve.survivors", "100"),
            reduction_factor=_float(pairs, "sieve.reduction", "2"),
            stage_epochs=_int_list(_get(pairs, "sieve.stage_epochs", "10,20")),
            final_epochs=_int(pairs, "sieve.final_epochs", "200"),
        )
        train = TrainOptions(
            max_epochs=0,
            mu0=_float(pairs, "lm.mu0", "1e-3"),
            mu_up=_float(pairs, "lm.mu_up", "10"),
            mu_down=_float(pairs, "lm.mu_down", "10"),
            mu_max=_float(pairs, "lm.mu_max", "1e10"),
            grad_tol=_float(pairs, "lm.grad_tol", "1e-7"),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    return RunConfig(
        data=data,
        out=out,
        seed=_int(pairs, "seed"),
        routes=routes,
        cutoff=cutoff,
        horizon=_int(pairs, "horizon", "12"),
        class_cap=_float(pairs, "class_cap", "1.0"),
        full_history_thresholds=_bool(pairs, "full_history_thresholds", "false"),
        workers=_int(pairs, "workers", "1"),
        bootstrap_samples=_int(pairs, "bootstrap.samples", "10000"),
        spec=spec,
        grid=grid,
        cv=cv,
        sieve=sieve,
        train=train,
    )
