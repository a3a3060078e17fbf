"""Staged train-rank-cut selection of candidate networks (simplified, no
generative phase): a shrinking population trains under growing budgets until
exactly the survivor target remains fully trained."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dataio import ScalingParams, TimePoint
from .neuralnet import NetworkSpec, TrainedNetwork, TrainOptions, init_weights, lm_train


@dataclass(frozen=True)
class SieveOptions:
    """Population schedule; the default geometry is 400 -> 200 -> 100."""

    seed: int
    initial_candidates: int = 400
    survivor_target: int = 100
    reduction_factor: float = 2.0
    stage_epochs: tuple[int, ...] = (10, 20)
    final_epochs: int = 200

    def __post_init__(self):
        object.__setattr__(self, "stage_epochs", tuple(int(e) for e in self.stage_epochs))
        if self.initial_candidates < self.survivor_target:
            raise ValueError("initial_candidates must be >= survivor_target")
        if self.survivor_target < 1:
            raise ValueError("survivor_target must be >= 1")
        if not self.reduction_factor > 1:
            raise ValueError("reduction_factor must be > 1")
        if any(e < 0 for e in self.stage_epochs) or self.final_epochs < 0:
            raise ValueError("epoch budgets must be nonnegative")
        count = self.initial_candidates
        for _ in self.stage_epochs:
            count = math.ceil(count / self.reduction_factor)
        if count != self.survivor_target:
            raise ValueError(
                f"stage arithmetic reaches {count} candidates, not the survivor "
                f"target {self.survivor_target}"
            )


@dataclass(frozen=True)
class StageLog:
    """SSE of every candidate at one cut, for selection-dominance audits."""

    stage: int
    epochs: int
    sse_by_candidate: tuple[tuple[int, float], ...]  # (candidate index, sse)
    kept: tuple[int, ...]


@dataclass(frozen=True)
class Ensemble:
    """The surviving trained networks plus everything needed to forecast."""

    route_id: str
    spec: NetworkSpec
    scaling: ScalingParams
    monthly_s: tuple[float, ...]
    networks: tuple[TrainedNetwork, ...]
    training_cutoff: TimePoint
    seed: int
    created_at: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if len(self.monthly_s) != 12:
            raise ValueError("monthly_s must have 12 entries")
        if any(not s > 0 for s in self.monthly_s):
            raise ValueError("monthly_s entries must all be > 0")
        if len({(n.spec.layer_sizes, n.spec.hidden_activation) for n in self.networks}) > 1:
            raise ValueError("ensemble networks must share one spec")

    def __len__(self) -> int:
        return len(self.networks)


def candidate_seed(ensemble_seed: int, candidate_index: int) -> int:
    """Deterministic injective seed for one candidate: seed * 2^32 + index.

    Injective for 0 <= index < 2^32, so serial and parallel runs agree.
    """
    if candidate_index < 0:
        raise ValueError("candidate index must be >= 0")
    return ensemble_seed * 2**32 + candidate_index


def derive_seed(master: int, *indices: int) -> int:
    """Chain candidate_seed over several indices (window, phase, ...)."""
    out = master
    for i in indices:
        out = candidate_seed(out, i)
    return out


def _train_many(
    spec: NetworkSpec,
    states: list[tuple[int, np.ndarray]],
    X: np.ndarray,
    y: np.ndarray,
    opts: TrainOptions,
    workers: int,
) -> list[tuple[int, TrainedNetwork]]:
    """Resume-train every (index, weights) candidate; output order is by input position."""

    def job(state: tuple[int, np.ndarray]) -> tuple[int, TrainedNetwork]:
        idx, w = state
        return idx, lm_train(spec, w, X, y, opts)

    if workers <= 1:
        return [job(s) for s in states]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(job, states))


def run_sieve(
    spec: NetworkSpec,
    X: np.ndarray,
    y: np.ndarray,
    opts: SieveOptions,
    train_options: TrainOptions | None = None,
    workers: int = 1,
) -> tuple[list[TrainedNetwork], list[StageLog]]:
    """Run the staged selection and return survivors (by candidate index) plus logs."""
    base = train_options if train_options is not None else TrainOptions(max_epochs=0)
    states: list[tuple[int, np.ndarray]] = [
        (i, init_weights(spec, candidate_seed(opts.seed, i)))
        for i in range(opts.initial_candidates)
    ]

    logs: list[StageLog] = []
    for stage, epochs in enumerate(opts.stage_epochs, start=1):
        trained = _train_many(spec, states, X, y, base.with_epochs(epochs), workers)
        keep = math.ceil(len(trained) / opts.reduction_factor)
        # Stable rank: ties broken by candidate index.
        ranked = sorted(trained, key=lambda t: (t[1].final_sse, t[0]))
        kept = sorted(ranked[:keep], key=lambda t: t[0])
        logs.append(
            StageLog(
                stage=stage,
                epochs=epochs,
                sse_by_candidate=tuple((i, t.final_sse) for i, t in trained),
                kept=tuple(i for i, _ in kept),
            )
        )
        states = [(i, t.weights) for i, t in kept]

    final = _train_many(spec, states, X, y, base.with_epochs(opts.final_epochs), workers)
    return [t for _, t in final], logs


def sieve_select(
    spec: NetworkSpec,
    X: np.ndarray,
    y: np.ndarray,
    opts: SieveOptions,
    *,
    route_id: str,
    scaling: ScalingParams,
    monthly_s: Sequence[float],
    training_cutoff: TimePoint,
    train_options: TrainOptions | None = None,
    workers: int = 1,
) -> Ensemble:
    """Train, sieve, and assemble the ensemble for one route and cutoff."""
    networks, _ = run_sieve(spec, X, y, opts, train_options=train_options, workers=workers)
    return Ensemble(
        route_id=route_id,
        spec=spec,
        scaling=scaling,
        monthly_s=tuple(float(s) for s in monthly_s),
        networks=tuple(networks),
        training_cutoff=training_cutoff,
        seed=opts.seed,
    )
