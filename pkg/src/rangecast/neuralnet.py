"""Feed-forward perceptron with analytic residual Jacobians and Levenberg-Marquardt.

Weight layout is flat and fixed: for each layer from first hidden to output, the
weight matrix W (fan_out x fan_in) in row-major order, then the bias vector.
Residuals are target minus prediction throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

HIDDEN_ACTIVATIONS = ("tanh", "logistic")

# Damping never decays below this; keeps the retry loop well defined.
_MU_FLOOR = 1e-20


class TrainingError(RuntimeError):
    """Numerically degenerate training data or a weight vector gone non-finite."""


@dataclass(frozen=True)
class NetworkSpec:
    """Layer widths (input, hidden..., output) plus activation choices.

    The forecasting pipeline uses 4 inputs, one or two hidden layers and one
    linear output; widths are kept general so degenerate linear networks can be
    exercised directly in tests.
    """

    layer_sizes: tuple[int, ...]
    hidden_activation: str = "tanh"
    output_activation: str = "linear"

    def __post_init__(self):
        object.__setattr__(self, "layer_sizes", tuple(int(s) for s in self.layer_sizes))
        if len(self.layer_sizes) < 2:
            raise ValueError("need at least input and output widths")
        if len(self.layer_sizes) > 4:
            raise ValueError("at most two hidden layers are supported")
        if any(s < 1 for s in self.layer_sizes):
            raise ValueError(f"layer sizes must be >= 1: {self.layer_sizes}")
        if self.layer_sizes[-1] != 1:
            raise ValueError("output width must be 1")
        if self.hidden_activation not in HIDDEN_ACTIVATIONS:
            raise ValueError(f"hidden activation must be one of {HIDDEN_ACTIVATIONS}")
        if self.output_activation != "linear":
            raise ValueError("output activation is fixed to linear")

    @property
    def n_inputs(self) -> int:
        return self.layer_sizes[0]

    @property
    def layer_dims(self) -> list[tuple[int, int]]:
        """(fan_in, fan_out) per trainable layer."""
        return list(zip(self.layer_sizes[:-1], self.layer_sizes[1:]))

    @property
    def n_weights(self) -> int:
        return sum((fi + 1) * fo for fi, fo in self.layer_dims)


def pipeline_spec(hidden: Sequence[int], activation: str = "tanh") -> NetworkSpec:
    """Spec for the forecasting pipeline: 4 inputs, 1-2 hidden layers, 1 output."""
    hidden = tuple(int(h) for h in hidden)
    if not 1 <= len(hidden) <= 2:
        raise ValueError("pipeline networks use one or two hidden layers")
    return NetworkSpec(layer_sizes=(4, *hidden, 1), hidden_activation=activation)


@dataclass(frozen=True)
class TrainOptions:
    """Levenberg-Marquardt schedule constants and stopping rules."""

    max_epochs: int
    mu0: float = 1e-3
    mu_up: float = 10.0
    mu_down: float = 10.0
    mu_max: float = 1e10
    grad_tol: float = 1e-7
    seed: int = 0

    def __post_init__(self):
        if not self.mu0 > 0:
            raise ValueError("mu0 must be > 0")
        if not (self.mu_up > 1 and self.mu_down > 1):
            raise ValueError("mu_up and mu_down must be > 1")
        if not self.mu_max > self.mu0:
            raise ValueError("mu_max must exceed mu0")
        if self.max_epochs < 0:
            raise ValueError("max_epochs must be >= 0")

    def with_epochs(self, max_epochs: int) -> "TrainOptions":
        return TrainOptions(
            max_epochs=max_epochs,
            mu0=self.mu0,
            mu_up=self.mu_up,
            mu_down=self.mu_down,
            mu_max=self.mu_max,
            grad_tol=self.grad_tol,
            seed=self.seed,
        )


@dataclass(frozen=True)
class TrainedNetwork:
    spec: NetworkSpec
    weights: np.ndarray = field(repr=False)
    final_sse: float = 0.0
    epochs_run: int = 0

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)


def init_weights(spec: NetworkSpec, seed: int) -> np.ndarray:
    """Fan-in-scaled uniform initialization, deterministic in (spec, seed).

    Each layer's W entries (row-major) are drawn first, then its biases, all
    uniform on [-1/sqrt(fan_in), +1/sqrt(fan_in)].
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    parts = []
    for fan_in, fan_out in spec.layer_dims:
        limit = 1.0 / np.sqrt(fan_in)
        parts.append(rng.uniform(-limit, limit, size=fan_out * fan_in))
        parts.append(rng.uniform(-limit, limit, size=fan_out))
    return np.concatenate(parts)


def unpack_weights(spec: NetworkSpec, weights: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    """Split a flat vector into (W, b) pairs per layer, validating length."""
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (spec.n_weights,):
        raise ValueError(f"expected {spec.n_weights} weights, got shape {weights.shape}")
    layers = []
    pos = 0
    for fan_in, fan_out in spec.layer_dims:
        W = weights[pos : pos + fan_out * fan_in].reshape(fan_out, fan_in)
        pos += fan_out * fan_in
        b = weights[pos : pos + fan_out]
        pos += fan_out
        layers.append((W, b))
    return layers


def _activation(name: str, z: np.ndarray) -> np.ndarray:
    if name == "tanh":
        return np.tanh(z)
    return 1.0 / (1.0 + np.exp(-z))  # logistic


def _activation_deriv(name: str, a: np.ndarray) -> np.ndarray:
    # Both derivatives are cheapest in terms of the activation value itself.
    if name == "tanh":
        return 1.0 - a * a
    return a * (1.0 - a)


def _forward_pass(
    spec: NetworkSpec, weights: np.ndarray, X: np.ndarray
) -> tuple[np.ndarray, list[np.ndarray]]:
    """Predictions and the per-layer activation stack (input first)."""
    layers = unpack_weights(spec, weights)
    A = np.asarray(X, dtype=float)
    if A.ndim != 2 or A.shape[1] != spec.n_inputs:
        raise ValueError(f"inputs must be (n, {spec.n_inputs}), got {A.shape}")
    stack = [A]
    for i, (W, b) in enumerate(layers):
        Z = stack[-1] @ W.T + b
        last = i == len(layers) - 1
        stack.append(Z if last else _activation(spec.hidden_activation, Z))
    return stack[-1][:, 0], stack


def forward(spec: NetworkSpec, weights: np.ndarray, x) -> float | np.ndarray:
    """Network output for one input row (scalar) or a matrix of rows (vector)."""
    if hasattr(x, "to_array"):
        x = x.to_array()
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        return float(_forward_pass(spec, weights, x[None, :])[0][0])
    return _forward_pass(spec, weights, x)[0]


def jacobian(spec: NetworkSpec, weights: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Jacobian of residuals (target - prediction) w.r.t. the flat weights.

    Rows are data points, columns follow the flat layout. Computed by
    backpropagating the output sensitivity; equals minus the prediction
    Jacobian since targets do not depend on the weights.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("jacobian expects a matrix of input rows")
    if X.shape[0] < 1:
        raise ValueError("need at least one input row")
    layers = unpack_weights(spec, weights)
    _, stack = _forward_pass(spec, weights, X)
    n = X.shape[0]

    blocks: list[np.ndarray | None] = [None] * len(layers)
    delta = np.ones((n, 1))  # d prediction / d output preactivation
    for li in range(len(layers) - 1, -1, -1):
        W, _ = layers[li]
        a_prev = stack[li]
        dW = delta[:, :, None] * a_prev[:, None, :]  # (n, fan_out, fan_in)
        blocks[li] = np.concatenate([dW.reshape(n, -1), delta], axis=1)
        if li > 0:
            delta = (delta @ W) * _activation_deriv(spec.hidden_activation, stack[li])
    dpred = np.concatenate(blocks, axis=1)
    return -dpred


def sse(spec: NetworkSpec, weights: np.ndarray, X: np.ndarray, y: np.ndarray) -> float:
    r = np.asarray(y, dtype=float) - forward(spec, weights, X)
    return float(r @ r)


def lm_step(H: np.ndarray, g: np.ndarray, mu: float) -> np.ndarray:
    """Solve (H + mu*I) delta = -g via a symmetric positive-definite factorization."""
    A = H + mu * np.eye(H.shape[0])
    c, low = scipy.linalg.cho_factor(A, check_finite=True)
    return scipy.linalg.cho_solve((c, low), -g, check_finite=False)


def lm_train(
    spec: NetworkSpec,
    weights0: np.ndarray,
    X: np.ndarray,
    y: np.ndarray,
    opts: TrainOptions,
) -> TrainedNetwork:
    """Levenberg-Marquardt damped least squares over the full batch.

    Each epoch proposes steps at the current damping, inflating mu by mu_up on
    rejection and deflating by mu_down on acceptance; accepted-step SSE is
    strictly decreasing. Stops at max_epochs, gradient tolerance, or mu
    escalating past mu_max.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.shape[0] == 0:
        raise ValueError("training data is empty")
    if X.shape[0] != y.shape[0]:
        raise ValueError(f"{X.shape[0]} input rows but {y.shape[0]} targets")

    w = np.asarray(weights0, dtype=float).copy()
    current_sse = sse(spec, w, X, y)
    if not np.isfinite(current_sse):
        raise TrainingError("initial weights give a non-finite SSE")
    mu = opts.mu0
    epochs_run = 0

    for _ in range(opts.max_epochs):
        J = jacobian(spec, w, X)
        r = y - forward(spec, w, X)
        if not (np.all(np.isfinite(J)) and np.all(np.isfinite(r))):
            raise TrainingError("non-finite Jacobian or residuals during training")
        g = J.T @ r  # half-gradient of SSE
        if np.max(np.abs(g)) < opts.grad_tol:
            break
        H = J.T @ J

        accepted = False
        while mu <= opts.mu_max:
            try:
                delta = lm_step(H, g, mu)
            except (np.linalg.LinAlgError, scipy.linalg.LinAlgError, ValueError):
                if mu >= opts.mu_max:
                    raise TrainingError(
                        "normal system remained singular at the damping ceiling"
                    ) from None
                mu *= opts.mu_up
                continue
            candidate = w + delta
            candidate_sse = sse(spec, candidate, X, y)
            if np.isfinite(candidate_sse) and candidate_sse < current_sse:
                w = candidate
                current_sse = candidate_sse
                mu = max(mu / opts.mu_down, _MU_FLOOR)
                accepted = True
                break
            mu *= opts.mu_up
        if not accepted:
            break  # damping escalated past mu_max without an improving step
        epochs_run += 1

    return TrainedNetwork(spec=spec, weights=w, final_sse=current_sse, epochs_run=epochs_run)


def train_network(
    spec: NetworkSpec, X: np.ndarray, y: np.ndarray, opts: TrainOptions
) -> TrainedNetwork:
    """Train from the seeded fan-in-uniform initialization in ``opts.seed``."""
    return lm_train(spec, init_weights(spec, opts.seed), X, y, opts)
