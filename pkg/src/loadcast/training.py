"""MSE training with Adam, per-epoch logging, and best-validation selection.

Batch gradients are the mean of per-sample gradients; each sample gets its
own tape, so two runs with the same seeds replay bit-identical update
trajectories.  Validation losses come from constant-bound forward passes
and never touch gradient state.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .data import destandardize_load
from .errors import ConfigError, DimensionError, EvaluationError, TrainingError
from .metrics import compute_metrics
from .model import forward, init_params
from .params import bind, bind_constants, map_leaves, named_leaves, snapshot
from .tensor import Tape, as_tensor, hadamard, scale, sub, total


@dataclass(frozen=True)
class TrainConfig:
    """Optimizer and loop settings."""

    batch_size: int = 32
    epochs: int = 5
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    clip_norm: float | None = 5.0
    shuffle: bool = True
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.batch_size, int) or self.batch_size < 1:
            raise ConfigError(f"batch_size must be a positive integer, got {self.batch_size!r}")
        if not isinstance(self.epochs, int) or self.epochs < 1:
            raise ConfigError(f"epochs must be a positive integer, got {self.epochs!r}")
        if self.learning_rate < 0.0:
            raise ConfigError(f"learning_rate must be nonnegative, got {self.learning_rate!r}")
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise ConfigError("beta1 and beta2 must lie in [0, 1)")
        if self.epsilon <= 0.0:
            raise ConfigError(f"epsilon must be positive, got {self.epsilon!r}")
        if self.clip_norm is not None and self.clip_norm <= 0.0:
            raise ConfigError(f"clip_norm must be positive or None, got {self.clip_norm!r}")


def mse_loss(pred, target):
    """Mean squared error between a prediction vector and its target."""
    pred = as_tensor(pred)
    target = as_tensor(target)
    if pred.values.ndim != 1 or pred.shape != target.shape:
        raise DimensionError(
            f"loss needs equal-length vectors, got {pred.shape} and {target.shape}")
    diff = sub(pred, target)
    return scale(total(hadamard(diff, diff)), 1.0 / pred.values.size)


@dataclass
class AdamState:
    """First and second moment buffers plus the shared step counter."""

    first_moment: dict
    second_moment: dict
    step: int = 0

    @classmethod
    def for_params(cls, params):
        return cls(first_moment={name: np.zeros_like(arr) for name, arr in params.items()},
                   second_moment={name: np.zeros_like(arr) for name, arr in params.items()})


def adam_step(params, grads, state, config):
    """One Adam update, in place, over name-keyed parameter arrays.

    Bias-corrected moments; epsilon is added after the square root.
    """
    state.step += 1
    step = state.step
    correction1 = 1.0 - config.beta1 ** step
    correction2 = 1.0 - config.beta2 ** step
    for name, theta in params.items():
        g = grads[name]
        if g.shape != theta.shape:
            raise DimensionError(
                f"gradient shape {g.shape} does not match parameter {name} {theta.shape}")
        if not np.all(np.isfinite(g)):
            raise TrainingError(f"non-finite gradient for parameter {name}")
        m = state.first_moment[name]
        v = state.second_moment[name]
        m[...] = config.beta1 * m + (1.0 - config.beta1) * g
        v[...] = config.beta2 * v + (1.0 - config.beta2) * (g * g)
        m_hat = m / correction1
        v_hat = v / correction2
        theta -= config.learning_rate * m_hat / (np.sqrt(v_hat) + config.epsilon)
    return params, state


def clip_global_norm(grads, max_norm):
    """Scale all gradients down so their joint L2 norm is at most `max_norm`."""
    norm = math.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
    if norm > max_norm:
        factor = max_norm / norm
        for g in grads.values():
            g *= factor
    return norm


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_mse: float
    val_mse: float
    seconds: float


@dataclass
class TrainResult:
    """Best-validation parameters, the epoch log, and which epoch won."""

    params: object
    log: list
    best_epoch: int


def _batches(order, batch_size):
    for start in range(0, len(order), batch_size):
        yield order[start:start + batch_size]


def mean_mse(params, model_config, samples):
    """Average per-window MSE with constant-bound parameters (no tape)."""
    consts = bind_constants(params)
    losses = []
    for sample in samples:
        fc = forward(consts, model_config, sample)
        losses.append(float(mse_loss(fc.output, sample.y_future).values))
    return float(np.mean(losses))


def batch_gradients(params, model_config, samples):
    """Mean of per-sample gradients of the window MSE, name-keyed."""
    grads = {name: np.zeros_like(arr) for name, arr in named_leaves(params)}
    for sample in samples:
        tape = Tape()
        bound = bind(params, tape)
        fc = forward(bound, model_config, sample)
        loss = mse_loss(fc.output, sample.y_future)
        tape.backward(loss)
        for name, leaf in named_leaves(bound):
            grads[name] += tape.grad(leaf)
    inv = 1.0 / len(samples)
    for name in grads:
        grads[name] *= inv
    return grads


def train(model_config, train_samples, validation_samples, config):
    """Train from a fresh initialization and keep the best-validation epoch.

    The epoch log starts with an epoch-0 row holding the losses of the
    untrained model; the returned parameters realize the minimum of the
    logged validation curve (which may be epoch 0).
    """
    if not train_samples or not validation_samples:
        raise TrainingError("training and validation splits must both be nonempty")
    params = init_params(model_config)
    flat = dict(named_leaves(params))
    adam = AdamState.for_params(flat)
    rng = np.random.default_rng(config.seed)

    def losses(epoch):
        try:
            return (mean_mse(params, model_config, train_samples),
                    mean_mse(params, model_config, validation_samples))
        except EvaluationError as err:
            raise TrainingError(f"divergence while evaluating epoch {epoch}: {err}") from err

    train_mse, val_mse = losses(0)
    log = [EpochRecord(0, train_mse, val_mse, 0.0)]
    best_epoch, best_val, best = 0, val_mse, snapshot(params)

    for epoch in range(1, config.epochs + 1):
        started = time.perf_counter()
        if config.shuffle:
            order = rng.permutation(len(train_samples))
        else:
            order = np.arange(len(train_samples))
        for batch_index, batch in enumerate(_batches(order, config.batch_size)):
            try:
                grads = batch_gradients(params, model_config,
                                        [train_samples[i] for i in batch])
            except EvaluationError as err:
                raise TrainingError(
                    f"divergence at epoch {epoch}, batch {batch_index}: {err}") from err
            if config.clip_norm is not None:
                clip_global_norm(grads, config.clip_norm)
            adam_step(flat, grads, adam, config)
        train_mse, val_mse = losses(epoch)
        log.append(EpochRecord(epoch, train_mse, val_mse,
                               time.perf_counter() - started))
        if val_mse < best_val:
            best_epoch, best_val, best = epoch, val_mse, snapshot(params)
    best_params = map_leaves(params, lambda name, _leaf: best[name].copy())
    return TrainResult(best_params, log, best_epoch)


@dataclass
class EvaluationResult:
    """Metrics plus per-window forecast and actual vectors in load units."""

    report: object
    forecasts: list
    actuals: list


def evaluate(params, model_config, samples, stats):
    """Forecast every sample, map back to load units, and score."""
    if not samples:
        raise TrainingError("evaluation needs at least one sample")
    consts = bind_constants(params)
    forecasts = []
    actuals = []
    for sample in samples:
        fc = forward(consts, model_config, sample)
        forecasts.append(destandardize_load(fc.values, stats))
        actuals.append(destandardize_load(sample.y_future, stats))
    report = compute_metrics(np.concatenate(actuals), np.concatenate(forecasts))
    return EvaluationResult(report, forecasts, actuals)
