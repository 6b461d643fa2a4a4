"""Attention weighting for the forecaster.

Three mechanisms:

* feature attention reweights each of the n input features once per encoder
  step, scored by a two-layer additive network over the recurrent state,
  the feature vector, and the step's target value;
* similar-day weights rank the history days by reciprocal feature distance
  to the forecast day (no trainable parameters, held constant in backprop);
* temporal attention spreads a softmax over every hour of the history
  window once per decoder step, and the context vector mixes the encoder
  states with day weight times hour weight.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .tensor import (Tensor, as_tensor, concat, hadamard, matmul, reshape,
                     softmax_values, stable_softmax, tanh)

DISTANCE_EPSILON = 1e-8
RECIPROCAL_CAP = 1e8


@dataclass
class FeatureAttentionParams:
    """Additive scorer over [recurrent state; features; target].

    `proj` is (attn_size, state_width + n_features + 1) and `score` is
    (n_features, attn_size); there is no bias term.
    """

    proj: np.ndarray
    score: np.ndarray

    @classmethod
    def random(cls, rng, state_width, n_features, attn_size, bound):
        return cls(proj=rng.uniform(-bound, bound, (attn_size, state_width + n_features + 1)),
                   score=rng.uniform(-bound, bound, (n_features, attn_size)))

    @classmethod
    def zeros(cls, state_width, n_features, attn_size):
        return cls(proj=np.zeros((attn_size, state_width + n_features + 1)),
                   score=np.zeros((n_features, attn_size)))


def feature_attention(params, state, features, target):
    """Weight each input feature for one encoder step.

    Returns the softmax weight vector over features and the reweighted
    feature vector (weights times features, elementwise).
    """
    features = as_tensor(features)
    joint = concat([as_tensor(state), features, Tensor([float(target)])])
    scores = matmul(params.score, tanh(matmul(params.proj, joint)))
    weights = stable_softmax(scores)
    return weights, hadamard(weights, features)


@dataclass(frozen=True)
class SimilarDayWeights:
    """Softmax over history days of clamped reciprocal feature distance."""

    weights: np.ndarray


def similar_day_weights(day_blocks, target_block):
    """Rank history days by closeness to the forecast day's features.

    The distance for a day is the sum over features of the Euclidean norm
    of that feature's hourly difference column.  Weights are the softmax of
    1 / (distance + 1e-8), with the reciprocal clamped at 1e8 so an exact
    feature match stays finite.
    """
    days = np.asarray(day_blocks, dtype=np.float64)
    target = np.asarray(target_block, dtype=np.float64)
    if days.ndim != 3 or days.shape[0] < 1:
        raise DimensionError(f"expected (days, hours, features) blocks, got {days.shape}")
    if target.shape != days.shape[1:]:
        raise DimensionError(
            f"target block {target.shape} incompatible with day blocks {days.shape}")
    diff = days - target[np.newaxis]
    per_feature = np.sqrt(np.sum(diff * diff, axis=1))
    distance = per_feature.sum(axis=1)
    reciprocal = np.minimum(1.0 / (distance + DISTANCE_EPSILON), RECIPROCAL_CAP)
    return SimilarDayWeights(softmax_values(reciprocal))


@dataclass
class TemporalAttentionParams:
    """Additive scorer over [recurrent state; features] producing one score
    per history hour.

    `proj` is (attn_size, state_width + n_features) and `score` is
    (history_len, attn_size).
    """

    proj: np.ndarray
    score: np.ndarray

    @classmethod
    def random(cls, rng, state_width, n_features, history_len, attn_size, bound):
        return cls(proj=rng.uniform(-bound, bound, (attn_size, state_width + n_features)),
                   score=rng.uniform(-bound, bound, (history_len, attn_size)))

    @classmethod
    def zeros(cls, state_width, n_features, history_len, attn_size):
        return cls(proj=np.zeros((attn_size, state_width + n_features)),
                   score=np.zeros((history_len, attn_size)))


def temporal_attention(params, state, features, day_len):
    """Softmax weights over every history hour for one decoder step.

    The flat softmax is reshaped to (days, day_len) so entry [i, j] weights
    hour j of history day i; flat position i * day_len + j corresponds to
    the same hour in the stacked encoder states.
    """
    joint = concat([as_tensor(state), as_tensor(features)])
    scores = matmul(params.score, tanh(matmul(params.proj, joint)))
    history_len = scores.shape[0]
    if day_len < 1 or history_len % day_len != 0:
        raise DimensionError(f"history length {history_len} is not divisible by day length {day_len}")
    flat = stable_softmax(scores)
    return reshape(flat, (history_len // day_len, day_len))


def context_vector(day_weights, hour_weights, states):
    """Mix encoder states with day weight times hour weight per history hour.

    `states` is the (history_len, state_width) stack of encoder states; the
    result is a state-width vector whose max-abs entry never exceeds the
    max-abs entry of the states, since the combined weights are a convex
    combination scaled by day weights that sum to one.
    """
    if len(hour_weights.shape) != 2:
        raise DimensionError(f"hour weights must be (days, day_len), got {hour_weights.shape}")
    days, day_len = hour_weights.shape
    if day_weights.weights.shape != (days,):
        raise DimensionError(
            f"day weights {day_weights.weights.shape} do not match hour weights {hour_weights.shape}")
    if len(states.shape) != 2 or states.shape[0] != days * day_len:
        raise DimensionError(
            f"states {states.shape} do not cover {days} x {day_len} history hours")
    day_grid = np.repeat(day_weights.weights[:, np.newaxis], day_len, axis=1)
    combined = hadamard(Tensor(day_grid), hour_weights)
    flat = reshape(combined, (days * day_len,))
    return matmul(flat, states)
