"""Built-in verification suite.

Each check exercises one contract against an oracle that does not share
code with the implementation it checks: central finite differences for
gradients, a plain-Python scalar loop for the LSTM cell, closed-form hand
values for the metrics.  The `verify` subcommand prints one line per check
and fails if any check fails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime

import numpy as np

from .data import WindowSample
from .metrics import compute_metrics
from .model import ModelConfig, forward, init_params, predict
from .params import map_leaves, named_leaves
from .tensor import (check_gradients, concat, hadamard, matmul, relu, sigmoid,
                     stable_softmax, tanh, total)
from .training import mse_loss


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def tiny_model_case(variant="ANLF", seed=8):
    """A small random window and matching config for structural checks.

    The default seed gives a live ReLU head (nonzero forecast), so the
    gradient check is not vacuous.
    """
    config = ModelConfig(days=2, day_len=4, n_features=3, hidden_size=4,
                         feature_attn_size=2, temporal_attn_size=2, head_size=2,
                         variant=variant, seed=seed)
    rng = np.random.default_rng(seed + 1000)
    x_hist = rng.normal(0.0, 1.0, (config.history_len, config.n_features))
    y_hist = rng.normal(0.0, 1.0, config.history_len)
    x_future = rng.normal(0.0, 1.0, (config.horizon, config.n_features))
    y_future = rng.normal(0.0, 1.0, config.horizon)
    sample = WindowSample(x_hist=x_hist, y_hist=y_hist, x_future=x_future,
                          y_future=y_future,
                          day_blocks=x_hist.reshape(config.days, config.day_len,
                                                    config.n_features),
                          start=datetime(2022, 1, 5))
    return config, sample


def model_gradient_report(config, sample, h=1e-5, tolerance=1e-4):
    """Finite-difference check of the full window MSE against every parameter."""
    template = init_params(config)
    arrays = {name: np.array(leaf) for name, leaf in named_leaves(template)}

    def program(_tape, leaves):
        bound = map_leaves(template, lambda name, _leaf: leaves[name])
        fc = forward(bound, config, sample)
        return mse_loss(fc.output, sample.y_future)

    return check_gradients(program, arrays, h=h, tolerance=tolerance)


def _sig(x):
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def scalar_lstm_step(params, h_prev, c_prev, x):
    """Independent LSTM oracle: explicit loops and `math` only."""
    hidden = len(params.b_ix)
    width = len(x)

    def affine(w_x, b_x, w_h, b_h, row):
        s = b_x[row] + b_h[row]
        for col in range(width):
            s += w_x[row][col] * x[col]
        for col in range(hidden):
            s += w_h[row][col] * h_prev[col]
        return s

    h_out, c_out = [], []
    for row in range(hidden):
        i = _sig(affine(params.w_ix, params.b_ix, params.w_ih, params.b_ih, row))
        f = _sig(affine(params.w_fx, params.b_fx, params.w_fh, params.b_fh, row))
        g = math.tanh(affine(params.w_gx, params.b_gx, params.w_gh, params.b_gh, row))
        o = _sig(affine(params.w_ox, params.b_ox, params.w_oh, params.b_oh, row))
        c = f * c_prev[row] + i * g
        h_out.append(o * math.tanh(c))
        c_out.append(c)
    return h_out, c_out


def _check_basic_gradients():
    rng = np.random.default_rng(7)
    arrays = {
        "a": rng.normal(0.0, 1.0, (3, 4)),
        "b": rng.normal(0.0, 1.0, (4, 2)),
        "v": rng.normal(0.0, 1.0, 6),
        "u": rng.normal(0.0, 1.0, 6) + np.where(rng.normal(size=6) > 0, 2.0, -2.0),
    }

    def program(_tape, leaves):
        prod = matmul(leaves["a"], leaves["b"])
        mixed = hadamard(sigmoid(leaves["v"]), tanh(leaves["v"]))
        rect = relu(leaves["u"])
        return total(prod) + total(mixed) + total(concat([rect, mixed]))

    report = check_gradients(program, arrays, tolerance=1e-6)
    return CheckResult("tensor-op gradients vs central differences", report.passed,
                       f"max rel error {report.max_rel_error:.2e}")


def _check_softmax():
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(200):
        v = rng.normal(0.0, 3.0, rng.integers(2, 9))
        s = stable_softmax(v).values
        worst = max(worst, abs(float(s.sum()) - 1.0))
        if np.any(s <= 0.0):
            return CheckResult("softmax normalization", False, "non-positive entry")
    arrays = {"v": rng.normal(0.0, 2.0, 5)}

    def program(_tape, leaves):
        weights = stable_softmax(leaves["v"])
        return total(hadamard(weights, weights))

    report = check_gradients(program, arrays, tolerance=1e-6)
    ok = worst <= 1e-12 and report.passed
    return CheckResult("softmax normalization and gradient", ok,
                       f"max |sum-1| {worst:.1e}, max rel error {report.max_rel_error:.2e}")


def _check_lstm_oracle(instances=1000, tolerance=1e-12):
    from .lstm import LstmParams, LstmState, lstm_cell_step
    from .tensor import Tensor

    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(instances):
        width = int(rng.integers(1, 6))
        hidden = int(rng.integers(1, 6))
        params = LstmParams.random(rng, width, hidden, 1.0)
        h_prev = rng.normal(0.0, 1.0, hidden)
        c_prev = rng.normal(0.0, 1.0, hidden)
        x = rng.normal(0.0, 1.0, width)
        state = lstm_cell_step(params, LstmState(Tensor(h_prev), Tensor(c_prev)),
                               Tensor(x))
        h_ref, c_ref = scalar_lstm_step(params, h_prev, c_prev, x)
        worst = max(worst,
                    float(np.max(np.abs(state.h.values - h_ref))),
                    float(np.max(np.abs(state.c.values - c_ref))))
    return CheckResult(f"lstm cell vs scalar-loop oracle ({instances} instances)",
                       worst <= tolerance, f"max abs diff {worst:.1e}")


def _check_model_gradients():
    config, sample = tiny_model_case()
    report = model_gradient_report(config, sample)
    return CheckResult("full-model gradients vs central differences", report.passed,
                       f"max rel error {report.max_rel_error:.2e}")


def _check_attention_normalization(evaluations=100, tolerance=1e-12):
    worst = 0.0
    positive = True
    for seed in range(evaluations):
        config, sample = tiny_model_case(seed=seed)
        fc = predict(init_params(config), config, sample, collect_attention=True)
        for row in fc.feature_weights:
            worst = max(worst, abs(float(row.sum()) - 1.0))
            positive = positive and bool(np.all(row > 0.0))
        for row in fc.hour_weights:
            worst = max(worst, abs(float(row.sum()) - 1.0))
            positive = positive and bool(np.all(row > 0.0))
        worst = max(worst, abs(float(fc.day_weights.sum()) - 1.0))
        positive = positive and bool(np.all(fc.day_weights > 0.0))
    ok = worst <= tolerance and positive
    detail = f"max |sum-1| {worst:.1e}" + ("" if positive else ", non-positive weight")
    return CheckResult(f"attention weights normalized ({evaluations} evaluations)",
                       ok, detail)


def _check_metric_values():
    report = compute_metrics([100.0, 200.0], [110.0, 190.0])
    expected = (10.0, 10.0, 7.5, 100.0 * 10.0 / 150.0)
    worst = max(abs(report.mae - expected[0]), abs(report.rmse - expected[1]),
                abs(report.mape - expected[2]), abs(report.nrmse - expected[3]))
    return CheckResult("metric hand values", worst <= 1e-9, f"max abs diff {worst:.1e}")


def run_all_checks():
    """Run every verification check; returns a list of CheckResult."""
    return [
        _check_basic_gradients(),
        _check_softmax(),
        _check_lstm_oracle(),
        _check_model_gradients(),
        _check_attention_normalization(),
        _check_metric_values(),
    ]
