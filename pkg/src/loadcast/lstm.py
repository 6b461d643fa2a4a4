"""LSTM cell, directional sequence runs, and the linear-ReLU-linear head.

Gate weights follow the convention that the input and recurrent
contributions each carry their own bias, so a gate is
sigma(W_x x + b_x + W_h h + b_h); the cell therefore has sixteen parameter
blocks.  Sequence helpers run a cell left to right; the bidirectional
variant runs a second cell over the reversed inputs and joins the per-step
hidden states as [forward; backward].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .tensor import Tensor, as_tensor, concat, matmul, relu, sigmoid, tanh


@dataclass
class LstmParams:
    """Parameters for one LSTM direction.

    Blocks are named by gate (i, f, g, o) and source (x for input, h for
    recurrent): w_?x is (hidden, input), w_?h is (hidden, hidden), and the
    two bias vectors b_?x, b_?h are kept distinct.
    """

    w_ix: np.ndarray
    w_fx: np.ndarray
    w_gx: np.ndarray
    w_ox: np.ndarray
    w_ih: np.ndarray
    w_fh: np.ndarray
    w_gh: np.ndarray
    w_oh: np.ndarray
    b_ix: np.ndarray
    b_fx: np.ndarray
    b_gx: np.ndarray
    b_ox: np.ndarray
    b_ih: np.ndarray
    b_fh: np.ndarray
    b_gh: np.ndarray
    b_oh: np.ndarray

    @property
    def hidden_size(self):
        return self.w_ix.shape[0]

    @property
    def input_size(self):
        return self.w_ix.shape[1]

    @classmethod
    def random(cls, rng, input_size, hidden_size, bound):
        def w_x():
            return rng.uniform(-bound, bound, (hidden_size, input_size))

        def w_h():
            return rng.uniform(-bound, bound, (hidden_size, hidden_size))

        def b():
            return rng.uniform(-bound, bound, hidden_size)

        return cls(w_ix=w_x(), w_fx=w_x(), w_gx=w_x(), w_ox=w_x(),
                   w_ih=w_h(), w_fh=w_h(), w_gh=w_h(), w_oh=w_h(),
                   b_ix=b(), b_fx=b(), b_gx=b(), b_ox=b(),
                   b_ih=b(), b_fh=b(), b_gh=b(), b_oh=b())

    @classmethod
    def zeros(cls, input_size, hidden_size):
        def w_x():
            return np.zeros((hidden_size, input_size))

        def w_h():
            return np.zeros((hidden_size, hidden_size))

        def b():
            return np.zeros(hidden_size)

        return cls(w_ix=w_x(), w_fx=w_x(), w_gx=w_x(), w_ox=w_x(),
                   w_ih=w_h(), w_fh=w_h(), w_gh=w_h(), w_oh=w_h(),
                   b_ix=b(), b_fx=b(), b_gx=b(), b_ox=b(),
                   b_ih=b(), b_fh=b(), b_gh=b(), b_oh=b())


@dataclass
class BiLstmParams:
    """One cell per direction."""

    forward: LstmParams
    backward: LstmParams

    @property
    def hidden_size(self):
        return self.forward.hidden_size

    @classmethod
    def random(cls, rng, input_size, hidden_size, bound):
        return cls(forward=LstmParams.random(rng, input_size, hidden_size, bound),
                   backward=LstmParams.random(rng, input_size, hidden_size, bound))

    @classmethod
    def zeros(cls, input_size, hidden_size):
        return cls(forward=LstmParams.zeros(input_size, hidden_size),
                   backward=LstmParams.zeros(input_size, hidden_size))


@dataclass
class LstmState:
    """Hidden and cell vectors carried between steps."""

    h: Tensor
    c: Tensor


def zero_state(hidden_size):
    return LstmState(Tensor(np.zeros(hidden_size)), Tensor(np.zeros(hidden_size)))


def lstm_cell_step(params, prev, x):
    """One LSTM update: i, f, o gates, candidate g, cell mix, hidden output."""
    x = as_tensor(x)
    width = params.w_ix.shape[1]
    if x.shape != (width,):
        raise DimensionError(f"cell input shape {x.shape} does not match weights ({width},)")

    def pre(w_x, b_x, w_h, b_h):
        return matmul(w_x, x) + b_x + matmul(w_h, prev.h) + b_h

    i = sigmoid(pre(params.w_ix, params.b_ix, params.w_ih, params.b_ih))
    f = sigmoid(pre(params.w_fx, params.b_fx, params.w_fh, params.b_fh))
    g = tanh(pre(params.w_gx, params.b_gx, params.w_gh, params.b_gh))
    o = sigmoid(pre(params.w_ox, params.b_ox, params.w_oh, params.b_oh))
    c = f * prev.c + i * g
    h = o * tanh(c)
    return LstmState(h, c)


def lstm_sequence(params, inputs, init):
    """Run one direction over `inputs`; returns per-step hidden tensors and
    the terminal state."""
    if not inputs:
        raise DimensionError("cannot encode an empty sequence")
    states = []
    state = init
    for x in inputs:
        state = lstm_cell_step(params, state, x)
        states.append(state)
    return [s.h for s in states], states[-1]


def bilstm_sequence(params, inputs, init_forward, init_backward):
    """Encode a sequence in both directions.

    Step t's combined state is [forward h_t; backward h_t]; the returned
    terminal pair holds each direction's own final state (the backward
    terminal is the state after consuming the first input).
    """
    forward_h, terminal_forward = lstm_sequence(params.forward, inputs, init_forward)
    backward_rev, terminal_backward = lstm_sequence(
        params.backward, list(inputs)[::-1], init_backward)
    backward_h = backward_rev[::-1]
    joined = [concat([hf, hb]) for hf, hb in zip(forward_h, backward_h)]
    return joined, (terminal_forward, terminal_backward)


@dataclass
class FeedForwardParams:
    """Output head: `hidden` projects the stacked states, `out` maps the
    rectified projection to the forecast vector."""

    hidden: np.ndarray
    out: np.ndarray

    @classmethod
    def random(cls, rng, input_width, head_size, output_width, bound):
        return cls(hidden=rng.uniform(-bound, bound, (head_size, input_width)),
                   out=rng.uniform(-bound, bound, (output_width, head_size)))

    @classmethod
    def zeros(cls, input_width, head_size, output_width):
        return cls(hidden=np.zeros((head_size, input_width)),
                   out=np.zeros((output_width, head_size)))


def feedforward_relu(params, stacked):
    """Linear, ReLU, linear projection of the stacked decoder states."""
    stacked = as_tensor(stacked)
    width = params.hidden.shape[1]
    if stacked.shape != (width,):
        raise DimensionError(f"head input shape {stacked.shape} does not match weights ({width},)")
    return matmul(params.out, relu(matmul(params.hidden, stacked)))
