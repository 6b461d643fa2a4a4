"""LSTM cell and sequence runners against a pure-python scalar oracle."""

import math

import numpy as np
import numpy.testing as npt
import pytest

from loadcast.errors import DimensionError
from loadcast.lstm import (BiLstmParams, FeedForwardParams, LstmParams,
                           LstmState, bilstm_sequence, feedforward_relu,
                           lstm_cell_step, lstm_sequence, zero_state)
from loadcast.params import named_leaves
from loadcast.tensor import Tape, Tensor, check_gradients, concat, total


def scalar_cell(params, h_prev, c_prev, x):
    """Step one LSTM cell with plain python loops; no numpy linear algebra."""

    def sig(v):
        return 1.0 / (1.0 + math.exp(-v))

    def gate(w_x, b_x, w_h, b_h, squash, row):
        pre = b_x[row] + b_h[row]
        for j, xj in enumerate(x):
            pre += w_x[row][j] * xj
        for j, hj in enumerate(h_prev):
            pre += w_h[row][j] * hj
        return squash(pre)

    h_new, c_new = [], []
    for row in range(len(h_prev)):
        i = gate(params.w_ix, params.b_ix, params.w_ih, params.b_ih, sig, row)
        f = gate(params.w_fx, params.b_fx, params.w_fh, params.b_fh, sig, row)
        g = gate(params.w_gx, params.b_gx, params.w_gh, params.b_gh, math.tanh, row)
        o = gate(params.w_ox, params.b_ox, params.w_oh, params.b_oh, sig, row)
        c = f * c_prev[row] + i * g
        c_new.append(c)
        h_new.append(o * math.tanh(c))
    return h_new, c_new


def random_case(rng, input_size, hidden_size):
    params = LstmParams.random(rng, input_size, hidden_size, bound=1.0)
    state = LstmState(h=Tensor(rng.normal(size=hidden_size)),
                      c=Tensor(rng.normal(size=hidden_size)))
    x = rng.normal(size=input_size)
    return params, state, x


class TestCellStep:
    def test_zero_params_with_unit_cell_memory(self):
        params = LstmParams.zeros(3, 2)
        state = LstmState(h=Tensor(np.zeros(2)), c=Tensor(np.ones(2)))
        out = lstm_cell_step(params, state, Tensor(np.zeros(3)))
        # All gates sit at 0.5 and the candidate at 0, so c = 0.5 * 1.
        npt.assert_allclose(out.c.values, [0.5, 0.5], atol=1e-15)
        npt.assert_allclose(out.h.values, 0.5 * np.tanh(0.5), atol=1e-15)
        npt.assert_allclose(out.h.values, 0.23105857863000487, atol=1e-15)

    def test_matches_scalar_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            d = int(rng.integers(1, 6))
            hs = int(rng.integers(1, 6))
            params, state, x = random_case(rng, d, hs)
            stepped = lstm_cell_step(params, state, Tensor(x))
            oracle_h, oracle_c = scalar_cell(params, state.h.values.tolist(),
                                             state.c.values.tolist(), x.tolist())
            npt.assert_allclose(stepped.h.values, oracle_h, rtol=0, atol=1e-12)
            npt.assert_allclose(stepped.c.values, oracle_c, rtol=0, atol=1e-12)

    def test_hidden_state_is_bounded(self):
        rng = np.random.default_rng(12)
        for _ in range(50):
            params, state, x = random_case(rng, 4, 3)
            out = lstm_cell_step(params, state, Tensor(10.0 * x))
            assert np.all(np.abs(out.h.values) <= 1.0)

    def test_input_width_mismatch(self):
        params = LstmParams.zeros(3, 2)
        with pytest.raises(DimensionError):
            lstm_cell_step(params, zero_state(2), Tensor(np.zeros(4)))

    def test_dual_biases_are_distinct_parameters(self):
        params = LstmParams.zeros(2, 2)
        names = [name for name, _ in named_leaves(params)]
        assert len(names) == 16
        assert "b_ix" in names and "b_ih" in names

    def test_bias_pair_adds_into_one_preactivation(self):
        lifted = LstmParams.zeros(1, 1)
        lifted.b_fx = np.array([1.0])
        lifted.b_fh = np.array([1.0])
        state = LstmState(h=Tensor(np.zeros(1)), c=Tensor(np.ones(1)))
        out = lstm_cell_step(lifted, state, Tensor(np.zeros(1)))
        # Both forget biases land in the same preactivation: sigma(1 + 1).
        npt.assert_allclose(out.c.values, [1.0 / (1.0 + math.exp(-2.0))],
                            atol=1e-15)


class TestSequences:
    def test_returns_one_state_per_step(self):
        rng = np.random.default_rng(13)
        params = LstmParams.random(rng, 3, 2, bound=0.5)
        inputs = [Tensor(rng.normal(size=3)) for _ in range(5)]
        states, terminal = lstm_sequence(params, inputs, zero_state(2))
        assert len(states) == 5
        npt.assert_array_equal(states[-1].values, terminal.h.values)

    def test_empty_sequence_rejected(self):
        with pytest.raises(DimensionError):
            lstm_sequence(LstmParams.zeros(2, 2), [], zero_state(2))

    def test_sequence_matches_repeated_cell_steps(self):
        rng = np.random.default_rng(14)
        params = LstmParams.random(rng, 2, 3, bound=0.7)
        inputs = [Tensor(rng.normal(size=2)) for _ in range(4)]
        states, terminal = lstm_sequence(params, inputs, zero_state(3))
        manual = zero_state(3)
        for step, x in enumerate(inputs):
            manual = lstm_cell_step(params, manual, x)
            npt.assert_array_equal(states[step].values, manual.h.values)
        npt.assert_array_equal(terminal.c.values, manual.c.values)

    def test_bilstm_joins_directions_per_step(self):
        rng = np.random.default_rng(15)
        params = BiLstmParams(forward=LstmParams.random(rng, 2, 3, bound=0.5),
                              backward=LstmParams.random(rng, 2, 3, bound=0.5))
        inputs = [Tensor(rng.normal(size=2)) for _ in range(4)]
        joined, (term_f, term_b) = bilstm_sequence(params, inputs,
                                                   zero_state(3), zero_state(3))
        assert len(joined) == 4
        assert joined[0].shape == (6,)

        fwd_states, fwd_term = lstm_sequence(params.forward, inputs, zero_state(3))
        bwd_states, bwd_term = lstm_sequence(params.backward, inputs[::-1],
                                             zero_state(3))
        for t in range(4):
            expect = np.concatenate([fwd_states[t].values,
                                     bwd_states[3 - t].values])
            npt.assert_array_equal(joined[t].values, expect)
        npt.assert_array_equal(term_f.h.values, fwd_term.h.values)
        npt.assert_array_equal(term_b.h.values, bwd_term.h.values)

    def test_bilstm_direction_swap_mirrors_outputs(self):
        rng = np.random.default_rng(16)
        a = LstmParams.random(rng, 2, 3, bound=0.5)
        b = LstmParams.random(rng, 2, 3, bound=0.5)
        inputs = [Tensor(rng.normal(size=2)) for _ in range(5)]
        joined, _ = bilstm_sequence(BiLstmParams(a, b), inputs,
                                    zero_state(3), zero_state(3))
        mirrored, _ = bilstm_sequence(BiLstmParams(b, a), inputs[::-1],
                                      zero_state(3), zero_state(3))
        for t in range(5):
            fwd, bwd = np.split(joined[t].values, 2)
            m_fwd, m_bwd = np.split(mirrored[4 - t].values, 2)
            npt.assert_array_equal(fwd, m_bwd)
            npt.assert_array_equal(bwd, m_fwd)

    def test_sequence_gradients_match_finite_differences(self):
        rng = np.random.default_rng(17)
        init = LstmParams.random(rng, 2, 3, bound=0.6)
        xs = rng.normal(size=(6, 2))

        def program(tape, leaves):
            params = LstmParams(**{name: leaves[name]
                                   for name, _ in named_leaves(init)})
            states, terminal = lstm_sequence(params,
                                             [Tensor(x) for x in xs],
                                             zero_state(3))
            return total(concat([concat(states), terminal.c]))

        report = check_gradients(program,
                                 dict(named_leaves(init)), tolerance=1e-5)
        assert report.passed, f"max rel error {report.max_rel_error:.3e}"


class TestFeedForwardHead:
    def test_hand_values(self):
        params = FeedForwardParams(hidden=np.array([[3.0]]), out=np.array([[2.0]]))
        out = feedforward_relu(params, Tensor(np.array([1.0])))
        npt.assert_array_equal(out.values, [6.0])
        # A negative preactivation is clamped to zero by the ReLU.
        negative = FeedForwardParams(hidden=np.array([[-3.0]]),
                                     out=np.array([[2.0]]))
        npt.assert_array_equal(
            feedforward_relu(negative, Tensor(np.array([1.0]))).values, [0.0])

    def test_gradients(self):
        rng = np.random.default_rng(18)
        init = FeedForwardParams.random(rng, 6, 4, 3, bound=0.8)
        stacked = rng.normal(size=6)

        def program(tape, leaves):
            params = FeedForwardParams(hidden=leaves["hidden"], out=leaves["out"])
            return total(feedforward_relu(params, Tensor(stacked)))

        report = check_gradients(program, {"hidden": init.hidden, "out": init.out},
                                 tolerance=1e-5)
        assert report.passed
