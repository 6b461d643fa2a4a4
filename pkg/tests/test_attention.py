"""Attention blocks against direct numpy and loop re-implementations."""

import numpy as np
import numpy.testing as npt
import pytest

from loadcast.attention import (DISTANCE_EPSILON, FeatureAttentionParams,
                                RECIPROCAL_CAP, SimilarDayWeights,
                                TemporalAttentionParams, context_vector,
                                feature_attention, similar_day_weights,
                                temporal_attention)
from loadcast.errors import DimensionError
from loadcast.tensor import Tensor, check_gradients, total


def softmax(v):
    e = np.exp(v - v.max())
    return e / e.sum()


def make_feature_case(rng, n=5, state_width=4, attn=3):
    params = FeatureAttentionParams.random(rng, state_width, n, attn, bound=0.9)
    state = Tensor(rng.normal(size=state_width))
    features = Tensor(rng.normal(size=n))
    return params, state, features, float(rng.normal())


class TestFeatureAttention:
    def test_weights_sum_to_one_and_are_positive(self):
        rng = np.random.default_rng(21)
        for _ in range(50):
            params, state, features, target = make_feature_case(rng)
            weights, weighted = feature_attention(params, state, features, target)
            assert abs(weights.values.sum() - 1.0) <= 1e-12
            assert np.all(weights.values > 0.0)
            npt.assert_allclose(weighted.values,
                                weights.values * features.values, atol=1e-15)

    def test_zero_parameters_give_exactly_uniform_weights(self):
        params = FeatureAttentionParams.zeros(4, 5, 3)
        rng = np.random.default_rng(22)
        features = rng.normal(size=5)
        weights, weighted = feature_attention(params, Tensor(rng.normal(size=4)),
                                              Tensor(features), 1.5)
        npt.assert_array_equal(weights.values, np.full(5, 0.2))
        npt.assert_array_equal(weighted.values, 0.2 * features)

    def test_single_feature_gets_full_weight(self):
        params = FeatureAttentionParams.zeros(2, 1, 2)
        weights, _ = feature_attention(params, Tensor(np.zeros(2)),
                                       Tensor(np.array([3.0])), 0.0)
        npt.assert_array_equal(weights.values, [1.0])

    def test_matches_numpy_reimplementation(self):
        rng = np.random.default_rng(23)
        for _ in range(20):
            params, state, features, target = make_feature_case(rng)
            weights, weighted = feature_attention(params, state, features, target)
            conditioning = np.concatenate([state.values, features.values,
                                           [target]])
            scores = params.score @ np.tanh(params.proj @ conditioning)
            expect = softmax(scores)
            npt.assert_allclose(weights.values, expect, rtol=0, atol=1e-12)
            npt.assert_allclose(weighted.values, expect * features.values,
                                rtol=0, atol=1e-12)

    def test_gradients(self):
        rng = np.random.default_rng(24)
        init, state, features, target = make_feature_case(rng, n=4,
                                                          state_width=3, attn=2)

        def program(tape, leaves):
            params = FeatureAttentionParams(proj=leaves["proj"],
                                            score=leaves["score"])
            _, weighted = feature_attention(params, Tensor(state.values),
                                            Tensor(features.values), target)
            return total(weighted)

        report = check_gradients(program, {"proj": init.proj, "score": init.score},
                                 tolerance=1e-5)
        assert report.passed, f"max rel error {report.max_rel_error:.3e}"


class TestSimilarDayWeights:
    def test_loop_oracle(self):
        rng = np.random.default_rng(25)
        days, day_len, n = 4, 6, 3
        blocks = rng.normal(size=(days, day_len, n))
        target = rng.normal(size=(day_len, n))
        result = similar_day_weights(blocks, target)

        distances = []
        for day in range(days):
            dist = 0.0
            for feat in range(n):
                ssq = 0.0
                for hour in range(day_len):
                    diff = blocks[day, hour, feat] - target[hour, feat]
                    ssq += diff * diff
                dist += ssq ** 0.5
            distances.append(dist)
        scores = [min(1.0 / (d + DISTANCE_EPSILON), RECIPROCAL_CAP)
                  for d in distances]
        npt.assert_allclose(result.weights, softmax(np.array(scores)),
                            rtol=0, atol=1e-12)

    def test_sum_and_positivity(self):
        rng = np.random.default_rng(26)
        for _ in range(50):
            blocks = rng.normal(size=(3, 4, 2))
            target = rng.normal(size=(4, 2))
            w = similar_day_weights(blocks, target).weights
            assert abs(w.sum() - 1.0) <= 1e-12
            assert np.all(w > 0.0)

    def test_equidistant_days_share_weight_exactly(self):
        block = np.ones((4, 2))
        blocks = np.stack([block + 1.0, block - 1.0])
        w = similar_day_weights(blocks, block).weights
        npt.assert_array_equal(w, [0.5, 0.5])

    def test_identical_day_dominates(self):
        rng = np.random.default_rng(27)
        target = rng.normal(size=(6, 3))
        far = target + 5.0
        w = similar_day_weights(np.stack([target, far]), target).weights
        # An exact match drives the reciprocal into the cap, which saturates
        # the softmax completely at float64 precision.
        assert w[0] > 1.0 - 1e-12
        assert w[0] > w[1]

    def test_day_permutation_permutes_weights(self):
        rng = np.random.default_rng(28)
        blocks = rng.normal(size=(5, 4, 2))
        target = rng.normal(size=(4, 2))
        order = np.array([3, 0, 4, 1, 2])
        base = similar_day_weights(blocks, target).weights
        permuted = similar_day_weights(blocks[order], target).weights
        npt.assert_allclose(permuted, base[order], rtol=0, atol=1e-15)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            similar_day_weights(np.zeros((2, 4, 3)), np.zeros((4, 2)))


class TestTemporalAttention:
    def test_grid_shape_and_normalization(self):
        rng = np.random.default_rng(29)
        params = TemporalAttentionParams.random(rng, state_width=4, n_features=3,
                                                history_len=12, attn_size=2,
                                                bound=0.8)
        grid = temporal_attention(params, Tensor(rng.normal(size=4)),
                                  Tensor(rng.normal(size=3)), day_len=4)
        assert grid.shape == (3, 4)
        assert abs(grid.values.sum() - 1.0) <= 1e-12
        assert np.all(grid.values > 0.0)

    def test_row_major_reshape_indexing(self):
        """Flat step (day index, hour index) must land at grid[day, hour]."""
        rng = np.random.default_rng(30)
        params = TemporalAttentionParams.random(rng, state_width=2, n_features=2,
                                                history_len=6, attn_size=2,
                                                bound=0.8)
        state = Tensor(rng.normal(size=2))
        features = Tensor(rng.normal(size=2))
        grid = temporal_attention(params, state, features, day_len=3)

        conditioning = np.concatenate([state.values, features.values])
        flat = softmax(params.score @ np.tanh(params.proj @ conditioning))
        for step in range(6):
            day, hour = divmod(step, 3)
            assert grid.values[day, hour] == flat[step]

    def test_zero_parameters_give_uniform_grid(self):
        params = TemporalAttentionParams.zeros(state_width=4, n_features=3,
                                               history_len=8, attn_size=2)
        grid = temporal_attention(params, Tensor(np.zeros(4)),
                                  Tensor(np.zeros(3)), day_len=4)
        npt.assert_array_equal(grid.values, np.full((2, 4), 0.125))

    def test_history_not_divisible_by_day_rejected(self):
        params = TemporalAttentionParams.zeros(state_width=2, n_features=2,
                                               history_len=7, attn_size=2)
        with pytest.raises(DimensionError):
            temporal_attention(params, Tensor(np.zeros(2)), Tensor(np.zeros(2)),
                               day_len=4)


class TestContextVector:
    def test_loop_oracle(self):
        rng = np.random.default_rng(31)
        days, day_len, width = 3, 4, 5
        day_w = SimilarDayWeights(weights=softmax(rng.normal(size=days)))
        hour_grid = rng.random(size=(days, day_len))
        hour_grid /= hour_grid.sum()
        states = rng.normal(size=(days * day_len, width))

        context = context_vector(day_w, Tensor(hour_grid), Tensor(states))

        expect = np.zeros(width)
        for day in range(days):
            for hour in range(day_len):
                step = day * day_len + hour
                expect += day_w.weights[day] * hour_grid[day, hour] * states[step]
        npt.assert_allclose(context.values, expect, rtol=0, atol=1e-12)

    def test_context_stays_within_state_envelope(self):
        rng = np.random.default_rng(32)
        day_w = SimilarDayWeights(weights=softmax(rng.normal(size=2)))
        hour_grid = rng.random(size=(2, 3))
        hour_grid /= hour_grid.sum()
        states = rng.normal(size=(6, 4))
        context = context_vector(day_w, Tensor(hour_grid), Tensor(states))
        # Combined weights sum to at most 1, so the context cannot exceed the
        # largest state magnitude coordinate-wise.
        assert np.all(np.abs(context.values) <= np.abs(states).max(axis=0) + 1e-12)

    def test_pointmass_weights_select_one_state(self):
        states = np.arange(12.0).reshape(4, 3)
        day_w = SimilarDayWeights(weights=np.array([0.0, 1.0]))
        hour_grid = np.array([[0.0, 0.0], [1.0, 0.0]])
        context = context_vector(day_w, Tensor(hour_grid), Tensor(states))
        npt.assert_array_equal(context.values, states[2])

    def test_day_weights_are_constant_in_backprop(self):
        """Only the hour grid and states carry gradients; day weights do not."""
        rng = np.random.default_rng(33)
        day_w = SimilarDayWeights(weights=softmax(rng.normal(size=2)))
        hour_grid = rng.random(size=(2, 3))
        states = rng.normal(size=(6, 4))

        def program(tape, leaves):
            return total(context_vector(day_w, leaves["hour"], leaves["states"]))

        report = check_gradients(program, {"hour": hour_grid, "states": states},
                                 tolerance=1e-6)
        assert report.passed, f"max rel error {report.max_rel_error:.3e}"
