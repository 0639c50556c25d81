import math

import numpy as np
import pytest

from maneuverkit.events import EVENTS
from maneuverkit.fusion_rnn import flatten_params, init_fusion_model
from maneuverkit.numerics import make_rng
from maneuverkit.synth import ScenarioConfig, SequenceSample, generate
from maneuverkit.training import (
    LOSS_EXPONENTIAL,
    LOSS_UNIFORM,
    TrainConfig,
    anticipation_loss,
    augment,
    gradient_check,
    loss_weights,
    rmsprop_update,
    train,
)


class TestLoss:
    def test_single_step_both_modes(self):
        probs = np.array([[0.2, 0.5, 0.3]])
        expected = -math.log(0.5)
        assert abs(anticipation_loss(probs, 1, LOSS_EXPONENTIAL) - expected) < 1e-15
        assert abs(anticipation_loss(probs, 1, LOSS_UNIFORM) - expected) < 1e-15

    def test_constant_half_probability(self):
        probs = np.full((3, 4), 0.5)
        expected = math.log(2.0) * (1.0 + math.exp(-1.0) + math.exp(-2.0))
        assert abs(anticipation_loss(probs, 0, LOSS_EXPONENTIAL) - expected) <= 1e-12

    def test_exponential_never_exceeds_uniform(self):
        rng = make_rng(0)
        for _ in range(1000):
            T = int(rng.integers(1, 15))
            probs = rng.uniform(1e-6, 1.0, size=(T, 5))
            probs /= probs.sum(axis=1, keepdims=True)
            k = int(rng.integers(0, 5))
            exp_loss = anticipation_loss(probs, k, LOSS_EXPONENTIAL)
            uni_loss = anticipation_loss(probs, k, LOSS_UNIFORM)
            assert exp_loss <= uni_loss + 1e-12

    def test_weights_monotone_and_end_at_one(self):
        for T in (1, 2, 5, 40):
            w = loss_weights(T, LOSS_EXPONENTIAL)
            assert w[-1] == 1.0
            assert np.all(np.diff(w) > 0) or T == 1

    def test_floor_keeps_loss_finite(self):
        probs = np.zeros((4, 3))
        probs[:, 0] = 1.0
        loss = anticipation_loss(probs, 2, LOSS_EXPONENTIAL, prob_floor=1e-12)
        assert np.isfinite(loss)

    def test_target_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            anticipation_loss(np.full((2, 3), 1 / 3), 3, LOSS_UNIFORM)


class TestRmsProp:
    def test_zero_gradient_leaves_params(self):
        p, acc = np.array([1.0, -2.0]), np.array([0.5, 0.5])
        new_p, new_acc = rmsprop_update(p, np.zeros(2), acc, 0.1, 0.9, 1e-8)
        np.testing.assert_array_equal(new_p, p)
        np.testing.assert_allclose(new_acc, 0.45)

    def test_first_scalar_step(self):
        p, acc = np.array([0.0]), np.array([0.0])
        new_p, new_acc = rmsprop_update(p, np.array([1.0]), acc, 0.1, 0.9, 1e-8)
        expected = -0.1 * 1.0 / (math.sqrt(0.1) + 1e-8)
        assert abs(new_p[0] - expected) < 1e-15
        assert abs(new_acc[0] - 0.1) < 1e-15

    def test_non_finite_gradient_rejected(self):
        with pytest.raises(FloatingPointError):
            rmsprop_update(np.zeros(1), np.array([np.nan]), np.zeros(1), 0.1, 0.9, 1e-8)


def toy_dataset(n=24, seed=0):
    """Two linearly separable classes over constant streams, T=4."""
    rng = make_rng(seed)
    samples = []
    for i in range(n):
        label = i % 2
        shift = 1.0 if label == 0 else -1.0
        xs = np.tile(rng.normal(shift, 0.1, size=6), (4, 1))
        zs = np.tile(rng.normal(-shift, 0.1, size=9), (4, 1))
        canonical = 0 if label == 0 else 4  # left_lane vs straight
        samples.append(SequenceSample(id=f"toy-{i}", xs=xs, zs=zs, label=canonical))
    return samples


class TestAugmentation:
    def test_factor_one_is_identity(self):
        data = toy_dataset()
        out = augment(data, 1.0, seed=0)
        assert out == data

    def test_reaches_target_size(self):
        data = toy_dataset(n=700 // 7)  # keep runtime small; same arithmetic
        out = augment(data, 2250 / 700, seed=1)
        assert len(out) == math.ceil(2250 / 700 * len(data))

    def test_augmented_items_are_contiguous_slices(self):
        data = toy_dataset(n=10, seed=3)
        out = augment(data, 3.0, seed=5)
        by_id = {s.id: s for s in data}
        for s in out[len(data):]:
            src = by_id[s.meta["source"]]
            i, j = s.meta["start"], s.meta["stop"]
            assert 0 <= i < j < src.length
            assert s.label == src.label
            np.testing.assert_array_equal(s.xs, src.xs[i : j + 1])
            np.testing.assert_array_equal(s.zs, src.zs[i : j + 1])
            assert s.xs.shape[0] >= 2

    def test_originals_retained(self):
        data = toy_dataset(n=8)
        out = augment(data, 2.0, seed=2)
        assert out[: len(data)] == data

    def test_bad_factor_rejected(self):
        with pytest.raises(ValueError):
            augment(toy_dataset(), 0.5, seed=0)


class TestTrain:
    def test_zero_epochs_returns_initial_model(self):
        data = toy_dataset()
        model = init_fusion_model("fusion", 6, 9, 4, EVENTS, make_rng(1))
        report = train(data, model, TrainConfig(epochs=0))
        np.testing.assert_array_equal(flatten_params(report.model), flatten_params(model))

    def test_loss_decreases_on_separable_data(self):
        data = toy_dataset(seed=1)
        model = init_fusion_model("fusion", 6, 9, 6, EVENTS, make_rng(1))
        report = train(data, model, TrainConfig(epochs=10, learning_rate=2e-3, seed=1))
        losses = report.epoch_losses
        assert all(b < a for a, b in zip(losses, losses[1:]))

    def test_same_seed_reproduces_parameters(self):
        data = toy_dataset(seed=2)
        model = init_fusion_model("fusion", 6, 9, 4, EVENTS, make_rng(5))
        cfg = TrainConfig(epochs=3, learning_rate=1e-3, seed=9)
        r1 = train(data, model, cfg)
        r2 = train(data, model, cfg)
        np.testing.assert_array_equal(flatten_params(r1.model), flatten_params(r2.model))

    def test_empty_dataset_rejected(self):
        model = init_fusion_model("fusion", 6, 9, 4, EVENTS, make_rng(5))
        with pytest.raises(ValueError):
            train([], model, TrainConfig())

    def test_non_finite_loss_aborts_with_checkpoint(self):
        data = toy_dataset(n=4)
        model = init_fusion_model("fusion", 6, 9, 4, EVENTS, make_rng(5))
        model.W_y[0, 0] = np.nan
        report = train(data, model, TrainConfig(epochs=3))
        assert report.aborted
        assert report.epoch_losses == []
        assert report.model is not None


class TestGradientCheck:
    @pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
    def test_passes_for_exponential_loss(self, seed):
        rng = make_rng(seed)
        model = init_fusion_model("fusion", 6, 9, 6, EVENTS, rng)
        xs = rng.standard_normal((6, 6))
        zs = rng.standard_normal((6, 9))
        report = gradient_check(model, xs, zs, int(rng.integers(0, 5)), TrainConfig())
        assert report.passed, report.block_errors

    def test_passes_for_uniform_loss(self):
        rng = make_rng(40)
        model = init_fusion_model("fusion", 6, 9, 6, EVENTS, rng)
        xs = rng.standard_normal((6, 6))
        zs = rng.standard_normal((6, 9))
        report = gradient_check(model, xs, zs, 1, TrainConfig(loss_mode=LOSS_UNIFORM))
        assert report.passed, report.block_errors


def test_generated_data_trains_end_to_end():
    data = generate(ScenarioConfig(seed=8), 80)
    model = init_fusion_model("fusion", 6, 9, 8, EVENTS, make_rng(2))
    report = train(data, model, TrainConfig(epochs=3, learning_rate=2e-3, seed=3))
    assert report.epoch_losses[-1] < report.epoch_losses[0]
    assert not report.aborted
