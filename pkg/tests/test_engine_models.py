"""Model initialization, forward pass, and analytic-gradient correctness."""

import math

import numpy as np
import pytest

from lrtune.engine.models import (
    ModelSpec,
    backward,
    forward,
    forward_backward,
    init_model,
)
from oracles import brute_softmax_ce, numerical_gradients


def _random_case(rng, arch):
    d = int(rng.integers(3, 9))
    c = int(rng.integers(2, 6))
    n = int(rng.integers(4, 12))
    hidden = int(rng.integers(2, 9)) if arch == "mlp" else None
    wd = float(rng.choice([0.0, 0.01, 0.1]))
    spec = ModelSpec(arch=arch, hidden_units=hidden, init="gaussian",
                     init_sigma=0.5, weight_decay=wd)
    model = init_model(spec, d, c, seed=int(rng.integers(0, 2**31)))
    x = rng.uniform(0.0, 1.0, size=(n, d))
    y = rng.integers(0, c, size=n)
    return model, x, y


class TestInitModel:
    def test_xavier_bound(self):
        spec = ModelSpec(arch="softmax_linear")
        model = init_model(spec, 4, 2, seed=0)
        # bound is sqrt(6 / (4 + 2)) = 1
        assert np.abs(model.params["w"]).max() <= 1.0
        assert np.all(model.params["b"] == 0.0)

    def test_gaussian_sigma_zero_gives_zero_weights(self):
        spec = ModelSpec(arch="softmax_linear", init="gaussian", init_sigma=0.0)
        model = init_model(spec, 5, 3, seed=1)
        assert np.all(model.params["w"] == 0.0)

    def test_same_seed_same_params(self):
        spec = ModelSpec(arch="mlp", hidden_units=7)
        a = init_model(spec, 5, 3, seed=9)
        b = init_model(spec, 5, 3, seed=9)
        for key in a.params:
            assert np.array_equal(a.params[key], b.params[key])

    def test_mlp_shapes(self):
        model = init_model(ModelSpec(arch="mlp", hidden_units=7), 5, 3, seed=2)
        assert model.params["w1"].shape == (5, 7)
        assert model.params["w2"].shape == (7, 3)


class TestForward:
    def test_zero_weights_uniform_probs(self):
        spec = ModelSpec(arch="softmax_linear", init="gaussian", init_sigma=0.0)
        model = init_model(spec, 4, 5, seed=0)
        x = np.random.default_rng(0).uniform(size=(6, 4))
        batch, loss = forward(model, x, np.zeros(6, dtype=int))
        assert np.allclose(batch.probs, 0.2)
        assert loss == pytest.approx(math.log(5), rel=1e-12)

    def test_probability_rows_sum_to_one(self):
        rng = np.random.default_rng(3)
        model, x, y = _random_case(rng, "mlp")
        batch, _ = forward(model, x, y)
        assert np.abs(batch.probs.sum(axis=1) - 1.0).max() < 1e-9

    def test_favored_logit_concentrates(self):
        spec = ModelSpec(arch="softmax_linear", init="gaussian", init_sigma=0.0)
        model = init_model(spec, 2, 3, seed=0)
        model.params["b"] = np.array([8.0, 0.0, 0.0])
        batch, _ = forward(model, np.ones((1, 2)), np.array([0]))
        assert batch.predicted()[0] == 0
        assert batch.probs[0, 0] > 0.99

    def test_matches_per_sample_loop(self):
        rng = np.random.default_rng(4)
        for _ in range(5):
            model, x, y = _random_case(rng, "softmax_linear")
            _, loss = forward(model, x, y)
            expected = brute_softmax_ce(
                model.params["w"], model.params["b"], x, y,
                model.spec.weight_decay,
            )
            assert loss == pytest.approx(expected, rel=1e-12)

    def test_dimension_mismatch(self):
        model = init_model(ModelSpec(), 4, 2, seed=0)
        with pytest.raises(ValueError):
            forward(model, np.zeros((3, 5)), np.zeros(3, dtype=int))


class TestBackward:
    def test_zero_weight_bias_gradient_closed_form(self):
        spec = ModelSpec(arch="softmax_linear", init="gaussian", init_sigma=0.0)
        model = init_model(spec, 3, 4, seed=0)
        rng = np.random.default_rng(1)
        x = rng.uniform(size=(8, 3))
        y = rng.integers(0, 4, size=8)
        grads = backward(model, x, y)
        onehot = np.eye(4)[y]
        expected = (np.full((8, 4), 0.25) - onehot).mean(axis=0)
        assert np.allclose(grads["b"], expected, atol=1e-12)

    @pytest.mark.parametrize("arch", ["softmax_linear", "mlp"])
    def test_matches_central_differences(self, arch):
        rng = np.random.default_rng(2025)
        worst = 0.0
        for _ in range(3):
            model, x, y = _random_case(rng, arch)
            _, analytic = forward_backward(model, x, y)

            def loss_of(params):
                model.params = params
                return forward_backward(model, x, y)[0]

            numeric = numerical_gradients(loss_of, model.params, h=1e-5)
            for key in analytic:
                denom = np.maximum(
                    np.maximum(np.abs(analytic[key]), np.abs(numeric[key])), 1e-6
                )
                worst = max(worst, float(
                    (np.abs(analytic[key] - numeric[key]) / denom).max()
                ))
        assert worst < 1e-6

    def test_weight_decay_adds_exactly_lambda_theta(self):
        rng = np.random.default_rng(6)
        spec0 = ModelSpec(arch="mlp", hidden_units=5, init="gaussian",
                          init_sigma=0.5, weight_decay=0.0)
        spec1 = ModelSpec(arch="mlp", hidden_units=5, init="gaussian",
                          init_sigma=0.5, weight_decay=0.25)
        m0 = init_model(spec0, 4, 3, seed=12)
        m1 = init_model(spec1, 4, 3, seed=12)
        x = rng.uniform(size=(6, 4))
        y = rng.integers(0, 3, size=6)
        g0 = backward(m0, x, y)
        g1 = backward(m1, x, y)
        for key in g0:
            assert np.allclose(g1[key] - g0[key], 0.25 * m0.params[key],
                               atol=1e-12)
