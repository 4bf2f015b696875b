import math

import numpy as np
import pytest

from seqcast.models import lstm
from seqcast.numerics import grad_check, make_rng


def mse_setup(params, x, y):
    def loss_fn(p):
        preds, _ = lstm.forward(p, x)
        return float(np.mean((preds - y) ** 2))

    preds, cache = lstm.forward(params, x)
    d_preds = 2.0 * (preds - y) / preds.size
    return loss_fn, lstm.backward(params, cache, d_preds)


class TestForward:
    def test_all_zero_params_gates_half_prediction_is_head_bias(self):
        p = lstm.init_params(make_rng(0), hidden=3, forget_bias=0.0)
        zeros = {name: np.zeros_like(a) for name, a in p.named_arrays()}
        zeros["head_b"] = np.array([0.37])
        p = lstm.LstmParams.from_arrays(zeros)
        preds, cache = lstm.forward(p, np.array([[0.2, 0.8, 0.5]]))
        for t in range(3):
            np.testing.assert_allclose(cache["f"][t], 0.5, atol=1e-15)
            np.testing.assert_allclose(cache["i"][t], 0.5, atol=1e-15)
            np.testing.assert_allclose(cache["o"][t], 0.5, atol=1e-15)
            np.testing.assert_allclose(cache["g"][t], 0.0, atol=1e-15)
        assert not cache["h_last"].any()
        np.testing.assert_allclose(preds, [0.37], atol=1e-15)

    def test_saturated_gates_accumulate_cell_state(self):
        # zero weights, huge positive gate biases: f=i=1, candidate=1,
        # so the cell state steps by exactly one per timestep.
        p = lstm.init_params(make_rng(0), hidden=1)
        arrays = {name: np.zeros_like(a) for name, a in p.named_arrays()}
        for name in ("b_f", "b_i", "b_c"):
            arrays[name] = np.array([1e3])
        p = lstm.LstmParams.from_arrays(arrays)
        steps = 6
        _, cache = lstm.forward(p, np.zeros((1, steps)))
        c_final = cache["c_prev"][-1] * cache["f"][-1] + cache["i"][-1] * cache["g"][-1]
        assert abs(float(c_final[0, 0]) - steps) < 1e-6

    def test_matches_scalar_reimplementation(self):
        # independent straight-line oracle: plain-float loops, no shared code
        hidden, steps = 4, 5
        rng = make_rng(123)
        p = lstm.init_params(rng, hidden=hidden)
        xs = [0.3, -0.1, 0.7, 0.05, -0.4]

        def sig(v):
            return 1.0 / (1.0 + math.exp(-v))

        h = [0.0] * hidden
        c = [0.0] * hidden
        for t in range(steps):
            z = h + [xs[t]]
            f = [sig(sum(p.w_f[j][k] * z[k] for k in range(hidden + 1)) + p.b_f[j]) for j in range(hidden)]
            i = [sig(sum(p.w_i[j][k] * z[k] for k in range(hidden + 1)) + p.b_i[j]) for j in range(hidden)]
            g = [math.tanh(sum(p.w_c[j][k] * z[k] for k in range(hidden + 1)) + p.b_c[j]) for j in range(hidden)]
            o = [sig(sum(p.w_o[j][k] * z[k] for k in range(hidden + 1)) + p.b_o[j]) for j in range(hidden)]
            c = [f[j] * c[j] + i[j] * g[j] for j in range(hidden)]
            h = [o[j] * math.tanh(c[j]) for j in range(hidden)]
        expected = sum(p.head_w[0][j] * h[j] for j in range(hidden)) + p.head_b[0]

        preds, _ = lstm.forward(p, np.array([xs]))
        assert abs(preds[0] - expected) < 1e-12

    def test_shape_mismatch_rejected(self):
        p = lstm.init_params(make_rng(0), hidden=2)
        with pytest.raises(ValueError):
            lstm.forward(p, np.zeros((3,)))  # not (batch, steps)

    def test_cell_state_bounded_by_step_count(self):
        # inputs in [0,1]: each step adds at most one tanh-bounded unit
        rng = make_rng(5)
        p = lstm.init_params(rng, hidden=6)
        x = make_rng(6).random((4, 12))
        _, cache = lstm.forward(p, x)
        for t in range(12):
            c_t = cache["c_prev"][t] * cache["f"][t] + cache["i"][t] * cache["g"][t]
            assert np.all(np.abs(c_t) <= t + 1 + 1e-12)


class TestBackward:
    def test_grad_check_hidden4_t5(self):
        rng = make_rng(11)
        p = lstm.init_params(rng, hidden=4)
        x = make_rng(21).normal(size=(3, 5))
        y = make_rng(31).normal(size=3)
        loss_fn, analytic = mse_setup(p, x, y)
        assert grad_check(loss_fn, p, analytic) < 1e-4

    def test_zero_upstream_gives_zero_grads(self):
        p = lstm.init_params(make_rng(2), hidden=3)
        _, cache = lstm.forward(p, make_rng(3).random((2, 4)))
        grads = lstm.backward(p, cache, np.zeros(2))
        for _, g in grads.named_arrays():
            assert not g.any()

    def test_batch_gradient_is_mean_of_per_sample(self):
        p = lstm.init_params(make_rng(4), hidden=3)
        x = make_rng(5).normal(size=(2, 6))
        y = make_rng(6).normal(size=2)

        preds, cache = lstm.forward(p, x)
        batch = lstm.backward(p, cache, 2.0 * (preds - y) / 2)
        singles = []
        for b in range(2):
            pb, cb = lstm.forward(p, x[b : b + 1])
            singles.append(lstm.backward(p, cb, 2.0 * (pb - y[b : b + 1])))
        for (name, g), (_, g0), (_, g1) in zip(
            batch.named_arrays(), singles[0].named_arrays(), singles[1].named_arrays()
        ):
            np.testing.assert_allclose(g, (g0 + g1) / 2, atol=1e-12, err_msg=name)

    def test_cache_mismatch_rejected(self):
        p3 = lstm.init_params(make_rng(0), hidden=3)
        p4 = lstm.init_params(make_rng(0), hidden=4)
        _, cache = lstm.forward(p3, np.zeros((1, 2)))
        with pytest.raises(ValueError):
            lstm.backward(p4, cache, np.zeros(1))


class TestParams:
    def test_parameter_count_formula(self):
        h = 5
        p = lstm.init_params(make_rng(0), hidden=h)
        total = sum(a.size for _, a in p.named_arrays())
        assert total == 4 * h * (h + 1 + 1) + h + 1

    def test_forget_bias_default_one(self):
        p = lstm.init_params(make_rng(0), hidden=4)
        assert np.all(p.b_f == 1.0)
        p0 = lstm.init_params(make_rng(0), hidden=4, forget_bias=0.0)
        assert not p0.b_f.any()

    def test_init_deterministic(self):
        a = lstm.init_params(make_rng(7), hidden=4)
        b = lstm.init_params(make_rng(7), hidden=4)
        for (n1, x), (n2, y) in zip(a.named_arrays(), b.named_arrays()):
            assert n1 == n2
            assert np.array_equal(x, y)

    def test_shape_validation(self):
        p = lstm.init_params(make_rng(0), hidden=3)
        arrays = dict(p.named_arrays())
        arrays["w_i"] = np.zeros((2, 4))
        with pytest.raises(ValueError, match="w_i"):
            lstm.LstmParams.from_arrays(arrays)


def test_grad_check_multiple_seeds():
    worst = 0.0
    for seed in range(5):
        p = lstm.init_params(make_rng(100 + seed), hidden=4)
        x = make_rng(200 + seed).normal(size=(2, 5))
        y = make_rng(300 + seed).normal(size=2)
        loss_fn, analytic = mse_setup(p, x, y)
        worst = max(worst, grad_check(loss_fn, p, analytic))
    assert worst < 1e-4
