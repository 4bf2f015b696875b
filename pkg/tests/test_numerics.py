import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seqcast import numerics
from seqcast.numerics import (
    grad_check,
    init_xavier,
    make_rng,
    matmul,
    sigmoid,
    softmax_rows,
    tanh,
)


class TestMatmul:
    def test_identity(self):
        m = np.array([[3.0, 4.0], [5.0, 6.0]])
        assert np.array_equal(matmul(np.eye(2), m), m)

    def test_known_product(self):
        a = np.array([[1.0, 2.0], [3.0, 4.0]])
        b = np.array([[5.0, 6.0], [7.0, 8.0]])
        assert np.array_equal(matmul(a, b), np.array([[19.0, 22.0], [43.0, 50.0]]))

    def test_naive_triple_loop_oracle(self, rng):
        a = rng.normal(size=(4, 3))
        b = rng.normal(size=(3, 5))
        expected = np.zeros((4, 5))
        for i in range(4):
            for j in range(5):
                for k in range(3):
                    expected[i, j] += a[i, k] * b[k, j]
        np.testing.assert_allclose(matmul(a, b), expected, rtol=1e-12)

    def test_zero_annihilates(self, rng):
        b = rng.normal(size=(3, 4))
        assert not matmul(np.zeros((2, 3)), b).any()

    def test_shape_mismatch_names_both_shapes(self):
        with pytest.raises(ValueError, match=r"\(2, 3\).*\(2, 3\)"):
            matmul(np.zeros((2, 3)), np.zeros((2, 3)))

    def test_associativity_on_random_chains(self, rng):
        for _ in range(10):
            a = rng.normal(size=(4, 6))
            b = rng.normal(size=(6, 3))
            c = rng.normal(size=(3, 5))
            left = matmul(matmul(a, b), c)
            right = matmul(a, matmul(b, c))
            rel = np.linalg.norm(left - right) / max(np.linalg.norm(left), 1e-30)
            assert rel < 1e-9


class TestActivations:
    def test_sigmoid_at_zero(self):
        assert sigmoid(np.array([0.0]))[0] == 0.5

    def test_tanh_at_zero(self):
        assert tanh(np.array([0.0]))[0] == 0.0

    def test_sigmoid_saturates_without_overflow(self):
        out = sigmoid(np.array([-500.0, 500.0]))
        assert out[0] < 1e-200 and out[1] == 1.0
        assert np.all(np.isfinite(out))

    @given(st.floats(min_value=-30.0, max_value=30.0, allow_nan=False))
    def test_sigmoid_complement(self, v):
        s = sigmoid(np.array([v, -v]))
        assert abs(s[0] + s[1] - 1.0) < 1e-12

    def test_softmax_uniform_row(self):
        np.testing.assert_allclose(softmax_rows(np.zeros((1, 3))), np.full((1, 3), 1 / 3))

    def test_softmax_rows_sum_to_one(self, rng):
        x = rng.normal(size=(20, 7)) * 50
        sums = softmax_rows(x).sum(axis=1)
        np.testing.assert_allclose(sums, 1.0, atol=1e-12)

    def test_softmax_shift_invariance(self, rng):
        x = rng.normal(size=(4, 5))
        np.testing.assert_allclose(softmax_rows(x), softmax_rows(x + 123.0), atol=1e-12)

    def test_softmax_extreme_values_stay_finite(self):
        out = softmax_rows(np.array([[1000.0, 0.0, -1000.0]]))
        assert np.all(np.isfinite(out))
        assert abs(out.sum() - 1.0) < 1e-12


class TestInitXavier:
    def test_deterministic_given_seed(self):
        a = init_xavier(make_rng(42), 5, 7)
        b = init_xavier(make_rng(42), 5, 7)
        assert np.array_equal(a, b)

    def test_entries_within_bound(self):
        rows, cols = 13, 9
        bound = np.sqrt(6.0 / (rows + cols))
        m = init_xavier(make_rng(3), rows, cols)
        assert np.all(np.abs(m) <= bound)

    def test_large_sample_mean_near_zero(self):
        rows, cols = 100, 100
        bound = np.sqrt(6.0 / (rows + cols))
        m = init_xavier(make_rng(5), rows, cols)
        assert abs(m.mean()) < 0.01 * bound

    def test_zero_dimension_rejected(self):
        with pytest.raises(ValueError):
            init_xavier(make_rng(0), 0, 4)


class TestRng:
    def test_equal_seeds_agree_on_many_draws(self):
        a = make_rng(99).random(1_000_000)
        b = make_rng(99).random(1_000_000)
        assert np.array_equal(a, b)

    def test_different_seeds_differ(self):
        assert not np.array_equal(make_rng(1).random(10), make_rng(2).random(10))


class TestGradCheck:
    def test_quadratic_is_near_exact(self, rng):
        theta = {"w": rng.normal(size=(3, 4))}

        def loss(p):
            return 0.5 * float(np.sum(p["w"] ** 2))

        err = grad_check(loss, theta, {"w": theta["w"].copy()})
        assert err < 1e-7

    def test_scaled_gradient_detected(self, rng):
        theta = {"w": rng.normal(size=(2, 2)) + 3.0}

        def loss(p):
            return 0.5 * float(np.sum(p["w"] ** 2))

        # |2g - g| / (|2g| + |g|) = 1/3 per coordinate
        err = grad_check(loss, theta, {"w": 2.0 * theta["w"]})
        assert abs(err - 1 / 3) < 1e-3

    def test_nonfinite_loss_rejected(self):
        theta = {"w": np.ones((2, 2))}

        def loss(p):
            return float("nan")

        with pytest.raises(ValueError):
            grad_check(loss, theta, {"w": np.ones((2, 2))})


@settings(max_examples=30)
@given(st.integers(min_value=1, max_value=6), st.integers(min_value=1, max_value=6))
def test_xavier_shape_property(rows, cols):
    m = init_xavier(make_rng(7), rows, cols)
    assert m.shape == (rows, cols)
    assert np.all(np.isfinite(m))
