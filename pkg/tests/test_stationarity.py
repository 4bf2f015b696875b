import numpy as np
import pytest

from seqcast.numerics import make_rng
from seqcast.stationarity import (
    AdfResult,
    adf_test,
    default_max_lag,
    difference,
    mackinnon_pvalue,
)

# Oracle values computed offline with a reference statistical package
# (same sequences, constant-only regression) and frozen here.
RW_SEED, AR_SEED, WN_SEED, N = 40, 43, 44, 500
RW_LAG3_STAT = -1.5717581390448185
RW_LAG3_P = 0.49776293507665931
RW_AIC_STAT = -1.5960646282745599
RW_AIC_LAG = 0
RW_AIC_NOBS = 499
AR_LAG3_STAT = -9.6378986577511583
WN_LAG3_STAT = -10.966751170326082
WN_AIC_STAT = -23.736953933915164


def random_walk() -> np.ndarray:
    return np.cumsum(make_rng(RW_SEED).normal(size=N))


def ar_half() -> np.ndarray:
    g = make_rng(AR_SEED)
    eps = g.normal(size=N)
    y = np.empty(N)
    y[0] = 0.0
    for t in range(1, N):
        y[t] = 0.5 * y[t - 1] + eps[t]
    return y


def white_noise() -> np.ndarray:
    return make_rng(WN_SEED).normal(size=N)


class TestDifference:
    def test_constant_goes_to_zero(self):
        assert not difference(np.full(10, 3.3), 1).any()

    def test_known_values(self):
        np.testing.assert_array_equal(difference([1, 3, 6, 10], 1), [2.0, 3.0, 4.0])

    def test_twice_equals_order_two(self, rng):
        v = rng.normal(size=50)
        np.testing.assert_allclose(difference(difference(v, 1), 1), difference(v, 2), atol=1e-12)

    def test_too_short_rejected(self):
        with pytest.raises(ValueError):
            difference([1.0, 2.0], 2)


class TestMackinnonPvalue:
    def test_clamps(self):
        assert mackinnon_pvalue(3.0) == 1.0
        assert mackinnon_pvalue(-20.0) == 0.0

    def test_monotone_in_statistic(self):
        taus = np.linspace(-6.0, 1.0, 40)
        ps = [mackinnon_pvalue(t) for t in taus]
        assert all(a <= b + 1e-12 for a, b in zip(ps, ps[1:]))

    def test_in_unit_interval(self):
        for tau in np.linspace(-25, 5, 61):
            assert 0.0 <= mackinnon_pvalue(float(tau)) <= 1.0


class TestAdfOracle:
    def test_random_walk_fixed_lag_statistic(self):
        res = adf_test(random_walk(), fixed_lag=3)
        assert abs(res.statistic - RW_LAG3_STAT) < 1e-6
        assert abs(res.p_value - RW_LAG3_P) < 1e-6
        assert res.lags_used == 3

    def test_random_walk_fails_to_reject(self):
        assert adf_test(random_walk(), fixed_lag=3).p_value > 0.10
        assert adf_test(random_walk()).p_value > 0.10

    def test_random_walk_aic_selection(self):
        res = adf_test(random_walk())
        assert abs(res.statistic - RW_AIC_STAT) < 1e-6
        assert res.lags_used == RW_AIC_LAG
        assert res.n_obs == RW_AIC_NOBS

    def test_ar_half_fixed_lag_statistic(self):
        res = adf_test(ar_half(), fixed_lag=3)
        assert abs(res.statistic - AR_LAG3_STAT) < 1e-6

    def test_white_noise_rejects(self):
        res = adf_test(white_noise(), fixed_lag=3)
        assert abs(res.statistic - WN_LAG3_STAT) < 1e-6
        assert res.p_value < 0.01
        auto = adf_test(white_noise())
        assert abs(auto.statistic - WN_AIC_STAT) < 1e-6
        assert auto.p_value < 0.01


class TestAdfContracts:
    def test_shift_invariance(self):
        y = random_walk()
        a = adf_test(y, fixed_lag=2).statistic
        b = adf_test(y + 1000.0, fixed_lag=2).statistic
        assert abs(a - b) < 1e-9

    def test_constant_input_degenerate(self):
        with pytest.raises(ValueError, match="degenerate"):
            adf_test(np.full(100, 5.0))

    def test_linear_ramp_differenced_is_degenerate(self):
        ramp = np.arange(200, dtype=np.float64)
        d = difference(ramp, 1)
        assert np.all(d == d[0])
        with pytest.raises(ValueError, match="degenerate"):
            adf_test(d)

    def test_nobs_identity(self):
        y = white_noise()
        for lag in (0, 1, 4, 7):
            res = adf_test(y, fixed_lag=lag)
            assert res.n_obs == N - lag - 1

    def test_p_value_in_unit_interval_many_series(self):
        for seed in range(20):
            y = np.cumsum(make_rng(seed).normal(size=120))
            res = adf_test(y)
            assert 0.0 <= res.p_value <= 1.0
            assert np.isfinite(res.statistic)

    def test_default_max_lag_formula(self):
        assert default_max_lag(100) == 12
        assert default_max_lag(500) == int(12 * (5.0**0.25))

    def test_too_short_rejected(self):
        with pytest.raises(ValueError):
            adf_test(np.arange(8.0) + make_rng(0).normal(size=8), fixed_lag=3)

    def test_result_dict_fields(self):
        res = adf_test(white_noise(), fixed_lag=1)
        d = res.as_dict()
        assert set(d) == {"statistic", "p_value", "lags_used", "n_obs"}
        assert isinstance(res, AdfResult)
