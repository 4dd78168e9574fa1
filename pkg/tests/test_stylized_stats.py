import math

import numpy as np
import pytest

from isingmarket.errors import DomainError
from isingmarket.stylized_stats import (
    ReturnSeries,
    SeriesReport,
    VolatilityFlag,
    autocorrelation,
    bartlett_band,
    compute_returns,
    cv_log_statistic,
    excess_kurtosis,
    excess_volatility_diagnostic,
    hill_estimator,
    stylized_facts_report,
)


def pareto(rng, mu, n, xmin=1.0):
    # inverse CDF of P(X > x) = (x / xmin)^-mu
    return xmin * (1.0 - rng.random(n)) ** (-1.0 / mu)


class TestReturns:
    def test_constant_prices(self):
        assert np.all(compute_returns([5.0] * 10).values == 0)

    def test_simple(self):
        assert compute_returns([100, 110], "simple").values[0] == pytest.approx(0.10, abs=1e-15)

    def test_log(self):
        assert compute_returns([100, 110]).values[0] == pytest.approx(0.09531017980432486, abs=1e-16)

    @pytest.mark.parametrize("prices", [[1.0, 0.0, 2.0], [1.0, -3.0], [1.0, math.nan], [1.0]])
    def test_bad_prices(self, prices):
        with pytest.raises(DomainError):
            compute_returns(prices)


class TestKurtosis:
    def test_gaussian(self, rng):
        assert abs(excess_kurtosis(rng.standard_normal(100_000))) < 0.1

    def test_rademacher_exact(self):
        assert excess_kurtosis(np.tile([1.0, -1.0], 50)) == -2.0

    def test_student_t12_analytic(self, rng):
        # 6 / (nu - 4) = 0.75; the sampling spread at n = 2e5 is about 0.03
        assert excess_kurtosis(rng.standard_t(12, 200_000)) == pytest.approx(0.75, abs=0.12)

    def test_student_t5(self):
        # analytic value 6, but the eighth moment is infinite, so single-sample values
        # are strongly right-skewed; the median over replications sits somewhat below 6
        rng = np.random.default_rng(5)
        vals = [excess_kurtosis(rng.standard_t(5, 100_000)) for _ in range(20)]
        assert 3.5 < float(np.median(vals)) < 8.0

    def test_zero_variance(self):
        with pytest.raises(DomainError):
            excess_kurtosis(np.ones(100))

    def test_too_short(self):
        with pytest.raises(DomainError):
            excess_kurtosis(np.arange(10.0))


class TestAutocorrelation:
    def test_iid_within_band(self, rng):
        acf = autocorrelation(rng.standard_normal(10_000), 20)
        assert acf[0] == 1.0
        assert np.sum(np.abs(acf[1:]) >= bartlett_band(10_000)) <= 1

    def test_ar1(self):
        rng = np.random.default_rng(7)
        n = 200_000
        e = rng.standard_normal(n)
        x = np.empty(n)
        x[0] = e[0]
        for t in range(1, n):
            x[t] = 0.5 * x[t - 1] + e[t]
        acf = autocorrelation(x, 3)
        assert acf[1] == pytest.approx(0.5, abs=0.01)
        assert acf[2] == pytest.approx(0.25, abs=0.01)

    def test_alternating(self):
        # the biased estimator gives -(n-1)/n, tending to -1
        acf = autocorrelation(np.tile([1.0, -1.0], 100), 5)
        assert acf[1] == pytest.approx(-199 / 200, abs=1e-15)
        big = autocorrelation(np.tile([1.0, -1.0], 500_000), 2)
        assert big[1] == pytest.approx(-1.0, abs=1e-5)

    def test_bounds(self, rng):
        acf = autocorrelation(np.cumsum(rng.standard_normal(1000)), 200)
        assert np.all(np.abs(acf) <= 1)

    @pytest.mark.parametrize("lag", [0, 25, 40])
    def test_lag_range(self, lag):
        with pytest.raises(DomainError):
            autocorrelation(np.arange(100.0), lag)

    def test_zero_variance(self):
        with pytest.raises(DomainError):
            autocorrelation(np.ones(100), 3)


class TestHill:
    @pytest.mark.parametrize("mu,lo,hi", [(3.0, 2.8, 3.2), (1.5, 1.36, 1.64)])
    def test_pareto(self, mu, lo, hi):
        est = hill_estimator(pareto(np.random.default_rng(11), mu, 100_000), 1000)
        assert lo <= est.mu <= hi
        assert est.std_error == pytest.approx(est.mu / math.sqrt(1000))
        assert est.k == 1000

    def test_single_term(self):
        est = hill_estimator([math.e, 1.0], 1)
        assert est.mu == pytest.approx(1.0, abs=1e-15)
        assert est.threshold == 1.0

    def test_sign_ignored(self, rng):
        x = pareto(rng, 2.0, 5000)
        signs = rng.choice([-1.0, 1.0], x.size)
        assert hill_estimator(x * signs, 200).mu == hill_estimator(x, 200).mu

    def test_ties(self):
        with pytest.raises(DomainError):
            hill_estimator(np.ones(50), 10)

    @pytest.mark.parametrize("k", [0, 50])
    def test_k_range(self, k):
        with pytest.raises(DomainError):
            hill_estimator(np.arange(1.0, 51.0), k)

    def test_coverage(self):
        rng = np.random.default_rng(2)
        mu, k = 3.0, 500
        hits = sum(abs(hill_estimator(pareto(rng, mu, 20_000), k).mu - mu) < 3 * mu / math.sqrt(k)
                   for _ in range(100))
        assert hits >= 99


class TestCvLog:
    def test_lognormal(self, rng):
        x = np.exp(rng.normal(1.0, 0.5, 100_000))
        assert cv_log_statistic(x).statistic == pytest.approx(0.5, abs=0.01)

    def test_constant(self):
        res = cv_log_statistic(np.full(40, math.e))
        assert res.statistic == 0.0 and res.n_used == 40

    def test_zeros_excluded_and_counted(self, rng):
        x = np.concatenate([np.exp(rng.normal(1.0, 0.5, 100)), np.zeros(7)])
        res = cv_log_statistic(x)
        assert res.n_zero_excluded == 7 and res.n_used == 100

    def test_pareto_exceeds_matched_lognormal(self):
        rng = np.random.default_rng(3)
        mu, n = 3.0, 100_000
        par = pareto(rng, mu, n, xmin=math.e)
        # log-normal with the same mean and variance as the Pareto sample's law
        mean, var = mu * math.e / (mu - 1), mu * math.e**2 / ((mu - 1) ** 2 * (mu - 2))
        s2 = math.log1p(var / mean**2)
        logn = np.exp(rng.normal(math.log(mean) - s2 / 2, math.sqrt(s2), n))
        cv_par = cv_log_statistic(par, threshold=math.e).statistic
        cv_logn = cv_log_statistic(logn, threshold=math.e).statistic
        # exponential log-excesses give exactly 1 in the limit
        assert cv_par == pytest.approx(1.0, abs=0.02)
        assert cv_par - cv_logn > 0.2

    def test_zero_mean_log(self):
        with pytest.raises(DomainError):
            cv_log_statistic(np.tile([math.e, 1 / math.e], 20))

    def test_short(self):
        with pytest.raises(DomainError):
            cv_log_statistic(np.ones(5) * 2.0)


class TestExcessVolatility:
    def test_rational_construction(self, rng):
        p = np.cumsum(rng.standard_normal(500))
        res = excess_volatility_diagnostic(p, p + rng.standard_normal(500))
        assert res.ordering_flag is VolatilityFlag.RATIONAL_EXPECTATIONS_CONSISTENT

    def test_noisy_price_construction(self, rng):
        ps = np.cumsum(rng.standard_normal(500))
        res = excess_volatility_diagnostic(ps + rng.standard_normal(500), ps)
        assert res.ordering_flag is VolatilityFlag.EXCESS_VOLATILITY

    def test_equality_boundary(self, rng):
        p = rng.standard_normal(100)
        res = excess_volatility_diagnostic(p, p)
        assert res.var_p == res.var_pstar
        assert res.ordering_flag is VolatilityFlag.RATIONAL_EXPECTATIONS_CONSISTENT
        assert res.variance_of_diff == 0.0

    def test_swap_exchanges_flags(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            a, b = rng.standard_normal(60), 2 * rng.standard_normal(60)
            f1 = excess_volatility_diagnostic(a, b).ordering_flag
            f2 = excess_volatility_diagnostic(b, a).ordering_flag
            assert f1 != f2

    def test_length_mismatch(self):
        with pytest.raises(DomainError):
            excess_volatility_diagnostic(np.ones(40), np.ones(41))


def gbm(rng, n, sigma=0.01):
    return 100.0 * np.exp(np.concatenate([[0.0], np.cumsum(sigma * rng.standard_normal(n))]))


class TestReport:
    def test_gbm_null(self):
        rep = stylized_facts_report(gbm(np.random.default_rng(21), 20_000))
        assert abs(rep.excess_kurtosis) < 0.15
        assert sum(abs(v) >= rep.band for v in rep.acf_abs_returns) <= 2
        assert sum(abs(v) >= rep.band for v in rep.acf_returns) <= 2
        assert rep.n == 20_000 and len(rep.acf_returns) == 50
        assert rep.hill_k == 1000

    def test_keys(self, rng):
        rep = stylized_facts_report(gbm(rng, 1000))
        assert set(rep.to_dict()) == {"mean", "std", "excess_kurtosis", "acf_returns", "acf_abs_returns",
                                      "hill_mu", "hill_k", "hill_stderr", "cv_log", "n"}
        assert SeriesReport.from_dict(rep.to_dict()) == rep

    def test_minimum_k(self, rng):
        assert stylized_facts_report(gbm(rng, 600)).hill_k == 30
        assert stylized_facts_report(gbm(rng, 600), hill_fraction=0.001).hill_k == 10

    @pytest.mark.parametrize("n", [0, 10, 499])
    def test_short_input(self, n):
        with pytest.raises(DomainError):
            stylized_facts_report(np.linspace(1, 2, n))

    def test_scale_invariance(self, rng):
        r = rng.standard_t(4, 5000)
        for c in (1e-3, 7.0):
            assert hill_estimator(c * r, 250).mu == pytest.approx(hill_estimator(r, 250).mu, rel=1e-10)
            np.testing.assert_allclose(autocorrelation(c * r, 20), autocorrelation(r, 20), atol=1e-10)
            assert excess_kurtosis(c * r) == pytest.approx(excess_kurtosis(r), abs=1e-10)

    def test_time_index_irrelevant(self, rng):
        r = rng.standard_normal(300)
        assert excess_kurtosis(ReturnSeries(r, dt="1d")) == excess_kurtosis(ReturnSeries(r, dt="5min"))
