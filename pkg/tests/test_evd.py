import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from record_edge.errors import DomainError
from record_edge.evd import (
    A_EPS,
    LOGLIK_FLOOR,
    ModelParams,
    cdf,
    endpoint,
    log_likelihood,
    pdf,
    quantile,
    sample_margins,
    survival,
)

PAPER = ModelParams(0.208, 2.609)
PAPER_ENDPOINT = 2.609 / 0.208

# frozen from a 50-digit evaluation of the closed forms
CDF_844 = 0.995355707493574
PDF_844 = 0.00544159500682593

params_st = st.builds(
    ModelParams,
    a=st.floats(-0.45, 0.95),
    sigma=st.floats(0.05, 10.0),
)


class TestCdf:
    def test_lower_endpoint(self):
        assert cdf(PAPER, 0.0) == 0.0

    def test_upper_endpoint(self):
        assert cdf(PAPER, PAPER_ENDPOINT) == 1.0
        assert cdf(PAPER, PAPER_ENDPOINT + 5) == 1.0

    def test_world_record_margin(self):
        assert cdf(PAPER, 8.44) == pytest.approx(CDF_844, abs=1e-12)
        assert cdf(PAPER, 8.44) == pytest.approx(0.99536, abs=1e-4)

    def test_matches_scipy_genpareto(self):
        y = np.linspace(0.0, 12.0, 50)
        for p in [PAPER, ModelParams(-0.2, 3.0), ModelParams(0.5, 1.0)]:
            ref = stats.genpareto(c=-p.a, scale=p.sigma).cdf(y)
            np.testing.assert_allclose(cdf(p, y), ref, rtol=1e-12, atol=1e-15)

    def test_rejects_bad_inputs(self):
        with pytest.raises(DomainError):
            cdf(PAPER, -1.0)
        with pytest.raises(DomainError):
            cdf(PAPER, np.nan)
        with pytest.raises(DomainError):
            ModelParams(0.2, 0.0)
        with pytest.raises(DomainError):
            ModelParams(np.inf, 1.0)

    @given(params=params_st, y=st.floats(0.0, 30.0))
    @settings(max_examples=200, deadline=None)
    def test_in_unit_interval_and_monotone(self, params, y):
        lo = cdf(params, y)
        hi = cdf(params, y + 0.1)
        assert 0.0 <= lo <= hi <= 1.0


class TestPdf:
    def test_exponential_at_origin(self):
        assert pdf(ModelParams(0.0, 2.0), 0.0) == pytest.approx(0.5, abs=1e-15)

    def test_zero_beyond_endpoint(self):
        assert pdf(PAPER, 13.0) == 0.0

    def test_world_record_margin(self):
        assert pdf(PAPER, 8.44) == pytest.approx(PDF_844, abs=1e-12)

    def test_matches_cdf_derivative(self):
        # central differences on the cdf, relative step 1e-6
        for p in [PAPER, ModelParams(-0.2, 3.0), ModelParams(0.0, 1.5)]:
            for y in [0.5, 2.0, 5.0, 8.44]:
                h = 1e-6 * max(1.0, y)
                fd = (cdf(p, y + h) - cdf(p, y - h)) / (2 * h)
                assert pdf(p, y) == pytest.approx(fd, rel=1e-6)

    def test_at_exact_endpoint(self):
        assert pdf(ModelParams(0.5, 1.0), 2.0) == 0.0
        assert pdf(ModelParams(1.0, 1.0), 1.0) == 1.0
        assert pdf(ModelParams(2.0, 1.0), 0.5) == np.inf

    def test_integrates_to_one(self):
        for p in [PAPER, ModelParams(-0.3, 2.0), ModelParams(0.0, 1.0)]:
            upper = endpoint(p) or np.inf
            total, err = integrate.quad(lambda y: pdf(p, y), 0.0, upper, limit=200)
            assert total == pytest.approx(1.0, abs=1e-6)

    def test_matches_scipy_genpareto(self):
        y = np.linspace(0.0, 10.0, 40)
        ref = stats.genpareto(c=-PAPER.a, scale=PAPER.sigma).pdf(y)
        np.testing.assert_allclose(pdf(PAPER, y), ref, rtol=1e-12)


class TestQuantile:
    def test_at_zero(self):
        assert quantile(PAPER, 0.0) == 0.0
        assert quantile(ModelParams(-0.3, 1.0), 0.0) == 0.0

    def test_roundtrip_identity(self):
        assert quantile(PAPER, cdf(PAPER, 5.0)) == pytest.approx(5.0, abs=1e-10)

    def test_approaches_endpoint(self):
        y = quantile(PAPER, 1 - 1e-15)
        assert y < PAPER_ENDPOINT
        assert y == pytest.approx(PAPER_ENDPOINT, abs=0.01)

    def test_rejects_unit_probability(self):
        with pytest.raises(DomainError):
            quantile(PAPER, 1.0)
        with pytest.raises(DomainError):
            quantile(PAPER, -0.1)

    def test_matches_scipy_genpareto(self):
        u = np.linspace(0.0, 0.999, 30)
        ref = stats.genpareto(c=-PAPER.a, scale=PAPER.sigma).ppf(u)
        np.testing.assert_allclose(quantile(PAPER, u), ref, rtol=1e-10, atol=1e-12)

    @given(params=params_st, u=st.floats(1e-6, 1 - 1e-3))
    @settings(max_examples=300, deadline=None)
    def test_roundtrip_property(self, params, u):
        y = quantile(params, u)
        assert quantile(params, cdf(params, y)) == pytest.approx(y, abs=1e-10)


class TestLogLikelihood:
    def test_exponential_log_density(self):
        assert log_likelihood(ModelParams(0.0, 1.0), [1.0]) == pytest.approx(-1.0, abs=1e-12)

    def test_out_of_support_sentinel(self):
        assert log_likelihood(PAPER, [1.0, 13.0]) == LOGLIK_FLOOR

    def test_sums_pointwise_log_pdf(self):
        p = ModelParams(0.1, 2.0)
        sample = [1.0, 2.0, 3.0]
        expected = float(np.sum(np.log(pdf(p, np.array(sample)))))
        assert log_likelihood(p, sample) == pytest.approx(expected, abs=1e-12)

    def test_empty_sample(self):
        with pytest.raises(ValueError):
            log_likelihood(PAPER, [])


class TestEndpoint:
    def test_paper_value(self):
        assert endpoint(PAPER) == pytest.approx(12.543, abs=0.005)

    def test_no_finite_endpoint(self):
        assert endpoint(ModelParams(0.0, 2.609)) is None
        assert endpoint(ModelParams(-0.1, 1.0)) is None

    def test_direct_ratio(self):
        assert endpoint(ModelParams(0.5, 1.0)) == 2.0


class TestExponentialLimit:
    def test_branch_continuity(self):
        # |a| right at the branch threshold agrees with the a=0 branch
        y = np.linspace(0.01, 20.0, 200)
        sample = [0.5, 1.0, 4.0]
        base = ModelParams(0.0, 2.0)
        for a in (A_EPS, -A_EPS):
            near = ModelParams(a, 2.0)
            np.testing.assert_allclose(cdf(near, y), cdf(base, y), rtol=1e-6)
            np.testing.assert_allclose(pdf(near, y), pdf(base, y), rtol=1e-6)
            assert log_likelihood(near, sample) == pytest.approx(
                log_likelihood(base, sample), rel=1e-6
            )

    def test_negative_shape_supported(self):
        p = ModelParams(-0.2, 2.0)
        y = np.linspace(0.0, 40.0, 100)
        c = cdf(p, y)
        assert np.all(np.diff(c) > 0) and c[-1] < 1.0
        assert quantile(p, cdf(p, 25.0)) == pytest.approx(25.0, abs=1e-9)


def test_sample_margins_within_support():
    rng = np.random.default_rng(0)
    draws = sample_margins(PAPER, 1000, rng)
    assert draws.shape == (1000,)
    assert np.all(draws >= 0) and np.all(draws < PAPER_ENDPOINT)
