import math

import numpy as np
import pytest

from core.exceptions import ConfigError, DomainError
from core.news import (
    NEVER,
    ExponentialBanditNews,
    HyperbolicNews,
    TabulatedNews,
    build_news_process,
)
from core.quadrature import quad


def test_hyperbolic_closed_forms():
    news = HyperbolicNews()
    assert news.hazard(1.0) == pytest.approx(0.5)
    assert news.survival(3.0) == pytest.approx(0.25)
    assert news.density(1.0) == pytest.approx(0.25)
    assert news.inverse_hazard(0.25) == pytest.approx(3.0)
    assert news.hazard_derivative(2.0) == pytest.approx(-1.0 / 9.0)
    assert news.limit_survival() == 0.0


def test_negative_time_rejected():
    with pytest.raises(DomainError):
        HyperbolicNews().hazard(-0.1)


@pytest.mark.parametrize(
    "news",
    [
        HyperbolicNews(a=1.5, b=0.7),
        ExponentialBanditNews(q=0.8, lam=2.0),
        TabulatedNews(knots=(0.0, 1.0, 2.5), values=(1.2, 0.6, 0.25)),
    ],
)
def test_cumulative_hazard_matches_quadrature(news):
    for t in (0.3, 1.7, 4.0):
        assert news.cumulative_hazard(t) == pytest.approx(quad(news.hazard, 0.0, t), rel=1e-8)


def test_bandit_is_defective():
    news = ExponentialBanditNews(q=0.9, lam=1.0)
    assert news.limit_survival() == pytest.approx(0.1)
    assert news.survival(2.0) == pytest.approx(0.1 + 0.9 * math.exp(-2.0))
    level = news.hazard(1.3)
    assert news.inverse_hazard(level) == pytest.approx(1.3)
    assert news.inverse_survival(0.05) == NEVER


def test_bandit_hazard_derivative_matches_difference():
    news = ExponentialBanditNews(q=0.7, lam=1.5)
    h = 1e-6
    numeric = (news.hazard(0.8 + h) - news.hazard(0.8 - h)) / (2 * h)
    assert news.hazard_derivative(0.8) == pytest.approx(numeric, rel=1e-5)


def test_tabulated_extrapolates_last_slope():
    news = TabulatedNews(knots=(0.0, 1.0), values=(1.0, 0.5))
    assert news.hazard(2.0) == pytest.approx(0.25)
    assert news.hazard(3.0) < news.hazard(2.0)
    assert 0.0 < news.limit_survival() < 1.0


@pytest.mark.parametrize(
    "knots, values",
    [((0.5, 1.0), (1.0, 0.5)), ((0.0, 1.0), (0.5, 1.0)), ((0.0,), (1.0,)), ((0.0, 1.0), (1.0, -0.5))],
)
def test_tabulated_validation(knots, values):
    with pytest.raises(ConfigError):
        TabulatedNews(knots=knots, values=values)


def test_sampling_matches_survival():
    news = HyperbolicNews()
    draws = news.sample_arrivals(np.random.default_rng(3), 200_000)
    assert np.mean(draws > 1.0) == pytest.approx(news.survival(1.0), abs=5e-3)


def test_build_news_process():
    news = build_news_process({"family": "exponential_bandit", "q": 0.5, "lam": 2.0})
    assert isinstance(news, ExponentialBanditNews)
    with pytest.raises(ConfigError):
        build_news_process({"family": "weibull"})


@pytest.mark.parametrize(
    "news",
    [
        HyperbolicNews(a=1.5, b=0.7),
        ExponentialBanditNews(q=0.8, lam=2.0),
        TabulatedNews(knots=(0.0, 1.0, 2.5), values=(1.2, 0.6, 0.25)),
    ],
)
def test_log_hazard_matches_hazard(news):
    for t in (0.0, 0.9, 3.1, 7.5):
        assert news.log_hazard(t) == pytest.approx(math.log(news.hazard(t)), rel=1e-12, abs=1e-12)


def test_log_hazard_finite_after_underflow():
    news = TabulatedNews(knots=(0.0, 1.0), values=(1.0, 0.01))
    assert news.hazard(250.0) == 0.0
    assert news.log_hazard(250.0) == pytest.approx(math.log(0.01) * 250.0)
    assert news.log_hazard(250.1) < news.log_hazard(250.0)


class _FixedUniform:
    """Generador mínimo que devuelve siempre el mismo uniforme"""

    def __init__(self, value):
        self.value = value

    def random(self, size=None):
        return self.value if size is None else np.full(size, self.value)


def test_sample_arrival_inverts_survival():
    news = HyperbolicNews()
    assert news.sample_arrival(_FixedUniform(0.25)) == pytest.approx(3.0)
    assert news.inverse_survival(0.25) == pytest.approx(3.0)
    assert news.sample_arrival(_FixedUniform(1.0)) == 0.0


def test_sample_arrival_never_below_limit_survival():
    news = ExponentialBanditNews(q=0.9, lam=1.0)
    assert news.sample_arrival(_FixedUniform(0.05)) == NEVER
    assert news.sample_arrival(_FixedUniform(0.5)) == pytest.approx(news.inverse_survival(0.5))


def test_sample_arrival_uses_generator():
    news = HyperbolicNews()
    u = np.random.default_rng(17).random()
    assert news.sample_arrival(np.random.default_rng(17)) == pytest.approx(1.0 / u - 1.0)


def test_survival_examples():
    news = HyperbolicNews()
    assert news.survival(0.0) == 1.0
    assert news.cdf(0.0) == 0.0
    assert news.cdf(1.0) == pytest.approx(0.5)
    assert news.density(2.0) == pytest.approx(1.0 / 9.0)


@pytest.mark.parametrize(
    "news",
    [
        HyperbolicNews(),
        HyperbolicNews(a=1.5, b=0.7),
        ExponentialBanditNews(q=0.8, lam=2.0),
        TabulatedNews(knots=(0.0, 1.0, 2.5), values=(1.2, 0.6, 0.25)),
    ],
)
def test_density_over_survival_is_hazard(news):
    for t in np.linspace(0.0, 8.0, 41):
        t = float(t)
        assert news.survival(t) + news.cdf(t) == pytest.approx(1.0, abs=1e-15)
        assert news.density(t) / (1.0 - news.cdf(t)) == pytest.approx(news.hazard(t), rel=1e-8)


@pytest.mark.parametrize(
    "news",
    [HyperbolicNews(), ExponentialBanditNews(q=0.8, lam=2.0)],
)
def test_empirical_cdf_within_binomial_band(news):
    n = 100_000
    draws = news.sample_arrivals(np.random.Generator(np.random.SFC64(20240611)), n)
    for t in (0.25, 0.5, 1.0, 2.0, 4.0, 8.0):
        g = news.cdf(t)
        band = 3.0 * math.sqrt(g * (1.0 - g) / n)
        assert abs(np.mean(draws <= t) - g) <= band
