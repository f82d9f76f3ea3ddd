import math

import pytest
from hypothesis import given, settings as hsettings, strategies as st

from core.exceptions import ConfigError, DomainError, RegimeError
from core.model import ModelParams, beta_lower_bound, require_valid, validate
from core.equilibrium import Regime, build_equilibrium
from core.news import ExponentialBanditNews, HyperbolicNews, TabulatedNews


def test_canonical_thresholds(params):
    assert params.phi_P == pytest.approx(0.466667, abs=1e-6)
    assert params.phi_A == pytest.approx(0.25)
    assert params.thresholds().beta_lower == pytest.approx(0.5 * (0.5 / 0.7) * (0.3 / 0.5))


def test_canonical_validates(params, news):
    report = validate(params, news)
    assert report.passed
    assert [check.name for check in report.checks] == ["ordering", "sigma_range", "A1", "A2", "hazard_monotone"]


def test_a2_violation_reason(params, news):
    report = validate(params.with_changes(beta=0.2), news)
    assert not report.passed
    assert report.check("A2").detail == "phi_A >= phi_P"
    with pytest.raises(RegimeError):
        require_valid(params.with_changes(beta=0.2), news)


def test_a1_violation(params):
    report = validate(params, HyperbolicNews(a=0.3, b=1.0))
    assert not report.check("A1").passed


def test_ordering_violation_is_config_error(params, news):
    with pytest.raises(ConfigError):
        require_valid(params.with_changes(beta=0.6), news)


@pytest.mark.parametrize("field", ["mu", "theta", "beta", "rho"])
def test_non_positive_rejected(field):
    values = {"mu": 0.5, "theta": 0.7, "beta": 0.4, "rho": 0.1, "sigma": 0.1}
    values[field] = 0.0
    with pytest.raises(ConfigError) as info:
        ModelParams(**values)
    assert info.value.field == field.upper()


def test_non_finite_rejected():
    with pytest.raises(ConfigError):
        ModelParams(mu=0.5, theta=math.nan, beta=0.4, rho=0.1, sigma=0.1)


def test_beta_lower_bound_domain():
    with pytest.raises(DomainError):
        beta_lower_bound(0.7, 0.5)


@hsettings(max_examples=200, deadline=None)
@given(
    mu=st.floats(0.05, 0.9),
    gap=st.floats(0.01, 0.5),
    frac=st.floats(0.01, 0.99),
    rho=st.floats(0.01, 1.0),
)
def test_a2_equivalent_to_beta_lower_bound(mu, gap, frac, rho):
    theta = min(mu + gap, 0.99)
    beta = frac * mu
    p = ModelParams(mu=mu, theta=theta, beta=beta, rho=rho, sigma=0.1)
    bound = beta_lower_bound(mu, theta)
    if abs(beta - bound) > 1e-9:
        assert (p.phi_P > p.phi_A) == (beta > bound)


@pytest.mark.parametrize(
    "news_process",
    [TabulatedNews(knots=(0.0, 1.0), values=(1.0, 0.01)), ExponentialBanditNews(q=0.9, lam=6.0)],
)
def test_steep_hazard_validates(params, news_process):
    report = validate(params, news_process)
    assert report.hazard_at_horizon == 0.0
    assert report.check("hazard_monotone").passed
    assert report.passed
    require_valid(params, news_process)


def test_steep_tabulated_hazard_solves(params):
    news_process = TabulatedNews(knots=(0.0, 1.0), values=(1.0, 0.01))
    require_valid(params, news_process)
    eq = build_equilibrium(params, news_process)
    assert eq.regime is Regime.BENEFICIAL
    assert eq.tau_P == pytest.approx(0.16550, abs=1e-4)
