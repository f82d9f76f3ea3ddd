import math

import numpy as np
import pytest

from core.equilibrium import (
    Regime,
    agent_hazard,
    build_equilibrium,
    principal_hazard,
    fixed_point_residual,
    posterior,
    sigma_bar,
    solve_tau_M,
    support_grid,
)
from core.exceptions import DomainError, RegimeError
from core.news import NEVER, ExponentialBanditNews, TabulatedNews
from core.quadrature import bisect_root, quad


def test_sigma_bar_against_quadrature(params, news):
    exact = sigma_bar(params, news)
    assert exact == pytest.approx(0.1577, abs=5e-4)
    assert sigma_bar(params, news, method="quadrature") == pytest.approx(exact, abs=1e-9)


def test_tau_M_against_independent_bisection(params, news, equilibrium):
    tau_P = equilibrium.tau_P

    def gap(tau):
        integral = quad(lambda s: agent_hazard(s, params, news, tau_P=tau_P), tau, tau_P)
        return 1.0 - math.exp(-integral) - params.sigma

    oracle = bisect_root(gap, 0.0, tau_P)
    assert equilibrium.tau_M == pytest.approx(0.1984, abs=1e-3)
    assert equilibrium.tau_M == pytest.approx(oracle, abs=1e-8)
    assert fixed_point_residual(equilibrium) <= 1e-8


def test_strategies_reach_one_at_hard_deadline(equilibrium):
    assert equilibrium.regime is Regime.BENEFICIAL
    assert equilibrium.faking.cdf(equilibrium.tau_P) == pytest.approx(1.0, abs=1e-9)
    assert equilibrium.stopping.cdf(equilibrium.tau_P) == pytest.approx(1.0, abs=1e-12)
    assert equilibrium.stopping_atom == pytest.approx(0.5015, abs=2e-3)
    assert equilibrium.faking.never_mass == 0.0


def test_values(equilibrium):
    assert equilibrium.value_P == pytest.approx(0.7120, abs=5e-4)
    assert equilibrium.value_A == pytest.approx(0.5238, abs=5e-4)


def test_belief_path(equilibrium):
    assert posterior(equilibrium.tau_M, equilibrium) == pytest.approx(0.801, abs=2e-3)
    assert posterior(equilibrium.tau_P, equilibrium) == pytest.approx(1.0, abs=1e-6)
    inner = [posterior(t, equilibrium) for t in support_grid(equilibrium, 200)[:-1]]
    assert np.all(np.diff(inner) > 0)
    floor = equilibrium.params.theta + equilibrium.belief_floor
    assert min(inner) >= floor - 1e-12


def test_belief_outside_support(equilibrium):
    assert posterior(0.5 * equilibrium.tau_M, equilibrium) == 1.0
    assert posterior(2.0 * equilibrium.tau_P, equilibrium) == 1.0
    assert posterior(NEVER, equilibrium) == 1.0
    with pytest.raises(DomainError):
        posterior(-1.0, equilibrium)


def test_hazard_outside_support(params, news):
    with pytest.raises(DomainError):
        agent_hazard(5.0, params, news)


def test_sigma_at_threshold_is_regime_error(params, news):
    bar = sigma_bar(params, news)
    with pytest.raises(RegimeError):
        solve_tau_M(bar, params, news)


def test_no_faker_limit(params, news):
    eq = build_equilibrium(params.with_changes(sigma=0.0), news)
    assert eq.tau_M == eq.tau_P
    assert eq.stopping_atom == 1.0
    assert eq.faking.never_mass == 1.0
    assert eq.value_P == pytest.approx(eq.first_best.value_P)


def test_non_beneficial_regime(non_beneficial, params):
    eq = non_beneficial
    assert eq.regime is Regime.NON_BENEFICIAL
    assert eq.value_P == params.theta
    assert eq.value_A == params.beta
    assert eq.stopping.cdf(0.0) == 1.0
    assert eq.faking.cdf(eq.tau_P) == pytest.approx(0.5256, abs=2e-3)
    assert eq.faking.cdf(eq.tau_P) == pytest.approx(eq.sigma_bar / eq.params.sigma, abs=1e-9)


def test_monotone_in_sigma(params, news):
    deadlines = [build_equilibrium(params.with_changes(sigma=s), news).tau_M for s in (0.02, 0.06, 0.1, 0.14)]
    assert np.all(np.diff(deadlines) < 0)


@pytest.mark.parametrize(
    "news_process",
    [ExponentialBanditNews(q=0.95, lam=1.0), TabulatedNews(knots=(0.0, 1.0, 2.0, 4.0), values=(1.0, 0.5, 0.3, 0.2))],
)
def test_other_families_solve(params, news_process):
    eq = build_equilibrium(params.with_changes(sigma=0.02), news_process)
    assert eq.regime is Regime.BENEFICIAL
    assert fixed_point_residual(eq) <= 1e-8
    assert eq.faking.cdf(eq.tau_P) == pytest.approx(1.0, abs=1e-9)


def test_hazards_inside_support(params, news, equilibrium):
    tau_P = equilibrium.tau_P
    assert agent_hazard(0.6, params, news, tau_P=tau_P) == pytest.approx(0.11875, abs=1e-12)
    assert principal_hazard(0.6, params, news, tau_P=tau_P) == pytest.approx(0.75, abs=1e-12)
    assert agent_hazard(tau_P, params, news, tau_P=tau_P) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(DomainError):
        principal_hazard(1.5 * tau_P, params, news, tau_P=tau_P)


def test_strategies_and_belief_at_interior_time(equilibrium):
    assert equilibrium.faking_cdf(0.6) == pytest.approx(0.734, abs=5e-3)
    assert equilibrium.stopping_cdf(0.6) == pytest.approx(0.314, abs=5e-3)
    assert posterior(0.6, equilibrium) == pytest.approx(0.8623, abs=1e-3)
    assert equilibrium.faking_cdf(0.5 * equilibrium.tau_M) == 0.0
    assert equilibrium.stopping_cdf(0.5 * equilibrium.tau_M) == 0.0
