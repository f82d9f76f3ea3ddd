import pytest

from analyses.verifier import (
    EquilibriumVerifier,
    bin_posterior,
    check_indifference,
    corrupt_soft_deadline,
    simulate,
)
from core.equilibrium import build_equilibrium, posterior
from core.exceptions import DomainError, VerificationError


def test_canonical_certifies(equilibrium):
    report = check_indifference(equilibrium)
    assert report.passed, report.failures
    assert report.max_indifference_residual_P <= 1e-5
    assert report.max_indifference_residual_A <= 1e-5
    assert report.max_deviation_gain_P <= 1e-5
    assert report.max_deviation_gain_A <= 1e-5


def test_non_beneficial_certifies(non_beneficial):
    report = check_indifference(non_beneficial)
    assert report.passed, report.failures
    assert report.max_deviation_gain_P <= 1e-6


def test_corrupted_soft_deadline_fails(equilibrium):
    corrupted = corrupt_soft_deadline(equilibrium, factor=1.05)
    report = EquilibriumVerifier().check_indifference(corrupted)
    assert not report.passed
    assert "fixed_point" in report.failures
    with pytest.raises(VerificationError):
        EquilibriumVerifier().certify(corrupted, raise_on_failure=True)


@pytest.mark.parametrize("factor", [0.95, 1.0])
def test_soft_deadline_control_requires_later_deadline(equilibrium, factor):
    with pytest.raises(DomainError, match="factor > 1"):
        corrupt_soft_deadline(equilibrium, factor=factor)


def test_bin_posterior_near_pointwise_belief(equilibrium):
    lo = equilibrium.tau_M + 0.40 * (equilibrium.tau_P - equilibrium.tau_M)
    hi = equilibrium.tau_M + 0.41 * (equilibrium.tau_P - equilibrium.tau_M)
    assert bin_posterior(equilibrium, lo, hi) == pytest.approx(posterior(0.5 * (lo + hi), equilibrium), abs=1e-4)


def test_simulation_is_deterministic(equilibrium):
    first = simulate(equilibrium, 20_000, seed=42, chunk_size=5_000, threads=2)
    second = simulate(equilibrium, 20_000, seed=42, chunk_size=5_000, threads=1)
    assert first.mc_value_P == second.mc_value_P
    assert first.mc_value_A == second.mc_value_A
    assert first.mc_posterior_bins == second.mc_posterior_bins


def test_small_simulation_table(equilibrium):
    report = simulate(equilibrium, 50_000, seed=7)
    rows = report.table()
    assert rows[0]["check"] == "mc_value_P"
    assert report.n_draws == 50_000 and report.seed == 7


@pytest.mark.slow
def test_monte_carlo_oracle(equilibrium):
    report = EquilibriumVerifier(threads=4).certify(equilibrium, n=1_000_000, seed=20240611)
    assert report.passed, report.failures
    assert abs(report.mc_value_P - 0.7120) <= 3 * report.mc_se_P + 5e-4
    assert abs(report.mc_value_A - 0.5238) <= 3 * report.mc_se_A + 5e-4


def test_no_faker_simulation_matches_first_best(params, news):
    eq = build_equilibrium(params.with_changes(sigma=0.0), news)
    report = simulate(eq, 200_000, seed=11)
    assert report.n_draws == 200_000
    assert abs(report.mc_value_P - eq.first_best.value_P) <= 3 * report.mc_se_P
    assert "mc_value_A" not in [row["check"] for row in report.table()]
    assert report.mc_posterior_bins == []
