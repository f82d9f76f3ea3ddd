import pytest

from core.config import RunConfig
from core.orchestrator import RunOrchestrator, RunState, sweep_point


@pytest.mark.asyncio
async def test_solve_records_history():
    orchestrator = RunOrchestrator()
    result = await orchestrator.solve(RunConfig(grid_points=40))
    assert result["success"]
    assert result["result"]["regime"] == "beneficial"
    assert set(result["tables"]) == {"strategies", "payoffs"}
    assert orchestrator.state is RunState.COMPLETED
    assert orchestrator.get_history()[-1]["command"] == "solve"


@pytest.mark.asyncio
async def test_validate_failure_is_regime():
    orchestrator = RunOrchestrator()
    result = await orchestrator.validate(RunConfig(beta=0.2))
    assert not result["success"]
    assert result["error_type"] == "regime"
    assert "phi_A >= phi_P" in result["error"]
    assert orchestrator.state is RunState.FAILED


@pytest.mark.asyncio
async def test_errors_become_results():
    orchestrator = RunOrchestrator()
    result = await orchestrator.first_best(RunConfig(beta=0.6))
    assert result == {
        "success": False,
        "error": result["error"],
        "error_type": "config",
        "command": "first-best",
    }


@pytest.mark.asyncio
async def test_sweep_rows_ordered():
    orchestrator = RunOrchestrator(threads=3)
    result = await orchestrator.sweep(RunConfig(), "sigma", 0.01, 0.15, 15)
    frame = result["tables"]["sweep"]
    assert len(frame) == 15
    assert frame["value"].is_monotonic_increasing
    assert frame["tau_M"].is_monotonic_decreasing
    assert frame["tau_M"].diff().dropna().lt(0).all()


@pytest.mark.asyncio
async def test_sweep_rejects_unknown_param():
    result = await RunOrchestrator().sweep(RunConfig(), "gamma", 0.0, 1.0, 3)
    assert result["error_type"] == "config"


def test_invalid_sweep_point_is_marked():
    row = sweep_point(RunConfig(), "beta", 0.2)
    assert row["regime"] == "invalid"


@pytest.mark.asyncio
async def test_verify_analytic_only():
    result = await RunOrchestrator().verify(RunConfig(), n=0)
    assert result["success"], result.get("error")
    assert set(result["tables"]["verify"].columns) == {"check", "residual", "tolerance", "pass"}


@pytest.mark.asyncio
async def test_remedies_emits_delegation_curves():
    result = await RunOrchestrator(threads=2).remedies(RunConfig(grid_points=30))
    assert result["success"], result.get("error")
    frame = result["tables"]["delegation"]
    assert list(frame.columns) == ["t", "F_A", "F_P", "mu1", "u_P"]
    assert frame["F_P"].iloc[-1] == pytest.approx(1.0, abs=1e-12)
    assert result["result"]["intermediary"]["theta_I"] < 0.7


@pytest.mark.asyncio
async def test_remedies_without_intermediary_has_no_tables():
    result = await RunOrchestrator().remedies(RunConfig(sigma=0.3))
    assert result["success"], result.get("error")
    assert result["result"]["intermediary"] is None
    assert result["tables"] == {}
