import json

import pandas as pd
import pytest

from analyses.remedies import intermediary_equilibrium
from core.first_best import Player, first_best_payoff
from core.results import (
    DELEGATION_COLUMNS,
    PAYOFF_COLUMNS,
    STRATEGY_COLUMNS,
    ResultStore,
    delegation_frame,
    payoffs_frame,
    round_significant,
    strategies_frame,
    sweep_frame,
    to_serializable,
)
from core.equilibrium import Regime


def test_round_significant():
    assert round_significant(0.123456789012345) == 0.123456789012
    assert round_significant(0.0) == 0.0


def test_serializable_handles_numpy_and_enums():
    import numpy as np

    data = to_serializable({"a": np.float64(1.0), "b": np.arange(2), "c": Regime.BENEFICIAL, "d": float("inf")})
    assert data == {"a": 1.0, "b": [0, 1], "c": "beneficial", "d": "inf"}


def test_strategies_frame(equilibrium):
    frame = strategies_frame(equilibrium, 50)
    assert list(frame.columns) == STRATEGY_COLUMNS
    last = frame.iloc[-1]
    assert last["t"] == pytest.approx(equilibrium.tau_P)
    assert last["F_A"] == pytest.approx(1.0, abs=1e-9)
    assert last["F_P"] == pytest.approx(1.0, abs=1e-12)
    assert last["F_P_atom"] == pytest.approx(0.5015, abs=2e-3)
    assert frame["t"].is_monotonic_increasing


def test_sweep_frame_orders_by_value():
    rows = [{"param": "sigma", "value": v, "regime": "beneficial"} for v in (0.3, 0.1, 0.2)]
    assert sweep_frame(rows)["value"].tolist() == [0.1, 0.2, 0.3]


def test_store_writes_document_and_table(tmp_path, equilibrium):
    store = ResultStore(str(tmp_path), "both")
    path = store.write_document("solve", {"mu": 0.5}, {"tau_P": equilibrium.tau_P})
    document = json.loads(path.read_text(encoding="utf-8"))
    assert document["schema_version"] == "1.0"
    assert document["command"] == "solve"

    csv_path = store.write_table("strategies", strategies_frame(equilibrium, 20))
    raw = csv_path.read_bytes()
    assert b"\r\n" not in raw
    assert list(pd.read_csv(csv_path).columns) == STRATEGY_COLUMNS


def test_store_respects_format(tmp_path, equilibrium):
    store = ResultStore(str(tmp_path), "json")
    assert store.write_table("strategies", strategies_frame(equilibrium, 10)) is None
    with pytest.raises(ValueError):
        ResultStore(str(tmp_path), "csv").write_table("verify", pd.DataFrame({"x": [1]}))


def test_payoffs_frame(equilibrium):
    eq = equilibrium
    frame = payoffs_frame(eq, 40, 3.0)
    assert list(frame.columns) == PAYOFF_COLUMNS
    assert frame["t"].is_monotonic_increasing
    assert frame["t"].iloc[-1] == pytest.approx(3.0 * eq.tau_P)
    assert frame["u_P"].iloc[0] == pytest.approx(0.7)

    support = frame[(frame["t"] >= eq.tau_M) & (frame["t"] < eq.tau_P * (1 - 1e-4))]
    assert len(support) > 10
    assert support["u_P"].sub(eq.value_P).abs().max() < 1e-5
    assert support["u_A"].sub(eq.value_A).abs().max() < 1e-5
    assert frame["u_P"].max() <= eq.value_P + 1e-5

    at_deadline = frame.loc[(frame["t"] - eq.tau_P).abs().idxmin()]
    assert at_deadline["u_A"] < eq.value_A - 1e-3


def test_delegation_frame_with_unbiased_intermediary(params, news, equilibrium):
    frame = delegation_frame(intermediary_equilibrium(params.theta, params, news), params, news, 40)
    assert list(frame.columns) == DELEGATION_COLUMNS
    support = frame[(frame["t"] >= equilibrium.tau_M) & (frame["t"] <= equilibrium.tau_P)]
    assert support["u_P"].sub(equilibrium.value_P).abs().max() < 1e-5
    assert frame["F_P"].iloc[-1] == pytest.approx(1.0, abs=1e-12)


def test_delegation_frame_before_faking_is_first_best(params, news):
    delegated = intermediary_equilibrium(0.68, params, news)
    frame = delegation_frame(delegated, params, news, 40)
    assert frame["u_P"].iloc[0] == pytest.approx(params.theta)
    row = frame.loc[(frame["t"] - delegated.tau_M).abs().idxmin()]
    assert row["t"] == pytest.approx(delegated.tau_M)
    assert row["F_A"] == pytest.approx(0.0, abs=1e-12)
    assert row["u_P"] == pytest.approx(first_best_payoff(Player.PRINCIPAL, delegated.tau_M, params, news), abs=1e-7)
    assert frame["F_A"].iloc[-1] == pytest.approx(1.0, abs=1e-9)


def test_store_accepts_payoff_table(tmp_path, equilibrium):
    path = ResultStore(str(tmp_path), "csv").write_table("payoffs", payoffs_frame(equilibrium, 12))
    assert list(pd.read_csv(path).columns) == PAYOFF_COLUMNS
