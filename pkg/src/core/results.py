"""
Almacenamiento de resultados: documento JSON versionado y tablas CSV
"""

import json
import logging
import math
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from .config import settings
from .equilibrium import Equilibrium, posterior
from .model import ModelParams
from .news import NewsProcess
from .payoff_engine import agent_payoff, always_risky, principal_payoff

logger = logging.getLogger(__name__)

STRATEGY_COLUMNS = ["t", "F_A", "f_A", "F_P", "f_P", "mu1", "a", "F_P_atom"]
SWEEP_COLUMNS = [
    "param",
    "value",
    "tau_M",
    "tau_P",
    "sigma_bar",
    "value_P",
    "value_A",
    "u_naive",
    "u_delegate",
    "regime",
]
VERIFY_COLUMNS = ["check", "residual", "tolerance", "pass"]
PAYOFF_COLUMNS = ["t", "u_P", "u_A"]
DELEGATION_COLUMNS = ["t", "F_A", "F_P", "mu1", "u_P"]

TABLE_COLUMNS = {
    "strategies": STRATEGY_COLUMNS,
    "sweep": SWEEP_COLUMNS,
    "verify": VERIFY_COLUMNS,
    "payoffs": PAYOFF_COLUMNS,
    "delegation": DELEGATION_COLUMNS,
}


def round_significant(value: float, digits: Optional[int] = None) -> float:
    digits = digits or settings.SIGNIFICANT_DIGITS
    if value == 0.0 or not math.isfinite(value):
        return value
    return float(f"{value:.{digits}g}")


def to_serializable(value: Any, digits: Optional[int] = None) -> Any:
    """Convierte numpy, Enum y tuplas a tipos JSON, redondeando floats"""
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        number = float(value)
        if math.isnan(number):
            return None
        if math.isinf(number):
            return "inf" if number > 0 else "-inf"
        return round_significant(number, digits)
    if isinstance(value, dict):
        return {str(k): to_serializable(v, digits) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [to_serializable(v, digits) for v in value]
    return value


def strategy_grid(eq: Equilibrium, points: int) -> np.ndarray:
    """Grilla en [0, tau_P] densa en el soporte, incluyendo tau_M y tau_P"""
    head = np.linspace(0.0, eq.tau_M, max(2, points // 4)) if eq.tau_M > 0 else np.array([0.0])
    body = np.linspace(eq.tau_M, eq.tau_P, points)
    return np.unique(np.concatenate([head, body, [eq.tau_M, eq.tau_P]]))


def strategies_frame(eq: Equilibrium, points: int = 200) -> pd.DataFrame:
    rows = []
    for t in strategy_grid(eq, points):
        t = float(t)
        rows.append(
            {
                "t": t,
                "F_A": eq.faking.cdf(t),
                "f_A": eq.faking.pdf(t),
                "F_P": eq.stopping.cdf(t),
                "f_P": eq.stopping.pdf(t),
                "mu1": posterior(t, eq),
                "a": eq.action(t),
                "F_P_atom": eq.stopping.atom_mass(t),
            }
        )
    return pd.DataFrame(rows, columns=STRATEGY_COLUMNS)


def payoff_grid(eq: Equilibrium, points: int, horizon_factor: float) -> np.ndarray:
    """Grilla de estrategias extendida más allá de tau_P hasta horizon_factor * tau_P"""
    tail = np.linspace(eq.tau_P, horizon_factor * eq.tau_P, max(2, points // 4))
    return np.unique(np.concatenate([strategy_grid(eq, points), tail]))


def payoffs_frame(eq: Equilibrium, points: int = 200, horizon_factor: float = 3.0) -> pd.DataFrame:
    """u_P(t) y u_A(t) contra las estrategias de equilibrio; constantes en el soporte"""
    rows = []
    for t in payoff_grid(eq, points, horizon_factor):
        t = float(t)
        rows.append(
            {
                "t": t,
                "u_P": principal_payoff(t, eq.faking, eq.action, eq.params, eq.news),
                "u_A": agent_payoff(t, eq.stopping, eq.action, eq.params, eq.news),
            }
        )
    return pd.DataFrame(rows, columns=PAYOFF_COLUMNS)


def delegation_frame(
    intermediary: Equilibrium, params: ModelParams, news: NewsProcess, points: int = 200
) -> pd.DataFrame:
    """Estrategias del equilibrio del intermediario y pago del principal (theta verdadero) que actúa siempre"""
    rows = []
    for t in strategy_grid(intermediary, points):
        t = float(t)
        rows.append(
            {
                "t": t,
                "F_A": intermediary.faking.cdf(t),
                "F_P": intermediary.stopping.cdf(t),
                "mu1": posterior(t, intermediary),
                "u_P": principal_payoff(t, intermediary.faking, always_risky, params, news),
            }
        )
    return pd.DataFrame(rows, columns=DELEGATION_COLUMNS)


def sweep_frame(rows: List[Dict[str, Any]]) -> pd.DataFrame:
    frame = pd.DataFrame(rows, columns=SWEEP_COLUMNS)
    return frame.sort_values("value", kind="mergesort").reset_index(drop=True)


def verify_frame(rows: List[Dict[str, Any]]) -> pd.DataFrame:
    return pd.DataFrame(rows, columns=VERIFY_COLUMNS)


class ResultStore:
    """Escribe el documento de resultados y las tablas planas de una corrida"""

    def __init__(self, out_dir: Optional[str] = None, output_format: str = "both"):
        self.out_dir = Path(out_dir or settings.OUTPUT_DIR)
        self.output_format = output_format
        self.written: List[Path] = []

    @property
    def wants_json(self) -> bool:
        return self.output_format in ("json", "both")

    @property
    def wants_csv(self) -> bool:
        return self.output_format in ("csv", "both")

    def build_document(self, command: str, config: Dict[str, Any], result: Dict[str, Any]) -> Dict[str, Any]:
        return to_serializable(
            {
                "schema_version": settings.SCHEMA_VERSION,
                "command": command,
                "config": config,
                "result": result,
            }
        )

    def write_document(self, command: str, config: Dict[str, Any], result: Dict[str, Any]) -> Optional[Path]:
        if not self.wants_json:
            return None
        document = self.build_document(command, config, result)
        path = settings.ensure_output_dir(str(self.out_dir)) / f"{command}.json"
        path.write_text(json.dumps(document, indent=2, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8")
        self.written.append(path)
        logger.info(f"Documento de resultados escrito: {path}")
        return path

    def write_table(self, name: str, frame: pd.DataFrame) -> Optional[Path]:
        if not self.wants_csv:
            return None
        if list(frame.columns) != TABLE_COLUMNS[name]:
            raise ValueError(f"Columnas inesperadas para la tabla {name}: {list(frame.columns)}")
        path = settings.ensure_output_dir(str(self.out_dir)) / f"{name}.csv"
        frame.to_csv(
            path,
            index=False,
            float_format=f"%.{settings.SIGNIFICANT_DIGITS}g",
            lineterminator="\n",
            encoding="utf-8",
        )
        self.written.append(path)
        logger.info(f"Tabla {name} escrita: {path} ({len(frame)} filas)")
        return path
