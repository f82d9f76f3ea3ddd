"""
Orquestador principal del sistema
"""

import asyncio
import logging
import math
from datetime import datetime
from enum import Enum
from typing import Any, Awaitable, Callable, Dict, List, Optional

import numpy as np

from .config import RunConfig
from .equilibrium import build_equilibrium
from .exceptions import FakeSearchError, ConfigError, VerificationError
from .first_best import solve_first_best
from .model import model_from_config, require_valid, validate
from .results import delegation_frame, payoffs_frame, strategies_frame, sweep_frame, verify_frame

logger = logging.getLogger(__name__)

SWEEP_PARAMS = ("mu", "theta", "beta", "rho", "sigma")
_ORDERING_CHECKS = ("ordering", "sigma_range")


class RunState(Enum):
    """Estados de una corrida"""

    IDLE = "idle"
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"


class RunOrchestrator:
    """Despacha los comandos del laboratorio y registra el historial de corridas"""

    def __init__(self, threads: int = 1):
        self.state = RunState.IDLE
        self.threads = max(1, threads)
        self.history: List[Dict[str, Any]] = []

    async def _run(self, command: str, job: Callable[[], Awaitable[Dict[str, Any]]]) -> Dict[str, Any]:
        """Ejecuta un comando y convierte sus errores en un resultado fallido"""
        self.state = RunState.RUNNING
        started = datetime.now()
        try:
            result = await job()
            result.setdefault("success", True)
        except FakeSearchError as e:
            error_msg = f"Error en {command}: {str(e)}"
            logger.error(error_msg)
            result = {"success": False, "error": error_msg, "error_type": e.error_type}
        except Exception as e:
            error_msg = f"Error inesperado en {command}: {str(e)}"
            logger.error(error_msg)
            result = {"success": False, "error": error_msg, "error_type": "error"}

        result["command"] = command
        self.state = RunState.COMPLETED if result["success"] else RunState.FAILED
        self.history.append(
            {
                "timestamp": started.isoformat(),
                "finished": datetime.now().isoformat(),
                "command": command,
                "success": result["success"],
                "error_type": result.get("error_type"),
            }
        )
        return result

    async def validate(self, config: RunConfig) -> Dict[str, Any]:
        async def job() -> Dict[str, Any]:
            params, news = model_from_config(config)
            report = validate(params, news)
            result: Dict[str, Any] = {"result": report.to_dict(), "tables": {}}
            if not report.passed:
                failed = [c.name for c in report.checks if not c.passed]
                result["success"] = False
                result["error"] = "; ".join(report.reasons)
                result["error_type"] = "config" if any(n in _ORDERING_CHECKS for n in failed) else "regime"
            return result

        return await self._run("validate", job)

    async def first_best(self, config: RunConfig) -> Dict[str, Any]:
        async def job() -> Dict[str, Any]:
            params, news = model_from_config(config)
            require_valid(params, news)
            fb = await asyncio.to_thread(solve_first_best, params, news)
            data = fb.to_dict()
            data.update(params.thresholds().to_dict())
            return {"result": data, "tables": {}}

        return await self._run("first-best", job)

    async def solve(self, config: RunConfig) -> Dict[str, Any]:
        async def job() -> Dict[str, Any]:
            params, news = model_from_config(config)
            require_valid(params, news)
            eq = await asyncio.to_thread(build_equilibrium, params, news)
            summary = eq.summary()
            summary["belief_floor"] = eq.belief_floor
            summary["faking"] = eq.faking.describe()
            summary["stopping"] = eq.stopping.describe()
            frame = await asyncio.to_thread(strategies_frame, eq, config.grid_points)
            payoffs = await asyncio.to_thread(payoffs_frame, eq, config.grid_points, config.horizon_factor)
            return {"result": summary, "tables": {"strategies": frame, "payoffs": payoffs}}

        return await self._run("solve", job)

    async def verify(
        self, config: RunConfig, n: Optional[int] = None, seed: Optional[int] = None
    ) -> Dict[str, Any]:
        async def job() -> Dict[str, Any]:
            from analyses.verifier import EquilibriumVerifier

            params, news = model_from_config(config)
            require_valid(params, news)
            eq = await asyncio.to_thread(build_equilibrium, params, news)
            verifier = EquilibriumVerifier(
                tolerance=config.analytic_tol,
                grid_points=config.grid_points,
                horizon_factor=config.horizon_factor,
                threads=self.threads,
                bins=config.mc_bins,
            )
            draws = config.mc_draws if n is None else n
            run_seed = config.mc_seed if seed is None else seed
            report = await asyncio.to_thread(verifier.certify, eq, draws, run_seed)

            rows = [
                {"check": c.check, "residual": c.residual, "tolerance": c.tolerance, "pass": c.passed}
                for c in report.checks
            ]
            result: Dict[str, Any] = {
                "result": report.to_dict(),
                "tables": {"verify": verify_frame(rows)},
            }
            if not report.passed:
                result["success"] = False
                result["error"] = f"Certificación fallida: {report.failures}"
                result["error_type"] = VerificationError.error_type
                logger.error(result["error"])
            return result

        return await self._run("verify", job)

    async def remedies(self, config: RunConfig) -> Dict[str, Any]:
        async def job() -> Dict[str, Any]:
            from analyses.remedies import RemedyAnalyzer, intermediary_equilibrium

            params, news = model_from_config(config)
            require_valid(params, news)
            analyzer = RemedyAnalyzer(threads=self.threads)
            comparison = await asyncio.to_thread(analyzer.compare, params, news)
            tables: Dict[str, Any] = {}
            if comparison.intermediary is not None:
                delegated = await asyncio.to_thread(
                    intermediary_equilibrium, comparison.intermediary.theta_I, params, news
                )
                tables["delegation"] = await asyncio.to_thread(
                    delegation_frame, delegated, params, news, config.grid_points
                )
            return {"result": comparison.to_dict(), "tables": tables}

        return await self._run("remedies", job)

    async def statics(self, config: RunConfig) -> Dict[str, Any]:
        async def job() -> Dict[str, Any]:
            from analyses.statics import sensitivity_report

            params, news = model_from_config(config)
            require_valid(params, news)
            report = await asyncio.to_thread(sensitivity_report, params, news)
            return {"result": report.to_dict(), "tables": {}}

        return await self._run("statics", job)

    async def sweep(self, config: RunConfig, param: str, start: float, stop: float, steps: int) -> Dict[str, Any]:
        async def job() -> Dict[str, Any]:
            if param not in SWEEP_PARAMS:
                raise ConfigError(f"Parámetro de barrido no soportado: {param}", field="param")
            if steps < 1:
                raise ConfigError("El barrido requiere steps >= 1", field="steps")

            values = np.linspace(start, stop, steps).tolist()
            semaphore = asyncio.Semaphore(self.threads)

            async def point(value: float) -> Dict[str, Any]:
                async with semaphore:
                    return await asyncio.to_thread(sweep_point, config, param, value)

            rows = await asyncio.gather(*(point(v) for v in values))
            frame = sweep_frame(list(rows))
            skipped = int((frame["regime"] == "invalid").sum())
            logger.info(f"Barrido de {param}: {len(frame)} puntos ({skipped} inválidos)")
            return {
                "result": {"param": param, "start": start, "stop": stop, "steps": steps, "skipped": skipped},
                "tables": {"sweep": frame},
            }

        return await self._run("sweep", job)

    def get_history(self) -> List[Dict[str, Any]]:
        return self.history


def sweep_point(config: RunConfig, param: str, value: float) -> Dict[str, Any]:
    """Una fila del barrido; un punto inválido queda marcado en lugar de abortar el barrido"""
    from analyses.remedies import delegate_agent, naive_payoff

    row: Dict[str, Any] = {"param": param, "value": value}
    try:
        params, news = model_from_config(config.with_overrides(**{param: value}))
        require_valid(params, news)
        fb = solve_first_best(params, news)
        eq = build_equilibrium(params, news, first_best=fb)
        u_delegate, _, _ = delegate_agent(params, news, fb)
        row.update(
            {
                "tau_M": eq.tau_M,
                "tau_P": eq.tau_P,
                "sigma_bar": eq.sigma_bar,
                "value_P": eq.value_P,
                "value_A": eq.value_A,
                "u_naive": naive_payoff(params, news, fb),
                "u_delegate": u_delegate,
                "regime": eq.regime.value,
            }
        )
    except FakeSearchError as e:
        logger.warning(f"Punto de barrido {param}={value:.6g} inválido: {e}")
        for name in ("tau_M", "tau_P", "sigma_bar", "value_P", "value_A", "u_naive", "u_delegate"):
            row[name] = math.nan
        row["regime"] = "invalid"
    return row
