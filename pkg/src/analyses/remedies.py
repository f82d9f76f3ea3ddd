"""
Agente de remedios con compromiso: búsqueda ingenua, delegación al agente y a un intermediario
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy import optimize

from core.equilibrium import (
    Equilibrium,
    Regime,
    agent_integrated_hazard,
    build_equilibrium,
    posterior,
    support_grid,
)
from core.exceptions import FakeSearchError, RegimeError
from core.first_best import FirstBest, Player, first_best_payoff, solve_first_best
from core.model import ModelParams, require_valid
from core.news import NewsProcess
from core.payoff_engine import ArrivalKernel, always_risky, expected_principal_payoff, principal_payoff
from core.quadrature import bisect_root, quad

logger = logging.getLogger(__name__)

# Búsqueda del intermediario
INTERMEDIARY_GRID = 64
INTERMEDIARY_SPAN = 0.5
INTERMEDIARY_MARGIN = 0.01
INTERMEDIARY_XATOL = 1e-6


class Conflict(Enum):
    """Severidad del conflicto de interés"""

    MILD = "mild"
    SEVERE = "severe"


@dataclass
class IntermediaryResult:
    theta_I: float
    payoff: float
    value_P: float
    no_overrule_margin: float
    decomposition_gap: float
    evaluated: int
    skipped: int

    @property
    def improves(self) -> bool:
        return self.payoff > self.value_P


@dataclass
class RemedyComparison:
    """Comparación de remedios contra el valor sin compromiso"""

    sigma: float
    sigma_bar: float
    regime: str
    u_star: float
    u_naive: float
    u_delegate: float
    conflict: Conflict
    sigma_tilde_N: Optional[float]
    sigma_tilde_D: Optional[float]
    intermediary: Optional[IntermediaryResult] = None
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["conflict"] = self.conflict.value
        if self.intermediary is not None:
            data["intermediary"]["improves"] = self.intermediary.improves
        return data


def _penalty_weight(t: float, params: ModelParams, news: NewsProcess) -> float:
    """e^{-rho t} (1 - G(t)) (theta - mu): costo de actuar sobre una falsa sin noticias hasta t"""
    return math.exp(-params.rho * t) * news.survival(t) * (params.theta - params.mu)


def naive_payoff(params: ModelParams, news: NewsProcess, first_best: Optional[FirstBest] = None) -> float:
    """u_P^N: compromiso con la regla de primer mejor actuando sobre toda noticia hasta tau_P"""
    fb = first_best or solve_first_best(params, news)
    return fb.value_P - params.sigma * _penalty_weight(fb.tau_P, params, news)


def naive_threshold(
    params: ModelParams, news: NewsProcess, first_best: Optional[FirstBest] = None
) -> Optional[float]:
    """sigma_tilde_N con u_P^N(sigma) = theta (lineal en sigma), acotado a 1; None si no hay umbral positivo"""
    fb = first_best or solve_first_best(params, news)
    if fb.value_P <= params.theta:
        return None
    slope = _penalty_weight(fb.tau_P, params, news)
    if slope <= 0:
        return 1.0
    return min(1.0, (fb.value_P - params.theta) / slope)


def delegate_agent(
    params: ModelParams, news: NewsProcess, first_best: Optional[FirstBest] = None
) -> Tuple[float, Conflict, Optional[float]]:
    """u_P^D, clasificación del conflicto y sigma_tilde_D cuando el conflicto es leve"""
    fb = first_best or solve_first_best(params, news)
    u_delegate = first_best_payoff(Player.PRINCIPAL, fb.tau_A, params, news) - _penalty_weight(
        fb.tau_A, params, news
    )
    conflict = Conflict.MILD if u_delegate >= params.theta else Conflict.SEVERE
    if conflict is Conflict.SEVERE:
        return u_delegate, conflict, None

    # u_P^FB es creciente en [0, tau_P]: se resuelve primero el plazo blando equivalente
    def gap(tau: float) -> float:
        return first_best_payoff(Player.PRINCIPAL, tau, params, news) - u_delegate

    tau = bisect_root(gap, 0.0, fb.tau_P)
    spread = agent_integrated_hazard(fb.tau_P, params, news) - agent_integrated_hazard(tau, params, news)
    sigma_tilde = -math.expm1(-spread)
    logger.info(f"Conflicto leve: u_D={u_delegate:.6g}, sigma_tilde_D={sigma_tilde:.6g}")
    return u_delegate, conflict, sigma_tilde


def intermediary_equilibrium(theta_I: float, params: ModelParams, news: NewsProcess) -> Equilibrium:
    """Equilibrio del juego con theta_I en lugar de theta; exige mu < theta_I y régimen beneficioso"""
    candidate = params.with_changes(theta=theta_I)
    if not params.mu < theta_I:
        raise RegimeError(f"theta_I={theta_I:.6g} no supera mu={params.mu:.6g}")
    require_valid(candidate, news)
    eq = build_equilibrium(candidate, news)
    if eq.regime is not Regime.BENEFICIAL:
        raise RegimeError(f"theta_I={theta_I:.6g}: sigma >= sigma_bar(theta_I)={eq.sigma_bar:.6g}")
    return eq


def intermediary_payoff(theta_I: float, params: ModelParams, news: NewsProcess) -> float:
    """U(theta_I | theta): pago del principal cuando el intermediario detiene según su equilibrio"""
    eq = intermediary_equilibrium(theta_I, params, news)
    return expected_principal_payoff(eq.stopping, eq.faking, always_risky, params, news)


def no_overrule_margin(theta_I: float, params: ModelParams, news: NewsProcess, points: int = 200) -> float:
    """min sobre el soporte de mu1(t | theta_I) - theta; positivo si el principal nunca anula"""
    eq = intermediary_equilibrium(theta_I, params, news)
    grid = support_grid(eq, points)
    return min(posterior(t, eq) for t in grid) - params.theta


def intermediary_decomposition_gap(
    theta_I: float, params: ModelParams, news: NewsProcess, t: Optional[float] = None
) -> Dict[str, float]:
    """Compara la descomposición u_P^FB(tau_M) + integral + término terminal con la evaluación directa"""
    eq = intermediary_equilibrium(theta_I, params, news)
    t = 0.5 * (eq.tau_M + eq.tau_P) if t is None else t
    kernel = ArrivalKernel(params, news, faking=eq.faking)
    rho, theta = params.rho, params.theta

    def flow(s: float) -> float:
        return math.exp(-rho * s) * (kernel.w0_P(s) * theta + kernel.w1_mu1_P(s))

    displayed = (
        first_best_payoff(Player.PRINCIPAL, eq.tau_M, params, news)
        + quad(flow, eq.tau_M, t)
        + math.exp(-rho * t) * kernel.W_P(t) * theta
    )
    direct = principal_payoff(t, eq.faking, always_risky, params, news)
    terminal = math.exp(-rho * eq.tau_M) * news.survival(eq.tau_M) * theta
    return {"t": t, "displayed": displayed, "direct": direct, "gap": displayed - direct, "terminal_term": terminal}


class RemedyAnalyzer:
    """Agente que calcula y compara los tres remedios"""

    def __init__(self, threads: int = 1, grid: int = INTERMEDIARY_GRID):
        self.threads = max(1, threads)
        self.grid = grid

    def _evaluate(self, theta_I: float, params: ModelParams, news: NewsProcess) -> Optional[float]:
        try:
            return intermediary_payoff(theta_I, params, news)
        except FakeSearchError as e:
            logger.warning(f"Candidato theta_I={theta_I:.6g} descartado: {e}")
            return None

    def optimize_intermediary(
        self, params: ModelParams, news: NewsProcess, value_P: Optional[float] = None
    ) -> IntermediaryResult:
        """Grilla gruesa en (max(mu + margen, theta - span), theta] y refinamiento acotado de Brent"""
        theta, mu = params.theta, params.mu
        lo = max(mu + INTERMEDIARY_MARGIN, theta - INTERMEDIARY_SPAN * (theta - mu))
        candidates = np.linspace(lo, theta, self.grid + 1)[1:].tolist()

        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            values = list(pool.map(lambda c: self._evaluate(c, params, news), candidates))

        valid = [(k, v) for k, v in enumerate(values) if v is not None]
        if not valid:
            raise RegimeError("Ningún candidato theta_I mantiene el régimen beneficioso")
        skipped = len(candidates) - len(valid)
        best_k, best_value = max(valid, key=lambda kv: (kv[1], -kv[0]))
        best_theta = candidates[best_k]

        left = candidates[best_k - 1] if best_k > 0 else lo
        right = candidates[min(best_k + 1, len(candidates) - 1)]
        if right > left:
            penalty = -best_value + 1.0

            def objective(x: float) -> float:
                value = self._evaluate(x, params, news)
                return penalty if value is None else -value

            refined = optimize.minimize_scalar(
                objective, bounds=(left, right), method="bounded", options={"xatol": INTERMEDIARY_XATOL}
            )
            if refined.success and -refined.fun > best_value:
                best_theta, best_value = float(refined.x), float(-refined.fun)

        if value_P is None:
            value_P = build_equilibrium(params, news).value_P
        margin = no_overrule_margin(best_theta, params, news)
        gap = intermediary_decomposition_gap(best_theta, params, news)["gap"]
        result = IntermediaryResult(
            theta_I=best_theta,
            payoff=best_value,
            value_P=value_P,
            no_overrule_margin=margin,
            decomposition_gap=gap,
            evaluated=len(candidates),
            skipped=skipped,
        )
        logger.info(
            f"Intermediario óptimo: theta_I*={best_theta:.6g}, U={best_value:.6g} (sin delegar {value_P:.6g})"
        )
        return result

    def compare(self, params: ModelParams, news: NewsProcess, with_intermediary: bool = True) -> RemedyComparison:
        fb = solve_first_best(params, news)
        eq = build_equilibrium(params, news, first_best=fb)
        u_delegate, conflict, sigma_tilde_D = delegate_agent(params, news, fb)
        comparison = RemedyComparison(
            sigma=params.sigma,
            sigma_bar=eq.sigma_bar,
            regime=eq.regime.value,
            u_star=eq.value_P,
            u_naive=naive_payoff(params, news, fb),
            u_delegate=u_delegate,
            conflict=conflict,
            sigma_tilde_N=naive_threshold(params, news, fb),
            sigma_tilde_D=sigma_tilde_D,
        )
        if with_intermediary and eq.regime is Regime.BENEFICIAL and params.sigma > 0:
            comparison.intermediary = self.optimize_intermediary(params, news, eq.value_P)
        elif with_intermediary:
            comparison.notes.append("intermediary omitted: regime is not beneficial with a faker")
        return comparison


def optimize_intermediary(params: ModelParams, news: NewsProcess, threads: int = 1) -> Tuple[float, float]:
    result = RemedyAnalyzer(threads=threads).optimize_intermediary(params, news)
    return result.theta_I, result.payoff
