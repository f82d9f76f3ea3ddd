"""
Construcción de equilibrios: umbral sigma_bar, plazo blando tau_M, estrategias mixtas y creencias
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np

from .exceptions import DomainError, InconsistencyError, RegimeError
from .first_best import FirstBest, Player, first_best_duration, first_best_payoff, solve_first_best
from .model import ModelParams
from .news import NEVER, NewsProcess
from .payoff_engine import Action, Belief, always_risky
from .quadrature import bisect_root, quad
from .strategies import MixedStrategy, continuous, never, point_mass

logger = logging.getLogger(__name__)

# Holgura para considerar que t está en el soporte [tau_M, tau_P]
SUPPORT_SLACK = 1e-12


class Regime(Enum):
    """Tipos de equilibrio"""

    BENEFICIAL = "beneficial"
    NON_BENEFICIAL = "non_beneficial"


@dataclass(frozen=True)
class Equilibrium:
    regime: Regime
    params: ModelParams
    news: NewsProcess
    first_best: FirstBest
    tau_M: float
    tau_P: float
    faking: MixedStrategy
    stopping: MixedStrategy
    action: Action
    belief: Belief
    value_P: float
    value_A: float
    sigma_bar: float

    @property
    def stopping_atom(self) -> float:
        return self.stopping.atom_mass(self.tau_P) if self.regime is Regime.BENEFICIAL else 1.0

    @property
    def belief_floor(self) -> float:
        """epsilon: cota inferior de mu1 - theta en el soporte"""
        if self.tau_M >= self.tau_P:
            return 1.0 - self.params.theta
        return _posterior_on_support(self.tau_M, self.params, self.news) - self.params.theta

    def faking_cdf(self, t: float) -> float:
        return self.faking.cdf(t)

    def stopping_cdf(self, t: float) -> float:
        return self.stopping.cdf(t)

    def summary(self) -> Dict[str, Any]:
        return {
            "regime": self.regime.value,
            "tau_M": self.tau_M,
            "tau_P": self.tau_P,
            "tau_A": self.first_best.tau_A,
            "sigma": self.params.sigma,
            "sigma_bar": self.sigma_bar,
            "value_P": self.value_P,
            "value_A": self.value_A,
            "stopping_atom": self.stopping_atom,
            "faking_never_mass": self.faking.never_mass,
            "faking_mass_at_tau_P": self.faking.cdf(self.tau_P),
        }


def agent_hazard_rate(t: float, params: ModelParams, news: NewsProcess) -> float:
    """(mu(1-theta) H_R(t) - rho theta) / (theta - mu), sin restricción de dominio"""
    return (params.mu * (1.0 - params.theta) * news.hazard(t) - params.rho * params.theta) / (
        params.theta - params.mu
    )


def principal_hazard_rate(t: float, params: ModelParams, news: NewsProcess) -> float:
    """(beta(1-mu) H_R(t) - rho mu) / (mu - beta), sin restricción de dominio"""
    return (params.beta * (1.0 - params.mu) * news.hazard(t) - params.rho * params.mu) / (
        params.mu - params.beta
    )


def agent_integrated_hazard(t: float, params: ModelParams, news: NewsProcess) -> float:
    """Integral de H_A en [0, t] vía el hazard acumulado exacto"""
    return (params.mu * (1.0 - params.theta) * news.cumulative_hazard(t) - params.rho * params.theta * t) / (
        params.theta - params.mu
    )


def principal_integrated_hazard(t: float, params: ModelParams, news: NewsProcess) -> float:
    """Integral de H_P en [0, t] vía el hazard acumulado exacto"""
    return (params.beta * (1.0 - params.mu) * news.cumulative_hazard(t) - params.rho * params.mu * t) / (
        params.mu - params.beta
    )


def _check_support(t: float, tau_M: float, tau_P: float) -> None:
    if t < tau_M - SUPPORT_SLACK or t > tau_P + SUPPORT_SLACK:
        raise DomainError(f"t={t} fuera del soporte [{tau_M:.6g}, {tau_P:.6g}]")


def agent_hazard(
    t: float, params: ModelParams, news: NewsProcess, tau_P: Optional[float] = None, tau_M: float = 0.0
) -> float:
    """H_A(t) = sigma f_A / (1 - sigma F_A) en el soporte [tau_M, tau_P]"""
    tau_P = _tau_P(params, news) if tau_P is None else tau_P
    _check_support(t, tau_M, tau_P)
    return agent_hazard_rate(t, params, news)


def principal_hazard(
    t: float, params: ModelParams, news: NewsProcess, tau_P: Optional[float] = None, tau_M: float = 0.0
) -> float:
    """H_P(t) = f_P / (1 - F_P) en el soporte [tau_M, tau_P]"""
    tau_P = _tau_P(params, news) if tau_P is None else tau_P
    _check_support(t, tau_M, tau_P)
    return principal_hazard_rate(t, params, news)


def _tau_P(params: ModelParams, news: NewsProcess) -> float:
    return first_best_duration(Player.PRINCIPAL, params, news)


def sigma_bar(
    params: ModelParams, news: NewsProcess, tau_P: Optional[float] = None, method: str = "exact"
) -> float:
    """1 - exp(-integral de H_A en [0, tau_P]); method="quadrature" integra H_A numéricamente"""
    tau_P = _tau_P(params, news) if tau_P is None else tau_P

    start = agent_hazard_rate(0.0, params, news)
    end = agent_hazard_rate(tau_P, params, news)
    if start <= 0:
        raise InconsistencyError(f"H_A(0)={start:.6g} no es positivo antes de tau_P")
    if abs(end) > 1e-8 * max(1.0, start):
        raise InconsistencyError(f"H_A(tau_P)={end:.3e} no se anula: hazard y raíz inconsistentes")

    if method == "quadrature":
        total = quad(lambda s: agent_hazard_rate(s, params, news), 0.0, tau_P, epsrel=1e-10)
    elif method == "exact":
        total = agent_integrated_hazard(tau_P, params, news)
    else:
        raise ValueError(f"Método no soportado: {method}")
    return 1.0 - math.exp(-total)


def solve_tau_M(
    sigma: float,
    params: ModelParams,
    news: NewsProcess,
    tau_P: Optional[float] = None,
    bar: Optional[float] = None,
) -> float:
    """Plazo blando: 1 - exp(-integral de H_A en [tau_M, tau_P]) = sigma"""
    tau_P = _tau_P(params, news) if tau_P is None else tau_P
    bar = sigma_bar(params, news, tau_P) if bar is None else bar
    if sigma >= bar:
        raise RegimeError(
            f"sigma={sigma:.6g} >= sigma_bar={bar:.6g}: usar el equilibrio sin búsqueda beneficiosa"
        )
    if sigma == 0.0:
        return tau_P

    top = agent_integrated_hazard(tau_P, params, news)
    target = -math.log1p(-sigma)

    def gap(tau: float) -> float:
        return top - agent_integrated_hazard(tau, params, news) - target

    tau_M = bisect_root(gap, 0.0, tau_P)
    logger.info(f"Plazo blando resuelto: tau_M={tau_M:.10g} (sigma={sigma:.6g})")
    return tau_M


def _posterior_on_support(t: float, params: ModelParams, news: NewsProcess) -> float:
    denominator = news.hazard(t) * params.mu * (1.0 - params.mu) - params.rho * params.theta
    if denominator <= 0:
        raise InconsistencyError(f"Denominador de la creencia no positivo en t={t:.6g}")
    return params.theta + (params.theta - params.mu) * params.rho * params.theta / denominator


def posterior(t: float, equilibrium: Equilibrium) -> float:
    """mu1(t): 1 fuera de [tau_M, tau_P], fórmula cerrada dentro"""
    if t < 0:
        raise DomainError(f"El tiempo debe ser >= 0, recibido {t}")
    eq = equilibrium
    if t == NEVER or t < eq.tau_M or t > eq.tau_P or eq.tau_M >= eq.tau_P:
        return 1.0
    if t == eq.tau_P:
        return 1.0
    return min(1.0, _posterior_on_support(t, eq.params, eq.news))


def _belief_function(tau_M: float, tau_P: float, params: ModelParams, news: NewsProcess) -> Belief:
    def belief(t: float) -> float:
        if t < tau_M or t >= tau_P or t == NEVER:
            return 1.0
        return min(1.0, _posterior_on_support(t, params, news))

    return belief


def _faking_strategy(tau_M: float, tau_P: float, params: ModelParams, news: NewsProcess) -> MixedStrategy:
    sigma = params.sigma
    anchor = agent_integrated_hazard(tau_M, params, news)

    def cdf(t: float) -> float:
        return -math.expm1(-(agent_integrated_hazard(t, params, news) - anchor)) / sigma

    def density(t: float) -> float:
        return agent_hazard_rate(t, params, news) * math.exp(
            -(agent_integrated_hazard(t, params, news) - anchor)
        ) / sigma

    # Masa que no alcanza 1 en tau_P queda en "nunca"
    return continuous(cdf, density, (tau_M, tau_P), label="faking")


def _stopping_strategy(tau_M: float, tau_P: float, params: ModelParams, news: NewsProcess) -> MixedStrategy:
    anchor = principal_integrated_hazard(tau_M, params, news)

    def cdf(t: float) -> float:
        return -math.expm1(-(principal_integrated_hazard(t, params, news) - anchor))

    def density(t: float) -> float:
        return principal_hazard_rate(t, params, news) * math.exp(
            -(principal_integrated_hazard(t, params, news) - anchor)
        )

    atom = 1.0 - cdf(tau_P)
    return continuous(cdf, density, (tau_M, tau_P), atoms=((tau_P, atom),), never_mass=0.0, label="stopping")


def build_equilibrium(
    params: ModelParams,
    news: NewsProcess,
    tau_M: Optional[float] = None,
    first_best: Optional[FirstBest] = None,
) -> Equilibrium:
    """Equilibrio con búsqueda beneficiosa si sigma < sigma_bar, si no el de detención inmediata

    ``tau_M`` explícito fija el plazo blando en lugar de resolverlo; la masa de falsificación
    que falte hasta 1 queda en "nunca".
    """
    fb = first_best or solve_first_best(params, news)
    tau_P = fb.tau_P
    bar = sigma_bar(params, news, tau_P)

    if params.sigma == 0.0:
        logger.info("Sin falsificador: detención determinística en tau_P")
        return Equilibrium(
            regime=Regime.BENEFICIAL,
            params=params,
            news=news,
            first_best=fb,
            tau_M=tau_P,
            tau_P=tau_P,
            faking=never("faking"),
            stopping=point_mass(tau_P, "stopping"),
            action=always_risky,
            belief=lambda t: 1.0,
            value_P=fb.value_P,
            value_A=first_best_payoff(Player.AGENT, tau_P, params, news),
            sigma_bar=bar,
        )

    if params.sigma < bar or tau_M is not None:
        if tau_M is None:
            tau_M = solve_tau_M(params.sigma, params, news, tau_P, bar)
        if not 0.0 <= tau_M < tau_P:
            raise DomainError(f"tau_M={tau_M:.6g} fuera de [0, tau_P)")
        equilibrium = Equilibrium(
            regime=Regime.BENEFICIAL,
            params=params,
            news=news,
            first_best=fb,
            tau_M=tau_M,
            tau_P=tau_P,
            faking=_faking_strategy(tau_M, tau_P, params, news),
            stopping=_stopping_strategy(tau_M, tau_P, params, news),
            action=always_risky,
            belief=_belief_function(tau_M, tau_P, params, news),
            value_P=first_best_payoff(Player.PRINCIPAL, tau_M, params, news),
            value_A=first_best_payoff(Player.AGENT, tau_M, params, news),
            sigma_bar=bar,
        )
        logger.info(
            f"Equilibrio beneficioso: tau_M={tau_M:.6g}, tau_P={tau_P:.6g}, value_P={equilibrium.value_P:.6g}"
        )
        return equilibrium

    # sigma >= sigma_bar: F_A truncada en tau_P, el resto no falsifica nunca
    equilibrium = Equilibrium(
        regime=Regime.NON_BENEFICIAL,
        params=params,
        news=news,
        first_best=fb,
        tau_M=0.0,
        tau_P=tau_P,
        faking=_faking_strategy(0.0, tau_P, params, news),
        stopping=point_mass(0.0, "stopping"),
        action=always_risky,
        belief=_belief_function(0.0, tau_P, params, news),
        value_P=params.theta,
        value_A=params.beta,
        sigma_bar=bar,
    )
    logger.info(
        f"Equilibrio sin búsqueda beneficiosa: sigma={params.sigma:.6g} >= sigma_bar={bar:.6g}, "
        f"F_A(tau_P)={equilibrium.faking.cdf(tau_P):.6g}"
    )
    return equilibrium


def fixed_point_residual(equilibrium: Equilibrium) -> float:
    """|1 - exp(-integral de H_A en [tau_M, tau_P]) - sigma|"""
    eq = equilibrium
    if eq.regime is not Regime.BENEFICIAL:
        return 0.0
    p, news = eq.params, eq.news
    spread = agent_integrated_hazard(eq.tau_P, p, news) - agent_integrated_hazard(eq.tau_M, p, news)
    return abs(-math.expm1(-spread) - p.sigma)


def support_grid(equilibrium: Equilibrium, points: int = 200) -> List[float]:
    return np.linspace(equilibrium.tau_M, equilibrium.tau_P, points).tolist()
