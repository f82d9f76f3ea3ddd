"""
Funcionales de pago del principal y del agente para pares de estrategias arbitrarios
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional

from .config import settings
from .exceptions import DomainError
from .first_best import Player, first_best_payoff
from .model import ModelParams
from .news import NEVER, NewsProcess
from .quadrature import piecewise_quad
from .strategies import MixedStrategy, never

logger = logging.getLogger(__name__)

Action = Callable[[float], float]
Belief = Callable[[float], float]


def always_risky(t: float) -> float:
    return 1.0


@dataclass(frozen=True)
class ArrivalKernel:
    """Densidades de llegada vistas por cada jugador y sus sobrevivencias sin evento

    Vista del principal: w0_P (noticia real tipo 0), w1_P (tipo 1, real o falsa).
    Vista del agente: w0_A, w1_A (noticias reales) y wS_A (el principal se detiene).
    """

    params: ModelParams
    news: NewsProcess
    faking: MixedStrategy = field(default_factory=never)
    stopping: MixedStrategy = field(default_factory=never)

    def w0_P(self, s: float) -> float:
        p = self.params
        return (1.0 - p.mu) * self.news.density(s) * (1.0 - p.sigma * self.faking.cdf(s))

    def w1_P(self, s: float) -> float:
        p = self.params
        real = p.mu * self.news.density(s) * (1.0 - p.sigma * self.faking.cdf(s))
        fake = p.sigma * self.faking.pdf(s) * self.news.survival(s)
        return real + fake

    def w1_mu1_P(self, s: float) -> float:
        """w1_P(s) * mu1(s) sin dividir"""
        p = self.params
        real = p.mu * self.news.density(s) * (1.0 - p.sigma * self.faking.cdf(s))
        fake = p.sigma * self.faking.pdf(s) * self.news.survival(s)
        return real + p.mu * fake

    def W_P(self, s: float) -> float:
        return self.news.survival(s) * (1.0 - self.params.sigma * self.faking.cdf(s))

    def W_P_left(self, s: float) -> float:
        return self.news.survival(s) * (1.0 - self.params.sigma * self.faking.cdf_left(s))

    def w0_A(self, s: float) -> float:
        return (1.0 - self.params.mu) * self.news.density(s) * (1.0 - self.stopping.cdf(s))

    def w1_A(self, s: float) -> float:
        return self.params.mu * self.news.density(s) * (1.0 - self.stopping.cdf(s))

    def wS_A(self, s: float) -> float:
        return self.stopping.pdf(s) * self.news.survival(s)

    def W_A(self, s: float) -> float:
        return self.news.survival(s) * (1.0 - self.stopping.cdf(s))

    def accounting_gap(self, player: Player, t1: float, t2: float) -> float:
        """|integral de las densidades + átomos en (t1, t2] - (W(t1) - W(t2))|"""
        if player is Player.PRINCIPAL:
            def flow(s: float) -> float:
                return self.w0_P(s) + self.w1_P(s)

            strategy, scale, survival = self.faking, self.params.sigma, self.W_P
        else:
            def flow(s: float) -> float:
                return self.w0_A(s) + self.w1_A(s) + self.wS_A(s)

            strategy, scale, survival = self.stopping, 1.0, self.W_A

        mass = piecewise_quad(flow, t1, t2, strategy.breakpoints())
        mass += sum(
            scale * m * self.news.survival(time)
            for time, m in strategy.atoms
            if t1 < time <= t2
        )
        return abs(mass - (survival(t1) - survival(t2)))


def _check_time(t: float) -> None:
    if t < 0 or math.isnan(t):
        raise DomainError(f"El tiempo debe ser >= 0, recibido {t}")


def _principal_flow(kernel: ArrivalKernel, action: Action) -> Callable[[float], float]:
    theta, rho = kernel.params.theta, kernel.params.rho

    def integrand(s: float) -> float:
        a = action(s)
        return math.exp(-rho * s) * (
            kernel.w0_P(s) * theta + (1.0 - a) * theta * kernel.w1_P(s) + a * kernel.w1_mu1_P(s)
        )

    return integrand


def _fake_atom_value(kernel: ArrivalKernel, action: Action, time: float, mass: float) -> float:
    p = kernel.params
    a = action(time)
    return math.exp(-p.rho * time) * p.sigma * mass * kernel.news.survival(time) * (
        (1.0 - a) * p.theta + a * p.mu
    )


def principal_payoff(
    t: float,
    faking: MixedStrategy,
    action: Action,
    params: ModelParams,
    news: NewsProcess,
) -> float:
    """u_P(t): pago del principal que planea detenerse en t (t puede ser NEVER)"""
    _check_time(t)
    if t == 0.0:
        return params.theta

    kernel = ArrivalKernel(params, news, faking=faking)
    value = piecewise_quad(_principal_flow(kernel, action), 0.0, t, faking.breakpoints())

    # Una falsificación en t exacto pierde contra la detención
    value += sum(
        _fake_atom_value(kernel, action, time, mass)
        for time, mass in faking.atoms
        if time < t
    )
    if t != NEVER:
        value += math.exp(-params.rho * t) * kernel.W_P_left(t) * params.theta
    return value


def agent_payoff(
    t: float,
    stopping: MixedStrategy,
    action: Action,
    params: ModelParams,
    news: NewsProcess,
) -> float:
    """u_A(t): pago del falsificador que planea fabricar noticia en t (t puede ser NEVER)"""
    _check_time(t)
    kernel = ArrivalKernel(params, news, stopping=stopping)
    beta, rho = params.beta, params.rho

    def integrand(s: float) -> float:
        a = action(s)
        return math.exp(-rho * s) * (
            (kernel.w0_A(s) + kernel.wS_A(s)) * beta + kernel.w1_A(s) * ((1.0 - a) * beta + a)
        )

    value = piecewise_quad(integrand, 0.0, t, stopping.breakpoints())
    value += sum(
        math.exp(-rho * time) * mass * news.survival(time) * beta
        for time, mass in stopping.atoms
        if time <= t
    )
    if t != NEVER:
        a = action(t)
        value += math.exp(-rho * t) * kernel.W_A(t) * ((1.0 - a) * beta + params.mu * a)
    return value


def best_response_action(belief: Belief, params: ModelParams, tie: Optional[float] = None) -> Action:
    """a(t) = 1 si mu1(t) > theta, 0 si mu1(t) < theta, ``tie`` en el empate"""
    tie = settings.TIE_ACTION if tie is None else tie
    if not 0.0 <= tie <= 1.0:
        raise DomainError(f"La acción de empate debe estar en [0, 1], recibido {tie}")
    theta = params.theta

    def action(t: float) -> float:
        value = belief(t)
        if value > theta:
            return 1.0
        if value < theta:
            return 0.0
        return tie

    return action


def posterior_from_strategy(faking: MixedStrategy, params: ModelParams, news: NewsProcess) -> Belief:
    """Creencia de Bayes mu1(t) tras noticia tipo 1 para cualquier estrategia de falsificación"""
    kernel = ArrivalKernel(params, news, faking=faking)

    def belief(t: float) -> float:
        if t != NEVER and faking.atom_mass(t) > 0:
            return params.mu
        denominator = kernel.w1_P(t)
        if denominator <= 0:
            return params.mu
        return kernel.w1_mu1_P(t) / denominator

    return belief


def expected_principal_payoff(
    stopping: MixedStrategy,
    faking: MixedStrategy,
    action: Action,
    params: ModelParams,
    news: NewsProcess,
) -> float:
    """Pago esperado del principal cuando se detiene según ``stopping`` (una sola cuadratura)"""
    kernel = ArrivalKernel(params, news, faking=faking, stopping=stopping)
    flow = _principal_flow(kernel, action)
    breakpoints = faking.breakpoints() + stopping.breakpoints()

    if stopping.never_mass > 0:
        upper = NEVER
    else:
        upper = max(stopping.breakpoints() or [0.0])

    def alive(s: float) -> float:
        return flow(s) * (1.0 - stopping.cdf(s))

    value = piecewise_quad(alive, 0.0, upper, breakpoints)
    value += sum(
        (1.0 - stopping.cdf(time)) * _fake_atom_value(kernel, action, time, mass)
        for time, mass in faking.atoms
    )

    def stop_density(s: float) -> float:
        return stopping.pdf(s) * math.exp(-params.rho * s) * kernel.W_P_left(s) * params.theta

    lo, hi = stopping.support
    value += piecewise_quad(stop_density, lo, hi, faking.breakpoints())
    value += sum(
        mass * math.exp(-params.rho * time) * kernel.W_P_left(time) * params.theta
        for time, mass in stopping.atoms
    )
    return value


def principal_bound_gaps(
    t: float,
    t2: float,
    faking: MixedStrategy,
    action: Action,
    params: ModelParams,
    news: NewsProcess,
) -> Dict[str, float]:
    """Holguras de las cotas del principal para t < t2 (no negativas cuando se cumplen)

    upper: (1 - sigma F_A(t)) (u_P^FB(t2) - u_P^FB(t)) - (u_P(t2) - u_P(t))
    lower: (u_P(t2) - u_P(t)) + (e^{-rho t} - e^{-rho t2}) W_P(t) theta
    """
    if not t < t2:
        raise DomainError(f"Se requiere t < t2, recibido {t}, {t2}")
    kernel = ArrivalKernel(params, news, faking=faking)
    du = principal_payoff(t2, faking, action, params, news) - principal_payoff(t, faking, action, params, news)
    dfb = first_best_payoff(Player.PRINCIPAL, t2, params, news) - first_best_payoff(
        Player.PRINCIPAL, t, params, news
    )
    discount_gap = math.exp(-params.rho * t) - math.exp(-params.rho * t2)
    return {
        "upper": (1.0 - params.sigma * faking.cdf(t)) * dfb - du,
        "lower": du + discount_gap * kernel.W_P_left(t) * params.theta,
    }


def principal_tail_gap(
    t: float,
    tau_P: float,
    faking: MixedStrategy,
    action: Action,
    params: ModelParams,
    news: NewsProcess,
) -> float:
    """u_P(tau_P) - u_P(t) para t > tau_P; positivo cuando detenerse después no conviene"""
    if not t > tau_P:
        raise DomainError(f"Se requiere t > tau_P, recibido {t}")
    return principal_payoff(tau_P, faking, action, params, news) - principal_payoff(
        t, faking, action, params, news
    )


def _agent_baseline(t: float, params: ModelParams, news: NewsProcess) -> float:
    """v(t): primer mejor del agente con beta como pago al detenerse"""
    return first_best_payoff(Player.AGENT, t, params, news) - math.exp(-params.rho * t) * news.survival(t) * (
        params.mu - params.beta
    )


def agent_bound_gaps(
    t: float,
    t2: float,
    stopping: MixedStrategy,
    action: Action,
    params: ModelParams,
    news: NewsProcess,
) -> Dict[str, float]:
    """Holguras de las cotas del agente para t < t2 <= tau_P (no negativas cuando se cumplen)"""
    if not t < t2:
        raise DomainError(f"Se requiere t < t2, recibido {t}, {t2}")
    kernel = ArrivalKernel(params, news, stopping=stopping)
    mu, beta, rho = params.mu, params.beta, params.rho
    du = agent_payoff(t2, stopping, action, params, news) - agent_payoff(t, stopping, action, params, news)
    dv = _agent_baseline(t2, params, news) - _agent_baseline(t, params, news)

    late = math.exp(-rho * t2) * kernel.W_A(t2) * action(t2)
    early = math.exp(-rho * t) * kernel.W_A(t) * action(t)
    upper = (1.0 - stopping.cdf(t)) * dv + (late - early) * (mu - beta)
    lower = (late - early) * (mu - beta) - (math.exp(-rho * t) - math.exp(-rho * t2)) * kernel.W_A(t) * beta
    return {"upper": upper - du, "lower": du - lower}


def agent_flat_identity_gap(
    t: float,
    t2: float,
    stopping: MixedStrategy,
    params: ModelParams,
    news: NewsProcess,
) -> float:
    """Con F_P plano en [t, t2] y a = 1: u_A(t2) - u_A(t) - (1 - F_P(t)) (u_A^FB(t2) - u_A^FB(t))"""
    if stopping.cdf(t2) != stopping.cdf(t):
        raise DomainError(f"F_P no es plana en [{t}, {t2}]")
    du = agent_payoff(t2, stopping, always_risky, params, news) - agent_payoff(
        t, stopping, always_risky, params, news
    )
    dfb = first_best_payoff(Player.AGENT, t2, params, news) - first_best_payoff(Player.AGENT, t, params, news)
    return du - (1.0 - stopping.cdf(t)) * dfb
