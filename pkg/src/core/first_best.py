"""
Benchmark de primer mejor: duración óptima y curva de pagos de cada jugador
"""

import logging
import math
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Dict, Tuple, Union

from .exceptions import InconsistencyError, RegimeError
from .model import ModelParams, working_horizon
from .news import NEVER, NewsProcess
from .quadrature import bisect_root, grow_bracket, quad

logger = logging.getLogger(__name__)


class Player(Enum):
    """Jugadores del juego"""

    PRINCIPAL = "P"
    AGENT = "A"


PlayerLike = Union[Player, str]


def _player(player: PlayerLike) -> Player:
    if isinstance(player, Player):
        return player
    return Player(str(player).upper()[:1])


def payoff_slots(player: PlayerLike, params: ModelParams) -> Tuple[float, float]:
    """(d_i, s_i): pago por detenerse sin noticias y pago seguro tras noticia tipo 0"""
    if _player(player) is Player.PRINCIPAL:
        return params.theta, params.theta
    return params.mu, params.beta


def phi(player: PlayerLike, params: ModelParams) -> float:
    return params.phi_P if _player(player) is Player.PRINCIPAL else params.phi_A


@dataclass(frozen=True)
class FirstBest:
    tau_P: float
    tau_A: float
    value_P: float
    value_A: float

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


def first_best_duration(player: PlayerLike, params: ModelParams, news: NewsProcess) -> float:
    """Duración tau_i con H_R(tau_i) = phi_i, forma cerrada si la familia la tiene"""
    level = phi(player, params)
    h0 = news.hazard(0.0)
    if h0 <= level:
        raise RegimeError(
            f"H_R(0)={h0:.6g} <= phi_{_player(player).value}={level:.6g}: la duración óptima no es positiva"
        )

    closed = news.inverse_hazard(level)
    if closed is not None:
        if not (0.0 < closed < NEVER):
            raise RegimeError(f"Sin raíz finita de H_R(t) = {level:.6g}")
        if abs(news.hazard(closed) - level) > 1e-8 * level:
            raise InconsistencyError(f"Inversa del hazard inconsistente en t={closed:.6g}")
        return closed

    horizon = working_horizon(params)

    def gap(t: float) -> float:
        return news.hazard(t) - level

    lo, hi = grow_bracket(gap, start=min(1.0, horizon), limit=horizon)
    root = bisect_root(gap, lo, hi)
    logger.debug(f"Raíz de primer mejor ({_player(player).value}) por bisección: {root:.10g}")
    return root


def first_best_payoff(player: PlayerLike, t: float, params: ModelParams, news: NewsProcess) -> float:
    """u_i^FB(t): actuar sobre noticias reales hasta t y luego tomar d_i"""
    d, s = payoff_slots(player, params)
    if t == 0.0:
        return d
    weight = params.mu + (1.0 - params.mu) * s

    def integrand(x: float) -> float:
        return math.exp(-params.rho * x) * news.density(x) * weight

    value = quad(integrand, 0.0, t)
    if t == NEVER:
        return value
    return value + math.exp(-params.rho * t) * news.survival(t) * d


def first_best_derivative(player: PlayerLike, t: float, params: ModelParams, news: NewsProcess) -> float:
    """Derivada cerrada de u_i^FB: e^{-rho t} S(t) [H_R(t)(mu + (1-mu)s_i - d_i) - rho d_i]"""
    d, s = payoff_slots(player, params)
    return math.exp(-params.rho * t) * news.survival(t) * (
        news.hazard(t) * (params.mu + (1.0 - params.mu) * s - d) - params.rho * d
    )


def solve_first_best(params: ModelParams, news: NewsProcess) -> FirstBest:
    tau_P = first_best_duration(Player.PRINCIPAL, params, news)
    tau_A = first_best_duration(Player.AGENT, params, news)
    result = FirstBest(
        tau_P=tau_P,
        tau_A=tau_A,
        value_P=first_best_payoff(Player.PRINCIPAL, tau_P, params, news),
        value_A=first_best_payoff(Player.AGENT, tau_A, params, news),
    )
    logger.info(f"Primer mejor: tau_P={tau_P:.6g}, tau_A={tau_A:.6g}")
    return result
