"""
Procesos de noticias reales con hazard estrictamente decreciente
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple, Type

import numpy as np

from .exceptions import ConfigError, DomainError

logger = logging.getLogger(__name__)

# Tiempo "nunca": un valor distinguido, no un flotante grande
NEVER = math.inf


def _check_time(t: float) -> None:
    if t < 0 or math.isnan(t):
        raise DomainError(f"El tiempo debe ser >= 0, recibido {t}")


class NewsProcess(ABC):
    """Clase base para leyes de llegada de noticias reales"""

    family: str = "base"

    @abstractmethod
    def hazard(self, t: float) -> float:
        """Hazard H_R(t) > 0"""

    @abstractmethod
    def cumulative_hazard(self, t: float) -> float:
        """Integral de H_R en [0, t]"""

    @abstractmethod
    def limit_cumulative_hazard(self) -> float:
        """Límite de la integral del hazard cuando t -> infinito (puede ser infinito)"""

    @abstractmethod
    def _inverse_cumulative(self, levels: np.ndarray) -> np.ndarray:
        """Tiempos t con cumulative_hazard(t) = levels (levels por debajo del límite)"""

    @abstractmethod
    def describe(self) -> Dict[str, Any]:
        """Parámetros de la familia para el documento de resultados"""

    def inverse_hazard(self, level: float) -> Optional[float]:
        """Solución cerrada de H_R(t) = level, o None si la familia no la tiene"""
        return None

    def log_hazard(self, t: float) -> float:
        """log H_R(t), finito aunque el hazard haga underflow a 0"""
        return math.log(self.hazard(t))

    def hazard_derivative(self, t: float) -> float:
        """Derivada del hazard por diferencias centradas"""
        _check_time(t)
        step = 1e-5 * max(1.0, t)
        if t < step:
            return (self.hazard(t + step) - self.hazard(t)) / step
        return (self.hazard(t + step) - self.hazard(t - step)) / (2 * step)

    def survival(self, t: float) -> float:
        """Probabilidad de que no haya llegado noticia real hasta t"""
        _check_time(t)
        if t == NEVER:
            return self.limit_survival()
        return math.exp(-self.cumulative_hazard(t))

    def cdf(self, t: float) -> float:
        """G(t) = 1 - survival(t)"""
        return 1.0 - self.survival(t)

    def density(self, t: float) -> float:
        """g(t) = H_R(t) * survival(t)"""
        _check_time(t)
        if t == NEVER:
            return 0.0
        return self.hazard(t) * self.survival(t)

    def limit_survival(self) -> float:
        """Masa de "nunca llega" (distribuciones defectuosas)"""
        return math.exp(-self.limit_cumulative_hazard())

    def inverse_survival(self, u: float) -> float:
        """Tiempo t con survival(t) = u; NEVER si u cae bajo el límite"""
        return float(self._invert(np.array([u], dtype=float))[0])

    def sample_arrival(self, rng: np.random.Generator) -> float:
        """Un tiempo de llegada (o NEVER) por inversión de la sobrevivencia"""
        return self.inverse_survival(float(rng.random()))

    def sample_arrivals(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Vector de tiempos de llegada, NEVER donde la noticia nunca llega"""
        return self._invert(rng.random(size))

    def _invert(self, u: np.ndarray) -> np.ndarray:
        out = np.full(u.shape, NEVER)
        with np.errstate(divide="ignore"):
            levels = -np.log(u)
        arrives = (u > self.limit_survival()) & (u > 0)
        out[arrives] = self._inverse_cumulative(levels[arrives])
        out[u >= 1.0] = 0.0
        return out


@dataclass(frozen=True)
class HyperbolicNews(NewsProcess):
    """H_R(t) = a / (1 + b t), sobrevivencia (1 + b t)^(-a/b)"""

    a: float = 1.0
    b: float = 1.0
    family: str = field(default="hyperbolic", init=False)

    def __post_init__(self):
        for name in ("a", "b"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise ConfigError(f"{name} debe ser finito y > 0, recibido {value}", field=f"HAZARD_{name.upper()}")

    def hazard(self, t: float) -> float:
        _check_time(t)
        return self.a / (1.0 + self.b * t)

    def cumulative_hazard(self, t: float) -> float:
        _check_time(t)
        return self.a / self.b * math.log1p(self.b * t)

    def log_hazard(self, t: float) -> float:
        _check_time(t)
        return math.log(self.a) - math.log1p(self.b * t)

    def limit_cumulative_hazard(self) -> float:
        return math.inf

    def _inverse_cumulative(self, levels: np.ndarray) -> np.ndarray:
        return np.expm1(self.b * levels / self.a) / self.b

    def inverse_hazard(self, level: float) -> Optional[float]:
        if level <= 0:
            return NEVER
        return (self.a / level - 1.0) / self.b

    def hazard_derivative(self, t: float) -> float:
        _check_time(t)
        return -self.a * self.b / (1.0 + self.b * t) ** 2

    def describe(self) -> Dict[str, Any]:
        return {"family": self.family, "a": self.a, "b": self.b}


@dataclass(frozen=True)
class ExponentialBanditNews(NewsProcess):
    """Con probabilidad q la noticia existe y llega a tasa lam; si no, nunca llega"""

    q: float = 0.9
    lam: float = 1.0
    family: str = field(default="exponential_bandit", init=False)

    def __post_init__(self):
        if not (0.0 < self.q < 1.0):
            raise ConfigError(f"q debe estar en (0, 1), recibido {self.q}", field="HAZARD_Q")
        if not math.isfinite(self.lam) or self.lam <= 0:
            raise ConfigError(f"lam debe ser > 0, recibido {self.lam}", field="HAZARD_LAMBDA")

    def _survival_raw(self, t: float) -> float:
        return 1.0 - self.q + self.q * math.exp(-self.lam * t)

    def hazard(self, t: float) -> float:
        _check_time(t)
        x = math.exp(-self.lam * t)
        return self.q * self.lam * x / (1.0 - self.q + self.q * x)

    def cumulative_hazard(self, t: float) -> float:
        _check_time(t)
        return -math.log(self._survival_raw(t))

    def log_hazard(self, t: float) -> float:
        _check_time(t)
        return math.log(self.q * self.lam) - self.lam * t - math.log(self._survival_raw(t))

    def limit_cumulative_hazard(self) -> float:
        return -math.log(1.0 - self.q)

    def _inverse_cumulative(self, levels: np.ndarray) -> np.ndarray:
        x = (np.exp(-levels) - 1.0 + self.q) / self.q
        return -np.log(x) / self.lam

    def inverse_hazard(self, level: float) -> Optional[float]:
        if level <= 0:
            return NEVER
        if level >= self.lam:
            return 0.0
        x = level * (1.0 - self.q) / (self.q * (self.lam - level))
        if x >= 1.0:
            return 0.0
        return -math.log(x) / self.lam

    def hazard_derivative(self, t: float) -> float:
        _check_time(t)
        x = math.exp(-self.lam * t)
        s = 1.0 - self.q + self.q * x
        return -self.q * self.lam**2 * x * (1.0 - self.q) / s**2

    def describe(self) -> Dict[str, Any]:
        return {"family": self.family, "q": self.q, "lam": self.lam}


@dataclass(frozen=True)
class TabulatedNews(NewsProcess):
    """Hazard tabulado en nodos, interpolado log-linealmente entre ellos

    Más allá del último nodo se continúa la última pendiente logarítmica, de modo que el
    hazard sigue estrictamente decreciente y la ley es defectuosa.
    """

    knots: Tuple[float, ...] = ()
    values: Tuple[float, ...] = ()
    family: str = field(default="tabulated", init=False)

    def __post_init__(self):
        knots = np.asarray(self.knots, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if knots.size < 2 or knots.size != values.size:
            raise ConfigError("Se requieren >= 2 nodos y valores del mismo largo", field="HAZARD_KNOTS")
        if not (np.all(np.isfinite(knots)) and np.all(np.isfinite(values))):
            raise ConfigError("Nodos y valores deben ser finitos", field="HAZARD_VALUES")
        if knots[0] != 0.0 or np.any(np.diff(knots) <= 0):
            raise ConfigError("Los nodos deben empezar en 0 y ser crecientes", field="HAZARD_KNOTS")
        if np.any(values <= 0) or np.any(np.diff(values) >= 0):
            raise ConfigError("Los valores deben ser positivos y estrictamente decrecientes", field="HAZARD_VALUES")

        slopes = np.diff(np.log(values)) / np.diff(knots)
        increments = values[:-1] * np.expm1(slopes * np.diff(knots)) / slopes
        cumulative = np.concatenate([[0.0], np.cumsum(increments)])
        object.__setattr__(self, "_t", knots)
        object.__setattr__(self, "_h", values)
        object.__setattr__(self, "_k", np.append(slopes, slopes[-1]))
        object.__setattr__(self, "_cum", cumulative)

    def _segment(self, t: float) -> int:
        return int(np.searchsorted(self._t, t, side="right")) - 1

    def hazard(self, t: float) -> float:
        _check_time(t)
        i = self._segment(t)
        return float(self._h[i] * math.exp(self._k[i] * (t - self._t[i])))

    def log_hazard(self, t: float) -> float:
        _check_time(t)
        i = self._segment(t)
        return float(math.log(self._h[i]) + self._k[i] * (t - self._t[i]))

    def cumulative_hazard(self, t: float) -> float:
        _check_time(t)
        i = self._segment(t)
        k = self._k[i]
        return float(self._cum[i] + self._h[i] * math.expm1(k * (t - self._t[i])) / k)

    def limit_cumulative_hazard(self) -> float:
        return float(self._cum[-1] + self._h[-1] / -self._k[-1])

    def _inverse_cumulative(self, levels: np.ndarray) -> np.ndarray:
        i = np.searchsorted(self._cum, levels, side="right") - 1
        k = self._k[i]
        return self._t[i] + np.log1p(k * (levels - self._cum[i]) / self._h[i]) / k

    def describe(self) -> Dict[str, Any]:
        return {"family": self.family, "knots": list(self.knots), "values": list(self.values)}


NEWS_FAMILIES: Dict[str, Type[NewsProcess]] = {
    "hyperbolic": HyperbolicNews,
    "exponential_bandit": ExponentialBanditNews,
    "tabulated": TabulatedNews,
}


def build_news_process(spec: Dict[str, Any]) -> NewsProcess:
    """Construir el proceso de noticias a partir de su especificación"""
    params = dict(spec)
    family = params.pop("family", "hyperbolic")
    if family not in NEWS_FAMILIES:
        raise ConfigError(f"Familia de hazard no soportada: {family}", field="HAZARD_FAMILY")

    if family == "tabulated":
        params = {
            "knots": tuple(params.get("knots", ())),
            "values": tuple(params.get("values", ())),
        }
    news = NEWS_FAMILIES[family](**params)
    logger.info(f"Proceso de noticias construido: {news.describe()}")
    return news
