"""
Estrategias mixtas sobre [0, infinito]: parte continua, átomos y masa en "nunca"
"""

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, List, Optional, Tuple

import numpy as np

from .config import settings
from .exceptions import DomainError, InconsistencyError
from .news import NEVER

logger = logging.getLogger(__name__)

MASS_TOL = 1e-9


def _zero(t: float) -> float:
    return 0.0


@dataclass(frozen=True)
class MixedStrategy:
    """CDF en [0, infinito] como parte absolutamente continua + átomos + masa residual en infinito

    ``continuous_cdf`` es la masa continua acumulada F*(t) (constante fuera de ``support``) y
    ``density`` su derivada f*(t). La CDF completa es continua por la derecha: un átomo en t
    se incluye en cdf(t).
    """

    continuous_cdf: Callable[[float], float] = _zero
    density: Callable[[float], float] = _zero
    support: Tuple[float, float] = (0.0, 0.0)
    atoms: Tuple[Tuple[float, float], ...] = ()
    never_mass: float = 0.0
    label: str = "mixed"

    def __post_init__(self):
        lo, hi = self.support
        if lo < 0 or hi < lo:
            raise DomainError(f"Soporte inválido: {self.support}")
        for time, mass in self.atoms:
            if time < 0 or not math.isfinite(time):
                raise DomainError(f"Átomo en tiempo inválido: {time}")
            if mass < -MASS_TOL:
                raise InconsistencyError(f"Masa negativa en átomo t={time}: {mass}")
        if self.never_mass < -MASS_TOL:
            raise InconsistencyError(f"Masa en nunca negativa: {self.never_mass}")
        total = self.continuous_mass + sum(mass for _, mass in self.atoms) + self.never_mass
        if abs(total - 1.0) > MASS_TOL:
            raise InconsistencyError(f"La masa total de '{self.label}' es {total:.12g}, no 1")

    @cached_property
    def continuous_mass(self) -> float:
        lo, hi = self.support
        if hi <= lo:
            return 0.0
        return float(self.continuous_cdf(hi))

    @property
    def atom_times(self) -> List[float]:
        return [time for time, _ in self.atoms]

    def _continuous(self, t: float) -> float:
        lo, hi = self.support
        if t < lo or hi <= lo:
            return 0.0
        return float(self.continuous_cdf(min(t, hi)))

    def cdf(self, t: float) -> float:
        """F(t) incluyendo átomos en t; F(NEVER) = 1"""
        if t < 0:
            raise DomainError(f"El tiempo debe ser >= 0, recibido {t}")
        if t == NEVER:
            return 1.0
        return self._continuous(t) + sum(mass for time, mass in self.atoms if time <= t)

    def cdf_left(self, t: float) -> float:
        """F(t-), excluye un átomo ubicado en t"""
        if t < 0:
            raise DomainError(f"El tiempo debe ser >= 0, recibido {t}")
        if t == NEVER:
            return 1.0 - self.never_mass
        return self._continuous(t) + sum(mass for time, mass in self.atoms if time < t)

    def pdf(self, t: float) -> float:
        """Densidad de la parte continua (cero fuera del soporte)"""
        lo, hi = self.support
        if t < lo or t > hi or hi <= lo:
            return 0.0
        return float(self.density(t))

    def atom_mass(self, t: float) -> float:
        return sum(mass for time, mass in self.atoms if time == t)

    def breakpoints(self) -> List[float]:
        """Extremos del soporte y átomos, donde se parten las integrales"""
        points = set(self.atom_times)
        if self.support[1] > self.support[0]:
            points.update(self.support)
        return sorted(p for p in points if math.isfinite(p))

    @cached_property
    def _sampling_table(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        lo, hi = self.support
        times = set(self.atom_times)
        if hi > lo:
            if not math.isfinite(hi):
                raise DomainError("El muestreo requiere soporte continuo acotado")
            times.update(np.linspace(lo, hi, settings.SAMPLING_GRID).tolist())
        if not times:
            times = {0.0}
        grid = np.array(sorted(times))
        upper = np.array([self.cdf(t) for t in grid])
        lower = np.array([self.cdf_left(t) for t in grid])
        return grid, upper, lower

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Muestreo por inversa de la CDF sobre una grilla; NEVER cuando u supera la masa finita"""
        u = rng.random(size)
        grid, upper, lower = self._sampling_table
        out = np.empty(size)

        idx = np.minimum(np.searchsorted(upper, u, side="left"), grid.size - 1)
        at_atom = u > lower[idx]
        out[at_atom] = grid[idx[at_atom]]

        inner = ~at_atom & (idx > 0)
        i = idx[inner]
        c0 = upper[i - 1]
        span = lower[i] - c0
        frac = np.where(span > 0, (u[inner] - c0) / np.where(span > 0, span, 1.0), 1.0)
        out[inner] = grid[i - 1] + np.clip(frac, 0.0, 1.0) * (grid[i] - grid[i - 1])
        out[~at_atom & (idx == 0)] = grid[0]

        if self.never_mass > 0:
            out[u >= 1.0 - self.never_mass] = NEVER
        return out

    def describe(self) -> dict:
        return {
            "label": self.label,
            "support": list(self.support),
            "continuous_mass": self.continuous_mass,
            "atoms": [list(atom) for atom in self.atoms],
            "never_mass": self.never_mass,
        }


def point_mass(t: float, label: str = "point_mass") -> MixedStrategy:
    """Unidad de masa en t (t = NEVER equivale a never())"""
    if t == NEVER:
        return never(label)
    return MixedStrategy(atoms=((t, 1.0),), label=label)


def never(label: str = "never") -> MixedStrategy:
    return MixedStrategy(never_mass=1.0, label=label)


def uniform(lo: float, hi: float, mass: float = 1.0, atoms: Iterable[Tuple[float, float]] = (),
            label: str = "uniform") -> MixedStrategy:
    """Masa ``mass`` uniforme en [lo, hi] más átomos opcionales; el resto queda en NEVER"""
    if hi <= lo:
        raise DomainError(f"Intervalo vacío: [{lo}, {hi}]")
    atoms = tuple((float(t), float(m)) for t, m in atoms)
    rate = mass / (hi - lo)
    return MixedStrategy(
        continuous_cdf=lambda t: rate * (t - lo),
        density=lambda t: rate,
        support=(lo, hi),
        atoms=atoms,
        never_mass=1.0 - mass - sum(m for _, m in atoms),
        label=label,
    )


def continuous(
    cdf: Callable[[float], float],
    density: Callable[[float], float],
    support: Tuple[float, float],
    atoms: Iterable[Tuple[float, float]] = (),
    never_mass: Optional[float] = None,
    label: str = "continuous",
) -> MixedStrategy:
    """Estrategia desde una CDF continua; si ``never_mass`` es None se completa la masa a 1"""
    atoms = tuple(atoms)
    if never_mass is None:
        never_mass = 1.0 - float(cdf(support[1])) - sum(m for _, m in atoms)
        if abs(never_mass) <= MASS_TOL:
            never_mass = 0.0
    return MixedStrategy(
        continuous_cdf=cdf,
        density=density,
        support=support,
        atoms=atoms,
        never_mass=never_mass,
        label=label,
    )
