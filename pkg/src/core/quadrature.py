"""
Cuadratura adaptativa por tramos y búsqueda de raíces con manejo de tolerancias
"""

import logging
import math
import warnings
from typing import Callable, Iterable, List, Optional

from scipy import integrate, optimize

from .config import settings
from .exceptions import RegimeError, ToleranceError

logger = logging.getLogger(__name__)


def quad(
    func: Callable[[float], float],
    a: float,
    b: float,
    epsrel: Optional[float] = None,
) -> float:
    """Integrar func en [a, b] (b puede ser infinito) con scipy.integrate.quad"""
    if b <= a:
        return 0.0
    epsrel = settings.QUAD_EPSREL if epsrel is None else epsrel

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        out = integrate.quad(
            func,
            a,
            b,
            epsabs=settings.QUAD_EPSABS,
            epsrel=epsrel,
            limit=settings.QUAD_LIMIT,
            full_output=1,
        )

    value, abserr = out[0], out[1]
    if len(out) > 3:
        if not math.isfinite(value) or abserr > settings.QUAD_FAIL_ABS:
            raise ToleranceError(
                f"Cuadratura sin convergencia en [{a}, {b}]: {out[3]}",
                estimate=value,
                abserr=abserr,
            )
        logger.debug(f"Aviso de cuadratura dentro de tolerancia en [{a}, {b}]: abserr={abserr:.2e}")
    return value


def piecewise_quad(
    func: Callable[[float], float],
    a: float,
    b: float,
    breakpoints: Iterable[float] = (),
    epsrel: Optional[float] = None,
) -> float:
    """Integrar partiendo el intervalo en los puntos de quiebre dados"""
    if b <= a:
        return 0.0
    cuts = sorted({a, b, *(p for p in breakpoints if a < p < b)})
    return sum(quad(func, lo, hi, epsrel) for lo, hi in zip(cuts[:-1], cuts[1:]))


def bisect_root(
    func: Callable[[float], float],
    lo: float,
    hi: float,
    xtol: Optional[float] = None,
) -> float:
    """Raíz por bisección (scipy.optimize.bisect) en un intervalo con cambio de signo"""
    xtol = settings.ROOT_XTOL if xtol is None else xtol
    f_lo, f_hi = func(lo), func(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if f_lo * f_hi > 0:
        raise RegimeError(f"Sin cambio de signo en [{lo}, {hi}]: f={f_lo:.3e}, {f_hi:.3e}")
    return optimize.bisect(func, lo, hi, xtol=xtol, maxiter=500)


def grow_bracket(
    func: Callable[[float], float],
    start: float,
    limit: float,
    factor: float = 2.0,
) -> List[float]:
    """Crecer geométricamente [0, hi] hasta que func cambie de signo o se supere limit"""
    f0 = func(0.0)
    hi = start
    while hi <= limit:
        if f0 * func(hi) <= 0:
            return [0.0, hi]
        hi *= factor
    if f0 * func(limit) <= 0:
        return [0.0, limit]
    raise RegimeError(f"No se encontró intervalo con cambio de signo antes de T_max={limit:.4g}")
