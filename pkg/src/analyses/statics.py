"""
Estática comparativa de los plazos de equilibrio
Derivadas cerradas, diferencias finitas del solver y desplazamientos FOSD
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from core.equilibrium import (
    Equilibrium,
    Regime,
    agent_hazard_rate,
    build_equilibrium,
    solve_tau_M,
)
from core.exceptions import FakeSearchError, RegimeError
from core.first_best import Player, first_best_duration
from core.model import ModelParams
from core.news import NewsProcess
from core.quadrature import quad

logger = logging.getLogger(__name__)

FD_STEP = 1e-4
FD_RTOL = 1e-3
FOSD_TOL = 1e-10
FOSD_POINTS = 400


@dataclass
class FosdVerdict:
    param: str
    delta: float
    holds: Optional[bool]
    regime_change: bool
    max_violation: float
    max_shift_A: float
    max_shift_P: float
    tau_P_base: float
    tau_P_shifted: float
    note: str = ""


@dataclass
class SensitivityReport:
    dtauM_dsigma: float
    dtauM_dtheta: float
    dtauP_dtheta: float
    fd_dtauM_dsigma: float
    fd_dtauM_dtheta: float
    fd_dtauP_dtheta: float
    fosd_checks: List[FosdVerdict] = field(default_factory=list)

    @property
    def relative_gaps(self) -> Dict[str, float]:
        return {
            "dtauM_dsigma": relative_gap(self.dtauM_dsigma, self.fd_dtauM_dsigma),
            "dtauM_dtheta": relative_gap(self.dtauM_dtheta, self.fd_dtauM_dtheta),
            "dtauP_dtheta": relative_gap(self.dtauP_dtheta, self.fd_dtauP_dtheta),
        }

    @property
    def signs_ok(self) -> bool:
        return self.dtauM_dsigma < 0 and self.dtauM_dtheta < 0 and self.dtauP_dtheta < 0

    @property
    def passed(self) -> bool:
        fd_ok = all(gap <= FD_RTOL for gap in self.relative_gaps.values())
        fosd_ok = all(v.holds is not False for v in self.fosd_checks)
        return self.signs_ok and fd_ok and fosd_ok

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["relative_gaps"] = self.relative_gaps
        data["signs_ok"] = self.signs_ok
        data["passed"] = self.passed
        return data


def relative_gap(exact: float, approx: float) -> float:
    return abs(exact - approx) / max(abs(exact), 1e-300)


def _beneficial(params: ModelParams, news: NewsProcess) -> Equilibrium:
    eq = build_equilibrium(params, news)
    if eq.regime is not Regime.BENEFICIAL or params.sigma == 0.0:
        raise RegimeError(
            f"Estática comparativa requiere 0 < sigma < sigma_bar (sigma={params.sigma:.6g}, "
            f"sigma_bar={eq.sigma_bar:.6g})"
        )
    return eq


def dtauM_dsigma(params: ModelParams, news: NewsProcess) -> float:
    """-1 / ((1 - sigma) H_A(tau_M))"""
    eq = _beneficial(params, news)
    return -1.0 / ((1.0 - params.sigma) * agent_hazard_rate(eq.tau_M, params, news))


def dtauP_dtheta(params: ModelParams, news: NewsProcess) -> float:
    """rho / (H_R'(tau_P) mu (1 - theta)^2)"""
    eq = _beneficial(params, news)
    slope = news.hazard_derivative(eq.tau_P)
    return params.rho / (slope * params.mu * (1.0 - params.theta) ** 2)


def agent_hazard_theta_slope(s: float, params: ModelParams, news: NewsProcess) -> float:
    """h_A(s) = dH_A(s)/dtheta = -mu(1-mu)/(theta-mu)^2 (H_R(s) - rho/(1-mu))"""
    mu, theta = params.mu, params.theta
    return -mu * (1.0 - mu) / (theta - mu) ** 2 * (news.hazard(s) - params.rho / (1.0 - mu))


def dtauM_dtheta(params: ModelParams, news: NewsProcess) -> float:
    """integral de h_A en [tau_M, tau_P] dividida por H_A(tau_M)"""
    eq = _beneficial(params, news)
    total = quad(lambda s: agent_hazard_theta_slope(s, params, news), eq.tau_M, eq.tau_P)
    return total / agent_hazard_rate(eq.tau_M, params, news)


def _tau_M_at(params: ModelParams, news: NewsProcess) -> float:
    return solve_tau_M(params.sigma, params, news)


def finite_difference(name: str, target: str, params: ModelParams, news: NewsProcess, step: float = FD_STEP) -> float:
    """Diferencia centrada de tau_M o tau_P respecto de ``name``"""
    if target == "tau_M":
        solver = _tau_M_at
    elif target == "tau_P":
        def solver(p: ModelParams, n: NewsProcess) -> float:
            return first_best_duration(Player.PRINCIPAL, p, n)
    else:
        raise ValueError(f"Objetivo no soportado: {target}")

    base = getattr(params, name)
    up = solver(params.with_changes(**{name: base + step}), news)
    down = solver(params.with_changes(**{name: base - step}), news)
    return (up - down) / (2.0 * step)


def _merged_grid(base: Equilibrium, shifted: Equilibrium, points: int) -> np.ndarray:
    top = 1.1 * max(base.tau_P, shifted.tau_P)
    knots = [0.0, base.tau_M, base.tau_P, shifted.tau_M, shifted.tau_P, top]
    grid = np.concatenate(
        [
            np.linspace(0.0, top, points),
            np.linspace(base.tau_M, base.tau_P, points),
            np.linspace(shifted.tau_M, shifted.tau_P, points),
            np.array(knots),
        ]
    )
    return np.unique(grid)


def fosd_check(
    param_name: str, delta: float, params: ModelParams, news: NewsProcess, points: int = FOSD_POINTS
) -> FosdVerdict:
    """F_A y F_P con el parámetro aumentado en ``delta`` dominan por arriba a las del caso base"""
    if param_name not in ("sigma", "theta"):
        raise ValueError(f"FOSD solo definido para sigma o theta, recibido {param_name}")

    base = build_equilibrium(params, news)
    try:
        shifted = build_equilibrium(params.with_changes(**{param_name: getattr(params, param_name) + delta}), news)
    except FakeSearchError as e:
        logger.warning(f"FOSD {param_name}+{delta}: el punto desplazado no es válido ({e})")
        return FosdVerdict(param_name, delta, None, True, math.nan, math.nan, math.nan, base.tau_P, math.nan, str(e))

    if base.regime is not Regime.BENEFICIAL or shifted.regime is not Regime.BENEFICIAL:
        logger.warning(f"FOSD {param_name}+{delta}: cambio de régimen, no se evalúa")
        return FosdVerdict(
            param_name, delta, None, True, math.nan, math.nan, math.nan, base.tau_P, shifted.tau_P,
            "regime change across delta",
        )

    grid = _merged_grid(base, shifted, points)
    diff_A = np.array([shifted.faking.cdf(t) - base.faking.cdf(t) for t in grid])
    diff_P = np.array([shifted.stopping.cdf(t) - base.stopping.cdf(t) for t in grid])
    violation = float(max(0.0, -diff_A.min(), -diff_P.min()))
    shift_A, shift_P = float(diff_A.max()), float(diff_P.max())

    if delta == 0.0:
        holds = violation <= FOSD_TOL and max(abs(shift_A), abs(shift_P)) <= FOSD_TOL
    else:
        holds = violation <= FOSD_TOL and shift_A > FOSD_TOL and shift_P > FOSD_TOL
    logger.info(f"FOSD {param_name}+{delta}: {'se cumple' if holds else 'falla'} (violación {violation:.3e})")
    return FosdVerdict(param_name, delta, bool(holds), False, violation, shift_A, shift_P, base.tau_P, shifted.tau_P)


def sensitivity_report(
    params: ModelParams, news: NewsProcess, sigma_delta: float = 0.02, theta_delta: float = 0.02
) -> SensitivityReport:
    report = SensitivityReport(
        dtauM_dsigma=dtauM_dsigma(params, news),
        dtauM_dtheta=dtauM_dtheta(params, news),
        dtauP_dtheta=dtauP_dtheta(params, news),
        fd_dtauM_dsigma=finite_difference("sigma", "tau_M", params, news),
        fd_dtauM_dtheta=finite_difference("theta", "tau_M", params, news),
        fd_dtauP_dtheta=finite_difference("theta", "tau_P", params, news),
        fosd_checks=[
            fosd_check("sigma", sigma_delta, params, news),
            fosd_check("theta", theta_delta, params, news),
        ],
    )
    logger.info(
        f"Estática: dtauM/dsigma={report.dtauM_dsigma:.6g}, dtauM/dtheta={report.dtauM_dtheta:.6g}, "
        f"dtauP/dtheta={report.dtauP_dtheta:.6g}"
    )
    return report
