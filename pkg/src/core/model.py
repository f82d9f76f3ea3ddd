"""
Primitivas del modelo, umbrales phi y validación de supuestos A1/A2
"""

import logging
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .config import RunConfig, settings
from .exceptions import ConfigError, DomainError, RegimeError
from .news import NewsProcess, build_news_process

logger = logging.getLogger(__name__)

# Puntos de la grilla de monotonicidad del hazard
MONOTONICITY_GRID = 2001


@dataclass(frozen=True)
class ModelParams:
    """Los cinco primitivos: prior mu, pagos seguros theta y beta, descuento rho y prior sigma del falsificador"""

    mu: float
    theta: float
    beta: float
    rho: float
    sigma: float

    def __post_init__(self):
        for name in ("mu", "theta", "beta", "rho", "sigma"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ConfigError(f"{name} debe ser finito, recibido {value!r}", field=name.upper())
            if name == "sigma":
                if value < 0:
                    raise ConfigError(f"sigma debe ser >= 0, recibido {value}", field="SIGMA")
            elif value <= 0:
                raise ConfigError(f"{name} debe ser > 0, recibido {value}", field=name.upper())

    @classmethod
    def from_config(cls, config: RunConfig) -> "ModelParams":
        return cls(
            mu=config.mu,
            theta=config.theta,
            beta=config.beta,
            rho=config.rho,
            sigma=config.sigma,
        )

    @property
    def phi_P(self) -> float:
        return self.rho * self.theta / (self.mu * (1.0 - self.theta))

    @property
    def phi_A(self) -> float:
        return self.rho * self.mu / (self.beta * (1.0 - self.mu))

    def thresholds(self) -> "PhiThresholds":
        return PhiThresholds(
            phi_P=self.phi_P,
            phi_A=self.phi_A,
            beta_lower=beta_lower_bound(self.mu, self.theta),
        )

    def with_changes(self, **changes: float) -> "ModelParams":
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class PhiThresholds:
    phi_P: float
    phi_A: float
    beta_lower: float

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class ValidationCheck:
    name: str
    passed: bool
    detail: str


@dataclass
class ValidationReport:
    """Resultado de validate(): una verificación por supuesto, más el veredicto global"""

    checks: List[ValidationCheck] = field(default_factory=list)
    thresholds: Optional[PhiThresholds] = None
    horizon: float = math.nan
    hazard_at_zero: float = math.nan
    hazard_at_horizon: float = math.nan

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def reasons(self) -> List[str]:
        return [check.detail for check in self.checks if not check.passed]

    def check(self, name: str) -> ValidationCheck:
        for item in self.checks:
            if item.name == name:
                return item
        raise KeyError(name)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "passed": self.passed,
            "checks": [asdict(check) for check in self.checks],
            "reasons": self.reasons,
            "thresholds": self.thresholds.to_dict() if self.thresholds else None,
            "horizon": self.horizon,
            "hazard_at_zero": self.hazard_at_zero,
            "hazard_at_horizon": self.hazard_at_horizon,
        }


def beta_lower_bound(mu: float, theta: float) -> float:
    """Cota inferior de beta bajo la cual A2 falla: mu (mu/theta) ((1-theta)/(1-mu))"""
    if not (0.0 < mu < theta < 1.0):
        raise DomainError(f"Se requiere 0 < mu < theta < 1, recibido mu={mu}, theta={theta}")
    return mu * (mu / theta) * ((1.0 - theta) / (1.0 - mu))


def working_horizon(params: ModelParams) -> float:
    """Horizonte T_max donde se aproxima H_R(infinito): múltiplo de 1/phi_P"""
    return settings.HORIZON_MULTIPLIER / params.phi_P


def validate(params: ModelParams, news: NewsProcess, horizon: Optional[float] = None) -> ValidationReport:
    """Validar orden de parámetros, A1, A2 y monotonicidad del hazard"""
    report = ValidationReport()

    ordering = 0.0 < params.beta < params.mu < params.theta < 1.0
    report.checks.append(
        ValidationCheck(
            "ordering",
            ordering,
            "0 < beta < mu < theta < 1" if ordering else "ordering 0 < beta < mu < theta < 1 violated",
        )
    )
    sigma_ok = 0.0 <= params.sigma < 1.0
    report.checks.append(
        ValidationCheck("sigma_range", sigma_ok, "0 <= sigma < 1" if sigma_ok else "sigma outside [0, 1)")
    )
    if params.theta >= 1.0 or params.mu >= 1.0:
        logger.warning(f"Parámetros fuera de rango, se omiten A1/A2: {params.to_dict()}")
        return report

    thresholds = PhiThresholds(
        phi_P=params.phi_P,
        phi_A=params.phi_A,
        beta_lower=beta_lower_bound(params.mu, params.theta) if params.mu < params.theta else math.nan,
    )
    report.thresholds = thresholds
    report.horizon = horizon if horizon is not None else working_horizon(params)
    report.hazard_at_zero = news.hazard(0.0)
    report.hazard_at_horizon = news.hazard(report.horizon)

    a1 = report.hazard_at_zero > thresholds.phi_P > report.hazard_at_horizon
    report.checks.append(
        ValidationCheck(
            "A1",
            a1,
            "H_R(0) > phi_P > H_R(T_max)" if a1 else (
                f"A1 violated: H_R(0)={report.hazard_at_zero:.6g}, phi_P={thresholds.phi_P:.6g}, "
                f"H_R(T_max)={report.hazard_at_horizon:.6g}"
            ),
        )
    )

    a2 = thresholds.phi_P > thresholds.phi_A
    report.checks.append(ValidationCheck("A2", a2, "phi_P > phi_A" if a2 else "phi_A >= phi_P"))

    grid = np.linspace(0.0, report.horizon, MONOTONICITY_GRID)
    # Escala logarítmica: el hazard de una cola empinada llega a 0.0 antes de T_max
    log_hazards = np.array([news.log_hazard(t) for t in grid])
    monotone = bool(np.all(np.isfinite(log_hazards)) and np.all(np.diff(log_hazards) < 0))
    report.checks.append(
        ValidationCheck(
            "hazard_monotone",
            monotone,
            "hazard strictly decreasing and positive" if monotone else "hazard not strictly decreasing on [0, T_max]",
        )
    )

    if report.passed:
        logger.info(f"Validación exitosa: phi_P={thresholds.phi_P:.6g}, phi_A={thresholds.phi_A:.6g}")
    else:
        logger.warning(f"Validación fallida: {report.reasons}")
    return report


def require_valid(params: ModelParams, news: NewsProcess) -> ValidationReport:
    """Validar y lanzar error si algún supuesto falla"""
    report = validate(params, news)
    if not report.passed:
        failed = {check.name for check in report.checks if not check.passed}
        message = "; ".join(report.reasons)
        if failed & {"ordering", "sigma_range"}:
            raise ConfigError(message, field=sorted(failed)[0])
        raise RegimeError(message)
    return report


def model_from_config(config: RunConfig) -> Tuple[ModelParams, NewsProcess]:
    """Construir parámetros y proceso de noticias desde una RunConfig"""
    return ModelParams.from_config(config), build_news_process(config.hazard_spec())
