"""
Jerarquía de errores del laboratorio y códigos de salida asociados
"""

from typing import Optional


class FakeSearchError(Exception):
    """Error base del sistema"""

    exit_code: int = 1
    error_type: str = "error"


class ConfigError(FakeSearchError, ValueError):
    """Configuración inválida o entradas no finitas"""

    exit_code = 2
    error_type = "config"

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message)
        self.field = field


class DomainError(FakeSearchError, ValueError):
    """Argumento fuera del dominio de la función (p. ej. tiempo negativo)"""

    exit_code = 2
    error_type = "domain"


class RegimeError(FakeSearchError):
    """Supuestos A1/A2 violados o régimen de equilibrio equivocado"""

    exit_code = 3
    error_type = "regime"


class InconsistencyError(FakeSearchError):
    """Hazard y raíz inconsistentes, denominadores no positivos"""

    exit_code = 4
    error_type = "inconsistency"


class ToleranceError(FakeSearchError):
    """La cuadratura no alcanzó la tolerancia pedida"""

    exit_code = 4
    error_type = "tolerance"

    def __init__(self, message: str, estimate: float = float("nan"), abserr: float = float("nan")):
        super().__init__(message)
        self.estimate = estimate
        self.abserr = abserr


class VerificationError(FakeSearchError):
    """La certificación del equilibrio falló"""

    exit_code = 5
    error_type = "verification"
