"""
Configuración y settings del laboratorio de búsqueda con noticias falsas
"""

import math
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple

from dotenv import dotenv_values, load_dotenv

from .exceptions import ConfigError

# Cargar variables de entorno
load_dotenv()

# Directorios base
BASE_DIR = Path(__file__).parent.parent.parent
DATA_DIR = BASE_DIR / "data"
RESULTS_DIR = DATA_DIR / "results"


class Settings:
    """Configuración global del sistema"""

    # Cuadratura adaptativa
    QUAD_EPSREL: float = float(os.getenv("QUAD_EPSREL", "1e-9"))
    QUAD_EPSABS: float = float(os.getenv("QUAD_EPSABS", "1e-12"))
    QUAD_LIMIT: int = int(os.getenv("QUAD_LIMIT", "200"))
    QUAD_FAIL_ABS: float = float(os.getenv("QUAD_FAIL_ABS", "1e-7"))

    # Raíces y horizonte
    ROOT_XTOL: float = float(os.getenv("ROOT_XTOL", "1e-10"))
    HORIZON_MULTIPLIER: float = float(os.getenv("HORIZON_MULTIPLIER", "100"))

    # Verificación
    ANALYTIC_TOL: float = float(os.getenv("ANALYTIC_TOL", "1e-5"))
    NONBENEFICIAL_TOL: float = float(os.getenv("NONBENEFICIAL_TOL", "1e-6"))
    MC_SIGMA_BAND: float = float(os.getenv("MC_SIGMA_BAND", "3"))
    MC_CHUNK_SIZE: int = int(os.getenv("MC_CHUNK_SIZE", "100000"))
    SAMPLING_GRID: int = int(os.getenv("SAMPLING_GRID", "4097"))
    TIE_ACTION: float = float(os.getenv("TIE_ACTION", "0.5"))

    # Salidas
    SIGNIFICANT_DIGITS: int = int(os.getenv("SIGNIFICANT_DIGITS", "12"))
    SCHEMA_VERSION: str = os.getenv("SCHEMA_VERSION", "1.0")
    OUTPUT_DIR: str = os.getenv("OUTPUT_DIR", str(RESULTS_DIR))
    CONFIG_ENV_VAR: str = "FAKESEARCH_CONFIG"

    # Logging
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")

    @classmethod
    def default_config_path(cls) -> Optional[str]:
        """Ruta de configuración por defecto tomada del entorno"""
        return os.getenv(cls.CONFIG_ENV_VAR)

    @classmethod
    def ensure_output_dir(cls, out_dir: Optional[str] = None) -> Path:
        """Crear el directorio de salida si no existe"""
        directory = Path(out_dir or cls.OUTPUT_DIR)
        directory.mkdir(parents=True, exist_ok=True)
        return directory


# Instancia global de configuración.
settings = Settings()


HAZARD_FAMILIES = ("hyperbolic", "exponential_bandit", "tabulated")
OUTPUT_FORMATS = ("json", "csv", "both")

# Clave del archivo -> (campo de RunConfig, tipo)
_KEYS: Dict[str, Tuple[str, type]] = {
    "MU": ("mu", float),
    "THETA": ("theta", float),
    "BETA": ("beta", float),
    "RHO": ("rho", float),
    "SIGMA": ("sigma", float),
    "HAZARD_FAMILY": ("hazard_family", str),
    "HAZARD_A": ("hazard_a", float),
    "HAZARD_B": ("hazard_b", float),
    "HAZARD_Q": ("hazard_q", float),
    "HAZARD_LAMBDA": ("hazard_lambda", float),
    "HAZARD_KNOTS": ("hazard_knots", tuple),
    "HAZARD_VALUES": ("hazard_values", tuple),
    "GRID_POINTS": ("grid_points", int),
    "HORIZON_FACTOR": ("horizon_factor", float),
    "MC_DRAWS": ("mc_draws", int),
    "MC_SEED": ("mc_seed", int),
    "MC_BINS": ("mc_bins", int),
    "ANALYTIC_TOL": ("analytic_tol", float),
    "OUTPUT_FORMAT": ("output_format", str),
}


@dataclass(frozen=True)
class RunConfig:
    """Configuración completa de una corrida: modelo, hazard, grillas, Monte Carlo y salida"""

    mu: float = 0.5
    theta: float = 0.7
    beta: float = 0.4
    rho: float = 0.1
    sigma: float = 0.1
    hazard_family: str = "hyperbolic"
    hazard_a: float = 1.0
    hazard_b: float = 1.0
    hazard_q: float = 0.9
    hazard_lambda: float = 1.0
    hazard_knots: Tuple[float, ...] = field(default_factory=tuple)
    hazard_values: Tuple[float, ...] = field(default_factory=tuple)
    grid_points: int = 200
    horizon_factor: float = 3.0
    mc_draws: int = 1_000_000
    mc_seed: int = 20240611
    mc_bins: int = 10
    analytic_tol: float = settings.ANALYTIC_TOL
    output_format: str = "both"

    def __post_init__(self):
        if self.hazard_family not in HAZARD_FAMILIES:
            raise ConfigError(
                f"Familia de hazard no soportada: {self.hazard_family}",
                field="HAZARD_FAMILY",
            )
        if self.output_format not in OUTPUT_FORMATS:
            raise ConfigError(
                f"Formato de salida no soportado: {self.output_format}",
                field="OUTPUT_FORMAT",
            )
        if self.hazard_family == "tabulated" and (
            len(self.hazard_knots) < 2
            or len(self.hazard_knots) != len(self.hazard_values)
        ):
            raise ConfigError(
                "HAZARD_KNOTS y HAZARD_VALUES deben tener el mismo largo (>= 2)",
                field="HAZARD_KNOTS",
            )
        for name in ("grid_points", "mc_draws", "mc_bins"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} debe ser >= 1", field=name.upper())

    @classmethod
    def from_mapping(cls, values: Mapping[str, Optional[str]]) -> "RunConfig":
        """Construir desde un mapa KEY -> texto (formato .env)"""
        kwargs: Dict[str, Any] = {}
        for key, raw in values.items():
            key_upper = key.strip().upper()
            if key_upper not in _KEYS:
                raise ConfigError(f"Clave de configuración desconocida: {key}", field=key)
            if raw is None or raw.strip() == "":
                continue
            name, kind = _KEYS[key_upper]
            kwargs[name] = _parse_value(key_upper, raw.strip(), kind)
        return cls(**kwargs)

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        """Parsear el texto clave-valor con python-dotenv"""
        from io import StringIO

        return cls.from_mapping(dotenv_values(stream=StringIO(text)))

    @classmethod
    def from_file(cls, path: str) -> "RunConfig":
        """Cargar configuración desde archivo"""
        config_path = Path(path)
        if not config_path.is_file():
            raise ConfigError(f"Archivo de configuración no encontrado: {path}", field="--config")
        return cls.from_mapping(dotenv_values(config_path))

    def to_text(self) -> str:
        """Serializar al mismo formato KEY=VALUE"""
        lines = []
        for key, (name, kind) in _KEYS.items():
            value = getattr(self, name)
            if kind is tuple:
                text = ",".join(repr(float(v)) for v in value)
            elif kind is float:
                text = repr(float(value))
            else:
                text = str(value)
            lines.append(f"{key}={text}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["hazard_knots"] = list(self.hazard_knots)
        data["hazard_values"] = list(self.hazard_values)
        return data

    def with_overrides(self, **changes: Any) -> "RunConfig":
        """Copia con campos modificados (p. ej. --seed o un punto de barrido)"""
        known = {f.name for f in fields(self)}
        unknown = set(changes) - known
        if unknown:
            raise ConfigError(f"Campos desconocidos: {sorted(unknown)}", field=sorted(unknown)[0])
        return replace(self, **changes)

    def hazard_spec(self) -> Dict[str, Any]:
        """Especificación del proceso de noticias para news.build_news_process"""
        if self.hazard_family == "hyperbolic":
            return {"family": "hyperbolic", "a": self.hazard_a, "b": self.hazard_b}
        if self.hazard_family == "exponential_bandit":
            return {
                "family": "exponential_bandit",
                "q": self.hazard_q,
                "lam": self.hazard_lambda,
            }
        return {
            "family": "tabulated",
            "knots": list(self.hazard_knots),
            "values": list(self.hazard_values),
        }


def _parse_value(key: str, raw: str, kind: type) -> Any:
    try:
        if kind is tuple:
            values = tuple(float(item) for item in raw.split(",") if item.strip())
            if not all(math.isfinite(v) for v in values):
                raise ValueError("valor no finito")
            return values
        if kind is int:
            return int(float(raw)) if "e" in raw.lower() else int(raw)
        if kind is float:
            value = float(raw)
            if not math.isfinite(value):
                raise ValueError("valor no finito")
            return value
        return raw
    except ValueError as e:
        raise ConfigError(f"Valor inválido para {key}: {raw!r} ({e})", field=key) from e


def load_run_config(path: Optional[str] = None) -> RunConfig:
    """Cargar la configuración desde ruta explícita, variable de entorno o defaults"""
    config_path = path or settings.default_config_path()
    if config_path:
        return RunConfig.from_file(config_path)
    return RunConfig()
