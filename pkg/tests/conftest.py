"""
Fixtures compartidas: configuración canónica y equilibrios ya resueltos
"""

import os
import sys

import pytest

sys.path.append(os.path.join(os.path.dirname(__file__), "..", "src"))

from core.equilibrium import build_equilibrium  # noqa: E402
from core.model import ModelParams  # noqa: E402
from core.news import HyperbolicNews  # noqa: E402

CANONICAL = {"mu": 0.5, "theta": 0.7, "beta": 0.4, "rho": 0.1, "sigma": 0.1}
NEAR_ALIGNED = {"mu": 0.5, "theta": 0.52, "beta": 0.48, "rho": 0.05, "sigma": 0.1}


@pytest.fixture(scope="session")
def params() -> ModelParams:
    return ModelParams(**CANONICAL)


@pytest.fixture(scope="session")
def news() -> HyperbolicNews:
    return HyperbolicNews()


@pytest.fixture(scope="session")
def equilibrium(params, news):
    return build_equilibrium(params, news)


@pytest.fixture(scope="session")
def non_beneficial(params, news):
    return build_equilibrium(params.with_changes(sigma=0.3), news)


@pytest.fixture
def write_config(tmp_path):
    """Escribe un archivo KEY=VALUE y devuelve su ruta"""

    def _write(**values) -> str:
        path = tmp_path / "run.env"
        path.write_text("".join(f"{key}={value}\n" for key, value in values.items()), encoding="utf-8")
        return str(path)

    return _write
