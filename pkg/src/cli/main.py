"""
Punto de entrada de línea de comandos del laboratorio
"""

import argparse
import asyncio
import logging
import sys
from typing import Any, Dict, List, Optional

from core.config import OUTPUT_FORMATS, RunConfig, load_run_config, settings
from core.exceptions import (
    ConfigError,
    DomainError,
    FakeSearchError,
    InconsistencyError,
    RegimeError,
    ToleranceError,
    VerificationError,
)
from core.orchestrator import SWEEP_PARAMS, RunOrchestrator
from core.results import ResultStore

logger = logging.getLogger(__name__)

EXIT_CODES: Dict[str, int] = {
    ConfigError.error_type: ConfigError.exit_code,
    DomainError.error_type: DomainError.exit_code,
    RegimeError.error_type: RegimeError.exit_code,
    InconsistencyError.error_type: InconsistencyError.exit_code,
    ToleranceError.error_type: ToleranceError.exit_code,
    VerificationError.error_type: VerificationError.exit_code,
}

COMMANDS = ("validate", "first-best", "solve", "verify", "remedies", "sweep", "statics")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fakesearch",
        description="Solver y laboratorio de verificación para búsqueda con noticias falsas",
    )
    parser.add_argument("--config", help=f"archivo KEY=VALUE (por defecto ${settings.CONFIG_ENV_VAR})")
    parser.add_argument("--out", help=f"directorio de salida (por defecto {settings.OUTPUT_DIR})")
    parser.add_argument("--format", choices=OUTPUT_FORMATS, help="formato de salida")
    parser.add_argument("--seed", type=int, help="semilla de Monte Carlo (entero sin signo de 64 bits)")
    parser.add_argument("--threads", type=int, default=1, help="hilos para simulación, barridos y remedios")
    parser.add_argument("--quiet", action="store_true", help="solo advertencias y errores")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", help="reporte de supuestos y umbrales")
    sub.add_parser("first-best", help="duraciones y pagos de primer mejor")
    sub.add_parser("solve", help="equilibrio, estrategias y creencias")
    verify = sub.add_parser("verify", help="certificación analítica y Monte Carlo")
    verify.add_argument("--draws", type=int, help="tamaño de la simulación (0 = solo analítica)")
    sub.add_parser("remedies", help="búsqueda ingenua, delegación al agente y al intermediario")
    sweep = sub.add_parser("sweep", help="barrido de un parámetro")
    sweep.add_argument("param", choices=SWEEP_PARAMS)
    sweep.add_argument("start", type=float)
    sweep.add_argument("stop", type=float)
    sweep.add_argument("steps", type=int)
    sub.add_parser("statics", help="estática comparativa")
    return parser


def configure_logging(quiet: bool) -> None:
    level = logging.WARNING if quiet else getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def resolve_config(args: argparse.Namespace) -> RunConfig:
    config = load_run_config(args.config)
    overrides: Dict[str, Any] = {}
    if args.seed is not None:
        if args.seed < 0 or args.seed >= 2**64:
            raise ConfigError(f"La semilla debe ser un entero sin signo de 64 bits: {args.seed}", field="--seed")
        overrides["mc_seed"] = args.seed
    if args.format:
        overrides["output_format"] = args.format
    return config.with_overrides(**overrides) if overrides else config


async def dispatch(orchestrator: RunOrchestrator, args: argparse.Namespace, config: RunConfig) -> Dict[str, Any]:
    if args.command == "validate":
        return await orchestrator.validate(config)
    if args.command == "first-best":
        return await orchestrator.first_best(config)
    if args.command == "solve":
        return await orchestrator.solve(config)
    if args.command == "verify":
        return await orchestrator.verify(config, n=args.draws)
    if args.command == "remedies":
        return await orchestrator.remedies(config)
    if args.command == "sweep":
        return await orchestrator.sweep(config, args.param, args.start, args.stop, args.steps)
    return await orchestrator.statics(config)


def exit_code_for(result: Dict[str, Any]) -> int:
    if result.get("success"):
        return 0
    return EXIT_CODES.get(result.get("error_type", ""), 1)


def persist(result: Dict[str, Any], config: RunConfig, out_dir: Optional[str]) -> ResultStore:
    store = ResultStore(out_dir, config.output_format)
    document = {key: value for key, value in result.items() if key != "tables"}
    store.write_document(result["command"], config.to_dict(), document)
    for name, frame in result.get("tables", {}).items():
        store.write_table(name, frame)
    return store


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.quiet)

    try:
        config = resolve_config(args)
    except FakeSearchError as e:
        logger.error(f"Configuración inválida: {e}")
        if not args.quiet:
            print(f"❌ {e}")
        return e.exit_code

    orchestrator = RunOrchestrator(threads=args.threads)
    result = asyncio.run(dispatch(orchestrator, args, config))
    store = persist(result, config, args.out)
    code = exit_code_for(result)

    if not args.quiet:
        if code == 0:
            print(f"✅ {args.command} completado")
        else:
            print(f"❌ {args.command}: {result.get('error')}")
        for path in store.written:
            print(f"   {path}")
    return code


if __name__ == "__main__":
    sys.exit(main())
