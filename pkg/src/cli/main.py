import argparse
import sys
from typing import Optional, Sequence

from loguru import logger

from src.cli.handlers import cmd_budget, cmd_coefficients, cmd_simulate, cmd_sweep, cmd_validate
from src.config import settings
from src.errors import CatStateError
from src.model.drive import TransferMode
from src.perturbation.coefficients import COEFFICIENT_EXPONENTS, COEFFICIENT_GEOMETRIES

def _add_output_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", choices=["json", "csv"], default=None)
    parser.add_argument("--out", default=None, help="Write output to this path instead of stdout")

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="catsim", description="Rydberg cat-state preparation toolkit")
    commands = parser.add_subparsers(dest="command", required=True)

    coefficients = commands.add_parser("coefficients", help="Extract an alpha/beta transfer coefficient")
    coefficients.add_argument("--geometry", required=True, choices=[g.value for g in COEFFICIENT_GEOMETRIES])
    coefficients.add_argument("--exponent", required=True, type=int, choices=list(COEFFICIENT_EXPONENTS))
    coefficients.add_argument("--mode", default=TransferMode.RESONANT.value, choices=[m.value for m in TransferMode])
    coefficients.add_argument("--shift-ratio", type=float, default=None)
    coefficients.add_argument("--detuning-ratio", type=float, default=None)
    _add_output_flags(coefficients)
    coefficients.set_defaults(handler=cmd_coefficients)

    budget = commands.add_parser("budget", help="Evaluate the error budget of a scenario")
    budget.add_argument("--config", default=None)
    _add_output_flags(budget)
    budget.set_defaults(handler=cmd_budget)

    sweep = commands.add_parser("sweep", help="Error budget on a log grid of the drive frequency")
    sweep.add_argument("--config", default=None)
    sweep.add_argument("--omega-min", type=float, default=0.05, help="MHz")
    sweep.add_argument("--omega-max", type=float, default=3.0, help="MHz")
    sweep.add_argument("--points", type=int, default=200)
    _add_output_flags(sweep)
    sweep.set_defaults(handler=cmd_sweep)

    simulate = commands.add_parser("simulate", help="Run the three-step protocol on the state vector")
    simulate.add_argument("--config", default=None)
    _add_output_flags(simulate)
    simulate.set_defaults(handler=cmd_simulate)

    validate = commands.add_parser("validate", help="Run the acceptance checks")
    validate.add_argument("--out", default=None)
    validate.set_defaults(handler=cmd_validate)
    return parser

def configure_logging() -> None:
    # stdout carries results only.
    logger.remove()
    logger.add(sys.stderr, level=settings.LOG_LEVEL)

def main(argv: Optional[Sequence[str]] = None) -> int:
    configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    logger.info(f"Running {args.command}")
    try:
        return args.handler(args)
    except CatStateError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code

if __name__ == "__main__":
    sys.exit(main())
