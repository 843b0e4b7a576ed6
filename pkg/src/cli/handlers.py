import argparse
import asyncio
import time
from typing import Optional

from loguru import logger

from src.budget.error_budget import error_budget, sweep_budget
from src.cli.records import SWEEP_COLUMNS, build_record, emit, ensure_finite, render_csv, render_json, render_payload_csv
from src.cli.scenario import OutputFormat, ScenarioConfig, load_scenario
from src.config import settings
from src.dynamics.protocol import run_protocol
from src.errors import ConfigurationError
from src.model.drive import TransferMode
from src.model.lattice import build_lattice
from src.perturbation.coefficients import extract_coefficient, published_coefficient, resonant_closed_form
from src.services.validator import ValidationService

def _output_format(args: argparse.Namespace, config: Optional[ScenarioConfig], default: OutputFormat) -> OutputFormat:
    if getattr(args, "format", None):
        return OutputFormat(args.format)
    if config is not None and config.outputs.format is not None:
        return config.outputs.format
    return default

def _output_path(args: argparse.Namespace, config: Optional[ScenarioConfig]) -> Optional[str]:
    if getattr(args, "out", None):
        return args.out
    return config.outputs.path if config is not None else None

def _emit_record(args, config: Optional[ScenarioConfig], command: str, payload: dict, started: float) -> int:
    echo = config.model_dump(mode="json") if config is not None else None
    record = build_record(command, payload, time.perf_counter() - started, echo)
    if _output_format(args, config, OutputFormat.JSON) is OutputFormat.CSV:
        text = render_payload_csv(record.payload)
    else:
        text = render_json(record)
    emit(text, _output_path(args, config))
    return 0

def _budget_payload(config: ScenarioConfig) -> dict:
    inputs, source = config.budget_inputs()
    budget = error_budget(inputs)
    return {
        "atom_count": inputs.atom_count,
        "mode": inputs.mode.value,
        "drive_mhz": inputs.drive_frequency.cyclic,
        "e_se": budget.e_se,
        "e_bl": budget.e_bl,
        "e_tr": budget.e_tr,
        "total": budget.total,
        "pair_factor": inputs.blockade_pair_factor,
        "pair_factor_reading": "mean of (R/d)^(2 gamma_sp) over atom pairs",
        "coefficient": inputs.coefficient,
        "coefficient_source": source,
    }

def cmd_coefficients(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    result = extract_coefficient(
        args.geometry, args.exponent, args.mode,
        shift_ratio=args.shift_ratio, detuning_ratio=args.detuning_ratio,
    )
    published = published_coefficient(result.geometry, result.exponent, result.mode)
    payload = {
        "geometry": result.geometry.value,
        "exponent": result.exponent,
        "mode": result.mode.value,
        "atom_count": result.atom_count,
        "value": result.value,
        "golden": published is not None,
        "published": published.value if published else None,
        "reproducible": published.reproducible if published else None,
        "relative_deviation": (result.value - published.value) / published.value if published else None,
        "closed_form": None,
    }
    if result.mode is TransferMode.RESONANT:
        payload["closed_form"] = resonant_closed_form(build_lattice(result.geometry, 1.0), result.exponent)
    if published and not published.reproducible:
        logger.warning(
            f"Published value {published.value} for {result.geometry.value}/gamma={result.exponent}/"
            f"{result.mode.value} is not reproduced by the first-order evaluation"
        )
    return _emit_record(args, None, "coefficients", payload, started)

def cmd_budget(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    config = load_scenario(args.config)
    return _emit_record(args, config, "budget", _budget_payload(config), started)

def cmd_sweep(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    config = load_scenario(args.config)
    inputs, source = config.budget_inputs()
    result = sweep_budget(inputs, args.omega_min, args.omega_max, args.points)

    if _output_format(args, config, OutputFormat.CSV) is OutputFormat.CSV:
        ensure_finite([list(row) for row in result.rows], "rows")
        emit(render_csv(SWEEP_COLUMNS, result.rows), _output_path(args, config))
        return 0

    payload = {
        "columns": list(SWEEP_COLUMNS),
        "rows": [list(row) for row in result.rows],
        "minimum": result.minimum._asdict() if result.minimum else None,
        "coefficient": inputs.coefficient,
        "coefficient_source": source,
        "pair_factor": inputs.blockade_pair_factor,
    }
    return _emit_record(args, config, "sweep", payload, started)

def cmd_simulate(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    config = load_scenario(args.config)
    spec = config.protocol_spec()
    if spec.atom_count > settings.MAX_ATOMS:
        raise ConfigurationError(f"simulate supports at most {settings.MAX_ATOMS} atoms, got {spec.atom_count}")

    result = run_protocol(spec)
    payload = {
        "atom_count": spec.atom_count,
        "fidelity": result.fidelity,
        "infidelity": result.infidelity,
        "norm_loss": result.norm_loss,
        "t1_us": result.timings[0],
        "t2_us": result.timings[1],
        "budget": None,
    }
    try:
        payload["budget"] = _budget_payload(config)
    except ConfigurationError as e:
        logger.warning(f"No budget prediction for this scenario: {e}")
    return _emit_record(args, config, "simulate", payload, started)

def cmd_validate(args: argparse.Namespace) -> int:
    service = ValidationService()
    service.register_default_checks()
    outcomes = asyncio.run(service.run())
    report = "".join(f"{line}\n" for line in ValidationService.report_lines(outcomes))
    emit(report, getattr(args, "out", None))

    failed = [outcome.name for outcome in outcomes if not outcome.passed]
    if failed:
        logger.error(f"Validation failed: {', '.join(failed)}")
        return 1
    logger.info(f"All {len(outcomes)} checks passed")
    return 0
