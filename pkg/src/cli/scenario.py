import math
from enum import Enum
from pathlib import Path
from typing import Literal, Optional, Tuple

from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from src.budget.error_budget import BudgetInputs
from src.config import settings
from src.dynamics.hamiltonian import BlockadeMode, Decay
from src.dynamics.protocol import ProtocolSpec
from src.errors import ConfigurationError
from src.model.drive import DriveSettings, TransferMode
from src.model.interactions import InteractionSet
from src.model.lattice import Lattice, LatticeKind, build_lattice, pair_average_power
from src.model.units import FrequencyValue
from src.perturbation.coefficients import COEFFICIENT_GEOMETRIES, coefficient_for_lattice, published_coefficient

Exponent = Literal[0, 3, 6]

class OutputFormat(str, Enum):
    JSON = "json"
    CSV = "csv"

class CoefficientSource(str, Enum):
    PUBLISHED = "published"
    COMPUTED = "computed"

class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")

class GeometryConfig(_Section):
    kind: LatticeKind = LatticeKind.CUBE8
    d_um: float = Field(3.0, gt=0)
    R0: Optional[float] = Field(None, gt=0)
    count: Optional[int] = Field(None, ge=1)

class InteractionConfig(_Section):
    # null means an infinite control-target shift.
    delta_sp_at_d_mhz: Optional[float] = Field(14.4, gt=0)
    delta_pp_at_d_mhz: float = Field(0.019, ge=0)
    delta_ss_at_d_mhz: float = Field(3.7, ge=0)
    gamma_sp: Exponent = 3
    gamma_pp: Exponent = 6
    gamma_ss: Exponent = 6

class DriveConfig(_Section):
    omega_s_mhz: float = Field(0.1, gt=0)
    # Ω_p = √2 · 0.30 MHz puts the effective Rabi frequency at the cube budget optimum.
    omega_p_mhz: float = Field(0.4242640687119285, gt=0)
    delta0_mhz: float = 0.0
    mode: TransferMode = TransferMode.RESONANT

class DecayConfig(_Section):
    tau_p_us: float = Field(57.0, gt=0)
    tau_s_us: Optional[float] = Field(None, gt=0)
    enabled: bool = True

class SimulationConfig(_Section):
    tolerance: float = Field(1e-10, gt=0)
    blockade_mode: BlockadeMode = BlockadeMode.IDEAL

class OutputConfig(_Section):
    format: Optional[OutputFormat] = None
    path: Optional[str] = None

class BudgetConfig(_Section):
    coefficient: Optional[float] = Field(None, ge=0)
    coefficient_source: CoefficientSource = CoefficientSource.PUBLISHED

class ScenarioConfig(_Section):
    """One JSON document; frequencies are cyclic MHz, times μs, lengths μm."""

    geometry: GeometryConfig = GeometryConfig()
    interactions: InteractionConfig = InteractionConfig()
    drive: DriveConfig = DriveConfig()
    decay: DecayConfig = DecayConfig()
    simulation: SimulationConfig = SimulationConfig()
    outputs: OutputConfig = OutputConfig()
    budget: BudgetConfig = BudgetConfig()

    def lattice(self) -> Lattice:
        g = self.geometry
        return build_lattice(g.kind, g.d_um, R0=g.R0, count=g.count)

    def interaction_set(self) -> InteractionSet:
        i = self.interactions
        delta_sp = math.inf if i.delta_sp_at_d_mhz is None else i.delta_sp_at_d_mhz
        return InteractionSet(
            delta_sp_at_d=FrequencyValue.from_cyclic(delta_sp),
            delta_pp_at_d=FrequencyValue.from_cyclic(i.delta_pp_at_d_mhz),
            delta_ss_at_d=FrequencyValue.from_cyclic(i.delta_ss_at_d_mhz),
            gamma_sp=i.gamma_sp,
            gamma_pp=i.gamma_pp,
            gamma_ss=i.gamma_ss,
        )

    def drive_settings(self) -> DriveSettings:
        d = self.drive
        return DriveSettings(
            omega_s=FrequencyValue.from_cyclic(d.omega_s_mhz),
            omega_p=FrequencyValue.from_cyclic(d.omega_p_mhz),
            delta0=FrequencyValue.from_cyclic(d.delta0_mhz),
            mode=d.mode,
        )

    def protocol_spec(self) -> ProtocolSpec:
        return ProtocolSpec(
            lattice=self.lattice(),
            interactions=self.interaction_set(),
            drive=self.drive_settings(),
            blockade_mode=self.simulation.blockade_mode,
            decay=Decay(tau_p=self.decay.tau_p_us, tau_s=self.decay.tau_s_us),
            include_decay=self.decay.enabled,
            tolerance=self.simulation.tolerance,
        )

    def resolve_coefficient(self, lattice: Lattice) -> Tuple[float, str]:
        """α_N or β_N for the budget, with where it came from."""
        if self.budget.coefficient is not None:
            return self.budget.coefficient, "configured"
        mode = self.drive.mode
        if self.budget.coefficient_source is CoefficientSource.PUBLISHED and lattice.label in COEFFICIENT_GEOMETRIES:
            published = published_coefficient(lattice.label, self.interactions.gamma_pp, mode)
            if published is not None:
                return published.value, "published"
        detuning_ratio = None
        if mode is TransferMode.NONRESONANT:
            detuning_ratio = abs(self.drive.delta0_mhz) / self.drive.omega_p_mhz
        logger.info(f"Computing the transfer coefficient for a {lattice.atom_count}-atom {lattice.label.value} lattice")
        return coefficient_for_lattice(lattice, self.interactions.gamma_pp, mode, detuning_ratio=detuning_ratio), "computed"

    def pair_factor(self, lattice: Lattice) -> float:
        if lattice.atom_count < 2:
            return 1.0
        return pair_average_power(lattice, 2 * self.interactions.gamma_sp)

    def budget_inputs(self) -> Tuple[BudgetInputs, str]:
        lattice = self.lattice()
        coefficient, source = self.resolve_coefficient(lattice)
        drive = self.drive_settings()
        interactions = self.interaction_set()
        inputs = BudgetInputs(
            atom_count=lattice.atom_count,
            mode=drive.mode,
            omega=drive.effective_omega,
            delta0=FrequencyValue.from_cyclic(abs(drive.delta0.cyclic)),
            tau_p=self.decay.tau_p_us if self.decay.enabled else math.inf,
            delta_sp_at_d=interactions.delta_sp_at_d,
            delta_pp_at_d=interactions.delta_pp_at_d,
            blockade_pair_factor=self.pair_factor(lattice),
            coefficient=coefficient,
        )
        return inputs, source

def describe_validation_error(error: ValidationError) -> str:
    lines = []
    for issue in error.errors():
        path = ".".join(str(part) for part in issue["loc"]) or "<root>"
        lines.append(f"{path}: {issue['msg']}")
    return "\n".join(lines)

def parse_scenario(text: str) -> ScenarioConfig:
    try:
        return ScenarioConfig.model_validate_json(text)
    except ValidationError as e:
        raise ConfigurationError(f"Invalid scenario:\n{describe_validation_error(e)}")

def dump_scenario(config: ScenarioConfig) -> str:
    return config.model_dump_json(indent=2)

def load_scenario(path: Optional[str] = None) -> ScenarioConfig:
    if path is not None:
        file = Path(path)
        if not file.exists():
            raise ConfigurationError(f"Scenario file not found: {path}")
        return parse_scenario(file.read_text(encoding="utf-8"))

    default = Path(settings.DEFAULT_SCENARIO_PATH)
    if not default.exists():
        logger.warning(f"Default scenario not found at {default}. Using built-in defaults.")
        return ScenarioConfig()
    return parse_scenario(default.read_text(encoding="utf-8"))
