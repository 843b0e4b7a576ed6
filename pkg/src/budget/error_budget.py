import math
from typing import List, NamedTuple, Optional

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, model_validator

from src.errors import ConfigurationError
from src.model.drive import TransferMode
from src.model.units import FrequencyValue

class BudgetInputs(BaseModel):
    """Everything the resonant or nonresonant error budget depends on.

    `omega` is the effective Rabi frequency Ω = Ω_p/√2 (resonant); `delta0` the
    detuning (nonresonant). Infinite tau_p or delta_sp_at_d switch a term off.
    """

    model_config = ConfigDict(frozen=True)

    atom_count: int
    mode: TransferMode = TransferMode.RESONANT
    omega: Optional[FrequencyValue] = None
    delta0: Optional[FrequencyValue] = None
    tau_p: float = math.inf
    delta_sp_at_d: FrequencyValue
    delta_pp_at_d: FrequencyValue
    blockade_pair_factor: float = 1.0
    coefficient: float

    @model_validator(mode="after")
    def _check_consistency(self):
        if self.atom_count < 1:
            raise ConfigurationError(f"Budget needs at least one atom, got {self.atom_count}")
        drive = self.drive_frequency
        if drive is None or drive.cyclic <= 0:
            field = "omega" if self.mode is TransferMode.RESONANT else "delta0"
            raise ConfigurationError(f"{self.mode.value} budget needs a positive {field}")
        if self.tau_p <= 0:
            raise ConfigurationError(f"tau_p must be positive, got {self.tau_p}")
        if self.delta_sp_at_d.cyclic <= 0:
            raise ConfigurationError("delta_sp_at_d must be positive")
        if self.delta_pp_at_d.cyclic < 0 or self.coefficient < 0:
            raise ConfigurationError("delta_pp_at_d and the coefficient must be non-negative")
        if self.blockade_pair_factor < 1.0:
            raise ConfigurationError(f"Pair factor must be >= 1, got {self.blockade_pair_factor}")
        return self

    @property
    def drive_frequency(self) -> Optional[FrequencyValue]:
        return self.omega if self.mode is TransferMode.RESONANT else self.delta0

    def with_drive_frequency(self, value: FrequencyValue) -> "BudgetInputs":
        field = "omega" if self.mode is TransferMode.RESONANT else "delta0"
        return self.model_copy(update={field: value})

class ErrorBudget(BaseModel):
    model_config = ConfigDict(frozen=True)

    e_se: float
    e_bl: float
    e_tr: float
    total: float

    @classmethod
    def from_components(cls, e_se: float, e_bl: float, e_tr: float) -> "ErrorBudget":
        return cls(e_se=e_se, e_bl=e_bl, e_tr=e_tr, total=e_se + e_bl + e_tr)

def error_budget(inputs: BudgetInputs) -> ErrorBudget:
    """N[E_se + E_bl] per atom plus the many-atom transfer error."""
    n = inputs.atom_count
    x = inputs.drive_frequency.angular
    # Resonant: π/(4Ωτ) per atom; nonresonant: π/(2Δ0τ).
    se_prefactor = math.pi / 4.0 if inputs.mode is TransferMode.RESONANT else math.pi / 2.0
    e_se = n * se_prefactor / (x * inputs.tau_p)
    e_bl = n * (math.pi ** 2 / 4.0) * (x / inputs.delta_sp_at_d.angular) ** 2 * inputs.blockade_pair_factor
    e_tr = inputs.coefficient * (inputs.delta_pp_at_d.angular / x) ** 2
    return ErrorBudget.from_components(e_se, e_bl, e_tr)

class BudgetRow(NamedTuple):
    omega_mhz: float
    e_se: float
    e_bl: float
    e_tr: float
    e_total: float

class SweepResult(NamedTuple):
    rows: List[BudgetRow]
    minimum: Optional[BudgetRow]

def log_grid(lower: float, upper: float, points: int) -> np.ndarray:
    if points < 2:
        raise ConfigurationError(f"A sweep needs at least 2 points, got {points}")
    if not 0 < lower < upper:
        raise ConfigurationError(f"Sweep range must satisfy 0 < min < max, got [{lower}, {upper}]")
    steps = np.arange(points) / (points - 1)
    return np.exp(math.log(lower) + steps * (math.log(upper) - math.log(lower)))

def sweep_budget(inputs: BudgetInputs, omega_min_mhz: float, omega_max_mhz: float, points: int) -> SweepResult:
    """Budget on a log-spaced grid of the drive frequency (cyclic MHz)."""
    rows = []
    for value in log_grid(omega_min_mhz, omega_max_mhz, points):
        budget = error_budget(inputs.with_drive_frequency(FrequencyValue.from_cyclic(float(value))))
        rows.append(BudgetRow(float(value), budget.e_se, budget.e_bl, budget.e_tr, budget.total))

    best = min(range(len(rows)), key=lambda k: rows[k].e_total)
    minimum = rows[best] if 0 < best < len(rows) - 1 else None
    if minimum is None:
        logger.warning("Sweep minimum sits on the range boundary; no interior minimum bracketed")
    else:
        logger.info(f"Sweep minimum {minimum.e_total:.4f} at {minimum.omega_mhz:.4f} MHz")
    return SweepResult(rows, minimum)
