import math
from enum import Enum

from pydantic import BaseModel, ConfigDict

from src.errors import ConfigurationError
from src.model.units import ZERO, FrequencyValue

class TransferMode(str, Enum):
    RESONANT = "resonant"
    NONRESONANT = "nonresonant"

class DriveSettings(BaseModel):
    """Laser couplings of the three steps; Ω_p is shared by the 0-p and 1-p legs."""

    model_config = ConfigDict(frozen=True)

    omega_s: FrequencyValue
    omega_p: FrequencyValue
    delta0: FrequencyValue = ZERO
    mode: TransferMode = TransferMode.RESONANT

    @property
    def effective_omega(self) -> FrequencyValue:
        """Ω = Ω_p/√2, the 0-1 oscillation rate through |p>."""
        return self.omega_p.scaled(1.0 / math.sqrt(2.0))

    @property
    def transfer_detuning(self) -> FrequencyValue:
        return ZERO if self.mode is TransferMode.RESONANT else self.delta0

def step_one_duration(omega_s: FrequencyValue, atom_count: int) -> float:
    """t1 = π/(2√N|Ω_s|): collective π/2 pulse into the singly excited |s> manifold."""
    if omega_s.cyclic <= 0:
        raise ConfigurationError(f"Omega_s must be positive, got {omega_s.cyclic} MHz")
    return math.pi / (2.0 * math.sqrt(atom_count) * omega_s.angular)

def transfer_duration(omega_p: FrequencyValue, delta0: FrequencyValue, mode: TransferMode) -> float:
    """t2: 2π pulse on the bright-p transition (resonant) or a π pulse of the light-shifted Raman coupling."""
    if omega_p.cyclic <= 0:
        raise ConfigurationError(f"Omega_p must be positive, got {omega_p.cyclic} MHz")
    if TransferMode(mode) is TransferMode.RESONANT:
        return math.sqrt(2.0) * math.pi / omega_p.angular
    if delta0.cyclic == 0:
        raise ConfigurationError("Nonresonant transfer needs a nonzero detuning Delta0")
    return 2.0 * math.pi * abs(delta0.angular) / omega_p.angular ** 2
