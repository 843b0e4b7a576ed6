import math
from typing import NamedTuple

from loguru import logger
from pydantic import BaseModel, ConfigDict, field_validator

from src.errors import ConfigurationError, NumericalFault
from src.model.units import FrequencyValue

BOUNDARY_SLACK = 1e-12
NONRESONANT_REGIME_RATIO = 10.0

class TransferInputs(BaseModel):
    """Effective Rabi frequency Ω = Ω_p/√2 and interaction-induced detuning Δ, both rad/μs."""

    model_config = ConfigDict(frozen=True)

    omega: float
    delta: float

    @field_validator("omega")
    @classmethod
    def _positive(cls, value: float) -> float:
        if value <= 0:
            raise ConfigurationError(f"Effective Rabi frequency must be positive, got {value}")
        return value

    @property
    def omega_prime(self) -> float:
        return math.sqrt(4.0 * self.omega ** 2 + self.delta ** 2)

class Populations(NamedTuple):
    p0: float
    p1: float

class NonresonantPopulations(NamedTuple):
    p0: float
    p1: float
    regime_warning: bool

def _checked_probability(value: float) -> float:
    if -BOUNDARY_SLACK <= value < 0.0:
        return 0.0
    if 1.0 < value <= 1.0 + BOUNDARY_SLACK:
        return 1.0
    if not 0.0 <= value <= 1.0:
        raise NumericalFault(f"Transfer probability {value!r} lies outside [0, 1]")
    return value

def transfer_populations(inputs: TransferInputs) -> Populations:
    """Populations of |0>, |1> after the resonant transfer pulse with a static shift Δ on |p>."""
    omega, delta = inputs.omega, inputs.delta
    if delta == 0:
        return Populations(0.0, 1.0)
    omega_prime = inputs.omega_prime
    a = math.pi * delta / (2.0 * omega)
    b = math.pi * omega_prime / (2.0 * omega)
    numerator = (
        omega_prime ** 2
        - omega ** 2
        + omega ** 2 * math.cos(2.0 * b)
        - omega_prime ** 2 * math.cos(a) * math.cos(b)
        - delta * omega_prime * math.sin(a) * math.sin(b)
    )
    p1 = _checked_probability(numerator / (2.0 * omega_prime ** 2))
    return Populations(1.0 - p1, p1)

def nonresonant_populations(
    omega_p: FrequencyValue,
    delta0: FrequencyValue,
    delta_sp_shift: FrequencyValue,
    t: float,
) -> NonresonantPopulations:
    """Two-photon populations with Ω = Ω_p²/(2(Δ0 + shift)), valid for Ω_p << Δ0."""
    if omega_p.cyclic <= 0:
        raise ConfigurationError(f"Omega_p must be positive, got {omega_p.cyclic} MHz")
    detuning = delta0.angular + delta_sp_shift.angular
    if detuning == 0:
        raise ConfigurationError("Total detuning Delta0 + shift must be nonzero")
    regime_warning = abs(delta0.cyclic) < NONRESONANT_REGIME_RATIO * omega_p.cyclic
    if regime_warning:
        logger.warning(
            f"Delta0/Omega_p = {abs(delta0.cyclic) / omega_p.cyclic:.3g} is below {NONRESONANT_REGIME_RATIO}; "
            "the two-photon formula is outside its validity regime"
        )
    effective = omega_p.angular ** 2 / (2.0 * detuning)
    p1 = math.sin(effective * t / 2.0) ** 2
    return NonresonantPopulations(1.0 - p1, p1, regime_warning)
