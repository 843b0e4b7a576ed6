import math
from typing import Sequence, Tuple

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, field_validator, model_validator
from scipy.integrate import trapezoid

from src.errors import ConfigurationError, NumericalFault
from src.model.lattice import Lattice
from src.model.units import FrequencyValue

ALLOWED_EXPONENTS = (0, 3, 6)

# Principal-quantum-number power laws of the resonant sp coupling, the
# second-order pp Förster shift and the blackbody-limited p lifetime.
SP_N_EXPONENT = 4
PP_N_EXPONENT = 11
LIFETIME_N_EXPONENT = 2

class InteractionSet(BaseModel):
    """Nearest-neighbour reference couplings and their distance exponents."""

    model_config = ConfigDict(frozen=True)

    delta_sp_at_d: FrequencyValue
    delta_pp_at_d: FrequencyValue
    delta_ss_at_d: FrequencyValue
    gamma_sp: int = 3
    gamma_pp: int = 6
    gamma_ss: int = 6

    @field_validator("gamma_sp", "gamma_pp", "gamma_ss")
    @classmethod
    def _check_exponent(cls, value: int) -> int:
        if value not in ALLOWED_EXPONENTS:
            raise ConfigurationError(f"Distance exponent must be one of {ALLOWED_EXPONENTS}, got {value}")
        return value

    @field_validator("delta_sp_at_d", "delta_pp_at_d", "delta_ss_at_d")
    @classmethod
    def _check_strength(cls, value: FrequencyValue) -> FrequencyValue:
        if value.cyclic < 0:
            raise ConfigurationError(f"Interaction strengths must be non-negative, got {value.cyclic} MHz")
        return value

def coupling_at(reference: FrequencyValue, exponent: int, R_over_d: float) -> FrequencyValue:
    if R_over_d < 1.0 - 1e-9:
        raise ConfigurationError(f"R/d = {R_over_d} is closer than the nearest-neighbour spacing")
    return reference.scaled((1.0 / R_over_d) ** exponent)

class PairEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    i: int
    j: int
    R_over_d: float
    delta_sp_ij: FrequencyValue
    delta_pp_ij: FrequencyValue
    delta_ss_ij: FrequencyValue

class PairTable(BaseModel):
    model_config = ConfigDict(frozen=True)

    atom_count: int
    entries: Tuple[PairEntry, ...]

    @model_validator(mode="after")
    def _check_count(self):
        expected = self.atom_count * (self.atom_count - 1) // 2
        if len(self.entries) != expected:
            raise ConfigurationError(f"Pair table for {self.atom_count} atoms needs {expected} entries, got {len(self.entries)}")
        return self

def build_pair_table(lattice: Lattice, interactions: InteractionSet) -> PairTable:
    entries = []
    for (i, j), r in zip(lattice.pair_indices(), lattice.pair_distances()):
        r = float(r)
        entries.append(
            PairEntry(
                i=i,
                j=j,
                R_over_d=r,
                delta_sp_ij=coupling_at(interactions.delta_sp_at_d, interactions.gamma_sp, r),
                delta_pp_ij=coupling_at(interactions.delta_pp_at_d, interactions.gamma_pp, r),
                delta_ss_ij=coupling_at(interactions.delta_ss_at_d, interactions.gamma_ss, r),
            )
        )
    logger.debug(f"Pair table: {len(entries)} pairs for {lattice.atom_count} atoms")
    return PairTable(atom_count=lattice.atom_count, entries=tuple(entries))

class AngularSample(BaseModel):
    model_config = ConfigDict(frozen=True)

    theta: float
    value: FrequencyValue

class AngularProfile(BaseModel):
    """Coupling strength versus molecular-axis angle on [0, π/2]."""

    model_config = ConfigDict(frozen=True)

    samples: Tuple[AngularSample, ...]

    @model_validator(mode="after")
    def _check_grid(self):
        if not self.samples:
            raise ConfigurationError("Angular profile is empty")
        thetas = self.thetas()
        if thetas.size < 2 or np.any(np.diff(thetas) <= 0):
            raise ConfigurationError("Profile angles must be strictly increasing with at least two samples")
        if abs(thetas[0]) > 1e-12 or abs(thetas[-1] - math.pi / 2) > 1e-12:
            raise ConfigurationError("Profile must span exactly [0, pi/2]")
        return self

    @classmethod
    def from_arrays(cls, thetas: Sequence[float], values_mhz: Sequence[float]) -> "AngularProfile":
        return cls(
            samples=tuple(
                AngularSample(theta=float(t), value=FrequencyValue.from_cyclic(v))
                for t, v in zip(thetas, values_mhz)
            )
        )

    def thetas(self) -> np.ndarray:
        return np.array([s.theta for s in self.samples], dtype=float)

    def values(self) -> np.ndarray:
        return np.array([s.value.cyclic for s in self.samples], dtype=float)

def _refined_nodes(thetas: np.ndarray, level: int) -> np.ndarray:
    fractions = np.arange(2 ** level) / 2 ** level
    inner = thetas[:-1, None] + np.diff(thetas)[:, None] * fractions
    return np.append(inner.ravel(), thetas[-1])

def angle_average(profile: AngularProfile, tolerance: float = 1e-6, max_levels: int = 24) -> FrequencyValue:
    """∫ value(θ) sinθ dθ over [0, π/2] with the profile linearly interpolated."""
    thetas = profile.thetas()
    values = profile.values()

    def integrate(level: int) -> float:
        nodes = _refined_nodes(thetas, level)
        return float(trapezoid(np.interp(nodes, thetas, values) * np.sin(nodes), nodes))

    previous = integrate(0)
    for level in range(1, max_levels + 1):
        current = integrate(level)
        if abs(current - previous) <= tolerance * abs(current):
            logger.debug(f"Angle average converged after {level} halvings")
            return FrequencyValue.from_cyclic(current)
        previous = current
    raise NumericalFault(f"Angle average did not reach relative change {tolerance} in {max_levels} halvings")

def min_asymmetry(sp_profile: AngularProfile, pp_profile: AngularProfile) -> float:
    """Smallest Δ_sp/Δ_pp over all angles."""
    grid = np.union1d(sp_profile.thetas(), pp_profile.thetas())
    sp = np.interp(grid, sp_profile.thetas(), sp_profile.values())
    pp = np.interp(grid, pp_profile.thetas(), pp_profile.values())
    ratio = np.full_like(grid, np.inf)
    np.divide(sp, pp, out=ratio, where=pp > 0)
    return float(ratio.min())

def n_scaling(reference_value: float, n_ref: int, n: int, exponent: float) -> float:
    if n_ref < 1 or n < 1:
        raise ConfigurationError(f"Principal quantum numbers must be positive, got n_ref={n_ref}, n={n}")
    return reference_value * (n / n_ref) ** exponent

def scale_to_principal_number(interactions: InteractionSet, n_ref: int, n: int) -> InteractionSet:
    """Rescale sp and pp strengths from n_ref to n; Δ_ss belongs to another level and is kept."""
    return interactions.model_copy(
        update={
            "delta_sp_at_d": FrequencyValue.from_cyclic(
                n_scaling(interactions.delta_sp_at_d.cyclic, n_ref, n, SP_N_EXPONENT)
            ),
            "delta_pp_at_d": FrequencyValue.from_cyclic(
                n_scaling(interactions.delta_pp_at_d.cyclic, n_ref, n, PP_N_EXPONENT)
            ),
        }
    )

def lifetime_at(tau_ref: float, n_ref: int, n: int) -> float:
    return n_scaling(tau_ref, n_ref, n, LIFETIME_N_EXPONENT)
