import itertools
import math
from enum import Enum
from typing import Optional, Tuple

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, model_validator
from scipy.spatial.distance import pdist

from src.errors import ConfigurationError

Position = Tuple[float, float, float]

class LatticeKind(str, Enum):
    PAIR = "pair"
    SQUARE4 = "square4"
    CUBE8 = "cube8"
    SPHERE_CUT = "sphere_cut"
    CHAIN = "chain"

class Lattice(BaseModel):
    """Atom positions in units of the nearest-neighbour spacing d."""

    model_config = ConfigDict(frozen=True)

    positions: Tuple[Position, ...]
    spacing_d: float
    label: LatticeKind

    @model_validator(mode="after")
    def _check_geometry(self):
        if self.spacing_d <= 0:
            raise ConfigurationError(f"Lattice spacing must be positive, got {self.spacing_d}")
        if not self.positions:
            raise ConfigurationError("Lattice has no atoms")
        distances = self.pair_distances()
        if distances.size:
            nearest = float(distances.min())
            if nearest < 1e-12:
                raise ConfigurationError("Lattice positions must be distinct")
            if abs(nearest - 1.0) > 1e-9:
                raise ConfigurationError(f"Nearest-neighbour distance is {nearest}, expected 1")
        return self

    @property
    def atom_count(self) -> int:
        return len(self.positions)

    def coordinates(self) -> np.ndarray:
        return np.asarray(self.positions, dtype=float).reshape(-1, 3)

    def pair_indices(self) -> list:
        # Same i<j order as scipy's condensed distance vector.
        return list(itertools.combinations(range(self.atom_count), 2))

    def pair_distances(self) -> np.ndarray:
        """Distances R_ij/d for i<j, condensed order."""
        return pdist(self.coordinates())

_FIXED_SHAPES = {
    LatticeKind.PAIR: [(0.0, 0.0, 0.0), (1.0, 0.0, 0.0)],
    LatticeKind.SQUARE4: [(x, y, 0.0) for x in (0.0, 1.0) for y in (0.0, 1.0)],
    LatticeKind.CUBE8: [(x, y, z) for x in (0.0, 1.0) for y in (0.0, 1.0) for z in (0.0, 1.0)],
}

def _sphere_cut_sites(r0: float) -> list:
    reach = int(math.floor(r0))
    span = range(-reach, reach + 1)
    return [
        (float(x), float(y), float(z))
        for x, y, z in itertools.product(span, span, span)
        if x * x + y * y + z * z <= r0 * r0 + 1e-9
    ]

def build_lattice(
    kind,
    spacing_d: float,
    R0: Optional[float] = None,
    count: Optional[int] = None,
) -> Lattice:
    try:
        kind = LatticeKind(kind)
    except ValueError:
        raise ConfigurationError(f"Unknown lattice kind: {kind}")

    if kind in _FIXED_SHAPES:
        positions = _FIXED_SHAPES[kind]
    elif kind is LatticeKind.SPHERE_CUT:
        if R0 is None or R0 <= 0:
            raise ConfigurationError("sphere_cut lattice requires R0 > 0")
        positions = _sphere_cut_sites(R0)
    else:
        if count is None or count < 1:
            raise ConfigurationError("chain lattice requires count >= 1")
        positions = [(float(i), 0.0, 0.0) for i in range(count)]

    lattice = Lattice(positions=tuple(positions), spacing_d=spacing_d, label=kind)
    logger.debug(f"Built {kind.value} lattice with {lattice.atom_count} atoms (d={spacing_d} um)")
    return lattice

def pair_average_power(lattice: Lattice, exponent: int) -> float:
    """Mean of (R_ij/d)**exponent over unordered pairs."""
    if lattice.atom_count < 2:
        raise ConfigurationError("Pair average needs at least two atoms")
    return float(np.mean(lattice.pair_distances() ** exponent))
