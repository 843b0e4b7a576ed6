from dataclasses import dataclass
from enum import IntEnum
from functools import lru_cache
from typing import Sequence

import numpy as np

from src.errors import ConfigurationError

LEVELS_PER_ATOM = 4

class Level(IntEnum):
    ZERO = 0
    ONE = 1
    S = 2
    P = 3

@lru_cache(maxsize=16)
def level_digits(atom_count: int) -> np.ndarray:
    """(4**N, N) table: column k is the level of atom k (base-4 digit k of the index)."""
    index = np.arange(LEVELS_PER_ATOM ** atom_count)
    powers = LEVELS_PER_ATOM ** np.arange(atom_count)
    digits = (index[:, None] // powers) % LEVELS_PER_ATOM
    digits.setflags(write=False)
    return digits

def tensor_axis(atom: int, atom_count: int) -> int:
    # C-order reshape puts the most significant digit on axis 0.
    return atom_count - 1 - atom

@dataclass(frozen=True)
class StateVector:
    amplitudes: np.ndarray
    atom_count: int

    def __post_init__(self):
        amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if amplitudes.shape != (LEVELS_PER_ATOM ** self.atom_count,):
            raise ConfigurationError(
                f"State of {self.atom_count} atoms needs {LEVELS_PER_ATOM ** self.atom_count} amplitudes, "
                f"got shape {amplitudes.shape}"
            )
        object.__setattr__(self, "amplitudes", amplitudes)

    @property
    def dimension(self) -> int:
        return self.amplitudes.size

    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def population(self, levels: Sequence[int]) -> float:
        """Probability of the product basis state with the given per-atom levels."""
        return float(abs(self.amplitudes[basis_index(levels)]) ** 2)

def basis_index(levels: Sequence[int]) -> int:
    return int(sum(int(level) * LEVELS_PER_ATOM ** k for k, level in enumerate(levels)))

def product_state(levels: Sequence[int]) -> StateVector:
    atom_count = len(levels)
    amplitudes = np.zeros(LEVELS_PER_ATOM ** atom_count, dtype=complex)
    amplitudes[basis_index(levels)] = 1.0
    return StateVector(amplitudes=amplitudes, atom_count=atom_count)

def ground_state(atom_count: int) -> StateVector:
    return product_state([Level.ZERO] * atom_count)

def fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2."""
    if a.dimension != b.dimension:
        raise ConfigurationError(f"Cannot compare states of dimension {a.dimension} and {b.dimension}")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)
