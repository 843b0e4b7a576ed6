import math
from dataclasses import dataclass

import numpy as np

from src.errors import ConfigurationError
from src.model.units import FrequencyValue

# Order of the dressed single-atom states in every array below.
DARK, PLUS, MINUS = 0, 1, 2

@dataclass(frozen=True)
class Eigensystem:
    """Dressed states of one atom under H2 in the {|0>, |1>, |p>} space.

    frequencies are ω_m in rad/μs, rydberg_overlaps c_m = <m|p>,
    state_overlaps <m|0>; all indexed (dark, plus, minus).
    """

    frequencies: np.ndarray
    rydberg_overlaps: np.ndarray
    state_overlaps: np.ndarray

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self.frequencies)))

def single_atom_eigensystem(omega_p: FrequencyValue, delta0: FrequencyValue) -> Eigensystem:
    """Closed-form diagonalization in the bright/dark basis.

    The dark state (|0>-|1>)/√2 decouples at ω=0; the bright state
    (|0>+|1>)/√2 couples to |p> with matrix element w = Ω_p/√2, so the
    remaining 2x2 block [[0, w], [w, Δ0]] has eigenvalues
    λ± = Δ0/2 ± sqrt(Δ0²/4 + w²) and eigenvectors ∝ w|b> + λ|p>.
    """
    if omega_p.cyclic <= 0:
        raise ConfigurationError(f"Omega_p must be positive, got {omega_p.cyclic} MHz")
    w = omega_p.angular / math.sqrt(2.0)
    half = delta0.angular / 2.0
    root = math.hypot(half, w)

    # λ+ λ- = -w², which keeps the small root accurate for |Δ0| >> w.
    if half >= 0:
        upper = half + root
        lower = -w * w / upper
    else:
        lower = half - root
        upper = -w * w / lower

    frequencies = [0.0]
    rydberg = [0.0]
    ground = [1.0 / math.sqrt(2.0)]
    for lam in (upper, lower):
        norm = math.hypot(w, lam)
        frequencies.append(lam)
        rydberg.append(lam / norm)
        ground.append(w / (norm * math.sqrt(2.0)))

    return Eigensystem(
        frequencies=np.array(frequencies),
        rydberg_overlaps=np.array(rydberg, dtype=complex),
        state_overlaps=np.array(ground, dtype=complex),
    )
