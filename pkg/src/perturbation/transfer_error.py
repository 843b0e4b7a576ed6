from functools import reduce

import numpy as np
from loguru import logger

from src.config import settings
from src.errors import ConfigurationError
from src.model.interactions import PairTable
from src.perturbation.eigensystem import Eigensystem

DEGENERACY_THRESHOLD = 1e-9

def pair_kernel(eigen: Eigensystem, t: float) -> np.ndarray:
    """First-order pair amplitude M[m_i, m_j] acting on |0>|0>, per unit Δ_pp.

    M = Σ_{m'_i, m'_j} c_mi c_mj c*_m'i c*_m'j (e^{iΩt}-1)/(iΩ) <m'_i|0><m'_j|0>
    with Ω = ω_mi + ω_mj - ω_m'i - ω_m'j.
    """
    w = eigen.frequencies
    c = eigen.rydberg_overlaps
    mismatch = w[:, None, None, None] + w[None, :, None, None] - w[None, None, :, None] - w[None, None, None, :]
    degenerate = np.abs(mismatch) < DEGENERACY_THRESHOLD * eigen.scale
    safe = np.where(degenerate, 1.0, mismatch)
    window = np.where(degenerate, t, (np.exp(1j * mismatch * t) - 1.0) / (1j * safe))
    weights = np.einsum("a,b,c,d->abcd", c, c, c.conj(), c.conj()) * window
    return np.einsum("abcd,c,d->ab", weights, eigen.state_overlaps, eigen.state_overlaps)

def _product(vectors) -> np.ndarray:
    return reduce(np.multiply.outer, vectors, np.array(1.0 + 0.0j))

def first_order_error(pairs: PairTable, eigen: Eigensystem, t: float) -> float:
    """Squared norm of the first-order correction orthogonal to the unperturbed state.

    Works in the interaction picture of the ideal transfer, in the product basis of
    dressed single-atom states, starting from |0...0>.
    """
    if t <= 0:
        raise ConfigurationError(f"Interaction time must be positive, got {t}")
    atom_count = pairs.atom_count
    if atom_count > settings.MAX_PERTURBATION_ATOMS:
        raise ConfigurationError(
            f"{atom_count} atoms exceed the perturbation cap of {settings.MAX_PERTURBATION_ATOMS}"
        )
    if atom_count < 2:
        return 0.0

    ground = eigen.state_overlaps
    kernel = pair_kernel(eigen, t)
    spectators = _product([ground] * (atom_count - 2))
    correction = np.zeros((3,) * atom_count, dtype=complex)
    # Fixed pair order keeps the sum reproducible.
    for entry in pairs.entries:
        if not entry.delta_pp_ij.cyclic:
            continue
        block = np.moveaxis(np.multiply.outer(kernel, spectators), (0, 1), (entry.i, entry.j))
        correction += entry.delta_pp_ij.angular * block
    correction *= -1j

    unperturbed = _product([ground] * atom_count)
    parallel = np.vdot(unperturbed, correction)
    error = float(np.vdot(correction, correction).real - abs(parallel) ** 2)
    logger.debug(f"First-order error over {len(pairs.entries)} pairs at t={t:.6g} us: {error:.6e}")
    return max(error, 0.0)
