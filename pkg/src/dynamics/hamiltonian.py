import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from loguru import logger

from src.dynamics.basis import LEVELS_PER_ATOM, Level, StateVector, level_digits
from src.errors import ConfigurationError
from src.model.interactions import PairTable
from src.model.units import ZERO, FrequencyValue

class Step(str, Enum):
    ONE = "one"
    TWO = "two"

class BlockadeMode(str, Enum):
    IDEAL = "ideal"
    FINITE = "finite"

@dataclass(frozen=True)
class Decay:
    """Rydberg lifetimes in μs; None means no decay from that level."""
    tau_p: Optional[float] = None
    tau_s: Optional[float] = None

@dataclass(frozen=True)
class HamiltonianSpec:
    step: Step
    pair_table: PairTable
    omega_s: FrequencyValue = ZERO
    omega_p0: FrequencyValue = ZERO
    omega_p1: FrequencyValue = ZERO
    detuning_delta0: FrequencyValue = ZERO
    blockade_mode: BlockadeMode = BlockadeMode.IDEAL
    decay: Optional[Decay] = None
    # -1 runs the sign-flipped drive of the reversal step; decay is not flipped.
    sign: float = 1.0

    @property
    def atom_count(self) -> int:
        return self.pair_table.atom_count

class CompiledHamiltonian:
    """Sparse action of H on the 4^N product space: a diagonal plus one 4x4 drive per atom."""

    def __init__(self, spec: HamiltonianSpec):
        self.spec = spec
        self.atom_count = spec.atom_count
        self.shape = (LEVELS_PER_ATOM,) * self.atom_count
        digits = level_digits(self.atom_count)
        in_p = digits == Level.P
        in_s = digits == Level.S

        # Ideal blockade only concerns the |s> manifold of step (i). Infinite pair
        # shifts remove the states they would push away instead of entering the diagonal.
        allowed = np.ones(digits.shape[0], dtype=bool)
        if spec.blockade_mode is BlockadeMode.IDEAL:
            allowed &= in_s.sum(axis=1) <= 1

        hermitian = np.zeros(digits.shape[0], dtype=float)
        if spec.step is Step.TWO:
            hermitian += spec.detuning_delta0.angular * in_p.sum(axis=1)
        for entry in spec.pair_table.entries:
            i, j = entry.i, entry.j
            sp_pair = (in_s[:, i] & in_p[:, j]) | (in_p[:, i] & in_s[:, j])
            shifts = [(entry.delta_pp_ij, in_p[:, i] & in_p[:, j]), (entry.delta_sp_ij, sp_pair)]
            if spec.blockade_mode is BlockadeMode.FINITE:
                shifts.append((entry.delta_ss_ij, in_s[:, i] & in_s[:, j]))
            for shift, occupied in shifts:
                if math.isinf(shift.cyclic):
                    allowed &= ~occupied
                elif shift.cyclic:
                    hermitian += shift.angular * occupied
        self.diagonal = spec.sign * hermitian.astype(complex)
        self.mask = None if allowed.all() else allowed.astype(float)

        if spec.decay is not None:
            if spec.decay.tau_p is not None:
                self.diagonal -= 0.5j / spec.decay.tau_p * in_p.sum(axis=1)
            if spec.decay.tau_s is not None:
                self.diagonal -= 0.5j / spec.decay.tau_s * in_s.sum(axis=1)

        drive = np.zeros((LEVELS_PER_ATOM, LEVELS_PER_ATOM))
        if spec.step is Step.ONE:
            drive[Level.S, Level.ZERO] = drive[Level.ZERO, Level.S] = spec.omega_s.angular / 2
        else:
            drive[Level.P, Level.ZERO] = drive[Level.ZERO, Level.P] = spec.omega_p0.angular / 2
            drive[Level.P, Level.ONE] = drive[Level.ONE, Level.P] = spec.omega_p1.angular / 2
        self.drive = spec.sign * drive
        self.has_drive = bool(np.any(self.drive))

        self.scale = float(np.max(np.abs(self.diagonal), initial=0.0) + self.atom_count * np.abs(self.drive).sum())
        logger.debug(
            f"Compiled step-{spec.step.value} Hamiltonian: N={self.atom_count}, "
            f"{len(spec.pair_table.entries)} pairs, blockade={spec.blockade_mode.value}"
        )

    def apply(self, amplitudes: np.ndarray) -> np.ndarray:
        psi = amplitudes if self.mask is None else amplitudes * self.mask
        out = self.diagonal * psi
        if self.has_drive:
            tensor = psi.reshape(self.shape)
            accumulated = out.reshape(self.shape)
            for axis in range(self.atom_count):
                accumulated += np.moveaxis(np.tensordot(self.drive, tensor, axes=([1], [axis])), 0, axis)
            out = accumulated.reshape(-1)
        if self.mask is not None:
            out = out * self.mask
        return out

def apply_hamiltonian(spec: HamiltonianSpec, state: StateVector) -> StateVector:
    """H|psi>."""
    if state.atom_count != spec.atom_count:
        raise ConfigurationError(
            f"State has {state.atom_count} atoms but the Hamiltonian describes {spec.atom_count}"
        )
    compiled = CompiledHamiltonian(spec)
    return StateVector(amplitudes=compiled.apply(state.amplitudes), atom_count=state.atom_count)
