import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Optional, Tuple

from loguru import logger

from src.config import settings
from src.dynamics.basis import StateVector, fidelity, ground_state
from src.dynamics.hamiltonian import BlockadeMode, Decay, HamiltonianSpec, Step
from src.dynamics.propagator import evolve
from src.errors import ConfigurationError
from src.model.drive import DriveSettings, TransferMode, step_one_duration, transfer_duration
from src.model.interactions import InteractionSet, PairTable, build_pair_table
from src.model.lattice import Lattice, LatticeKind, build_lattice
from src.model.units import ZERO, FrequencyValue

@dataclass(frozen=True)
class ProtocolSpec:
    lattice: Lattice
    interactions: InteractionSet
    drive: DriveSettings
    blockade_mode: BlockadeMode = BlockadeMode.IDEAL
    decay: Optional[Decay] = None
    include_decay: bool = False
    t1: Optional[float] = None
    t2: Optional[float] = None
    tolerance: Optional[float] = None

    @property
    def atom_count(self) -> int:
        return self.lattice.atom_count

    @property
    def mode(self) -> TransferMode:
        return self.drive.mode

    def timings(self) -> Tuple[float, float]:
        t1 = self.t1 if self.t1 is not None else step_one_duration(self.drive.omega_s, self.atom_count)
        t2 = self.t2 if self.t2 is not None else transfer_duration(
            self.drive.omega_p, self.drive.delta0, self.drive.mode
        )
        return t1, t2

    def active_decay(self) -> Optional[Decay]:
        return self.decay if self.include_decay else None

@dataclass(frozen=True)
class ProtocolResult:
    final_state: StateVector
    fidelity: float
    norm_loss: float
    timings: Tuple[float, float]

    @property
    def infidelity(self) -> float:
        return 1.0 - self.fidelity

def _step_hamiltonians(spec: ProtocolSpec, table: PairTable) -> Tuple[HamiltonianSpec, HamiltonianSpec, HamiltonianSpec]:
    decay = spec.active_decay()
    excite = HamiltonianSpec(
        step=Step.ONE,
        pair_table=table,
        omega_s=spec.drive.omega_s,
        blockade_mode=spec.blockade_mode,
        decay=decay,
    )
    transfer = HamiltonianSpec(
        step=Step.TWO,
        pair_table=table,
        omega_p0=spec.drive.omega_p,
        omega_p1=spec.drive.omega_p,
        detuning_delta0=spec.drive.transfer_detuning,
        blockade_mode=spec.blockade_mode,
        decay=decay,
    )
    return excite, transfer, replace(excite, sign=-1.0)

def _check_size(spec: ProtocolSpec) -> None:
    if spec.atom_count > settings.MAX_ATOMS:
        raise ConfigurationError(
            f"{spec.atom_count} atoms exceed the simulation cap of {settings.MAX_ATOMS} "
            f"({4 ** spec.atom_count} amplitudes)"
        )

def _execute(spec: ProtocolSpec) -> StateVector:
    t1, t2 = spec.timings()
    tolerance = spec.tolerance if spec.tolerance is not None else settings.DEFAULT_TOLERANCE
    excite, transfer, reverse = _step_hamiltonians(spec, build_pair_table(spec.lattice, spec.interactions))

    state = ground_state(spec.atom_count)
    state = evolve(excite, state, t1, tolerance)
    state = evolve(transfer, state, t2, tolerance)
    return evolve(reverse, state, 2.0 * t1, tolerance)

_NO_INTERACTIONS = InteractionSet(delta_sp_at_d=ZERO, delta_pp_at_d=ZERO, delta_ss_at_d=ZERO)
# Perfect control-target blockade: |s> and |p> never coexist.
_PERFECT_BLOCKADE = InteractionSet(delta_sp_at_d=FrequencyValue.from_cyclic(math.inf), delta_pp_at_d=ZERO, delta_ss_at_d=ZERO)

def default_drive(mode: TransferMode) -> DriveSettings:
    omega_p = FrequencyValue.from_cyclic(0.3 * 2 ** 0.5)
    delta0 = ZERO
    if TransferMode(mode) is TransferMode.NONRESONANT:
        delta0 = omega_p.scaled(settings.NONRESONANT_DETUNING_RATIO)
    return DriveSettings(
        omega_s=FrequencyValue.from_cyclic(0.1), omega_p=omega_p, delta0=delta0, mode=TransferMode(mode)
    )

@lru_cache(maxsize=32)
def _cached_target(atom_count: int, drive: DriveSettings, t1: Optional[float], t2: Optional[float]) -> StateVector:
    spec = ProtocolSpec(
        lattice=build_lattice(LatticeKind.CHAIN, 1.0, count=atom_count),
        interactions=_PERFECT_BLOCKADE,
        drive=drive,
        blockade_mode=BlockadeMode.IDEAL,
        t1=t1,
        t2=t2,
        tolerance=settings.TARGET_TOLERANCE,
    )
    logger.debug(f"Computing ideal target for N={atom_count} ({drive.mode.value})")
    return _execute(spec)

def ideal_target(
    atom_count: int,
    mode: TransferMode = TransferMode.RESONANT,
    drive: Optional[DriveSettings] = None,
    timings: Optional[Tuple[float, float]] = None,
) -> StateVector:
    """Cat state reached by the protocol with Δ_pp = 0, perfect blockade and no decay.

    Built by running the protocol itself, so every pulse phase is included.
    """
    if atom_count < 1:
        raise ConfigurationError(f"Target needs at least one atom, got {atom_count}")
    drive = drive if drive is not None else default_drive(mode)
    t1, t2 = timings if timings is not None else (None, None)
    return _cached_target(atom_count, drive, t1, t2)

def run_protocol(spec: ProtocolSpec) -> ProtocolResult:
    """Steps (i)-(iii): +H1 for t1, H2 for t2, -H1 for 2 t1, starting from |0...0>."""
    _check_size(spec)
    timings = spec.timings()
    logger.info(
        f"Running {spec.mode.value} protocol: N={spec.atom_count}, blockade={spec.blockade_mode.value}, "
        f"t1={timings[0]:.4g} us, t2={timings[1]:.4g} us"
    )
    final = _execute(spec)
    target = ideal_target(spec.atom_count, spec.mode, spec.drive, (spec.t1, spec.t2))
    return ProtocolResult(
        final_state=final,
        fidelity=fidelity(target, final),
        norm_loss=1.0 - final.norm_squared(),
        timings=timings,
    )

def run_transfer(spec: ProtocolSpec, initial: Optional[StateVector] = None) -> ProtocolResult:
    """Step (ii) alone, by default on |0...0>; fidelity is against the interaction-free transfer."""
    _check_size(spec)
    timings = spec.timings()
    tolerance = spec.tolerance if spec.tolerance is not None else settings.DEFAULT_TOLERANCE
    initial = initial if initial is not None else ground_state(spec.atom_count)

    _, transfer, _ = _step_hamiltonians(spec, build_pair_table(spec.lattice, spec.interactions))
    final = evolve(transfer, initial, timings[1], tolerance)

    reference_spec = replace(spec, interactions=_NO_INTERACTIONS, include_decay=False)
    _, reference_transfer, _ = _step_hamiltonians(
        reference_spec, build_pair_table(spec.lattice, _NO_INTERACTIONS)
    )
    reference = evolve(reference_transfer, initial, timings[1], tolerance)
    return ProtocolResult(
        final_state=final,
        fidelity=fidelity(reference, final),
        norm_loss=1.0 - final.norm_squared(),
        timings=timings,
    )

def norm_loss_decay(spec: ProtocolSpec, result: ProtocolResult) -> float:
    """Scattering probability estimated as the norm lost under the non-Hermitian Hamiltonian."""
    if spec.active_decay() is None:
        raise ConfigurationError("Decay is not enabled for this protocol")
    return 1.0 - result.final_state.norm_squared()
