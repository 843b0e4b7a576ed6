from typing import Optional

import numpy as np
from loguru import logger
from scipy.integrate import solve_ivp

from src.config import settings
from src.dynamics.basis import StateVector
from src.dynamics.hamiltonian import CompiledHamiltonian, HamiltonianSpec
from src.errors import ConfigurationError, IntegrationError

class _EvaluationCapReached(Exception):
    pass

def evolve(
    spec: HamiltonianSpec,
    state: StateVector,
    duration: float,
    tolerance: Optional[float] = None,
    max_evaluations: Optional[int] = None,
) -> StateVector:
    """exp(-iH t)|psi> by adaptive DOP853 stepping on the Schrödinger equation."""
    tolerance = settings.DEFAULT_TOLERANCE if tolerance is None else tolerance
    max_evaluations = settings.MAX_RHS_EVALUATIONS if max_evaluations is None else max_evaluations
    if duration < 0:
        raise ConfigurationError(f"Evolution time must be non-negative, got {duration}")
    if tolerance <= 0:
        raise ConfigurationError(f"Tolerance must be positive, got {tolerance}")
    if max_evaluations < 1:
        raise ConfigurationError(f"Evaluation cap must be at least 1, got {max_evaluations}")
    if state.atom_count != spec.atom_count:
        raise ConfigurationError(
            f"State has {state.atom_count} atoms but the Hamiltonian describes {spec.atom_count}"
        )
    if duration == 0:
        return StateVector(amplitudes=state.amplitudes.copy(), atom_count=state.atom_count)

    compiled = CompiledHamiltonian(spec)
    evaluations = 0

    def rhs(_t: float, y: np.ndarray) -> np.ndarray:
        nonlocal evaluations
        evaluations += 1
        if evaluations > max_evaluations:
            raise _EvaluationCapReached
        return -1j * compiled.apply(y)

    try:
        solution = solve_ivp(
            rhs,
            (0.0, duration),
            state.amplitudes,
            method="DOP853",
            rtol=tolerance,
            atol=tolerance * 1e-2,
            t_eval=[duration],
        )
    except _EvaluationCapReached:
        raise IntegrationError(
            f"Integrator exceeded {max_evaluations} H evaluations over t={duration} us at tolerance {tolerance}"
        )
    if not solution.success:
        raise IntegrationError(f"Integrator failed: {solution.message}")

    final = StateVector(amplitudes=solution.y[:, -1], atom_count=state.atom_count)
    logger.debug(f"Evolved step-{spec.step.value} for {duration:.6g} us with {evaluations} H evaluations")
    if spec.decay is None:
        drift = abs(final.norm_squared() - state.norm_squared())
        if drift > 1e-9:
            logger.warning(f"Norm drifted by {drift:.3e} under a Hermitian step; tighten the tolerance")
    return final
