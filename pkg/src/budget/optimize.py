import math
from typing import Callable, NamedTuple, Optional, Tuple

from loguru import logger

from src.budget.error_budget import BudgetInputs, SweepResult, error_budget, sweep_budget
from src.errors import ConfigurationError, NoInteriorMinimum
from src.model.units import FrequencyValue

PHI_RATIO = 2 / (1 + math.sqrt(5))

class RabiOptimum(NamedTuple):
    omega_star: FrequencyValue
    e_min: float
    curve: Optional[SweepResult] = None

class GateOptimum(NamedTuple):
    omega_star: float
    e_min: float

def golden_section(f: Callable[[float], float], lower: float, upper: float, tol: float, max_iterations: int = 500) -> Tuple[float, float, int]:
    x1 = upper - PHI_RATIO * (upper - lower)
    x2 = lower + PHI_RATIO * (upper - lower)
    f1 = f(x1)
    f2 = f(x2)
    iteration = 0
    while iteration < max_iterations and abs(upper - lower) > tol:
        if f2 > f1:
            upper = x2
            x2, f2 = x1, f1
            x1 = upper - PHI_RATIO * (upper - lower)
            f1 = f(x1)
        else:
            lower = x1
            x1, f1 = x2, f2
            x2 = lower + PHI_RATIO * (upper - lower)
            f2 = f(x2)
        iteration += 1
    x = 0.5 * (lower + upper)
    return x, f(x), iteration

def optimize_rabi(
    inputs: BudgetInputs,
    bounds: Tuple[float, float] = (0.01, 10.0),
    tolerance: float = 1e-4,
    curve_points: Optional[int] = None,
) -> RabiOptimum:
    """Minimize the total budget over the drive frequency by golden section on log Ω."""
    lower, upper = bounds
    if not 0 < lower < upper:
        raise ConfigurationError(f"Bounds must satisfy 0 < lower < upper, got {bounds}")

    def objective(log_omega: float) -> float:
        return error_budget(inputs.with_drive_frequency(FrequencyValue.from_cyclic(math.exp(log_omega)))).total

    log_lower, log_upper = math.log(lower), math.log(upper)
    log_star, e_min, iterations = golden_section(objective, log_lower, log_upper, math.log1p(tolerance))
    logger.debug(f"Golden section converged in {iterations} iterations")

    if objective(log_lower) <= e_min or objective(log_upper) <= e_min:
        raise NoInteriorMinimum(f"Error budget has no interior minimum in [{lower}, {upper}] MHz")

    omega_star = FrequencyValue.from_cyclic(math.exp(log_star))
    logger.info(f"Optimum drive {omega_star.cyclic:.4f} MHz with total error {e_min:.4f}")
    curve = sweep_budget(inputs, lower, upper, curve_points) if curve_points else None
    return RabiOptimum(omega_star, e_min, curve)

def two_atom_gate_optimum(delta: float, tau: float, c_bl: float = 1.0, c_se: float = 1.0) -> GateOptimum:
    """Minimum of c_bl Ω²/Δ² + c_se/(Ωτ); Δ, Ω in rad/μs, τ in μs."""
    if min(delta, tau, c_bl, c_se) <= 0:
        raise ConfigurationError("Gate optimum needs positive delta, tau and coefficients")
    omega_star = (c_se * delta ** 2 / (2.0 * c_bl * tau)) ** (1.0 / 3.0)
    e_min = c_bl * omega_star ** 2 / delta ** 2 + c_se / (omega_star * tau)
    return GateOptimum(omega_star, e_min)
