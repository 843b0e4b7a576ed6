import math

import numpy as np
import pytest

from src.budget.error_budget import BudgetInputs, error_budget, log_grid, sweep_budget
from src.budget.optimize import golden_section, optimize_rabi, two_atom_gate_optimum
from src.budget.transfer import (
    TransferInputs,
    _checked_probability,
    nonresonant_populations,
    transfer_populations,
)
from src.errors import ConfigurationError, NoInteriorMinimum, NumericalFault
from src.model.drive import TransferMode
from src.model.units import FrequencyValue

CUBE_PAIR_FACTOR = 54 / 7

def _cube_inputs(**overrides) -> BudgetInputs:
    fields = dict(
        atom_count=8,
        omega=FrequencyValue.from_cyclic(0.3),
        tau_p=57.0,
        delta_sp_at_d=FrequencyValue.from_cyclic(14.4),
        delta_pp_at_d=FrequencyValue.from_cyclic(0.019),
        blockade_pair_factor=CUBE_PAIR_FACTOR,
        coefficient=9.39,
    )
    fields.update(overrides)
    return BudgetInputs(**fields)

def test_transfer_without_shift_is_complete():
    assert transfer_populations(TransferInputs(omega=1.0, delta=0.0)) == (0.0, 1.0)

def test_transfer_populations_stay_in_range():
    for ratio in np.linspace(0.0, 1000.0, 401):
        populations = transfer_populations(TransferInputs(omega=2.0, delta=2.0 * ratio))
        assert 0.0 <= populations.p1 <= 1.0
        assert populations.p0 + populations.p1 == pytest.approx(1.0)

def test_transfer_blocked_at_large_shift():
    p1 = transfer_populations(TransferInputs(omega=1.0, delta=100.0)).p1
    assert p1 == pytest.approx(math.pi ** 2 / 4 * (1 / 100) ** 2, rel=0.05)

def test_transfer_inputs_validation():
    with pytest.raises(ConfigurationError):
        TransferInputs(omega=0.0, delta=1.0)

def test_probability_clamping():
    assert _checked_probability(1.0 + 1e-13) == 1.0
    assert _checked_probability(-1e-13) == 0.0
    with pytest.raises(NumericalFault):
        _checked_probability(1.1)

def test_nonresonant_populations():
    omega_p = FrequencyValue.from_cyclic(1.0)
    delta0 = FrequencyValue.from_cyclic(20.0)
    t = 2 * math.pi * delta0.angular / omega_p.angular ** 2

    unshifted = nonresonant_populations(omega_p, delta0, FrequencyValue.from_cyclic(0.0), t)
    shifted = nonresonant_populations(omega_p, delta0, delta0, t)

    assert unshifted.p1 == pytest.approx(1.0)
    assert shifted.p1 == pytest.approx(0.5)
    assert not shifted.regime_warning

def test_nonresonant_regime_warning():
    omega_p = FrequencyValue.from_cyclic(1.0)
    result = nonresonant_populations(omega_p, FrequencyValue.from_cyclic(5.0), FrequencyValue.from_cyclic(0.0), 1.0)
    assert result.regime_warning

def test_cube_budget_components():
    budget = error_budget(_cube_inputs())

    assert budget.e_se == pytest.approx(8 / (8 * 0.3 * 57), rel=1e-9)
    assert budget.e_bl == pytest.approx(8 * math.pi ** 2 / 4 * (0.3 / 14.4) ** 2 * CUBE_PAIR_FACTOR, rel=1e-9)
    assert budget.e_tr == pytest.approx(9.39 * (0.019 / 0.3) ** 2, rel=1e-9)
    assert budget.total == pytest.approx(0.162, abs=2e-3)

def test_zeroed_budget():
    budget = error_budget(
        _cube_inputs(tau_p=math.inf, delta_sp_at_d=FrequencyValue.from_cyclic(math.inf),
                       delta_pp_at_d=FrequencyValue.from_cyclic(0.0))
    )
    assert budget.total == 0.0

def test_single_component_budget():
    inputs = _cube_inputs(delta_sp_at_d=FrequencyValue.from_cyclic(math.inf), delta_pp_at_d=FrequencyValue.from_cyclic(0.0))
    for row in sweep_budget(inputs, 0.05, 3.0, 20).rows:
        assert row.e_total == row.e_se

def test_nonresonant_budget_exceeds_resonant():
    resonant = error_budget(_cube_inputs())
    nonresonant = error_budget(
        _cube_inputs(mode=TransferMode.NONRESONANT, omega=None, delta0=FrequencyValue.from_cyclic(0.3), coefficient=113.0)
    )
    assert nonresonant.total > resonant.total

def test_budget_input_validation():
    with pytest.raises(ConfigurationError):
        _cube_inputs(omega=FrequencyValue.from_cyclic(0.0))
    with pytest.raises(ConfigurationError):
        _cube_inputs(mode=TransferMode.NONRESONANT)
    with pytest.raises(ConfigurationError):
        _cube_inputs(blockade_pair_factor=0.5)

def test_log_grid():
    grid = log_grid(0.05, 3.0, 200)

    assert grid[0] == pytest.approx(0.05)
    assert grid[-1] == pytest.approx(3.0)
    assert np.diff(np.log(grid)) == pytest.approx(math.log(60) / 199)
    with pytest.raises(ConfigurationError):
        log_grid(3.0, 0.05, 10)
    with pytest.raises(ConfigurationError):
        log_grid(0.05, 3.0, 1)

def test_sweep_finds_cube_minimum():
    result = sweep_budget(_cube_inputs(), 0.05, 3.0, 200)

    assert len(result.rows) == 200
    assert result.minimum.omega_mhz == pytest.approx(0.30, abs=0.02)
    assert result.minimum.e_total == pytest.approx(0.16, abs=0.01)

def test_sweep_refinement_keeps_shared_points():
    coarse = sweep_budget(_cube_inputs(), 0.05, 3.0, 50).rows
    fine = sweep_budget(_cube_inputs(), 0.05, 3.0, 99).rows
    for k, row in enumerate(coarse):
        assert fine[2 * k] == pytest.approx(row, rel=1e-12)

def test_golden_section_on_parabola():
    x, value, iterations = golden_section(lambda x: (x - 1.3) ** 2, 0.0, 4.0, 1e-8)
    assert x == pytest.approx(1.3, abs=1e-7)
    assert value == pytest.approx(0.0, abs=1e-12)
    assert iterations > 0

def test_optimize_rabi_cube():
    optimum = optimize_rabi(_cube_inputs(), curve_points=50)

    assert optimum.omega_star.cyclic == pytest.approx(0.30, abs=0.02)
    assert optimum.e_min == pytest.approx(0.16, abs=0.01)
    assert len(optimum.curve.rows) == 50

def _total_at(inputs: BudgetInputs, omega_mhz: float) -> float:
    return error_budget(inputs.with_drive_frequency(FrequencyValue.from_cyclic(omega_mhz))).total

def test_optimum_is_stationary():
    inputs = _cube_inputs()
    optimum = optimize_rabi(inputs)
    omega, step = optimum.omega_star.cyclic, 1e-4

    slope = (_total_at(inputs, omega + step) - _total_at(inputs, omega - step)) / (2 * step)
    assert abs(slope) < 1e-3 * optimum.e_min

def test_optimum_is_dimensionless():
    base = optimize_rabi(_cube_inputs())
    scaled = optimize_rabi(
        _cube_inputs(
            omega=FrequencyValue.from_cyclic(0.6),
            tau_p=57.0 / 2,
            delta_sp_at_d=FrequencyValue.from_cyclic(2 * 14.4),
            delta_pp_at_d=FrequencyValue.from_cyclic(2 * 0.019),
        )
    )

    assert scaled.e_min == pytest.approx(base.e_min, rel=1e-6)
    assert scaled.omega_star.cyclic == pytest.approx(2 * base.omega_star.cyclic, rel=1e-3)

def test_cube_budget_is_convex_unimodal():
    inputs = _cube_inputs()
    totals = np.array([_total_at(inputs, float(omega)) for omega in np.linspace(0.01, 10.0, 2001)])

    assert np.count_nonzero(np.diff(np.sign(np.diff(totals)))) == 1
    assert np.all(np.diff(totals, 2) > 0)

def test_optimize_rabi_without_interior_minimum():
    inputs = _cube_inputs(delta_sp_at_d=FrequencyValue.from_cyclic(math.inf), delta_pp_at_d=FrequencyValue.from_cyclic(0.0))
    with pytest.raises(NoInteriorMinimum):
        optimize_rabi(inputs)

def test_optimize_rabi_bounds():
    with pytest.raises(ConfigurationError):
        optimize_rabi(_cube_inputs(), bounds=(1.0, 0.1))

def test_two_atom_gate_optimum():
    optimum = two_atom_gate_optimum(1.0, 1.0)
    assert optimum.omega_star == pytest.approx(0.5 ** (1 / 3))
    assert optimum.e_min == pytest.approx(3 * 0.5 ** (2 / 3))

def test_two_atom_gate_realistic():
    optimum = two_atom_gate_optimum(2 * math.pi * 5.0, 200.0)
    assert optimum.e_min < 0.01
    with pytest.raises(ConfigurationError):
        two_atom_gate_optimum(0.0, 200.0)
