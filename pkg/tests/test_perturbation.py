import math
from dataclasses import replace

import numpy as np
import pytest

from src.errors import ConfigurationError
from src.model.drive import TransferMode
from src.model.interactions import InteractionSet, build_pair_table
from src.model.lattice import LatticeKind, build_lattice
from src.model.units import FrequencyValue
from src.perturbation.coefficients import (
    coefficient_for_lattice,
    extract_coefficient,
    published_coefficient,
    resonant_closed_form,
    validate_against_exact,
)
from src.perturbation.eigensystem import DARK, MINUS, PLUS, single_atom_eigensystem
from src.perturbation.transfer_error import DEGENERACY_THRESHOLD, first_order_error, pair_kernel

def test_resonant_eigensystem():
    eigen = single_atom_eigensystem(FrequencyValue.from_cyclic(1.0), FrequencyValue.from_cyclic(0.0))
    w = 2 * math.pi / math.sqrt(2.0)

    assert eigen.frequencies[DARK] == 0.0
    assert eigen.frequencies[PLUS] == pytest.approx(w)
    assert eigen.frequencies[MINUS] == pytest.approx(-w)
    assert np.abs(eigen.rydberg_overlaps[[PLUS, MINUS]]) == pytest.approx([1 / math.sqrt(2.0)] * 2)
    assert np.sum(np.abs(eigen.state_overlaps) ** 2) == pytest.approx(1.0)

def test_detuned_eigensystem_sum_rules():
    omega_p = FrequencyValue.from_cyclic(1.0)
    eigen = single_atom_eigensystem(omega_p, omega_p.scaled(50.0))
    w = omega_p.angular / math.sqrt(2.0)

    assert np.sum(np.abs(eigen.rydberg_overlaps) ** 2) == pytest.approx(1.0)
    assert np.sum(np.abs(eigen.state_overlaps) ** 2) == pytest.approx(1.0)
    assert eigen.frequencies[MINUS] == pytest.approx(-w ** 2 / omega_p.scaled(50.0).angular, rel=1e-3)

def test_single_atom_has_no_transfer_error():
    lattice = build_lattice(LatticeKind.CHAIN, 1.0, count=1)
    assert coefficient_for_lattice(lattice, 6, TransferMode.RESONANT) == 0.0

def test_pair_coefficient():
    result = extract_coefficient("pair", 6, "resonant")

    assert result.atom_count == 2
    assert result.value == pytest.approx(31 * math.pi ** 2 / 1024, rel=1e-6)
    assert result.value == pytest.approx(0.299, rel=0.03)

def test_pair_coefficient_ignores_exponent():
    assert extract_coefficient("pair", 0, "resonant").value == extract_coefficient("pair", 6, "resonant").value

@pytest.mark.parametrize(
    "geometry, exponent, published",
    [("square4", 0, 3.82), ("cube8", 0, 36.8), ("cube8", 6, 9.39)],
)
def test_resonant_coefficients_match_published(geometry, exponent, published):
    assert extract_coefficient(geometry, exponent, "resonant").value == pytest.approx(published, rel=0.03)

@pytest.mark.parametrize("geometry", ["pair", "square4", "cube8"])
@pytest.mark.parametrize("exponent", [0, 6])
def test_resonant_coefficients_match_closed_form(geometry, exponent):
    value = extract_coefficient(geometry, exponent, "resonant").value
    closed = resonant_closed_form(build_lattice(geometry, 1.0), exponent)
    assert value == pytest.approx(closed, rel=1e-6)

def test_square_r6_published_value_is_flagged():
    assert resonant_closed_form(build_lattice("square4", 1.0), 6) == pytest.approx(2.072, rel=1e-3)
    assert not published_coefficient("square4", 6, "resonant").reproducible
    assert published_coefficient("cube8", 6, "resonant").reproducible
    assert published_coefficient("chain", 6, "resonant") is None

def test_coefficient_independent_of_shift_ratio():
    cube = build_lattice(LatticeKind.CUBE8, 1.0)
    coarse = coefficient_for_lattice(cube, 6, TransferMode.RESONANT, shift_ratio=1e-3)
    fine = coefficient_for_lattice(cube, 6, TransferMode.RESONANT, shift_ratio=2e-3)
    assert fine == pytest.approx(coarse, rel=1e-3)

def test_nonresonant_pair_limit():
    # The |pp> admixture picks up Δ_pp t; at large Δ0 each pair adds π²/4 w².
    value = extract_coefficient("pair", 6, "nonresonant", detuning_ratio=20.0).value
    assert value == pytest.approx(math.pi ** 2 / 4, rel=0.05)

def test_nonresonant_square_structure():
    beta_6 = extract_coefficient("square4", 6, "nonresonant").value
    beta_0 = extract_coefficient("square4", 0, "nonresonant").value
    alpha_6 = extract_coefficient("square4", 6, "resonant").value

    assert beta_6 == pytest.approx(math.pi ** 2 / 4 * (4 + 2 / 64), rel=0.05)
    assert beta_0 == pytest.approx(math.pi ** 2 / 4 * 6, rel=0.05)
    assert beta_6 < beta_0
    assert beta_6 > alpha_6

@pytest.mark.parametrize("detuning_ratio", [10.0, 20.0, 40.0, 70.0, 100.0])
def test_nonresonant_detuning_independence(detuning_ratio):
    value = extract_coefficient("square4", 6, "nonresonant", detuning_ratio=detuning_ratio).value
    published = published_coefficient("square4", 6, "nonresonant").value

    assert value == pytest.approx(math.pi ** 2 / 4 * (4 + 2 / 64), rel=0.05)
    assert value < 0.75 * published

def test_coefficient_argument_errors():
    with pytest.raises(ConfigurationError):
        extract_coefficient("sphere_cut", 6, "resonant")
    with pytest.raises(ConfigurationError):
        extract_coefficient("hexagon", 6, "resonant")
    with pytest.raises(ConfigurationError):
        extract_coefficient("pair", 3, "resonant")
    with pytest.raises(ConfigurationError):
        extract_coefficient("pair", 6, "nonresonant", detuning_ratio=5.0)

def test_perturbation_size_cap():
    lattice = build_lattice(LatticeKind.SPHERE_CUT, 1.0, R0=1.5)
    with pytest.raises(ConfigurationError):
        coefficient_for_lattice(lattice, 6, TransferMode.RESONANT)

def test_first_order_error_rejects_nonpositive_time():
    interactions = InteractionSet(
        delta_sp_at_d=FrequencyValue.from_cyclic(0.0),
        delta_pp_at_d=FrequencyValue.from_cyclic(0.01),
        delta_ss_at_d=FrequencyValue.from_cyclic(0.0),
    )
    table = build_pair_table(build_lattice(LatticeKind.PAIR, 1.0), interactions)
    eigen = single_atom_eigensystem(FrequencyValue.from_cyclic(1.0), FrequencyValue.from_cyclic(0.0))
    with pytest.raises(ConfigurationError):
        first_order_error(table, eigen, 0.0)

@pytest.mark.parametrize("geometry", ["pair", "square4"])
def test_perturbation_agrees_with_exact_evolution(geometry):
    comparison = validate_against_exact(geometry, 6, "resonant", 0.01)
    assert comparison.relative_gap <= 0.05

def test_exact_validation_limits():
    assert validate_against_exact("pair", 6, "resonant", 0.0) == (0.0, 0.0, 0.0)
    with pytest.raises(ConfigurationError):
        validate_against_exact("pair", 6, "resonant", 0.1)
    with pytest.raises(ConfigurationError):
        validate_against_exact("cube8", 6, "resonant", 0.01)

def test_coefficient_for_any_interaction_exponent():
    square = build_lattice(LatticeKind.SQUARE4, 1.0)
    value = coefficient_for_lattice(square, 3, TransferMode.RESONANT)
    assert value == pytest.approx(resonant_closed_form(square, 3), rel=1e-6)
    with pytest.raises(ConfigurationError):
        coefficient_for_lattice(square, 5, TransferMode.RESONANT)

def test_coefficients_grow_with_geometry():
    alpha = {
        (geometry, exponent): extract_coefficient(geometry, exponent, "resonant").value
        for geometry in ("pair", "square4", "cube8")
        for exponent in (0, 6)
    }
    assert alpha["pair", 6] < alpha["square4", 6] < alpha["cube8", 6]
    assert alpha["square4", 6] <= alpha["square4", 0]
    assert alpha["cube8", 6] <= alpha["cube8", 0]

def test_degenerate_denominator_is_continuous():
    eigen = single_atom_eigensystem(FrequencyValue.from_cyclic(1.0), FrequencyValue.from_cyclic(0.0))
    threshold = DEGENERACY_THRESHOLD * eigen.scale
    table = build_pair_table(
        build_lattice(LatticeKind.PAIR, 1.0),
        InteractionSet(
            delta_sp_at_d=FrequencyValue.from_cyclic(0.0),
            delta_pp_at_d=FrequencyValue.from_cyclic(0.01),
            delta_ss_at_d=FrequencyValue.from_cyclic(0.0),
        ),
    )
    t = 0.7

    def detuned(offset):
        # ω_plus + ω_minus moves off zero by `offset`.
        frequencies = eigen.frequencies.copy()
        frequencies[MINUS] += offset
        return replace(eigen, frequencies=frequencies)

    below, above = detuned(0.5 * threshold), detuned(2.0 * threshold)
    kernel_below, kernel_above = pair_kernel(below, t), pair_kernel(above, t)

    assert np.max(np.abs(kernel_above - kernel_below)) <= 1e-6 * np.max(np.abs(kernel_below))
    assert first_order_error(table, above, t) == pytest.approx(first_order_error(table, below, t), rel=1e-6)
