import math

import numpy as np
import pytest

from src.errors import ConfigurationError, NumericalFault
from src.model.drive import DriveSettings, TransferMode, step_one_duration, transfer_duration
from src.model.interactions import (
    AngularProfile,
    InteractionSet,
    angle_average,
    build_pair_table,
    coupling_at,
    lifetime_at,
    min_asymmetry,
    scale_to_principal_number,
)
from src.model.lattice import Lattice, LatticeKind, build_lattice, pair_average_power
from src.model.units import FrequencyValue

def test_frequency_units():
    value = FrequencyValue.from_cyclic(14.4)
    assert value.angular == pytest.approx(2 * math.pi * 14.4, rel=1e-12)
    assert FrequencyValue.from_angular(value.angular).cyclic == pytest.approx(14.4, rel=1e-12)

def test_cube_pair_distances():
    cube = build_lattice(LatticeKind.CUBE8, 3.0)
    expected = np.sqrt(np.repeat([1.0, 2.0, 3.0], [12, 12, 4]))

    assert cube.atom_count == 8
    assert np.sort(cube.pair_distances()) == pytest.approx(expected, abs=1e-12, rel=0)
    assert pair_average_power(cube, 6) == pytest.approx(54 / 7, rel=1e-12)

def test_sphere_cut_counts():
    assert build_lattice(LatticeKind.SPHERE_CUT, 3.0, R0=1.0).atom_count == 7
    assert build_lattice(LatticeKind.SPHERE_CUT, 3.0, R0=1.5).atom_count == 19

def test_chain_and_pair_indices():
    chain = build_lattice(LatticeKind.CHAIN, 3.0, count=3)
    assert chain.pair_indices() == [(0, 1), (0, 2), (1, 2)]
    assert chain.pair_distances().tolist() == [1.0, 2.0, 1.0]

def test_lattice_errors():
    with pytest.raises(ConfigurationError):
        build_lattice("hexagon", 3.0)
    with pytest.raises(ConfigurationError):
        build_lattice(LatticeKind.SPHERE_CUT, 3.0)
    with pytest.raises(ConfigurationError):
        build_lattice(LatticeKind.CHAIN, 3.0)
    with pytest.raises(ConfigurationError):
        Lattice(positions=((0.0, 0.0, 0.0), (2.0, 0.0, 0.0)), spacing_d=3.0, label=LatticeKind.PAIR)
    with pytest.raises(ConfigurationError):
        pair_average_power(build_lattice(LatticeKind.CHAIN, 3.0, count=1), 6)

def test_coupling_power_law():
    reference = FrequencyValue.from_cyclic(0.019)
    assert coupling_at(reference, 6, math.sqrt(2.0)).cyclic == pytest.approx(0.019 / 8)
    assert coupling_at(reference, 0, math.sqrt(3.0)).cyclic == pytest.approx(0.019)
    with pytest.raises(ConfigurationError):
        coupling_at(reference, 6, 0.5)

def test_pair_table_for_square():
    interactions = InteractionSet(
        delta_sp_at_d=FrequencyValue.from_cyclic(14.4),
        delta_pp_at_d=FrequencyValue.from_cyclic(0.019),
        delta_ss_at_d=FrequencyValue.from_cyclic(3.7),
    )
    table = build_pair_table(build_lattice(LatticeKind.SQUARE4, 3.0), interactions)

    assert len(table.entries) == 6
    diagonal = [entry for entry in table.entries if entry.R_over_d > 1.2]
    assert len(diagonal) == 2
    assert diagonal[0].delta_sp_ij.cyclic == pytest.approx(14.4 / 2 ** 1.5)

def test_invalid_exponent_rejected():
    with pytest.raises(ConfigurationError):
        InteractionSet(
            delta_sp_at_d=FrequencyValue.from_cyclic(14.4),
            delta_pp_at_d=FrequencyValue.from_cyclic(0.019),
            delta_ss_at_d=FrequencyValue.from_cyclic(3.7),
            gamma_pp=4,
        )

def test_angle_average_constant_profile():
    profile = AngularProfile.from_arrays([0.0, math.pi / 4, math.pi / 2], [14.4, 14.4, 14.4])
    assert angle_average(profile).cyclic == pytest.approx(14.4, rel=1e-6)

def test_angle_average_linear_profile():
    # ∫ (1 - 2θ/π) sinθ dθ = 1 - 2/π
    profile = AngularProfile.from_arrays([0.0, math.pi / 2], [1.0, 0.0])
    assert angle_average(profile).cyclic == pytest.approx(1 - 2 / math.pi, rel=1e-5)

def test_angle_average_without_convergence():
    profile = AngularProfile.from_arrays([0.0, math.pi / 2], [1.0, 0.0])
    with pytest.raises(NumericalFault):
        angle_average(profile, tolerance=1e-15, max_levels=2)

def test_angular_profile_validation():
    with pytest.raises(ConfigurationError):
        AngularProfile.from_arrays([], [])
    with pytest.raises(ConfigurationError):
        AngularProfile.from_arrays([0.0, 1.0, 0.5, math.pi / 2], [1.0, 1.0, 1.0, 1.0])
    with pytest.raises(ConfigurationError):
        AngularProfile.from_arrays([0.0, 1.0], [1.0, 1.0])

def test_min_asymmetry():
    sp = AngularProfile.from_arrays([0.0, math.pi / 2], [30.0, 30.0])
    pp = AngularProfile.from_arrays([0.0, math.pi / 2], [0.1, 0.2])
    assert min_asymmetry(sp, pp) == pytest.approx(150.0)

def test_principal_number_scaling():
    interactions = InteractionSet(
        delta_sp_at_d=FrequencyValue.from_cyclic(1.0),
        delta_pp_at_d=FrequencyValue.from_cyclic(1.0),
        delta_ss_at_d=FrequencyValue.from_cyclic(1.0),
    )
    scaled = scale_to_principal_number(interactions, 50, 100)

    assert scaled.delta_sp_at_d.cyclic == pytest.approx(16.0)
    assert scaled.delta_pp_at_d.cyclic == pytest.approx(2048.0)
    assert scaled.delta_ss_at_d.cyclic == 1.0
    assert lifetime_at(57.0, 50, 100) == pytest.approx(228.0)
    with pytest.raises(ConfigurationError):
        lifetime_at(57.0, 0, 100)

def test_pulse_durations():
    omega_s = FrequencyValue.from_cyclic(0.1)
    omega_p = FrequencyValue.from_cyclic(1.0)

    assert step_one_duration(omega_s, 4) == pytest.approx(1.25)
    assert transfer_duration(omega_p, FrequencyValue.from_cyclic(0.0), TransferMode.RESONANT) == pytest.approx(
        1 / math.sqrt(2.0)
    )
    assert transfer_duration(omega_p, FrequencyValue.from_cyclic(20.0), TransferMode.NONRESONANT) == pytest.approx(20.0)
    with pytest.raises(ConfigurationError):
        transfer_duration(omega_p, FrequencyValue.from_cyclic(0.0), TransferMode.NONRESONANT)

def test_effective_rabi_frequency():
    drive = DriveSettings(
        omega_s=FrequencyValue.from_cyclic(0.1),
        omega_p=FrequencyValue.from_cyclic(0.3 * math.sqrt(2.0)),
    )
    assert drive.effective_omega.cyclic == pytest.approx(0.3)
    assert drive.transfer_detuning.cyclic == 0.0
