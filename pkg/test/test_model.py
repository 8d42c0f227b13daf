import math

import numpy as np
import pytest

from hybridq.core.enums import DiscretizationEnum
from hybridq.core.errors import ArgumentError, DomainError
from hybridq.model import (
    SystemParams,
    discretize_gaussian,
    drive_for_r,
    effective_detuning,
    squeezed_frame,
    squeezing_parameter,
    transformed_coupling,
)

DC = 70000.0


def test_squeezing_parameter_values():
    assert squeezing_parameter(0.0, DC) == 0.0
    assert squeezing_parameter(DC * math.tanh(2.0), DC) == pytest.approx(1.0, rel=1e-12)


def test_squeezing_parameter_rejects_threshold():
    with pytest.raises(DomainError, match="parametric instability threshold"):
        squeezing_parameter(DC, DC)
    with pytest.raises(DomainError):
        squeezing_parameter(-1.5 * DC, DC)
    with pytest.raises(ArgumentError):
        squeezing_parameter(0.0, 0.0)


@pytest.mark.parametrize("r", [0.0, 0.3, 1.0, 2.0, 2.4, -0.7])
def test_drive_round_trip(r):
    assert squeezing_parameter(drive_for_r(r, DC), DC) == pytest.approx(r, rel=1e-12, abs=1e-15)


def test_drive_for_r_values():
    assert drive_for_r(0.0, DC) == 0.0
    assert drive_for_r(1.0, DC) == pytest.approx(DC * 0.9640275800758169, rel=1e-14)


def test_effective_detuning_values():
    assert effective_detuning(DC, 0.0) == DC
    assert effective_detuning(DC, 1.0) == pytest.approx(DC / 3.7621956910836314, rel=1e-13)
    assert effective_detuning(DC, 2.0) == pytest.approx(2563.33, rel=1e-5)


@pytest.mark.parametrize("r", [0.0, 0.5, 1.0, 2.0, 2.4])
def test_bogoliubov_identity(r):
    lhs = effective_detuning(DC, r) ** 2 + drive_for_r(r, DC) ** 2
    assert lhs == pytest.approx(DC ** 2, rel=1e-10)


def test_transformed_coupling():
    assert transformed_coupling(0.4, 0.0) == pytest.approx(0.2)
    assert transformed_coupling(0.4, 2.0) == pytest.approx(0.2 * math.e ** 2, rel=1e-14)
    assert transformed_coupling(0.0, 5.0) == 0.0
    with pytest.raises(ArgumentError):
        transformed_coupling(-1.0, 0.0)


def test_squeezed_frame_identity_at_zero():
    frame = squeezed_frame(DC, 0.0)
    assert frame.delta_c_eff == DC
    assert frame.coupling_scale_plus == 1.0
    assert frame.coupling_scale_minus == 1.0


def test_system_params_validation():
    with pytest.raises(ValueError, match="instability"):
        SystemParams(delta_c=10.0, omega_coll=1.0, eta=10.0)
    with pytest.raises(ValueError):
        SystemParams(delta_c=10.0, omega_coll=1.0, kappa=-1.0)
    with pytest.raises(ValueError):
        SystemParams(delta_c=10.0, omega_coll=1.0, n_spins=0)


def test_mean_detuning_defaults_to_squeezed_cavity():
    params = SystemParams(delta_c=DC, omega_coll=40.0).with_drive(2.0)
    assert params.squeezing == pytest.approx(2.0, rel=1e-12)
    assert params.resolved_mean_detuning() == pytest.approx(effective_detuning(DC, 2.0), rel=1e-10)
    pinned = SystemParams(delta_c=DC, omega_coll=40.0, mean_spin_detuning=5.0).with_drive(1.0)
    assert pinned.resolved_mean_detuning() == 5.0


def test_degenerate_distribution_single_class():
    params = SystemParams(delta_c=DC, omega_coll=40.0, delta_width=0.0, n_spins=100)
    classes = discretize_gaussian(params, 10)
    assert len(classes) == 1
    assert classes.classes[0].multiplicity == 100
    assert classes.classes[0].detuning == DC

    wide = SystemParams(delta_c=DC, omega_coll=40.0, delta_width=60.0, n_spins=100)
    assert len(discretize_gaussian(wide, 1)) == 1


def test_expanded_classes_keep_collective_coupling():
    params = SystemParams(delta_c=DC, omega_coll=40.0, delta_width=0.0, n_spins=4)
    collapsed = discretize_gaussian(params, 4)
    unit = collapsed.expanded()
    assert len(unit) == 4
    np.testing.assert_array_equal(unit.weights, [1, 1, 1, 1])
    np.testing.assert_allclose(unit.couplings, 20.0)
    assert unit.collective_coupling() == pytest.approx(40.0, rel=1e-14)

    mixed = discretize_gaussian(SystemParams(delta_c=DC, omega_coll=40.0, delta_width=60.0, n_spins=5), 2)
    np.testing.assert_allclose(mixed.expanded().detunings, np.repeat(mixed.detunings, mixed.weights.astype(int)))


def test_two_classes_at_quartiles():
    params = SystemParams(delta_c=DC, omega_coll=40.0, delta_width=60.0, n_spins=10, mean_spin_detuning=0.0)
    classes = discretize_gaussian(params, 2)
    np.testing.assert_allclose(classes.detunings, [-40.4694, 40.4694], atol=1e-3)
    np.testing.assert_array_equal(classes.weights, [5, 5])


def test_remainder_goes_to_central_classes():
    params = SystemParams(delta_c=DC, omega_coll=40.0, delta_width=60.0, n_spins=10)
    classes = discretize_gaussian(params, 4)
    np.testing.assert_array_equal(classes.weights, [2, 3, 3, 2])


@pytest.mark.parametrize("n_spins,n_classes", [(10000, 200), (7, 7), (1001, 10), (5, 1)])
def test_ensemble_invariants(n_spins, n_classes):
    params = SystemParams(delta_c=DC, omega_coll=40.0, delta_width=60.0, n_spins=n_spins)
    classes = discretize_gaussian(params, n_classes)
    assert classes.weights.sum() == n_spins
    assert classes.collective_coupling() ** 2 == pytest.approx(40.0 ** 2, rel=1e-12)


def test_weighted_mean_and_width_at_200_classes():
    params = SystemParams(delta_c=DC, omega_coll=40.0, delta_width=60.0, n_spins=10000)
    classes = discretize_gaussian(params, 200)
    w = classes.weights / classes.weights.sum()
    mean = np.sum(w * classes.detunings)
    assert abs(mean - DC) <= 1e-9 * DC
    std = math.sqrt(np.sum(w * (classes.detunings - mean) ** 2))
    assert std == pytest.approx(60.0, rel=0.02)


def test_too_many_classes():
    params = SystemParams(delta_c=DC, omega_coll=40.0, delta_width=60.0, n_spins=3)
    with pytest.raises(ArgumentError):
        discretize_gaussian(params, 4)
    with pytest.raises(ArgumentError):
        discretize_gaussian(params, 0)


def test_random_discretization_is_seeded():
    params = SystemParams(delta_c=DC, omega_coll=40.0, delta_width=60.0, n_spins=1000)
    a = discretize_gaussian(params, 50, sampling=DiscretizationEnum.RANDOM, seed=7)
    b = discretize_gaussian(params, 50, sampling=DiscretizationEnum.RANDOM, seed=7)
    np.testing.assert_array_equal(a.detunings, b.detunings)
    assert np.all(np.diff(a.detunings) >= 0)
    assert a.weights.sum() == 1000
    assert a.collective_coupling() == pytest.approx(40.0, rel=1e-12)
