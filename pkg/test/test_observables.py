import math

import numpy as np
import pytest

from hybridq.core.errors import ArgumentError, FitError
from hybridq.observables import (
    envelope_after,
    envelope_value,
    fidelity,
    fit_decay_rate,
    fit_envelope,
    fock_populations,
    peak_envelope,
    photon_number,
    reduce_to_cavity,
    state_fidelity,
    upper_envelope,
    wigner,
)
from hybridq.operators import DensitySuperket, HilbertSpec, product_state
from hybridq.semiclassical import TimeSeries


def _ket(*amps):
    v = np.array(amps, dtype=complex)
    return v / np.linalg.norm(v)


def test_reduce_product_state_returns_cavity_projector():
    ket = _ket(0, 1, 1, 0)
    rho = product_state(HilbertSpec(4, 2), ket)
    np.testing.assert_allclose(reduce_to_cavity(rho), np.outer(ket, ket.conj()), atol=1e-15)


def test_reduce_entangled_state_is_mixed():
    # (|up,1> + |down,0>)/sqrt(2), index = spin * F + n
    psi = np.zeros(4, dtype=complex)
    psi[0 * 2 + 1] = psi[1 * 2 + 0] = 1 / math.sqrt(2)
    rho = DensitySuperket.from_matrix(np.outer(psi, psi.conj()), HilbertSpec(2, 1))
    np.testing.assert_allclose(reduce_to_cavity(rho), np.diag([0.5, 0.5]), atol=1e-15)


def test_photon_number_and_populations():
    rho_c = np.diag([0.25, 0.5, 0.25]).astype(complex)
    assert photon_number(rho_c) == pytest.approx(1.0)
    np.testing.assert_allclose(fock_populations(rho_c), [0.25, 0.5, 0.25])


def test_fidelity_values():
    psi0 = _ket(0, 1, 1, 0)
    assert fidelity(np.outer(psi0, psi0.conj()), psi0) == pytest.approx(1.0)
    orth = _ket(1, 0, 0, 0)
    assert fidelity(np.outer(orth, orth), psi0) == pytest.approx(0.0)
    one = _ket(0, 1, 0, 0)
    assert fidelity(np.outer(one, one), psi0) == pytest.approx(math.sqrt(0.5))


def test_fidelity_requires_normalized_target():
    with pytest.raises(ArgumentError):
        fidelity(np.eye(3) / 3, np.array([1.0, 1.0, 0.0]))


def test_state_fidelity_pure_states_matches_overlap():
    a, b = _ket(1, 1, 0), _ket(1, 0, 0)
    f = state_fidelity(np.outer(a, a.conj()), np.outer(b, b.conj()))
    assert f == pytest.approx(abs(np.vdot(a, b)), abs=1e-6)
    mixed = np.eye(3) / 3
    assert state_fidelity(mixed, mixed) == pytest.approx(1.0, abs=1e-12)


def test_wigner_vacuum_is_gaussian():
    grid = wigner(np.diag([1.0, 0.0, 0.0]), (-3, 3), (-3, 3), 61)
    p, q = np.meshgrid(grid.p_axis, grid.q_axis, indexing="ij")
    np.testing.assert_allclose(grid.values, np.exp(-(p ** 2 + q ** 2)) / math.pi, atol=1e-12)
    centre = grid.values[30, 30]
    assert centre == pytest.approx(1 / math.pi, abs=1e-6)


def test_wigner_single_photon_negative_at_origin():
    grid = wigner(np.diag([0.0, 1.0, 0.0]), (-1, 1), (-1, 1), 3)
    assert grid.values[1, 1] == pytest.approx(-1 / math.pi, abs=1e-12)


def test_wigner_normalization_of_superposition():
    psi = _ket(0, 1, 1, 0, 0, 0)
    grid = wigner(np.outer(psi, psi.conj()), (-6, 6), (-6, 6), 241)
    assert grid.normalization() == pytest.approx(1.0, abs=1e-4)


def test_wigner_bounded_for_pure_states():
    rng = np.random.default_rng(3)
    psi = _ket(*(rng.normal(size=6) + 1j * rng.normal(size=6)))
    grid = wigner(np.outer(psi, psi.conj()), (-4, 4), (-4, 4), (41, 51))
    assert grid.values.shape == (41, 51)
    assert np.max(np.abs(grid.values)) <= 1 / math.pi + 1e-9


def test_wigner_rejects_degenerate_grid():
    with pytest.raises(ArgumentError):
        wigner(np.eye(2) / 2, (-1, 1), (-1, 1), 1)


def _damped_rabi(gamma=1.0, omega=10 * math.pi):
    t = np.linspace(0.0, 2.0, 2001)
    return TimeSeries(t, np.cos(omega * t) ** 2 * np.exp(-gamma * t), "n")


def test_peak_envelope_of_damped_oscillation():
    peaks = peak_envelope(_damped_rabi())
    assert len(peaks) == 20
    for k, (t, v) in enumerate(peaks):
        assert t == pytest.approx(0.1 * k, abs=2e-3)
        assert v == pytest.approx(math.exp(-t), rel=2e-3)


def test_peak_envelope_monotone_and_constant():
    t = np.linspace(0, 1, 50)
    assert peak_envelope(TimeSeries(t, np.exp(-t), "n")) == [(0.0, 1.0)]
    assert peak_envelope(TimeSeries(t, np.ones_like(t), "n")) == [(0.0, 1.0)]


def test_peak_envelope_needs_three_samples():
    with pytest.raises(ArgumentError):
        peak_envelope(TimeSeries([0.0, 1.0], [1.0, 2.0], "n"))


def test_fit_decay_rate_exact_exponential():
    t = np.linspace(0, 0.3, 7)
    fit = fit_decay_rate(list(zip(t, 2.0 * np.exp(-0.5 * 10.0 * t))), omega0=10.0)
    assert fit.zeta == pytest.approx(0.5, rel=1e-12)
    assert fit.n0 == pytest.approx(2.0, rel=1e-12)
    assert fit.residual_std < 1e-12
    assert envelope_value(fit, 0.1) == pytest.approx(2.0 * math.exp(-0.5))


def test_fit_decay_rate_constant_and_rescaled():
    flat = fit_decay_rate([(0.0, 3.0), (0.1, 3.0), (0.2, 3.0)])
    assert abs(flat.zeta) < 1e-12
    peaks = [(0.0, 1.0), (0.1, 0.6), (0.2, 0.35)]
    base = fit_decay_rate(peaks)
    scaled = fit_decay_rate([(t, 7.0 * n) for t, n in peaks])
    assert scaled.zeta == pytest.approx(base.zeta, rel=1e-12)
    assert scaled.n0 == pytest.approx(7.0 * base.n0, rel=1e-12)


def test_fit_decay_rate_needs_two_positive_peaks():
    with pytest.raises(FitError):
        fit_decay_rate([(0.0, 1.0)])
    with pytest.raises(FitError):
        fit_decay_rate([(0.0, 1.0), (0.1, 0.0), (0.2, -1.0)])


def test_fit_envelope_on_damped_oscillation():
    series = _damped_rabi(gamma=1.0)
    fit = fit_envelope(series, omega0=10.0)
    assert fit.zeta == pytest.approx(0.1, rel=1e-2)
    assert len(fit.peaks) == len(series)
    values = [n for _, n in fit.peaks]
    assert all(b <= a for a, b in zip(values, values[1:]))


def test_fit_envelope_of_monotone_decay_is_exact():
    t = np.linspace(0, 0.5, 26)
    fit = fit_envelope(TimeSeries(t, np.exp(-3.0 * t), "n"), omega0=10.0)
    assert fit.zeta == pytest.approx(0.3, rel=1e-9)
    assert fit.n0 == pytest.approx(1.0, rel=1e-9)
    assert len(fit.peaks) == 26


def test_fit_envelope_ignores_ripple_minima():
    # a fast ripple on a slow exponential must not pull the fit towards the dips
    t = np.linspace(0, 1.0, 4001)
    slow = np.exp(-2.0 * t)
    rippled = slow * (1.0 - 0.3 * np.sin(200 * np.pi * t) ** 2)
    fit = fit_envelope(TimeSeries(t, rippled, "n"), omega0=10.0)
    assert fit.zeta == pytest.approx(0.2, rel=2e-2)


def test_fit_envelope_floor_cuts_late_revivals():
    t = np.linspace(0, 0.5, 501)
    y = np.exp(-30.0 * t)
    y[t > 0.3] += 1e-3 * np.sin(40 * np.pi * t[t > 0.3]) ** 2
    fit = fit_envelope(TimeSeries(t, y, "n"), omega0=10.0, floor=1e-2)
    assert fit.zeta == pytest.approx(3.0, rel=1e-9)
    assert max(tp for tp, _ in fit.peaks) < 0.16
    flattened = fit_envelope(TimeSeries(t, y, "n"), omega0=10.0, floor=0.0)
    assert flattened.zeta < fit.zeta


def test_fit_envelope_needs_positive_series():
    t = np.linspace(0, 1, 11)
    with pytest.raises(FitError):
        fit_envelope(TimeSeries(t, np.zeros_like(t), "n"))
    with pytest.raises(FitError):
        fit_envelope(TimeSeries([0.0], [1.0], "n"))


def test_upper_envelope_lifts_dips():
    t = np.arange(6.0)
    upper = upper_envelope(TimeSeries(t, [1.0, 0.2, 0.5, 0.1, 0.3, 0.0], "F"))
    np.testing.assert_array_equal(upper.values, [1.0, 0.5, 0.5, 0.3, 0.3, 0.0])
    np.testing.assert_array_equal(upper.times, t)


def test_envelope_after():
    series = TimeSeries(np.arange(6.0), [1.0, 0.2, 0.5, 0.1, 0.3, 0.0], "F")
    assert envelope_after(series, 2.5) == 0.3
    assert envelope_after(series, 0.0) == 1.0
    with pytest.raises(ArgumentError):
        envelope_after(series, 6.5)
