# hybridq/observables.py
"""
Physical read-outs: reduced cavity state, fidelities, the Wigner function,
Rabi-peak envelopes and the exponential decay fit.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple, Union

import numpy as np
from scipy.signal import find_peaks
from scipy.special import eval_genlaguerre, gammaln

from hybridq.core.config import ENVELOPE_FLOOR, OMEGA0, PEAK_PROMINENCE
from hybridq.core.errors import ArgumentError, FitError
from hybridq.models import DecayFit
from hybridq.operators import DensitySuperket
from hybridq.semiclassical import TimeSeries

log = logging.getLogger(__name__)

Peak = Tuple[float, float]


@dataclass(frozen=True)
class WignerGrid:
    """values[i, j] = W(p_axis[i], q_axis[j])."""
    p_axis: np.ndarray
    q_axis: np.ndarray
    values: np.ndarray
    cell_area: float

    def normalization(self) -> float:
        return float(self.values.sum() * self.cell_area)


def reduce_to_cavity(rho: DensitySuperket) -> np.ndarray:
    """Partial trace over every spin factor."""
    s, f = rho.basis.spin_dim, rho.basis.fock_cutoff
    return np.einsum("iaib->ab", rho.vec.reshape(s, f, s, f))


def photon_number(rho_c: np.ndarray) -> float:
    return float(np.real(np.dot(np.arange(rho_c.shape[0]), np.diag(rho_c))))


def fock_populations(rho_c: np.ndarray) -> np.ndarray:
    return np.real(np.diag(rho_c)).copy()


def fidelity(rho_c: np.ndarray, psi0: np.ndarray) -> float:
    """sqrt(<psi0|rho_c|psi0>), clamped to [0, 1]."""
    psi0 = np.asarray(psi0, dtype=complex)
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-9:
        raise ArgumentError(f"target state must be normalized, |psi0| = {np.linalg.norm(psi0):.12g}")
    overlap = float(np.real(np.vdot(psi0, np.asarray(rho_c) @ psi0)))
    return math.sqrt(min(max(overlap, 0.0), 1.0))


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def state_fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Root fidelity tr sqrt(sqrt(rho) sigma sqrt(rho)) between two density matrices."""
    root = _psd_sqrt(np.asarray(rho, dtype=complex))
    inner = root @ np.asarray(sigma, dtype=complex) @ root
    w = np.linalg.eigvalsh(0.5 * (inner + inner.conj().T))
    return float(min(np.sqrt(np.clip(w, 0.0, None)).sum(), 1.0))


def wigner(
    rho_c: np.ndarray,
    p_range: Tuple[float, float],
    q_range: Tuple[float, float],
    resolution: Union[int, Tuple[int, int]],
) -> WignerGrid:
    """
    W(p, q) from the Fock-basis Laguerre expansion, alpha = (p + iq)/sqrt(2):

        W = e^{-2|alpha|^2}/pi * sum_m [ (-1)^m rho_mm L_m(4|alpha|^2)
              + 2 sum_{n>m} Re(rho_mn (-1)^m (2 alpha)^{n-m} sqrt(m!/n!) L_m^{n-m}(4|alpha|^2)) ]

    Vacuum gives exp(-(p^2 + q^2))/pi.
    """
    rho_c = np.asarray(rho_c, dtype=complex)
    n_p, n_q = (resolution, resolution) if np.isscalar(resolution) else resolution
    if n_p < 2 or n_q < 2:
        raise ArgumentError(f"resolution must be at least 2 points per axis, got {resolution}")
    p_axis = np.linspace(p_range[0], p_range[1], int(n_p))
    q_axis = np.linspace(q_range[0], q_range[1], int(n_q))
    p, q = np.meshgrid(p_axis, q_axis, indexing="ij")
    alpha = (p + 1j * q) / math.sqrt(2.0)
    b = 4.0 * np.abs(alpha) ** 2

    dim = rho_c.shape[0]
    acc = np.zeros_like(b)
    for m in range(dim):
        sign = -1.0 if m % 2 else 1.0
        if rho_c[m, m] != 0:
            acc += sign * np.real(rho_c[m, m]) * eval_genlaguerre(m, 0, b)
        for n in range(m + 1, dim):
            if rho_c[m, n] == 0:
                continue
            ratio = math.exp(0.5 * (gammaln(m + 1) - gammaln(n + 1)))
            acc += 2.0 * np.real(
                rho_c[m, n] * sign * (2.0 * alpha) ** (n - m) * ratio * eval_genlaguerre(m, n - m, b)
            )
    values = acc * np.exp(-0.5 * b) / math.pi
    cell = float((p_axis[1] - p_axis[0]) * (q_axis[1] - q_axis[0]))
    return WignerGrid(p_axis=p_axis, q_axis=q_axis, values=values, cell_area=cell)


def peak_envelope(series: TimeSeries, prominence: float = PEAK_PROMINENCE) -> List[Peak]:
    """
    Strict local maxima whose prominence is at least prominence * max(series),
    plus the global maximum (first index on ties, endpoints allowed).
    """
    y = np.real(np.asarray(series.values)).astype(float)
    if y.shape[0] < 3:
        raise ArgumentError(f"peak_envelope needs at least 3 samples, got {y.shape[0]}")
    scale = float(np.max(np.abs(y)))
    idx, _ = find_peaks(y, prominence=prominence * scale if scale > 0 else None)
    strict = {int(i) for i in idx if y[i] > y[i - 1] and y[i] > y[i + 1]}
    strict.add(int(np.argmax(y)))
    return [(float(series.times[i]), float(y[i])) for i in sorted(strict)]


def fit_decay_rate(peaks: Sequence[Peak], omega0: float = OMEGA0) -> DecayFit:
    """
    Least squares of log(n) against t: n(t) = n0 exp(-zeta omega0 t).
    residual_std is measured in linear space at the peak times.
    """
    usable = [(float(t), float(n)) for t, n in peaks if n > 0]
    if len(usable) < 2:
        raise FitError(f"need at least 2 positive peaks to fit a decay, got {len(usable)}")
    t = np.array([p[0] for p in usable])
    n = np.array([p[1] for p in usable])
    slope, intercept = np.polyfit(t, np.log(n), 1)
    zeta = -slope / omega0
    n0 = math.exp(intercept)
    residual = n - n0 * np.exp(-zeta * omega0 * t)
    return DecayFit(
        zeta=float(zeta), n0=n0, residual_std=float(np.std(residual)),
        omega0=omega0, peaks=usable,
    )


def upper_envelope(series: TimeSeries) -> TimeSeries:
    """E(t) = max of the series over s >= t; non-increasing, touches every peak higher than all later ones."""
    y = np.real(np.asarray(series.values)).astype(float)
    upper = np.maximum.accumulate(y[::-1])[::-1]
    return TimeSeries(times=series.times, values=upper, label=f"{series.label} envelope")


def envelope_after(series: TimeSeries, t: float) -> float:
    """Upper envelope at time t, i.e. the largest value reached from t on."""
    # grid points that miss t by rounding still count
    y = np.real(np.asarray(series.values))[series.times >= t - 1e-12 * max(1.0, abs(t))]
    if y.size == 0:
        raise ArgumentError(f"{series.label}: no samples at or after t={t}")
    return float(np.max(y))


def fit_envelope(series: TimeSeries, omega0: float = OMEGA0, floor: float = ENVELOPE_FLOOR) -> DecayFit:
    """
    Decay fit of the upper envelope on every output sample. Oscillating and
    overdamped runs go through the same estimator, and the counter-rotating
    ripple cannot add low maxima. Samples below floor * E(0) are dropped.
    """
    if len(series) < 2:
        raise FitError(f"{series.label}: need at least 2 samples, got {len(series)}")
    upper = upper_envelope(series)
    values = upper.values
    if values[0] <= 0:
        raise FitError(f"{series.label}: envelope is not positive")
    keep = values >= floor * values[0]
    if not keep.all():
        log.info("%s: envelope falls below %.3g of its start at t=%.4g, fit window cut there",
                 series.label, floor, float(upper.times[~keep][0]))
    return fit_decay_rate(list(zip(upper.times[keep], values[keep])), omega0)


def envelope_value(fit: DecayFit, t: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    return fit.n0 * np.exp(-fit.zeta * fit.omega0 * np.asarray(t))
