# hybridq/semiclassical.py
"""
Mean-field equations of motion for the cavity amplitude and the per-class
spin expectations, integrated in the lab frame of H0. The photon number is
read out in the squeezed frame.
"""
import logging
import math
from dataclasses import dataclass
from typing import Any, List, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from hybridq.core.config import BLOCH_TOL, RK_ATOL, RK_RTOL
from hybridq.core.errors import ArgumentError, IntegrationError
from hybridq.model import SpinClasses, SystemParams

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class MeanFieldState:
    """<a>, <sigma_j^->, <sigma_j^z> for every spin class."""
    a: complex
    sm: np.ndarray
    sz: np.ndarray

    def __post_init__(self):
        sm = np.asarray(self.sm, dtype=complex)
        sz = np.asarray(self.sz, dtype=float)
        if sm.shape != sz.shape or sm.ndim != 1:
            raise ArgumentError(f"sm and sz must be equal-length vectors, got {sm.shape} and {sz.shape}")
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "sm", sm)
        object.__setattr__(self, "sz", sz)

    def __len__(self) -> int:
        return self.sm.shape[0]

    def pack(self) -> np.ndarray:
        """Real vector [Re a, Im a, Re sm, Im sm, sz] for the ODE solver."""
        return np.concatenate(([self.a.real, self.a.imag], self.sm.real, self.sm.imag, self.sz))

    @classmethod
    def unpack(cls, y: np.ndarray) -> "MeanFieldState":
        m = (len(y) - 2) // 3
        return cls(a=complex(y[0], y[1]), sm=y[2:2 + m] + 1j * y[2 + m:2 + 2 * m], sz=y[2 + 2 * m:])


@dataclass(frozen=True)
class TimeSeries:
    """Sampled observable. times strictly increasing, one value per time."""
    times: np.ndarray
    values: Any
    label: str

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        if len(times) != len(self.values):
            raise ArgumentError(f"{self.label}: {len(times)} times but {len(self.values)} values")
        if len(times) > 1 and np.any(np.diff(times) <= 0):
            raise ArgumentError(f"{self.label}: times must be strictly increasing")
        object.__setattr__(self, "times", times)

    def __len__(self) -> int:
        return len(self.times)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values)


def mean_field_derivative(
    a: complex,
    sm: np.ndarray,
    sz: np.ndarray,
    *,
    delta_c: float,
    eta: float,
    kappa: float,
    gamma_h: float,
    gamma_p: float,
    detunings: np.ndarray,
    couplings: np.ndarray,
    weights: np.ndarray,
):
    """Right-hand side of the factorized Heisenberg equations, on plain arrays."""
    da = -(kappa + 1j * delta_c) * a - 1j * np.sum(weights * couplings * sm) + 1j * eta * np.conj(a)
    dsm = -(gamma_h + 2.0 * gamma_p + 1j * detunings) * sm + 1j * couplings * sz * a
    # 2i g (sm a* - c.c.) = -4 g Im(sm a*)
    dsz = -2.0 * gamma_h * (1.0 + sz) - 4.0 * couplings * np.imag(sm * np.conj(a))
    return da, dsm, dsz


def rhs(state: MeanFieldState, params: SystemParams, classes: SpinClasses) -> MeanFieldState:
    """Time derivative of a mean-field state (returned as a MeanFieldState)."""
    if len(state) != len(classes):
        raise ArgumentError(f"state has {len(state)} classes, ensemble has {len(classes)}")
    da, dsm, dsz = mean_field_derivative(
        state.a, state.sm, state.sz,
        delta_c=params.delta_c, eta=params.eta, kappa=params.kappa,
        gamma_h=params.gamma_h, gamma_p=params.gamma_p,
        detunings=classes.detunings, couplings=classes.couplings, weights=classes.weights,
    )
    return MeanFieldState(a=da, sm=dsm, sz=dsz)


def check_bloch(state: MeanFieldState, tol: float = BLOCH_TOL, *, time: float | None = None) -> None:
    """Raise if any class left the Bloch ball (|sm| <= 1, |sz| <= 1)."""
    worst_sm = float(np.max(np.abs(state.sm), initial=0.0))
    worst_sz = float(np.max(np.abs(state.sz), initial=0.0))
    if worst_sm > 1.0 + tol or worst_sz > 1.0 + tol:
        raise IntegrationError(
            f"Bloch bound violated (max |sm|={worst_sm:.3g}, max |sz|={worst_sz:.3g})", last_time=time
        )


def _output_grid(t_end: float, dt_out: float) -> np.ndarray:
    """Multiples of dt_out up to t_end; the last point never overshoots t_end."""
    n = int(math.floor(t_end / dt_out + 1e-9))
    return np.minimum(dt_out * np.arange(n + 1), t_end)


def integrate(
    initial: MeanFieldState,
    params: SystemParams,
    classes: SpinClasses,
    t_end: float,
    dt_out: float,
) -> TimeSeries:
    """
    Adaptive DOP853 integration (rtol 1e-9, atol 1e-12) with snapshots at
    multiples of dt_out. The solver's internal steps depend only on t_end,
    so refining the output grid leaves the snapshots unchanged.
    """
    if t_end <= 0 or dt_out <= 0:
        raise ArgumentError(f"t_end and dt_out must be positive, got {t_end}, {dt_out}")
    if len(initial) != len(classes):
        raise ArgumentError(f"state has {len(initial)} classes, ensemble has {len(classes)}")

    m = len(classes)
    detunings, couplings, weights = classes.detunings, classes.couplings, classes.weights

    def _fun(_t, y):
        a = complex(y[0], y[1])
        sm = y[2:2 + m] + 1j * y[2 + m:2 + 2 * m]
        sz = y[2 + 2 * m:]
        da, dsm, dsz = mean_field_derivative(
            a, sm, sz,
            delta_c=params.delta_c, eta=params.eta, kappa=params.kappa,
            gamma_h=params.gamma_h, gamma_p=params.gamma_p,
            detunings=detunings, couplings=couplings, weights=weights,
        )
        return np.concatenate(([da.real, da.imag], dsm.real, dsm.imag, dsz))

    t_eval = _output_grid(t_end, dt_out)
    try:
        sol = solve_ivp(
            _fun, (0.0, float(t_end)), initial.pack(),
            method="DOP853", t_eval=t_eval, rtol=RK_RTOL, atol=RK_ATOL,
        )
    except (ValueError, ArithmeticError) as e:
        raise IntegrationError(f"mean-field integration failed: {e}") from e
    if not sol.success:
        last = float(sol.t[-1]) if sol.t.size else 0.0
        raise IntegrationError(f"mean-field integration failed: {sol.message}", last_time=last)

    states: List[MeanFieldState] = []
    for k, t in enumerate(sol.t):
        state = MeanFieldState.unpack(sol.y[:, k])
        check_bloch(state, time=float(t))
        states.append(state)
    log.debug("integrated %d classes to t=%.4g us (%d rhs evaluations)", m, t_end, sol.nfev)
    return TimeSeries(times=sol.t, values=states, label="state")


def photon_number_squeezed(a: complex, r: float) -> float:
    """cosh(2r)|a|^2 - sinh(2r) Re(a^2), evaluated as (Re a e^-r)^2 + (Im a e^r)^2."""
    a = complex(a)
    return (a.real * math.exp(-r)) ** 2 + (a.imag * math.exp(r)) ** 2


def photon_series(trajectory: TimeSeries, r: float) -> TimeSeries:
    amps = np.array([s.a for s in trajectory.values], dtype=complex)
    n = (amps.real * math.exp(-r)) ** 2 + (amps.imag * math.exp(r)) ** 2
    return TimeSeries(times=trajectory.times, values=n, label="n")


def initial_state_unit_photon(params: SystemParams, classes: SpinClasses, r: float) -> MeanFieldState:
    """a(0) = e^r (real), every spin down, so the squeezed-frame photon number is 1."""
    m = len(classes)
    return MeanFieldState(a=complex(math.exp(r), 0.0), sm=np.zeros(m, dtype=complex), sz=-np.ones(m))


def total_excitation(state: MeanFieldState, classes: SpinClasses) -> float:
    """|a|^2 + sum_j N_j (1 + sz_j) / 2; conserved when eta = kappa = gamma = 0."""
    return float(abs(state.a) ** 2 + np.sum(classes.weights * (1.0 + state.sz) / 2.0))


def amplitude_columns(trajectory: TimeSeries) -> Sequence[np.ndarray]:
    amps = np.array([s.a for s in trajectory.values], dtype=complex)
    return amps, np.abs(amps) ** 2
