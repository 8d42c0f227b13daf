# hybridq/model.py
"""
Physical parameters, squeezed-frame formulas and discretization of the
inhomogeneous spin distribution.

Units: every rate and detuning is an angular frequency in MHz and time is in
microseconds. Only detunings are stored; the rotating-frame dynamics never
needs the absolute cavity, spin or drive frequencies.
"""
import logging
import math
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.stats import norm

from hybridq.core.enums import DiscretizationEnum
from hybridq.core.errors import ArgumentError, DomainError

log = logging.getLogger(__name__)

INSTABILITY_MESSAGE = "drive exceeds parametric instability threshold (|eta| must stay below delta_c)"


# ---------------------------------------------------------------------------
# Frame formulas
# ---------------------------------------------------------------------------

def squeezing_parameter(eta: float, delta_c: float) -> float:
    """r = atanh(eta / delta_c) / 2."""
    if delta_c <= 0:
        raise ArgumentError(f"delta_c must be positive, got {delta_c}")
    if abs(eta) >= delta_c:
        raise DomainError(f"{INSTABILITY_MESSAGE}: eta={eta}, delta_c={delta_c}")
    return 0.5 * math.atanh(eta / delta_c)


def drive_for_r(r: float, delta_c: float) -> float:
    """Inverse of squeezing_parameter: eta = delta_c * tanh(2r)."""
    if delta_c <= 0:
        raise ArgumentError(f"delta_c must be positive, got {delta_c}")
    return delta_c * math.tanh(2.0 * r)


def effective_detuning(delta_c: float, r: float) -> float:
    """Cavity detuning in the squeezed frame, delta_c / cosh(2r) = sqrt(delta_c**2 - eta**2)."""
    return delta_c / math.cosh(2.0 * r)


def transformed_coupling(g: float, r: float) -> float:
    """Enhanced single-spin coupling g * e^r / 2 of the squeezed frame."""
    if g < 0:
        raise ArgumentError(f"coupling must be non-negative, got {g}")
    return g * math.exp(r) / 2.0


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

class SystemParams(BaseModel):
    """One simulation instance: rates, detunings and the drive."""
    model_config = ConfigDict(frozen=True)

    delta_c: float = Field(gt=0, description="Cavity detuning (MHz)")
    omega_coll: float = Field(ge=0, description="Collective coupling Omega = sqrt(N) g (MHz)")
    eta: float = Field(0.0, description="Parametric drive strength (MHz)")
    kappa: float = Field(0.0, ge=0, description="Cavity loss rate (MHz)")
    gamma_h: float = Field(0.0, ge=0, description="Spin radiative decay (MHz)")
    gamma_p: float = Field(0.0, ge=0, description="Spin dephasing (MHz)")
    delta_width: float = Field(0.0, ge=0, description="Gaussian inhomogeneous width (MHz)")
    n_spins: int = Field(1, ge=1, description="Physical number of spins")
    mean_spin_detuning: Optional[float] = Field(
        None, description="Centre of the spin detuning distribution (MHz); defaults to the squeezed-frame cavity detuning"
    )

    @model_validator(mode="after")
    def _below_threshold(self) -> "SystemParams":
        if abs(self.eta) >= self.delta_c:
            raise ValueError(f"{INSTABILITY_MESSAGE}: eta={self.eta}, delta_c={self.delta_c}")
        return self

    @property
    def squeezing(self) -> float:
        return squeezing_parameter(self.eta, self.delta_c)

    @property
    def coupling(self) -> float:
        """Identical single-spin coupling g = Omega / sqrt(N)."""
        return self.omega_coll / math.sqrt(self.n_spins)

    def resolved_mean_detuning(self) -> float:
        if self.mean_spin_detuning is not None:
            return self.mean_spin_detuning
        return effective_detuning(self.delta_c, self.squeezing)

    def with_drive(self, r: float) -> "SystemParams":
        return SystemParams(**{**self.model_dump(), "eta": drive_for_r(r, self.delta_c)})

    def with_width(self, delta_width: float) -> "SystemParams":
        return SystemParams(**{**self.model_dump(), "delta_width": delta_width})

    def with_spins(self, n_spins: int) -> "SystemParams":
        return SystemParams(**{**self.model_dump(), "n_spins": n_spins})


class SpinClass(BaseModel):
    model_config = ConfigDict(frozen=True)

    detuning: float = Field(description="Class detuning (MHz)")
    coupling: float = Field(ge=0, description="Single-spin coupling of the class (MHz)")
    multiplicity: int = Field(ge=1, description="Number of physical spins in the class")


class SpinClasses(BaseModel):
    """Discretized ensemble; the multiplicities add up to the physical spin count."""
    model_config = ConfigDict(frozen=True)

    classes: List[SpinClass]
    total: int = Field(ge=1)

    @model_validator(mode="after")
    def _multiplicities_add_up(self) -> "SpinClasses":
        counted = sum(c.multiplicity for c in self.classes)
        if counted != self.total:
            raise ValueError(f"multiplicities sum to {counted}, expected {self.total}")
        return self

    def __len__(self) -> int:
        return len(self.classes)

    @property
    def detunings(self) -> np.ndarray:
        return np.array([c.detuning for c in self.classes], dtype=float)

    @property
    def couplings(self) -> np.ndarray:
        return np.array([c.coupling for c in self.classes], dtype=float)

    @property
    def weights(self) -> np.ndarray:
        return np.array([c.multiplicity for c in self.classes], dtype=float)

    def collective_coupling(self) -> float:
        return float(np.sqrt(np.sum(self.weights * self.couplings ** 2)))

    def expanded(self) -> "SpinClasses":
        """One unit-multiplicity class per physical spin, same detunings and couplings."""
        unit = [
            SpinClass(detuning=c.detuning, coupling=c.coupling, multiplicity=1)
            for c in self.classes
            for _ in range(c.multiplicity)
        ]
        return SpinClasses(classes=unit, total=self.total)


class SqueezedFrame(BaseModel):
    model_config = ConfigDict(frozen=True)

    r: float
    delta_c_eff: float
    coupling_scale_plus: float
    coupling_scale_minus: float


def squeezed_frame(delta_c: float, r: float) -> SqueezedFrame:
    return SqueezedFrame(
        r=r,
        delta_c_eff=effective_detuning(delta_c, r),
        coupling_scale_plus=math.exp(r),
        coupling_scale_minus=math.exp(-r),
    )


# ---------------------------------------------------------------------------
# Discretization
# ---------------------------------------------------------------------------

def _multiplicities(n_spins: int, n_classes: int) -> np.ndarray:
    """N // M per class, remainder handed to the classes closest to the centre."""
    base, rem = divmod(n_spins, n_classes)
    counts = np.full(n_classes, base, dtype=int)
    centre = (n_classes - 1) / 2.0
    order = sorted(range(n_classes), key=lambda j: (abs(j - centre), j))
    counts[order[:rem]] += 1
    return counts


def discretize_gaussian(
    params: SystemParams,
    n_classes: int,
    *,
    sampling: DiscretizationEnum = DiscretizationEnum.QUANTILE,
    seed: Optional[int] = None,
) -> SpinClasses:
    """
    Split N identical-coupling spins into M frequency classes drawn from
    Gaussian(mean_spin_detuning, delta_width).

    quantile: class j sits at the (j - 1/2)/M quantile (deterministic)
    random:   M sorted draws from the Gaussian with numpy's default_rng(seed)

    Every class gets N // M spins, the remainder goes to the central classes.
    A zero width or a single class collapses to one class at the mean.
    """
    if n_classes < 1:
        raise ArgumentError(f"n_classes must be >= 1, got {n_classes}")
    if n_classes > params.n_spins:
        raise ArgumentError(f"n_classes={n_classes} exceeds n_spins={params.n_spins}")

    mean = params.resolved_mean_detuning()
    g = params.coupling

    if params.delta_width == 0 or n_classes == 1:
        return SpinClasses(
            classes=[SpinClass(detuning=mean, coupling=g, multiplicity=params.n_spins)],
            total=params.n_spins,
        )

    if DiscretizationEnum(sampling) is DiscretizationEnum.RANDOM:
        rng = np.random.default_rng(seed)
        positions = np.sort(rng.normal(mean, params.delta_width, n_classes))
    else:
        quantiles = (np.arange(1, n_classes + 1) - 0.5) / n_classes
        positions = mean + params.delta_width * norm.ppf(quantiles)

    counts = _multiplicities(params.n_spins, n_classes)
    classes = [
        SpinClass(detuning=float(d), coupling=g, multiplicity=int(n))
        for d, n in zip(positions, counts)
    ]
    log.debug("discretized %d spins into %d classes (width %.3g MHz)", params.n_spins, n_classes, params.delta_width)
    return SpinClasses(classes=classes, total=params.n_spins)
