# hybridq/models.py
from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from hybridq.core.enums import Discretization, Frame, PropagatorMethod, RunMode
from hybridq.model import SystemParams

# default horizons per mode (us)
DEFAULT_T_END = {
    RunMode.SEMICLASSICAL: 0.3,
    RunMode.SWEEP: 0.3,
    RunMode.QUANTUM: 0.5,
    RunMode.WIGNER: 0.5,
}


class PropagatorConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    method: PropagatorMethod = Field(PropagatorMethod.TROTTER2, description="dense-expm | trotter2 | trotter2-truncated")
    dt: float = Field(1e-4, gt=0, description="Internal step (us)")
    svd_cutoff: float = Field(0.0, ge=0, lt=1, description="Relative singular-value cutoff for trotter2-truncated")
    max_rank: Optional[int] = Field(None, ge=1, description="Largest kept rank for trotter2-truncated (unbounded if omitted)")
    krylov_tol: float = Field(1e-10, gt=0, description="Residual tolerance of the Krylov exponential")
    krylov_dim: int = Field(30, ge=2, description="Krylov subspace dimension")


class DecayFit(BaseModel):
    """n(t) = n0 exp(-zeta omega0 t) through the envelope peaks."""
    model_config = ConfigDict(frozen=True)

    zeta: float = Field(description="Dimensionless decay rate")
    n0: float = Field(description="Fitted value at t = 0")
    residual_std: float = Field(ge=0, description="Std of linear-space residuals at the peak times")
    omega0: float = Field(10.0, gt=0, description="Reference frequency (MHz)")
    peaks: List[Tuple[float, float]] = Field(min_length=1, description="(t, value) pairs used in the fit")


class RunConfig(BaseModel):
    """Everything one invocation needs; built by cli.parse_config or cli.preset."""
    model_config = ConfigDict(frozen=True)

    mode: RunMode = Field(description="semiclassical | quantum | wigner | sweep")
    params: SystemParams
    n_classes: int = Field(200, ge=1, description="Frequency classes of the mean-field ensemble")
    n_spins_quantum: int = Field(4, ge=0, description="Explicit spins of the quantum model")
    fock_cutoff: int = Field(10, ge=2, description="Photon states 0..F-1")
    frame: Frame = Field(Frame.SQUEEZED, description="lab | squeezed | squeezed-rwa")
    r_values: List[float] = Field(default_factory=list, description="Squeezing parameters to run (default: the one set by eta)")
    delta_values: List[float] = Field(default_factory=list, description="Inhomogeneous widths to sweep (MHz)")
    propagator: PropagatorConfig = Field(default_factory=PropagatorConfig)
    initial_state: str = Field("1,2", description="Cavity Fock superposition, e.g. '1,2' or '0:0.6,1:0.8j'")
    t_end: Optional[float] = Field(None, gt=0, description="Horizon (us); mode default if omitted")
    dt_out: float = Field(5e-4, gt=0, description="Snapshot spacing (us)")
    output_dir: str = Field("out", description="Directory for CSV output")
    seed: Optional[int] = Field(None, description="Seed of the random discretization")
    discretization: Discretization = Field(Discretization.QUANTILE, description="quantile | random")
    omega0: float = Field(10.0, gt=0, description="Reference frequency of the decay fit (MHz)")
    peak_prominence: float = Field(1e-3, ge=0, description="Peak prominence relative to the series maximum")
    envelope_floor: float = Field(1e-9, ge=0, lt=1, description="Envelope level, relative to its start, below which samples leave the decay fit")
    save_rho_every: int = Field(0, ge=0, description="Write rho_c every k snapshots (0 = never)")
    wigner_extent: float = Field(4.0, gt=0, description="Wigner grid spans [-extent, extent] on both axes")
    wigner_resolution: int = Field(81, ge=2, description="Wigner grid points per axis")
    wigner_time: Optional[float] = Field(None, ge=0, description="Snapshot time for the Wigner map (default: last envelope peak)")
    workers: Optional[int] = Field(None, ge=1, description="Sweep worker processes (default: CPU count)")
    note: Optional[str] = Field(None, description="Free text copied into every output header")

    @model_validator(mode="after")
    def _mode_requirements(self) -> "RunConfig":
        if self.mode is RunMode.SWEEP and not self.r_values:
            raise ValueError("sweep mode needs a non-empty r_values list")
        if self.mode in (RunMode.SEMICLASSICAL, RunMode.SWEEP) and self.n_classes > self.params.n_spins:
            raise ValueError(f"n_classes={self.n_classes} exceeds n_spins={self.params.n_spins}")
        return self

    @property
    def horizon(self) -> float:
        return self.t_end if self.t_end is not None else DEFAULT_T_END[self.mode]

    def resolved_r_values(self) -> List[float]:
        return list(self.r_values) if self.r_values else [self.params.squeezing]

    def resolved_delta_values(self) -> List[float]:
        return list(self.delta_values) if self.delta_values else [self.params.delta_width]
