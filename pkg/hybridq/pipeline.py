# hybridq/pipeline.py
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd

from hybridq.core.config import LATE_FRACTION
from hybridq.core.enums import RunModeEnum
from hybridq.model import discretize_gaussian
from hybridq.models import DecayFit, RunConfig
from hybridq.observables import (
    envelope_after,
    envelope_value,
    fidelity,
    fit_envelope,
    peak_envelope,
    photon_number,
    reduce_to_cavity,
    wigner,
)
from hybridq.operators import HilbertSpec, build_liouvillian, parse_fock_superposition, product_state
from hybridq.propagate import iter_evolve
from hybridq.semiclassical import TimeSeries, amplitude_columns
from hybridq.services.documents import serialize_config
from hybridq.services.persistence import write_cavity_state, write_csv
from hybridq.services.sweep_workers import mean_field_point, run_sweep

log = logging.getLogger(__name__)

N_T_COLUMNS = {
    "t": "time (us)",
    "n": "squeezed-frame photon number",
    "abs_a2": "|<a>|^2 (lab frame)",
    "re_a": "Re <a>",
    "im_a": "Im <a>",
}
DECAY_COLUMNS = {
    "r": "squeezing parameter",
    "delta": "inhomogeneous width (MHz)",
    "zeta": "dimensionless decay rate",
    "n0": "fitted n(0)",
    "residual_std": "std of envelope residuals",
    "n_points": "envelope samples in the fit",
}
SWEEP_COLUMNS = {k: DECAY_COLUMNS[k] for k in ("delta", "r", "zeta", "n0", "residual_std", "n_points")}
FIDELITY_COLUMNS = {
    "t": "time (us)",
    "F": "sqrt(<psi0|rho_c|psi0>)",
    "n": "cavity photon number",
}
FIDELITY_FIT_COLUMNS = {
    **DECAY_COLUMNS,
    "late_envelope": "max F over the final 40% of the run",
    "fit_end": "fitted envelope at t_end",
}
WIGNER_COLUMNS = {"p": "position-like quadrature", "q": "momentum-like quadrature", "W": "Wigner function"}


@dataclass
class QuantumTrace:
    r: float
    times: np.ndarray
    fidelity: np.ndarray
    photons: np.ndarray
    cavity_states: List[np.ndarray]
    files: List[Path] = field(default_factory=list)

    def series(self) -> TimeSeries:
        return TimeSeries(times=self.times, values=self.fidelity, label="fidelity")


def _tag(r: float, many: bool) -> str:
    return f"_r{r:g}" if many else ""


def _quantum_trace(config: RunConfig, r: float, text: str, out_dir: Path, tag: str) -> QuantumTrace:
    n_q = config.n_spins_quantum
    spec = HilbertSpec(config.fock_cutoff, n_q)
    params = config.params.with_drive(r).with_spins(max(n_q, 1))
    classes = discretize_gaussian(params, n_q, sampling=config.discretization, seed=config.seed) if n_q else None
    liouvillian = build_liouvillian(spec, params, classes, config.frame, r)

    psi0 = parse_fock_superposition(config.initial_state, config.fock_cutoff)
    rho0 = product_state(spec, psi0)

    times, fids, photons, states = [], [], [], []
    files: List[Path] = []
    total = int(math.floor(config.horizon / config.dt_out + 1e-9)) + 1
    for i, snap in enumerate(iter_evolve(liouvillian, rho0, config.horizon, config.dt_out, config.propagator)):
        rho_c = reduce_to_cavity(snap)
        times.append(snap.time)
        fids.append(fidelity(rho_c, psi0))
        photons.append(photon_number(rho_c))
        states.append(rho_c)
        if config.save_rho_every and i % config.save_rho_every == 0:
            files.append(write_cavity_state(
                out_dir / f"rho_c{tag}_{i:05d}.csv", rho_c,
                config_text=text, time=snap.time, note=config.note,
            ))
        if total >= 10 and (i + 1) % (total // 10) == 0:
            log.info("🔧 r=%g: %d/%d snapshots, F=%.4f", r, i + 1, total, fids[-1])
    return QuantumTrace(
        r=r, times=np.array(times), fidelity=np.array(fids), photons=np.array(photons),
        cavity_states=states, files=files,
    )


def _fit_row(r: float, delta: float, fit: DecayFit) -> dict:
    return {
        "r": r, "delta": delta, "zeta": fit.zeta, "n0": fit.n0,
        "residual_std": fit.residual_std, "n_points": len(fit.peaks),
    }


def _run_semiclassical(config: RunConfig, text: str, out_dir: Path) -> List[Path]:
    files: List[Path] = []
    rows = []
    r_values = config.resolved_r_values()
    delta = config.params.delta_width
    for r in r_values:
        point = mean_field_point(config, delta, r)
        amps, abs_a2 = amplitude_columns(point.trajectory)
        frame = pd.DataFrame({
            "t": point.photons.times,
            "n": point.photons.values,
            "abs_a2": abs_a2,
            "re_a": amps.real,
            "im_a": amps.imag,
        })
        name = f"n_t{_tag(r, len(r_values) > 1)}.csv"
        files.append(write_csv(out_dir / name, frame, config_text=text, columns=N_T_COLUMNS, note=config.note))
        rows.append(_fit_row(r, delta, point.fit))
        log.info("✅ r=%g delta=%g: zeta=%.5g (%d envelope samples)", r, delta, point.fit.zeta, len(point.fit.peaks))
    files.append(write_csv(
        out_dir / "decay_fit.csv", pd.DataFrame(rows, columns=list(DECAY_COLUMNS)),
        config_text=text, columns=DECAY_COLUMNS, note=config.note,
    ))
    return files


def _run_quantum(config: RunConfig, text: str, out_dir: Path) -> List[Path]:
    files: List[Path] = []
    rows = []
    r_values = config.resolved_r_values()
    for r in r_values:
        tag = _tag(r, len(r_values) > 1)
        trace = _quantum_trace(config, r, text, out_dir, tag)
        files.extend(trace.files)
        frame = pd.DataFrame({"t": trace.times, "F": trace.fidelity, "n": trace.photons})
        files.append(write_csv(out_dir / f"fidelity{tag}.csv", frame,
                               config_text=text, columns=FIDELITY_COLUMNS, note=config.note))
        fit = fit_envelope(trace.series(), config.omega0, config.envelope_floor)
        late = envelope_after(trace.series(), (1.0 - LATE_FRACTION) * config.horizon)
        rows.append({
            **_fit_row(r, config.params.delta_width, fit),
            "late_envelope": late,
            "fit_end": float(envelope_value(fit, config.horizon)),
        })
        log.info("✅ r=%g: F(0)=%.6f, zeta=%.5g, late envelope %.4f", r, trace.fidelity[0], fit.zeta, late)
    files.append(write_csv(
        out_dir / "fidelity_fit.csv", pd.DataFrame(rows, columns=list(FIDELITY_FIT_COLUMNS)),
        config_text=text, columns=FIDELITY_FIT_COLUMNS, note=config.note,
    ))
    return files


def _wigner_frame(rho_c: np.ndarray, config: RunConfig) -> pd.DataFrame:
    extent = config.wigner_extent
    grid = wigner(rho_c, (-extent, extent), (-extent, extent), config.wigner_resolution)
    p, q = np.meshgrid(grid.p_axis, grid.q_axis, indexing="ij")
    log.info("Wigner grid normalization %.6f, min W %.4g", grid.normalization(), grid.values.min())
    return pd.DataFrame({"p": p.ravel(), "q": q.ravel(), "W": grid.values.ravel()})


def _run_wigner(config: RunConfig, text: str, out_dir: Path) -> List[Path]:
    files: List[Path] = []
    r_values = config.resolved_r_values()
    psi0 = parse_fock_superposition(config.initial_state, config.fock_cutoff)
    for r in r_values:
        tag = _tag(r, len(r_values) > 1)
        trace = _quantum_trace(config, r, text, out_dir, tag)
        if config.wigner_time is not None:
            t_pick = config.wigner_time
        else:
            t_pick = peak_envelope(trace.series(), config.peak_prominence)[-1][0]
        index = int(np.argmin(np.abs(trace.times - t_pick)))
        t_snap, f_snap = float(trace.times[index]), float(trace.fidelity[index])
        note = f"r = {r:g}, t = {t_snap:.6g} us, F = {f_snap:.6g}"
        if config.note:
            note = f"{config.note} | {note}"
        log.info("Wigner snapshot r=%g at t=%.5g us (F=%.4f)", r, t_snap, f_snap)
        files.extend(trace.files)
        files.append(write_csv(out_dir / f"wigner{tag}.csv", _wigner_frame(trace.cavity_states[index], config),
                               config_text=text, columns=WIGNER_COLUMNS, note=note))

    initial = np.outer(psi0, psi0.conj())
    files.append(write_csv(out_dir / "wigner_initial.csv", _wigner_frame(initial, config),
                           config_text=text, columns=WIGNER_COLUMNS, note=config.note))
    return files


def _run_sweep(config: RunConfig, text: str, out_dir: Path, workers: Optional[int]) -> List[Path]:
    frame = run_sweep(config, workers)
    return [write_csv(out_dir / "sweep.csv", frame, config_text=text, columns=SWEEP_COLUMNS, note=config.note)]


def run(config: RunConfig, *, workers: Optional[int] = None) -> List[Path]:
    """
    Execute one run document and write its CSV files under config.output_dir.

      semiclassical -> n_t[_r<r>].csv per r, decay_fit.csv
      quantum       -> fidelity[_r<r>].csv per r, fidelity_fit.csv, optional rho_c_*.csv
      wigner        -> wigner[_r<r>].csv per r at the last fidelity-envelope peak, wigner_initial.csv
      sweep         -> sweep.csv over delta_values x r_values

    Returns the written paths. Errors propagate as HybridQError / OSError.
    """
    text = serialize_config(config)
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    log.info("▶️ %s run -> %s", config.mode.value, out_dir)

    if config.mode is RunModeEnum.SEMICLASSICAL:
        files = _run_semiclassical(config, text, out_dir)
    elif config.mode is RunModeEnum.QUANTUM:
        files = _run_quantum(config, text, out_dir)
    elif config.mode is RunModeEnum.WIGNER:
        files = _run_wigner(config, text, out_dir)
    else:
        files = _run_sweep(config, text, out_dir, workers)

    log.info("✅ %d file(s) written", len(files))
    return files
