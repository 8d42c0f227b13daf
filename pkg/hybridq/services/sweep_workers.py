# hybridq/services/sweep_workers.py
import logging
import os
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import pandas as pd

from hybridq.core import config as knobs
from hybridq.model import discretize_gaussian
from hybridq.models import DecayFit, RunConfig
from hybridq.observables import fit_envelope
from hybridq.semiclassical import TimeSeries, initial_state_unit_photon, integrate, photon_series

log = logging.getLogger(__name__)

try:
    from tqdm.auto import tqdm
except Exception:
    tqdm = None


@dataclass(frozen=True)
class MeanFieldRun:
    delta_width: float
    r: float
    trajectory: TimeSeries
    photons: TimeSeries
    fit: DecayFit


def mean_field_point(config: RunConfig, delta_width: float, r: float) -> MeanFieldRun:
    """One (width, r) point: discretize, integrate from n(0) = 1, fit the upper envelope."""
    params = config.params.with_width(delta_width).with_drive(r)
    classes = discretize_gaussian(params, config.n_classes, sampling=config.discretization, seed=config.seed)
    state0 = initial_state_unit_photon(params, classes, r)
    trajectory = integrate(state0, params, classes, config.horizon, config.dt_out)
    photons = photon_series(trajectory, r)
    fit = fit_envelope(photons, config.omega0, config.envelope_floor)
    return MeanFieldRun(delta_width=delta_width, r=r, trajectory=trajectory, photons=photons, fit=fit)


def _sweep_row(config: RunConfig, delta_width: float, r: float) -> Dict[str, float]:
    point = mean_field_point(config, delta_width, r)
    return {
        "delta": delta_width,
        "r": r,
        "zeta": point.fit.zeta,
        "n0": point.fit.n0,
        "residual_std": point.fit.residual_std,
        "n_points": len(point.fit.peaks),
    }


def _resolve_workers(requested: Optional[int], total: int) -> int:
    workers = requested or knobs.WORKERS or os.cpu_count() or 1
    return max(1, min(workers, total))


def run_sweep(config: RunConfig, workers: Optional[int] = None) -> pd.DataFrame:
    """
    Cartesian product delta_values x r_values, one task per point. Rows come
    back sorted by (delta, r) so the table does not depend on scheduling.
    """
    points: List[Tuple[float, float]] = [
        (d, r) for d in config.resolved_delta_values() for r in config.resolved_r_values()
    ]
    total = len(points)
    workers = _resolve_workers(workers or config.workers, total)
    log.info("Sweep: %d points | workers=%d", total, workers)

    rows: List[Dict[str, float]] = []
    pbar = tqdm(total=total, desc="Sweep", unit="pt", dynamic_ncols=True) if (knobs.TQDM and tqdm) else None

    def _tick(done: int) -> None:
        if pbar:
            pbar.update(1)
        elif done % 10 == 0 or done == total:
            log.info("🔧 Progress: %d/%d points", done, total)

    if workers == 1:
        for i, (d, r) in enumerate(points, start=1):
            rows.append(_sweep_row(config, d, r))
            _tick(i)
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            futures = {ex.submit(_sweep_row, config, d, r): (d, r) for d, r in points}
            done = 0
            for fut in as_completed(futures):
                d, r = futures[fut]
                try:
                    rows.append(fut.result())
                except Exception:
                    log.exception("❌ sweep point delta=%s r=%s failed", d, r)
                    raise
                done += 1
                _tick(done)
    if pbar:
        pbar.close()

    frame = pd.DataFrame(rows, columns=["delta", "r", "zeta", "n0", "residual_std", "n_points"])
    return frame.sort_values(["delta", "r"], kind="mergesort").reset_index(drop=True)
