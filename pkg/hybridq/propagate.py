# hybridq/propagate.py
"""
Time stepping of density superkets: exact exponentials (dense or Krylov),
symmetric Trotter sweeps over local terms, and low-rank truncation across
the cavity|spins cut.
"""
import logging
import math
import warnings
from typing import Iterator, List, Optional, Sequence, Union

import numpy as np
from scipy.linalg import expm

from hybridq.core import config as knobs
from hybridq.core.enums import PropagatorMethodEnum
from hybridq.core.errors import ArgumentError, PropagationError, TruncationWarning
from hybridq.models import PropagatorConfig
from hybridq.observables import reduce_to_cavity
from hybridq.operators import DensitySuperket, HilbertSpec, Liouvillian, LocalTerm

log = logging.getLogger(__name__)

Generator = Union[Liouvillian, Sequence[LocalTerm]]


# ---------------------------------------------------------------------------
# Exponentials
# ---------------------------------------------------------------------------

def krylov_expm_apply(
    matrix,
    v: np.ndarray,
    t: float,
    tol: float = knobs.KRYLOV_TOL,
    m_max: int = knobs.KRYLOV_DIM,
    max_rejections: int = 60,
) -> np.ndarray:
    """
    exp(t A) v by Arnoldi projection with internal substeps.

    Each substep of length tau builds an m-dimensional Krylov basis, takes
    exp(tau H_m) e1 and accepts it when the a-posteriori residual
    beta * |tau h_{m+1,m} e_m^T phi1(tau H_m) e1| is below tol * (tau / t) * ||v||.
    """
    v = np.asarray(v, dtype=complex)
    norm_v = float(np.linalg.norm(v))
    if t == 0 or norm_v == 0:
        return v.copy()
    n = v.shape[0]
    m_max = max(1, min(m_max, n))

    w = v.copy()
    t_now = 0.0
    tau = float(t)
    rejections = 0
    while t_now < t:
        beta = float(np.linalg.norm(w))
        if beta == 0:
            break
        basis = np.zeros((n, m_max + 1), dtype=complex)
        hess = np.zeros((m_max + 2, m_max + 2), dtype=complex)
        basis[:, 0] = w / beta
        m = m_max
        breakdown = False
        for j in range(m_max):
            p = matrix @ basis[:, j]
            for _ in range(2):   # Gram-Schmidt, twice
                coeffs = basis[:, : j + 1].conj().T @ p
                p = p - basis[:, : j + 1] @ coeffs
                hess[: j + 1, j] += coeffs
            h_next = float(np.linalg.norm(p))
            if h_next <= 1e-14 * beta:
                m = j + 1
                breakdown = True
                break
            hess[j + 1, j] = h_next
            basis[:, j + 1] = p / h_next

        remaining = t - t_now
        tau = min(tau, remaining)
        while True:
            if breakdown:
                f = expm(tau * hess[:m, :m])
                residual = 0.0
            else:
                aug = hess[: m + 2, : m + 2].copy()
                aug[m + 1, m] = 1.0
                f = expm(tau * aug)
                residual = beta * abs(f[m, 0])
            local_tol = tol * (tau / t) * norm_v
            if residual <= local_tol or breakdown:
                break
            rejections += 1
            if rejections > max_rejections:
                raise PropagationError(
                    f"Krylov exponential did not converge (residual {residual:.3g})",
                    invariant="krylov", time=t_now, residual=residual,
                )
            tau *= 0.5

        w = beta * (basis[:, :m] @ f[:m, 0])
        t_now = t if remaining - tau <= 1e-15 * t else t_now + tau
        if breakdown:
            tau = t - t_now
        else:
            grow = 0.9 * (local_tol / max(residual, 1e-300)) ** (1.0 / (m + 1))
            tau = tau * min(max(grow, 0.2), 5.0)
    return w


def _check_basis(rho: DensitySuperket, basis: HilbertSpec) -> None:
    if rho.basis != basis:
        raise ArgumentError(f"superket basis {rho.basis} does not match generator basis {basis}")


def expm_apply(
    L: Liouvillian,
    rho: DensitySuperket,
    dt: float,
    *,
    tol: float = knobs.KRYLOV_TOL,
    krylov_dim: int = knobs.KRYLOV_DIM,
    dense_max_dim: Optional[int] = None,
) -> DensitySuperket:
    """exp(L dt)|rho>: cached dense exponential for small spaces, Krylov otherwise."""
    _check_basis(rho, L.basis)
    if dt == 0:
        return rho
    limit = knobs.DENSE_MAX_DIM if dense_max_dim is None else dense_max_dim
    if L.basis.dim <= limit:
        out = L.propagator(dt) @ rho.vec
    else:
        out = krylov_expm_apply(L.matrix, rho.vec, dt, tol=tol, m_max=krylov_dim)
    return DensitySuperket(vec=out, basis=rho.basis, time=rho.time + dt)


def _apply_local(term: LocalTerm, v: np.ndarray, basis: HilbertSpec, dt: float) -> np.ndarray:
    """Apply exp(L_k dt) on its support of the superket tensor."""
    shape = basis.tensor_shape * 2
    k = len(term.axes)
    front = tuple(range(k))
    x = np.moveaxis(v.reshape(shape), term.axes, front)
    support, rest = x.shape[:k], x.shape[k:]
    y = term.propagator(dt) @ x.reshape(int(np.prod(support)), -1)
    y = np.moveaxis(y.reshape(support + rest), front, term.axes)
    return np.ascontiguousarray(y).reshape(-1)


def strang_step(terms: Sequence[LocalTerm], rho: DensitySuperket, dt: float) -> DensitySuperket:
    """
    Symmetric sweep exp(L_N dt/2)...exp(L_2 dt/2) exp(L_1 dt) exp(L_2 dt/2)...exp(L_N dt/2).
    terms[0] is L_1.
    """
    if not terms:
        raise ArgumentError("strang_step needs at least one term")
    v = rho.vec
    basis = rho.basis
    half = 0.5 * dt
    for term in reversed(terms[1:]):
        v = _apply_local(term, v, basis, half)
    v = _apply_local(terms[0], v, basis, dt)
    for term in terms[1:]:
        v = _apply_local(term, v, basis, half)
    return DensitySuperket(vec=v, basis=basis, time=rho.time + dt)


def truncate(rho: DensitySuperket, cutoff: float, max_rank: Optional[int] = None) -> DensitySuperket:
    """
    SVD of the superket as a (cavity ⊗ cavity-dual) x (spins ⊗ spins-dual)
    matrix; singular values below cutoff * s_max or past max_rank are dropped
    and the trace is renormalized to 1.
    """
    basis = rho.basis
    s_dim, f = basis.spin_dim, basis.fock_cutoff
    tensor = rho.vec.reshape(s_dim, f, s_dim, f).transpose(1, 3, 0, 2).reshape(f * f, s_dim * s_dim)
    u, s, vh = np.linalg.svd(tensor, full_matrices=False)
    keep = int(np.count_nonzero(s >= cutoff * s[0])) if s.size and s[0] > 0 else 0
    if max_rank is not None:
        keep = min(keep, max_rank)
    if keep >= s.size:
        return rho
    keep = max(keep, 1)
    low = (u[:, :keep] * s[:keep]) @ vh[:keep]
    v = low.reshape(f, f, s_dim, s_dim).transpose(2, 0, 3, 1).reshape(-1)
    out = DensitySuperket(vec=v, basis=basis, time=rho.time)
    tr = out.trace()
    if tr == 0:
        raise PropagationError("truncation removed the whole state", invariant="trace", time=rho.time)
    return DensitySuperket(vec=v / tr, basis=basis, time=rho.time)


# ---------------------------------------------------------------------------
# Evolution
# ---------------------------------------------------------------------------

def _fock_tail(rho: DensitySuperket) -> float:
    pops = np.real(np.diag(reduce_to_cavity(rho)))
    return float(pops[-2:].sum())


def _check_snapshot(rho: DensitySuperket, *, positivity: bool) -> None:
    t = rho.time
    drift = abs(rho.trace() - 1.0)
    if drift > knobs.TRACE_TOL:
        raise PropagationError(f"trace drifted by {drift:.3g} at t={t:.6g}", invariant="trace", time=t, residual=drift)
    defect = rho.hermiticity_defect()
    if defect > knobs.HERMITIAN_TOL:
        raise PropagationError(f"hermiticity defect {defect:.3g} at t={t:.6g}", invariant="hermiticity", time=t, residual=defect)
    if positivity:
        low = rho.min_eigenvalue()
        if low < -knobs.POSITIVITY_TOL:
            raise PropagationError(f"negative eigenvalue {low:.3g} at t={t:.6g}", invariant="positivity", time=t, residual=low)


def iter_evolve(
    L: Generator,
    rho0: DensitySuperket,
    t_end: float,
    dt_out: float,
    config: PropagatorConfig,
    *,
    monitor_fock: bool = True,
) -> Iterator[DensitySuperket]:
    """
    Yield snapshots at t = 0, dt_out, 2 dt_out, ... <= t_end.

    The internal step is dt_out / ceil(dt_out / config.dt). Truncation (when
    enabled) runs once per internal step after the sweep. Every step checks
    trace preservation (untruncated modes), every snapshot checks trace,
    hermiticity and, untruncated, positivity.
    """
    if t_end < 0 or dt_out <= 0:
        raise ArgumentError(f"need t_end >= 0 and dt_out > 0, got {t_end}, {dt_out}")
    method = PropagatorMethodEnum(config.method)
    if isinstance(L, Liouvillian):
        _check_basis(rho0, L.basis)
        terms = L.terms
    else:
        terms = list(L)
        if method is PropagatorMethodEnum.DENSE_EXPM:
            raise ArgumentError("dense-expm needs the assembled Liouvillian, not a term list")

    truncated = method is PropagatorMethodEnum.TROTTER2_TRUNCATED
    n_sub = max(1, math.ceil(dt_out / config.dt - 1e-9))
    h = dt_out / n_sub
    n_out = int(math.floor(t_end / dt_out + 1e-9))
    krylov = method is PropagatorMethodEnum.DENSE_EXPM and rho0.basis.dim > knobs.DENSE_MAX_DIM
    step_tol = knobs.STEP_TRACE_TOL
    if krylov:
        step_tol = max(step_tol, 10.0 * config.krylov_tol * math.sqrt(rho0.basis.dim))

    def _step(rho: DensitySuperket) -> DensitySuperket:
        if method is PropagatorMethodEnum.DENSE_EXPM:
            return expm_apply(L, rho, h, tol=config.krylov_tol, krylov_dim=config.krylov_dim)
        out = strang_step(terms, rho, h)
        if truncated:
            out = truncate(out, config.svd_cutoff, config.max_rank)
        return out

    log.info("🔧 evolving %s: dim %d, %d snapshots, internal dt %.3g us",
             method.value, rho0.basis.dim, n_out + 1, h)
    warned = False
    rho = rho0.at(0.0)
    _check_snapshot(rho, positivity=not truncated)
    yield rho
    for i in range(1, n_out + 1):
        for _ in range(n_sub):
            before = rho.trace()
            rho = _step(rho)
            if not truncated:
                drift = abs(rho.trace() - before)
                if drift > step_tol:
                    raise PropagationError(
                        f"trace not preserved within a step ({drift:.3g}) at t={rho.time:.6g}",
                        invariant="trace", time=rho.time, residual=drift,
                    )
        rho = rho.at(min(i * dt_out, t_end))
        _check_snapshot(rho, positivity=not truncated)
        if monitor_fock and not warned:
            tail = _fock_tail(rho)
            if tail >= knobs.FOCK_TAIL_TOL:
                warned = True
                log.warning("⚠️ top Fock levels hold %.3g population at t=%.4g us; raise fock_cutoff", tail, rho.time)
                warnings.warn(
                    f"top two Fock levels hold {tail:.3g} population at t={rho.time:.6g}",
                    TruncationWarning, stacklevel=2,
                )
        yield rho


def evolve(
    L: Generator,
    rho0: DensitySuperket,
    t_end: float,
    dt_out: float,
    config: PropagatorConfig,
    *,
    monitor_fock: bool = True,
) -> List[DensitySuperket]:
    return list(iter_evolve(L, rho0, t_end, dt_out, config, monitor_fock=monitor_fock))
