# hybridq/operators.py
"""
Matrix representations on the truncated (spins ⊗ cavity) space.

Ordering: spin k occupies tensor factor k (0-based in code), the cavity is
the last factor. Spin basis index 0 is |up>, index 1 is |down>.

Vectorization is row-major (numpy C order), vec(rho) = rho.reshape(-1), so
that vec(A rho B) = (A ⊗ B^T) vec(rho). In this stacking the Liouvillian
reads literally
    L = -i(H ⊗ I - I ⊗ H^T) + sum_x rate_x [x ⊗ x* - ½ x†x ⊗ I - ½ I ⊗ (x†x)^T]
and the trace functional is the row vec(I)^T.
"""
import logging
import math
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp
from scipy.linalg import expm

from hybridq.core.enums import FrameEnum, StorageEnum
from hybridq.core.errors import ArgumentError
from hybridq.model import SpinClasses, SystemParams, effective_detuning

log = logging.getLogger(__name__)

SparseMatrix = sp.csr_matrix
Matrix = Union[np.ndarray, sp.spmatrix]

_SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)   # |down><up|
_SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True)
class HilbertSpec:
    """fock_cutoff photon states 0..F-1 and n_spins two-level systems."""
    fock_cutoff: int
    n_spins: int

    def __post_init__(self):
        if self.fock_cutoff < 2:
            raise ArgumentError(f"fock_cutoff must be >= 2, got {self.fock_cutoff}")
        if self.n_spins < 0:
            raise ArgumentError(f"n_spins must be >= 0, got {self.n_spins}")

    @property
    def spin_dim(self) -> int:
        return 2 ** self.n_spins

    @property
    def dim(self) -> int:
        return self.fock_cutoff * self.spin_dim

    @property
    def tensor_shape(self) -> Tuple[int, ...]:
        return (2,) * self.n_spins + (self.fock_cutoff,)


@dataclass(frozen=True)
class OperatorMatrix:
    matrix: Matrix
    basis: HilbertSpec

    def __post_init__(self):
        if self.matrix.shape != (self.basis.dim, self.basis.dim):
            raise ArgumentError(f"operator shape {self.matrix.shape} does not match dim {self.basis.dim}")

    @property
    def storage(self) -> StorageEnum:
        return StorageEnum.SPARSE if sp.issparse(self.matrix) else StorageEnum.DENSE

    def dense(self) -> np.ndarray:
        if self.storage is StorageEnum.SPARSE:
            return self.matrix.toarray()
        return np.asarray(self.matrix)

    def hermiticity_defect(self) -> float:
        m = self.dense()
        return float(np.max(np.abs(m - m.conj().T), initial=0.0))


@dataclass(frozen=True)
class DensitySuperket:
    """Row-major vec(rho) on a HilbertSpec, optionally stamped with its time."""
    vec: np.ndarray
    basis: HilbertSpec
    time: float = 0.0

    def __post_init__(self):
        vec = np.asarray(self.vec, dtype=complex).reshape(-1)
        if vec.shape[0] != self.basis.dim ** 2:
            raise ArgumentError(f"superket length {vec.shape[0]} does not match dim^2 = {self.basis.dim ** 2}")
        object.__setattr__(self, "vec", vec)

    @classmethod
    def from_matrix(cls, rho: np.ndarray, basis: HilbertSpec, time: float = 0.0) -> "DensitySuperket":
        return cls(vec=vec(np.asarray(rho, dtype=complex)), basis=basis, time=time)

    def matrix(self) -> np.ndarray:
        return unvec(self.vec, self.basis.dim)

    def trace(self) -> complex:
        d = self.basis.dim
        return complex(self.vec[:: d + 1].sum())

    def hermiticity_defect(self) -> float:
        m = self.matrix()
        return float(np.max(np.abs(m - m.conj().T)))

    def min_eigenvalue(self) -> float:
        m = self.matrix()
        return float(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0])

    def at(self, time: float) -> "DensitySuperket":
        return DensitySuperket(vec=self.vec, basis=self.basis, time=time)


def vec(rho: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(rho).reshape(-1)


def unvec(v: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(v).reshape(dim, dim)


def vectorized_identity(spec: HilbertSpec) -> np.ndarray:
    return np.eye(spec.dim, dtype=complex).reshape(-1)


# ---------------------------------------------------------------------------
# Elementary operators
# ---------------------------------------------------------------------------

def _eye(n: int) -> SparseMatrix:
    return sp.identity(n, dtype=complex, format="csr")


def _ladder(fock_cutoff: int) -> SparseMatrix:
    return sp.diags(np.sqrt(np.arange(1, fock_cutoff)).astype(complex), 1, format="csr")


def embed_cavity(spec: HilbertSpec, op: Matrix) -> SparseMatrix:
    return sp.kron(_eye(spec.spin_dim), sp.csr_matrix(op), format="csr")


def embed_spin(spec: HilbertSpec, k: int, op: Matrix) -> SparseMatrix:
    if not 0 <= k < spec.n_spins:
        raise ArgumentError(f"spin index {k} outside 0..{spec.n_spins - 1}")
    left = _eye(2 ** k)
    right = _eye(2 ** (spec.n_spins - k - 1) * spec.fock_cutoff)
    return sp.kron(sp.kron(left, sp.csr_matrix(op), format="csr"), right, format="csr")


def destroy(spec: HilbertSpec) -> SparseMatrix:
    return embed_cavity(spec, _ladder(spec.fock_cutoff))


def number(spec: HilbertSpec) -> SparseMatrix:
    return embed_cavity(spec, sp.diags(np.arange(spec.fock_cutoff).astype(complex), 0, format="csr"))


def sigma_minus(spec: HilbertSpec, k: int) -> SparseMatrix:
    return embed_spin(spec, k, _SIGMA_MINUS)


def sigma_plus(spec: HilbertSpec, k: int) -> SparseMatrix:
    return embed_spin(spec, k, _SIGMA_MINUS.conj().T)


def sigma_z(spec: HilbertSpec, k: int) -> SparseMatrix:
    return embed_spin(spec, k, _SIGMA_Z)


# ---------------------------------------------------------------------------
# Hamiltonians
# ---------------------------------------------------------------------------

def _check_classes(spec: HilbertSpec, classes: Optional[SpinClasses]) -> Tuple[np.ndarray, np.ndarray]:
    if spec.n_spins == 0:
        return np.zeros(0), np.zeros(0)
    if classes is not None and len(classes) != spec.n_spins and classes.total == spec.n_spins:
        # a collapsed ensemble (zero width, one class) still needs one factor per spin
        classes = classes.expanded()
    if classes is None or len(classes) != spec.n_spins:
        got = 0 if classes is None else len(classes)
        raise ArgumentError(f"expected {spec.n_spins} spin classes, got {got}")
    return classes.detunings, classes.couplings


@dataclass(frozen=True)
class _FrameCoefficients:
    """Scalars that pick one of the three Hamiltonians."""
    frame: FrameEnum
    photon: float          # coefficient of a†a
    drive: float           # eta (lab frame only)
    spin_shift: float      # subtracted from every spin detuning
    r: float


def _frame_coefficients(params: SystemParams, frame: FrameEnum, r: Optional[float]) -> _FrameCoefficients:
    frame = FrameEnum(frame)
    if frame is FrameEnum.LAB:
        return _FrameCoefficients(frame, params.delta_c, params.eta, 0.0, 0.0)
    r = params.squeezing if r is None else r
    delta_eff = effective_detuning(params.delta_c, r)
    if frame is FrameEnum.SQUEEZED:
        return _FrameCoefficients(frame, delta_eff, 0.0, 0.0, r)
    # rotating at the squeezed-frame cavity frequency on photons and spins
    return _FrameCoefficients(frame, 0.0, 0.0, delta_eff, r)


def _cavity_hamiltonian(spec: HilbertSpec, c: _FrameCoefficients) -> SparseMatrix:
    a = destroy(spec)
    h = c.photon * number(spec)
    if c.drive:
        h = h - 0.5 * c.drive * (a @ a + a.conj().T @ a.conj().T)
    return sp.csr_matrix(h)


def _spin_hamiltonian(spec: HilbertSpec, k: int, detuning: float, g: float, c: _FrameCoefficients) -> SparseMatrix:
    """Spin-k energy plus its coupling to the cavity."""
    a = destroy(spec)
    ad = a.conj().T
    sm = sigma_minus(spec, k)
    spl = sm.conj().T
    h = 0.5 * (detuning - c.spin_shift) * sigma_z(spec, k)
    if c.frame is FrameEnum.LAB:
        h = h + g * (sm @ ad + spl @ a)
    elif c.frame is FrameEnum.SQUEEZED:
        h = h + 0.5 * g * (
            math.exp(c.r) * (a + ad) @ (sm + spl) - math.exp(-c.r) * (a - ad) @ (sm - spl)
        )
    else:
        h = h + g * math.cosh(c.r) * (a @ spl + ad @ sm)
    return sp.csr_matrix(h)


def build_hamiltonian(
    spec: HilbertSpec,
    params: SystemParams,
    classes: Optional[SpinClasses],
    frame: FrameEnum = FrameEnum.LAB,
    r: Optional[float] = None,
) -> OperatorMatrix:
    detunings, couplings = _check_classes(spec, classes)
    c = _frame_coefficients(params, frame, r)
    h = _cavity_hamiltonian(spec, c)
    for k in range(spec.n_spins):
        h = h + _spin_hamiltonian(spec, k, detunings[k], couplings[k], c)
    return OperatorMatrix(matrix=sp.csr_matrix(h), basis=spec)


def build_h0(spec: HilbertSpec, params: SystemParams, classes: Optional[SpinClasses]) -> OperatorMatrix:
    """½Σ Δk σz + Δc a†a + Σ gk (σ⁻a† + σ⁺a) - (η/2)(a² + a†²) in the half-drive rotating frame."""
    return build_hamiltonian(spec, params, classes, FrameEnum.LAB)


def build_hsq(spec: HilbertSpec, params: SystemParams, classes: Optional[SpinClasses], r: float) -> OperatorMatrix:
    """
    Squeezed-frame Hamiltonian
        Δ̃c a†a + ½Σ{Δk σz + gk e^r (a+a†)(σ⁻+σ⁺) - gk e^-r (a-a†)(σ⁻-σ⁺)}
    which is the Tavis-Cummings form at r = 0.
    """
    return build_hamiltonian(spec, params, classes, FrameEnum.SQUEEZED, r)


# ---------------------------------------------------------------------------
# Superoperators
# ---------------------------------------------------------------------------

def _commutator_generator(h: Matrix, dim: int) -> SparseMatrix:
    eye = _eye(dim)
    h = sp.csr_matrix(h)
    return sp.csr_matrix(-1j * (sp.kron(h, eye) - sp.kron(eye, h.T)))


def _dissipator_matrix(x: Matrix, dim: int) -> SparseMatrix:
    eye = _eye(dim)
    x = sp.csr_matrix(x)
    xdx = x.conj().T @ x
    return sp.csr_matrix(sp.kron(x, x.conj()) - 0.5 * sp.kron(xdx, eye) - 0.5 * sp.kron(eye, xdx.T))


def dissipator(spec: HilbertSpec, jump_operator: OperatorMatrix) -> SparseMatrix:
    """x ⊗ x* - ½ x†x ⊗ I - ½ I ⊗ (x†x)^T, acting on row-major superkets."""
    if jump_operator.basis != spec:
        raise ArgumentError(f"jump operator lives on {jump_operator.basis}, expected {spec}")
    return _dissipator_matrix(jump_operator.matrix, spec.dim)


def _generator(h: Matrix, jumps: Sequence[Tuple[float, Matrix]], dim: int) -> SparseMatrix:
    gen = _commutator_generator(h, dim)
    for rate, x in jumps:
        if rate:
            gen = gen + rate * _dissipator_matrix(x, dim)
    return sp.csr_matrix(gen)


@dataclass(frozen=True)
class LocalTerm:
    """
    One factor of the Trotter sweep. `generator` acts on the small support
    (spin k ⊗ cavity, or the cavity alone when there are no spins); `axes`
    are the positions of that support in the superket tensor of shape
    tensor_shape + tensor_shape; `embedded` is the same term on the full space.
    """
    spin: Optional[int]
    generator: np.ndarray
    axes: Tuple[int, ...]
    embedded: SparseMatrix
    _cache: Dict[float, np.ndarray] = field(default_factory=dict, compare=False, repr=False)

    def propagator(self, dt: float) -> np.ndarray:
        key = float(dt)
        prop = self._cache.get(key)
        if prop is None:
            prop = expm(self.generator * dt)
            self._cache[key] = prop
        return prop


@dataclass(frozen=True)
class Liouvillian:
    matrix: SparseMatrix
    basis: HilbertSpec
    terms: List[LocalTerm]
    hamiltonian: OperatorMatrix
    frame: FrameEnum = FrameEnum.SQUEEZED
    _cache: Dict[float, np.ndarray] = field(default_factory=dict, compare=False, repr=False)

    def apply(self, v: np.ndarray) -> np.ndarray:
        return self.matrix @ v

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def propagator(self, dt: float) -> np.ndarray:
        key = float(dt)
        prop = self._cache.get(key)
        if prop is None:
            prop = expm(self.dense() * dt)
            self._cache[key] = prop
        return prop


def _term_pieces(
    spec: HilbertSpec, k: Optional[int], detuning: float, g: float,
    params: SystemParams, c: _FrameCoefficients, cavity_share: float,
) -> Tuple[SparseMatrix, List[Tuple[float, SparseMatrix]]]:
    """Hamiltonian and jumps of one local term written on `spec` (spin index k)."""
    h = cavity_share * _cavity_hamiltonian(spec, c)
    jumps = cavity_jumps(spec, params, cavity_share)
    if k is not None:
        h = h + _spin_hamiltonian(spec, k, detuning, g, c)
        jumps += spin_jumps(spec, params, k)
    return sp.csr_matrix(h), jumps


def cavity_jumps(spec: HilbertSpec, params: SystemParams, share: float = 1.0) -> List[Tuple[float, SparseMatrix]]:
    # 2κ D(a): <a> decays at κ as in the mean-field equations
    return [(2.0 * share * params.kappa, destroy(spec))]


def spin_jumps(spec: HilbertSpec, params: SystemParams, k: int) -> List[Tuple[float, SparseMatrix]]:
    # 2γh D(σ⁻) relaxes <σz> at 2γh; with γp D(σz), <σ⁻> dephases at γh + 2γp
    return [(2.0 * params.gamma_h, sigma_minus(spec, k)), (params.gamma_p, sigma_z(spec, k))]


def build_liouvillian(
    spec: HilbertSpec,
    params: SystemParams,
    classes: Optional[SpinClasses],
    frame: FrameEnum = FrameEnum.SQUEEZED,
    r: Optional[float] = None,
) -> Liouvillian:
    """
    -i(H ⊗ I - I ⊗ H^T) + 2κ D(a) + Σk [2γh D(σk⁻) + γp D(σk^z)], plus its
    split into local terms L_k = (spin-k energy + coupling + spin-k dissipators)
    + (1/N_q)(cavity Hamiltonian + 2κ D(a)). The jump operators are a, σ⁻, σ^z
    in every frame.

    The rates are those for which <a>, <σ⁻> and <σz> obey the same linear
    decay as the mean-field equations: κ, γh + 2γp and 2γh respectively.
    `classes` may hold one class per spin or any grouping whose
    multiplicities add up to the spin count.
    """
    detunings, couplings = _check_classes(spec, classes)
    c = _frame_coefficients(params, frame, r)
    hamiltonian = build_hamiltonian(spec, params, classes, c.frame, r)

    jumps = cavity_jumps(spec, params)
    for k in range(spec.n_spins):
        jumps += spin_jumps(spec, params, k)
    matrix = _generator(hamiltonian.matrix, jumps, spec.dim)

    n = spec.n_spins
    terms: List[LocalTerm] = []
    if n == 0:
        h, js = _term_pieces(spec, None, 0.0, 0.0, params, c, 1.0)
        gen = _generator(h, js, spec.dim)
        terms.append(LocalTerm(
            spin=None, generator=gen.toarray(), axes=(0, 1), embedded=gen,
        ))
    else:
        local = HilbertSpec(spec.fock_cutoff, 1)
        share = 1.0 / n
        for k in range(n):
            h_loc, js_loc = _term_pieces(local, 0, detunings[k], couplings[k], params, c, share)
            h_full, js_full = _term_pieces(spec, k, detunings[k], couplings[k], params, c, share)
            terms.append(LocalTerm(
                spin=k,
                generator=_generator(h_loc, js_loc, local.dim).toarray(),
                axes=(k, n, n + 1 + k, 2 * n + 1),
                embedded=_generator(h_full, js_full, spec.dim),
            ))

    log.debug("built %s-frame Liouvillian: dim %d, %d local terms, nnz %d",
              c.frame.value, spec.dim, len(terms), matrix.nnz)
    return Liouvillian(matrix=matrix, basis=spec, terms=terms, hamiltonian=hamiltonian, frame=c.frame)


# ---------------------------------------------------------------------------
# States
# ---------------------------------------------------------------------------

_ENTRY = re.compile(r"^\s*(\d+)\s*(?::\s*(.+?))?\s*$")


def parse_fock_superposition(text: str, fock_cutoff: int) -> np.ndarray:
    """
    "1,2"            -> (|1> + |2>)/sqrt(2)
    "0:0.6,1:0.8j"   -> 0.6|0> + 0.8i|1>
    Amplitudes accept Python complex literals; the result is normalized.
    """
    ket = np.zeros(fock_cutoff, dtype=complex)
    for raw in str(text).split(","):
        if not raw.strip():
            continue
        m = _ENTRY.match(raw)
        if not m:
            raise ArgumentError(f"cannot read Fock entry {raw!r}")
        level = int(m.group(1))
        if level >= fock_cutoff:
            raise ArgumentError(f"Fock level {level} not below cutoff {fock_cutoff}")
        try:
            amp = complex(m.group(2).replace(" ", "")) if m.group(2) else 1.0
        except ValueError as e:
            raise ArgumentError(f"cannot read amplitude in {raw!r}") from e
        ket[level] += amp
    norm = np.linalg.norm(ket)
    if norm == 0:
        raise ArgumentError(f"initial state {text!r} has zero norm")
    return ket / norm


def product_state(spec: HilbertSpec, cavity_ket: np.ndarray) -> DensitySuperket:
    """|psi><psi| ⊗ spins down."""
    cavity_ket = np.asarray(cavity_ket, dtype=complex)
    if cavity_ket.shape != (spec.fock_cutoff,):
        raise ArgumentError(f"cavity ket must have length {spec.fock_cutoff}")
    spins = np.zeros(spec.spin_dim, dtype=complex)
    spins[-1] = 1.0   # |down down ... down>
    ket = np.kron(spins, cavity_ket)
    return DensitySuperket.from_matrix(np.outer(ket, ket.conj()), spec)
