"""Dense linear algebra for one to three qubits.

States are plain numpy arrays: a pure state is a complex vector of length
2, 4 or 8 and a density matrix is the matching square array. Validation
helpers check the physical invariants and return a clean ``complex128``
copy. Coherence is always measured in the computational basis.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, InnerProductError, InvalidStateError, NormalizationError

NORM_TOL = 1e-10
HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-9

_ALLOWED_DIMS = (2, 4, 8)

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
MINUS = np.array([1, -1], dtype=complex) / np.sqrt(2)

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)


def validate_pure(psi, tol: float = NORM_TOL) -> np.ndarray:
    """Return ``psi`` as a complex vector, checking length and unit norm."""
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1 or psi.shape[0] not in _ALLOWED_DIMS:
        raise DimensionError(f"pure state must have length 2, 4 or 8, got shape {psi.shape}")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > tol:
        raise NormalizationError(
            f"state norm is {norm:.12g}, deficit {1.0 - norm:.3e}", deficit=1.0 - norm
        )
    return psi.copy()


def validate_density(rho, tol: float = HERMITIAN_TOL, psd_tol: float = PSD_TOL) -> np.ndarray:
    """Return ``rho`` as a complex matrix, checking Hermiticity, trace and positivity."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] not in _ALLOWED_DIMS:
        raise DimensionError(f"density matrix must be 2x2, 4x4 or 8x8, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise InvalidStateError("density matrix is not Hermitian")
    trace = np.trace(rho).real
    if abs(trace - 1.0) > tol:
        raise NormalizationError(
            f"density matrix trace is {trace:.12g}, deficit {1.0 - trace:.3e}", deficit=1.0 - trace
        )
    if np.min(np.linalg.eigvalsh(rho)) < -psd_tol:
        raise InvalidStateError("density matrix has a negative eigenvalue")
    return rho.copy()


def density(psi) -> np.ndarray:
    """Projector ``|psi><psi|`` of a normalized pure state."""
    psi = validate_pure(psi)
    return np.outer(psi, psi.conj())


def _as_density(state) -> np.ndarray:
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        return density(state)
    return validate_density(state)


class CoherenceMeasure(enum.Enum):
    L1 = "l1"
    RELATIVE_ENTROPY = "relative_entropy"


def von_neumann_entropy(rho) -> float:
    """Base-2 von Neumann entropy, with 0 log 0 = 0."""
    evals = np.clip(np.linalg.eigvalsh(np.asarray(rho, dtype=complex)), 0.0, None)
    evals = evals[evals > 1e-15]
    return float(-np.sum(evals * np.log2(evals)))


def _shannon(probs) -> float:
    probs = np.clip(np.asarray(probs, dtype=float), 0.0, None)
    probs = probs[probs > 1e-15]
    return float(-np.sum(probs * np.log2(probs)))


def coherence(measure: CoherenceMeasure, rho) -> float:
    """Coherence of a state in the computational basis.

    Parameters
    ----------
    measure : CoherenceMeasure
        ``L1`` sums the moduli of the off-diagonal entries.
        ``RELATIVE_ENTROPY`` is ``S(diag(rho)) - S(rho)`` in bits.
    rho : array_like
        Density matrix, or a pure state vector (converted to its projector).

    Returns
    -------
    float
        Non-negative coherence value; round-off below zero is clamped.
    """
    rho = _as_density(rho)
    if measure is CoherenceMeasure.L1:
        value = float(np.sum(np.abs(rho)) - np.sum(np.abs(np.diag(rho))))
    elif measure is CoherenceMeasure.RELATIVE_ENTROPY:
        value = _shannon(np.diag(rho).real) - von_neumann_entropy(rho)
    else:
        raise ValueError(f"unknown coherence measure {measure!r}")
    return max(value, 0.0)


@dataclass(frozen=True)
class BlochVector:
    mx: float
    my: float
    mz: float

    def __post_init__(self):
        if self.mx**2 + self.my**2 + self.mz**2 > 1.0 + 1e-9:
            raise InvalidStateError(f"Bloch vector {self.as_array()} lies outside the unit ball")

    def as_array(self) -> np.ndarray:
        return np.array([self.mx, self.my, self.mz], dtype=float)

    @property
    def transverse(self) -> np.ndarray:
        return np.array([self.mx, self.my], dtype=float)

    def norm(self) -> float:
        return float(np.linalg.norm(self.as_array()))


def bloch_from_density(rho) -> BlochVector:
    """Bloch vector ``m_k = Tr(rho sigma_k)`` of a qubit density matrix."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise DimensionError(f"Bloch vectors are defined for 2x2 matrices, got {rho.shape}")
    rho = validate_density(rho)
    mx, my, mz = (float(np.trace(rho @ s).real) for s in PAULIS)
    return BlochVector(mx, my, mz)


def density_from_bloch(v: BlochVector) -> np.ndarray:
    return 0.5 * (np.eye(2, dtype=complex) + v.mx * SIGMA_X + v.my * SIGMA_Y + v.mz * SIGMA_Z)


def bloch_from_state(psi) -> BlochVector:
    return bloch_from_density(density(psi))


def coherence_from_bloch(v: BlochVector) -> float:
    return float(np.hypot(v.mx, v.my))


def state_from_angles(theta: float, phi: float) -> np.ndarray:
    """``cos(theta/2)|0> + sin(theta/2) e^{i phi}|1>`` for Bloch polar angle theta."""
    return np.array([np.cos(theta / 2), np.sin(theta / 2) * np.exp(1j * phi)], dtype=complex)


def tensor(factors: Sequence) -> np.ndarray:
    """Kronecker product of 2 or 3 factors, ordered A (x) B (x) C left to right.

    All factors must be of the same kind: either all state vectors or all
    square matrices.
    """
    factors = [np.asarray(f, dtype=complex) for f in factors]
    if not 2 <= len(factors) <= 3:
        raise ValueError(f"tensor takes 2 or 3 factors, got {len(factors)}")
    ndims = {f.ndim for f in factors}
    if ndims == {1}:
        for f in factors:
            validate_pure(f)
    elif ndims == {2}:
        for f in factors:
            validate_density(f)
    else:
        raise TypeError("cannot mix state vectors and density matrices; convert vectors with density()")
    out = factors[0]
    for f in factors[1:]:
        out = np.kron(out, f)
    return out


def partial_trace(rho, keep: Iterable[int], dims: Sequence[int]) -> np.ndarray:
    """Reduce ``rho`` to the subsystems in ``keep`` (returned in ascending order)."""
    rho = np.asarray(rho, dtype=complex)
    dims = [int(d) for d in dims]
    keep = set(int(k) for k in keep)
    n = len(dims)
    side = int(np.prod(dims))
    if rho.shape != (side, side):
        raise DimensionError(f"dims {dims} imply a {side}x{side} matrix, got {rho.shape}")
    if not keep or not keep <= set(range(n)):
        raise DimensionError(f"keep={sorted(keep)} is not a nonempty subset of 0..{n - 1}")
    t = rho.reshape(dims + dims)
    for i in sorted(set(range(n)) - keep, reverse=True):
        t = np.trace(t, axis1=i, axis2=i + t.ndim // 2)
    kept = int(np.prod([dims[i] for i in sorted(keep)]))
    return t.reshape(kept, kept)


def _complete_basis(columns: np.ndarray) -> np.ndarray:
    # Gram-Schmidt of e_0, e_1, ... against the current span, ascending index.
    d = columns.shape[0]
    basis = [columns[:, k] for k in range(columns.shape[1])]
    for i in range(d):
        if len(basis) == d:
            break
        v = np.zeros(d, dtype=complex)
        v[i] = 1.0
        for _ in range(2):
            for q in basis:
                v = v - np.vdot(q, v) * q
        norm = np.linalg.norm(v)
        if norm > 1e-8:
            basis.append(v / norm)
    return np.column_stack(basis)


def complete_unitary(prescribed, tol: float = NORM_TOL) -> np.ndarray:
    """Extend a partial isometry ``in_k -> out_k`` to a full unitary.

    Both the input and the output vectors must be orthonormal families of
    equal size. Each family is completed to an orthonormal basis by
    Gram-Schmidt on the canonical basis vectors in index order, so the
    result is deterministic.

    Raises
    ------
    InnerProductError
        If either family is not orthonormal within ``tol``. An unphysical
        cloner prescription is rejected this way.
    """
    if not prescribed:
        raise ValueError("at least one (input, output) pair is required")
    ins = np.column_stack([np.asarray(p[0], dtype=complex) for p in prescribed])
    outs = np.column_stack([np.asarray(p[1], dtype=complex) for p in prescribed])
    if ins.shape != outs.shape:
        raise DimensionError(f"input vectors {ins.shape} and output vectors {outs.shape} differ")
    d, k = ins.shape
    if k > d:
        raise DimensionError(f"{k} prescriptions exceed dimension {d}")
    eye = np.eye(k)
    for label, block in (("input", ins), ("output", outs)):
        err = np.max(np.abs(block.conj().T @ block - eye))
        if err > tol:
            raise InnerProductError(
                f"{label} vectors are not orthonormal (max Gram deviation {err:.3e})"
            )
    return _complete_basis(outs) @ _complete_basis(ins).conj().T


def haar_random_pure(n_qubits: int, seed) -> np.ndarray:
    """Haar-random pure state on ``n_qubits`` qubits.

    ``seed`` is anything accepted by ``numpy.random.default_rng`` (an int
    seeds a PCG64 generator; a ``Generator`` is used as is).
    """
    if n_qubits not in (1, 2, 3):
        raise ValueError(f"n_qubits must be 1, 2 or 3, got {n_qubits}")
    if isinstance(seed, (int, np.integer)):
        seed = int(seed) % 2**64
    rng = np.random.default_rng(seed)
    dim = 2**n_qubits
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return z / np.linalg.norm(z)
