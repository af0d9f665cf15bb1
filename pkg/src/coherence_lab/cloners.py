"""Coherence-cloning machines as explicit unitaries.

Every machine acts on an input qubit A, a blank qubit B prepared in |0>
and, when machine-assisted, a machine qubit C prepared in |0>. The final
machine states of the two known inputs are |0> and |1> on C, which is the
smallest realization in which they are orthogonal.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, DimensionError, InvalidMachineError, NormalizationError
from .qcore import (
    KET0,
    KET1,
    MINUS,
    PLUS,
    CoherenceMeasure,
    coherence,
    complete_unitary,
    partial_trace,
    validate_pure,
)

CLONE_TOL = 1e-9
CONTRACT_TOL = 1e-9
ORTHO_TOL = 1e-10


class Variant(enum.Enum):
    WZ = "wz"
    BH = "bh"
    GENERIC = "generic"
    MACHINELESS = "machineless"
    MAX = "max"


def _qubit(psi) -> np.ndarray:
    psi = validate_pure(psi)
    if psi.shape != (2,):
        raise DimensionError(f"expected a single-qubit state, got length {psi.shape[0]}")
    return psi


@dataclass(frozen=True, eq=False)
class KnownPair:
    """Two orthogonal single-qubit states with equal l1 coherence."""

    psi1: np.ndarray
    psi2: np.ndarray

    def __post_init__(self):
        psi1, psi2 = _qubit(self.psi1), _qubit(self.psi2)
        object.__setattr__(self, "psi1", psi1)
        object.__setattr__(self, "psi2", psi2)
        overlap = abs(np.vdot(psi1, psi2))
        if overlap > ORTHO_TOL:
            raise InvalidMachineError(f"known states are not orthogonal (|<psi1|psi2>| = {overlap:.3e})")
        c1 = coherence(CoherenceMeasure.L1, psi1)
        c2 = coherence(CoherenceMeasure.L1, psi2)
        if abs(c1 - c2) > 1e-12:
            raise InvalidMachineError(f"known states have different coherence ({c1!r} vs {c2!r})")

    @classmethod
    def from_amplitudes(cls, a, b) -> "KnownPair":
        """``psi1 = a|0> + b|1>`` and ``psi2 = b*|0> - a*|1>``."""
        a, b = complex(a), complex(b)
        return cls(np.array([a, b]), np.array([b.conjugate(), -a.conjugate()]))

    @classmethod
    def equatorial(cls, phi1: float) -> "KnownPair":
        """Orthogonal pair on the equator, ``psi1`` at Bloch azimuth ``phi1``."""
        return cls.from_amplitudes(1 / np.sqrt(2), np.exp(1j * phi1) / np.sqrt(2))

    @property
    def a(self) -> complex:
        return complex(self.psi1[0])

    @property
    def b(self) -> complex:
        return complex(self.psi1[1])

    @property
    def coherence(self) -> float:
        """l1 coherence shared by both known states, ``2|a||b|``."""
        return 2 * abs(self.a) * abs(self.b)

    def state(self, alpha, beta) -> np.ndarray:
        return alpha * self.psi1 + beta * self.psi2

    def coefficients(self, psi) -> tuple[complex, complex]:
        psi = np.asarray(psi, dtype=complex)
        return complex(np.vdot(self.psi1, psi)), complex(np.vdot(self.psi2, psi))


@dataclass(frozen=True, eq=False)
class CloningMachine:
    """One cloner variant together with its completed unitary.

    ``branch_outputs`` holds the joint AB outputs ``(Psi1, Psi2)`` for
    machines whose known branches end in orthogonal machine states; only
    those machines obey the mixture law used by the geometry module.
    ``product_outputs`` holds ``(psi1', psi1'', psi2', psi2'')`` when the
    branch outputs are product states.
    """

    variant: Variant
    known: KnownPair
    unitary: np.ndarray
    branch_outputs: tuple | None = None
    product_outputs: tuple | None = None
    params: dict = field(default_factory=dict)

    @property
    def machine_assisted(self) -> bool:
        return self.unitary.shape[0] == 8

    @property
    def dims(self) -> list[int]:
        return [2, 2, 2] if self.machine_assisted else [2, 2]

    def branch_marginals(self) -> dict[str, tuple[np.ndarray, np.ndarray]]:
        """Reduced states ``{"A": (rho', rho''), "B": (rho', rho'')}`` of the two branches."""
        if self.branch_outputs is None:
            raise InvalidMachineError(f"{self.variant.value} machine has no per-branch outputs")
        out = {"A": [], "B": []}
        for Psi in self.branch_outputs:
            rho = np.outer(Psi, Psi.conj())
            out["A"].append(partial_trace(rho, [0], [2, 2]))
            out["B"].append(partial_trace(rho, [1], [2, 2]))
        return {k: tuple(v) for k, v in out.items()}


@dataclass(frozen=True, eq=False)
class CloneReport:
    input: np.ndarray
    joint_output: np.ndarray
    rho_A_final: np.ndarray
    rho_B_final: np.ndarray
    c_in: float
    c_A: float
    c_B: float
    perfectly_cloned: bool

    def to_dict(self) -> dict:
        def cvec(v):
            return [[float(z.real), float(z.imag)] for z in np.ravel(v)]

        def cmat(m):
            return [cvec(row) for row in m]

        return {
            "input": cvec(self.input),
            "rho_A_final": cmat(self.rho_A_final),
            "rho_B_final": cmat(self.rho_B_final),
            "c_in": self.c_in,
            "c_A": self.c_A,
            "c_B": self.c_B,
            "perfectly_cloned": self.perfectly_cloned,
        }


def _build_branch_machine(variant, known, Psi1, Psi2, params=None, product_outputs=None):
    blank = np.kron(KET0, KET0)
    unitary = complete_unitary(
        [
            (np.kron(known.psi1, blank), np.kron(Psi1, KET0)),
            (np.kron(known.psi2, blank), np.kron(Psi2, KET1)),
        ]
    )
    return CloningMachine(
        variant=variant,
        known=known,
        unitary=unitary,
        branch_outputs=(Psi1, Psi2),
        product_outputs=product_outputs,
        params=dict(params or {}),
    )


def build_generic(known: KnownPair, Psi1, Psi2, *, variant: Variant = Variant.GENERIC) -> CloningMachine:
    """Machine-assisted cloner ``psi_i|0>|X0> -> Psi_i|X_i>`` with orthogonal X_1, X_2.

    Raises
    ------
    ContractError
        If any of the four reduced states of ``Psi1``/``Psi2`` misses the
        known coherence by more than 1e-9. The error lists the failures.
    """
    Psi1, Psi2 = validate_pure(Psi1), validate_pure(Psi2)
    if Psi1.shape != (4,) or Psi2.shape != (4,):
        raise DimensionError("joint outputs must be two-qubit states")
    target = coherence(CoherenceMeasure.L1, known.psi1)
    failures = {}
    for name, Psi in (("Psi1", Psi1), ("Psi2", Psi2)):
        rho = np.outer(Psi, Psi.conj())
        for label, keep in (("A", 0), ("B", 1)):
            got = coherence(CoherenceMeasure.L1, partial_trace(rho, [keep], [2, 2]))
            if abs(got - target) > CONTRACT_TOL:
                failures[f"{name}/{label}"] = (target, got)
    if failures:
        detail = ", ".join(f"{k}: expected {e:.12g}, got {g:.12g}" for k, (e, g) in failures.items())
        raise ContractError(f"reduced coherence contract violated ({detail})", failures)
    return _build_branch_machine(variant, known, Psi1, Psi2)


def build_wz() -> CloningMachine:
    """``|0>|0>|X0> -> |0>|0>|X1>`` and ``|1>|0>|X0> -> |1>|1>|X2>``."""
    known = KnownPair(KET0, KET1)
    return _build_branch_machine(
        Variant.WZ,
        known,
        np.kron(KET0, KET0),
        np.kron(KET1, KET1),
        product_outputs=(KET0, KET0, KET1, KET1),
    )


BH_OPTIMAL_C = np.sqrt(2 / 3)
BH_OPTIMAL_D = np.sqrt(1 / 6)


def build_bh(c: float = BH_OPTIMAL_C, d: float = BH_OPTIMAL_D, known: KnownPair | None = None) -> CloningMachine:
    """Symmetric two-copy cloner with amplitudes ``c`` (both copies right) and ``d``.

    Branch 1 maps to ``c|11>|0> + d(|12> + |21>)|1>`` and branch 2 to
    ``c|22>|1> + d(|21> + |12>)|0>`` on the machine qubit, where ``|ij>``
    is ``psi_i (x) psi_j`` on AB. The defaults give the optimal universal
    cloner.
    """
    if isinstance(c, complex) or isinstance(d, complex):
        raise InvalidMachineError("B-H coefficients must be real")
    c, d = float(c), float(d)
    if abs(c * c + 2 * d * d - 1.0) > 1e-12:
        raise InvalidMachineError(f"B-H coefficients violate c^2 + 2d^2 = 1 (got {c * c + 2 * d * d!r})")
    known = known or KnownPair(KET0, KET1)
    p1, p2 = known.psi1, known.psi2
    sym = np.kron(p1, p2) + np.kron(p2, p1)
    img1 = c * np.kron(np.kron(p1, p1), KET0) + d * np.kron(sym, KET1)
    img2 = c * np.kron(np.kron(p2, p2), KET1) + d * np.kron(sym, KET0)
    blank = np.kron(KET0, KET0)
    unitary = complete_unitary([(np.kron(p1, blank), img1), (np.kron(p2, blank), img2)])
    return CloningMachine(Variant.BH, known, unitary, params={"c": c, "d": d})


def build_machineless(psi1p, psi1pp, psi2p, psi2pp) -> CloningMachine:
    """Cloner without machine qubit: ``|+>|0> -> psi1' psi1''``, ``|->|0> -> psi2' psi2''``.

    The images are orthogonal only if ``<psi1'|psi2'> = 0`` or
    ``<psi1''|psi2''> = 0``; otherwise ``InvalidMachineError`` is raised.
    """
    outs = [_qubit(v) for v in (psi1p, psi1pp, psi2p, psi2pp)]
    img1 = np.kron(outs[0], outs[1])
    img2 = np.kron(outs[2], outs[3])
    overlap = abs(np.vdot(img1, img2))
    if overlap > ORTHO_TOL:
        raise InvalidMachineError(
            f"machine-less images are not orthogonal (|<Psi1|Psi2>| = {overlap:.3e}); "
            "need <psi1'|psi2'> = 0 or <psi1''|psi2''> = 0"
        )
    known = KnownPair(PLUS, MINUS)
    unitary = complete_unitary([(np.kron(PLUS, KET0), img1), (np.kron(MINUS, KET0), img2)])
    return CloningMachine(Variant.MACHINELESS, known, unitary, product_outputs=tuple(outs))


def build_max_cloner(phi1: float) -> CloningMachine:
    """Equatorial cloner at azimuth ``phi1`` copying each known state onto both outputs.

    The known pair is ``(|0> + e^{i phi1}|1>)/sqrt(2)`` and
    ``(|0> - e^{i phi1}|1>)/sqrt(2)``; both reduced-output segments pass
    through the Bloch-ball axis.
    """
    phi1 = float(phi1) % (2 * np.pi)
    psi1 = np.array([1, np.exp(1j * phi1)]) / np.sqrt(2)
    psi2 = np.array([1, -np.exp(1j * phi1)]) / np.sqrt(2)
    known = KnownPair(psi1, psi2)
    return _build_branch_machine(
        Variant.MAX,
        known,
        np.kron(psi1, psi1),
        np.kron(psi2, psi2),
        params={"phi1": phi1},
        product_outputs=(psi1, psi1, psi2, psi2),
    )


def run_unitary(machine: CloningMachine, psi) -> np.ndarray:
    """Final joint pure state ``U (psi (x) |0>_B [(x) |0>_C])``."""
    psi = _qubit(psi)
    blank = np.zeros(machine.unitary.shape[0] // 2, dtype=complex)
    blank[0] = 1.0
    return machine.unitary @ np.kron(psi, blank)


def apply(machine: CloningMachine, psi, measure: CoherenceMeasure = CoherenceMeasure.L1) -> CloneReport:
    """Run ``machine`` on a single-qubit input and measure coherence transfer."""
    psi = _qubit(psi)
    out = run_unitary(machine, psi)
    joint = np.outer(out, out.conj())
    rho_A = partial_trace(joint, [0], machine.dims)
    rho_B = partial_trace(joint, [1], machine.dims)
    c_in = coherence(measure, psi)
    c_A = coherence(measure, rho_A)
    c_B = coherence(measure, rho_B)
    cloned = abs(c_A - c_in) <= CLONE_TOL and abs(c_B - c_in) <= CLONE_TOL
    return CloneReport(psi, joint, rho_A, rho_B, c_in, c_A, c_B, bool(cloned))


def input_coherence(known: KnownPair, alpha, beta) -> float:
    """l1 coherence of ``alpha psi1 + beta psi2`` from the pair amplitudes.

    With ``psi1 = (a, b)`` and ``psi2 = (b*, -a*)`` this is
    ``2|(alpha a + beta b*)(alpha b - beta a*)|``.
    """
    alpha, beta = complex(alpha), complex(beta)
    norm = abs(alpha) ** 2 + abs(beta) ** 2
    if abs(norm - 1.0) > 1e-10:
        raise NormalizationError(f"|alpha|^2 + |beta|^2 = {norm:.12g}", deficit=1.0 - norm)
    (a, b), (c, e) = known.psi1, known.psi2
    return 2 * abs((alpha * a + beta * c) * (alpha * b + beta * e))
