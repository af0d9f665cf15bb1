"""Executable checks of the no-cloning-of-coherence results.

Each ``check_*`` function returns a :class:`TheoremVerdict`. Randomized
checks draw from a private PCG64 stream seeded by ``(seed, check name)``,
so verdicts are reproducible and independent of call order.
"""
from __future__ import annotations

import csv
import json
import math
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .cloners import (
    CloningMachine,
    KnownPair,
    apply,
    build_bh,
    build_generic,
    build_machineless,
    build_max_cloner,
    build_wz,
    input_coherence,
)
from .qcore import CoherenceMeasure, coherence, haar_random_pure, state_from_angles

BOUND_TOL = 1e-9
EQUATOR_BAND = 1e-3


@dataclass
class TheoremVerdict:
    name: str
    trials: int
    violations: int
    worst_margin: float
    witness: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def check_rng(seed: int, name: str) -> np.random.Generator:
    """Private generator for one check, keyed on the global seed and the check name."""
    return np.random.default_rng([int(seed) % 2**64, zlib.crc32(name.encode())])


def _c(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _vec(v) -> list[list[float]]:
    return [_c(z) for z in np.ravel(v)]


# -- samplers ---------------------------------------------------------------


def random_known_pair(rng, band: float = EQUATOR_BAND) -> KnownPair:
    """Haar-random known pair, rejecting pairs within ``band`` of the equator."""
    while True:
        a, b = haar_random_pure(1, rng)
        if abs(2 * abs(a) * abs(b) - 1) >= band:
            return KnownPair.from_amplitudes(a, b)


def random_state_with_coherence(rng, c: float) -> np.ndarray:
    """Uniformly random pure qubit on one of the two rims of coherence ``c``."""
    cos_theta = math.sqrt(max(1 - c * c, 0.0)) * rng.choice([-1.0, 1.0])
    return state_from_angles(math.acos(cos_theta), rng.uniform(0, 2 * np.pi))


def _orthogonal(u):
    return np.array([np.conj(u[1]), -np.conj(u[0])])


def random_branch_output(rng, c: float, entangled: bool) -> np.ndarray:
    """Two-qubit pure state whose two marginals both have l1 coherence ``c``.

    The entangled form is ``sqrt(l) u u' + sqrt(1-l) u_perp u'_perp`` with
    ``|u|`` and ``|u'|`` of coherence ``c_u >= c``; the Schmidt weight
    ``l = (1 + c/c_u)/2`` shrinks both marginals back to coherence ``c``.
    """
    if not entangled or c == 0:
        return np.kron(random_state_with_coherence(rng, c), random_state_with_coherence(rng, c))
    c_u = rng.uniform(c, 1.0)
    lam = 0.5 * (1 + c / c_u)
    u = random_state_with_coherence(rng, c_u)
    w = random_state_with_coherence(rng, c_u)
    return math.sqrt(lam) * np.kron(u, w) + math.sqrt(1 - lam) * np.kron(_orthogonal(u), _orthogonal(w))


def random_generic_machine(rng, known: KnownPair | None = None, entangled: bool | None = None) -> CloningMachine:
    known = known or random_known_pair(rng)
    c1 = known.coherence
    if entangled is None:
        entangled = bool(rng.integers(2))
    return build_generic(
        known, random_branch_output(rng, c1, entangled), random_branch_output(rng, c1, entangled)
    )


def _rim_state(c, azimuth, upper):
    cos_theta = math.sqrt(max(1 - c * c, 0.0)) * (1.0 if upper else -1.0)
    return state_from_angles(math.acos(cos_theta), azimuth)


def random_equal_ratio_machine(rng, known: KnownPair | None = None) -> CloningMachine:
    """Product-output machine whose A and B segments meet every cylinder at the same weights.

    The A outputs sit at azimuths ``f`` and ``f + d``, the B outputs at
    ``g`` and ``g +- d``; equal opening angles make the two output
    coherences agree for every weight although the segments differ in 3-D.
    """
    known = known or random_known_pair(rng)
    c1 = known.coherence
    f, g, d = rng.uniform(0, 2 * np.pi, size=3)
    sign = rng.choice([-1.0, 1.0])
    up = rng.integers(2, size=4).astype(bool)
    Psi1 = np.kron(_rim_state(c1, f, up[0]), _rim_state(c1, g, up[1]))
    Psi2 = np.kron(_rim_state(c1, f + d, up[2]), _rim_state(c1, g + sign * d, up[3]))
    return build_generic(known, Psi1, Psi2)


def _input_above(rng, c1: float) -> np.ndarray:
    # Haar measure conditioned on coherence > c1: cos(theta) uniform in a band.
    half = math.sqrt(max(1 - c1 * c1, 0.0))
    while True:
        psi = state_from_angles(math.acos(rng.uniform(-half, half)), rng.uniform(0, 2 * np.pi))
        if coherence(CoherenceMeasure.L1, psi) > c1 + BOUND_TOL:
            return psi


# -- checks -----------------------------------------------------------------


def check_theorem1(machine_seed: int, trials: int,
                   measure: CoherenceMeasure = CoherenceMeasure.L1) -> TheoremVerdict:
    """Output coherence never exceeds that of the known states.

    Every trial draws a non-equatorial known pair, a random machine obeying
    the reduced-coherence contract (product or entangled joint outputs) and
    an input more coherent than the known states. A violation is either
    output above the bound or a perfect clone.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    name = "theorem1" if measure is CoherenceMeasure.L1 else "theorem1_" + measure.value
    rng = check_rng(machine_seed, name)
    violations, worst, witness = 0, -math.inf, {}
    # Entangled outputs keep the l1 contract but not the entropic one, so the
    # relative-entropy run uses product outputs only.
    entangled = None if measure is CoherenceMeasure.L1 else False
    for trial in range(trials):
        machine = random_generic_machine(rng, entangled=entangled)
        known = machine.known
        psi = _input_above(rng, known.coherence)
        rep = apply(machine, psi, measure)
        bound = coherence(measure, known.psi1)
        margin = max(rep.c_A, rep.c_B) - bound
        if margin > BOUND_TOL or rep.perfectly_cloned or rep.c_in <= bound:
            violations += 1
        if margin > worst:
            worst = margin
            witness = {
                "trial": trial,
                "measure": measure.value,
                "a": _c(known.a),
                "b": _c(known.b),
                "input": _vec(psi),
                "bound": bound,
                "c_in": rep.c_in,
                "c_A": rep.c_A,
                "c_B": rep.c_B,
                "perfectly_cloned": rep.perfectly_cloned,
            }
    return TheoremVerdict(name, trials, violations, float(worst), witness)


def corollary_states(known: KnownPair) -> tuple[np.ndarray, np.ndarray]:
    s = 1 / math.sqrt(2)
    return known.state(s, s), known.state(1j * s, s)


def check_corollary1(phi1: float, machine: CloningMachine | None = None) -> TheoremVerdict:
    """Two inputs with equal ``|alpha|`` get equal output coherence but differ at the input.

    Uses the equatorial pair ``a = 1/sqrt(2)``, ``b = e^{i phi1}/sqrt(2)``.
    When ``|ab - a*b*| = |ab + a*b*|`` the two inputs have the same
    coherence and the witness is marked ``non-generic phi1``.
    """
    known = KnownPair.equatorial(phi1)
    if machine is None:
        machine = build_generic(known, np.kron(known.psi1, known.psi1), np.kron(known.psi2, known.psi2))
    chi1, chi2 = corollary_states(known)
    a, b = known.a, known.b
    expected1 = abs(a * b - (a * b).conjugate())
    expected2 = abs(a * b + (a * b).conjugate())
    rep1, rep2 = apply(machine, chi1), apply(machine, chi2)
    s = 1 / math.sqrt(2)
    closed1, closed2 = input_coherence(known, s, s), input_coherence(known, 1j * s, s)
    x = machine.branch_marginals()["A"][0][0, 1]
    y = machine.branch_marginals()["A"][1][0, 1]
    final_formula = abs(x + y)

    violations = 0
    for got, want in ((rep1.c_in, expected1), (rep2.c_in, expected2), (closed1, expected1),
                      (closed2, expected2), (rep1.c_A, final_formula), (rep2.c_A, final_formula)):
        if abs(got - want) > 1e-12:
            violations += 1
    final_gap = abs(rep1.c_A - rep2.c_A)
    if final_gap > 1e-12:
        violations += 1
    generic = abs(rep1.c_in - rep2.c_in) > 1e-9
    if generic and rep1.perfectly_cloned and rep2.perfectly_cloned:
        violations += 1
    witness = {
        "status": "mismatch witnessed" if generic else "non-generic phi1",
        "phi1": float(phi1),
        "chi1": _vec(chi1),
        "chi2": _vec(chi2),
        "c_in_chi1": rep1.c_in,
        "c_in_chi2": rep2.c_in,
        "c_A_chi1": rep1.c_A,
        "c_A_chi2": rep2.c_A,
        "initial_gap": abs(rep1.c_in - rep2.c_in),
    }
    return TheoremVerdict("corollary1", 2, violations, float(final_gap), witness)


def random_theorem2_machine(rng) -> CloningMachine:
    """Machine-less cloner with orthogonal A outputs and a shared B output, all equatorial."""
    f, g = rng.uniform(0, 2 * np.pi, size=2)
    eq = math.pi / 2
    return build_machineless(
        state_from_angles(eq, f), state_from_angles(eq, g),
        state_from_angles(eq, f + math.pi), state_from_angles(eq, g),
    )


def check_theorem2(trials: int, seed: int = 0) -> TheoremVerdict:
    """Without a machine qubit, subsystem B stays maximally coherent for every input."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    rng = check_rng(seed, "theorem2")
    machine = random_theorem2_machine(rng)
    violations, worst, witness, lowest = 0, 0.0, {}, math.inf
    done = 0
    while done < trials:
        psi = haar_random_pure(1, rng)
        rep = apply(machine, psi)
        if rep.c_in >= 1 - 1e-6:
            continue
        done += 1
        dev = abs(rep.c_B - 1.0)
        worst = max(worst, dev)
        mismatch = max(abs(rep.c_A - rep.c_in), abs(rep.c_B - rep.c_in))
        if dev > 1e-12 or rep.perfectly_cloned or mismatch <= 1e-6:
            violations += 1
        if rep.c_in < lowest:
            lowest = rep.c_in
            witness = {"input": _vec(psi), "c_in": rep.c_in, "c_A": rep.c_A, "c_B": rep.c_B}
    return TheoremVerdict("theorem2", trials, violations, float(worst), witness)


MAX_CLONER_OFFSETS = tuple((k + 0.5) * math.pi / 8 for k in range(16))


def check_max_cloner(phi1: float, theta_samples: int = 256) -> TheoremVerdict:
    """Equatorial max cloner: perfect on the great circle, ``|sin t cos(dphi)|`` elsewhere."""
    if theta_samples < 8:
        raise ValueError("theta_samples must be at least 8")
    machine = build_max_cloner(phi1)
    thetas = np.linspace(0.0, math.pi, theta_samples)
    violations, worst, trials = 0, 0.0, 0
    witness = {}
    for offset in (0.0, math.pi):
        for theta in thetas:
            rep = apply(machine, state_from_angles(theta, phi1 + offset))
            dev = max(abs(rep.c_A - abs(math.sin(theta))), abs(rep.c_B - abs(math.sin(theta))))
            worst = max(worst, dev)
            trials += 1
            if dev > 1e-9 or not rep.perfectly_cloned:
                violations += 1
    witness["on_circle_max_deviation"] = worst
    off_worst = 0.0
    for offset in MAX_CLONER_OFFSETS:
        for theta in thetas:
            rep = apply(machine, state_from_angles(theta, phi1 + offset))
            want = abs(math.sin(theta) * math.cos(offset))
            dev = max(abs(rep.c_A - want), abs(rep.c_B - want))
            off_worst = max(off_worst, dev)
            trials += 1
            lost = abs(math.sin(theta)) - want
            if dev > 1e-9 or (lost > 1e-9 and rep.perfectly_cloned):
                violations += 1
    witness["off_circle_max_deviation"] = off_worst
    witness["phi1"] = float(phi1)
    return TheoremVerdict("maxcloner", trials, violations, float(max(worst, off_worst)), witness)


BH_FIDELITY = 5 / 6
BH_COHERENCE_RATIO = 2 / 3


def check_state_vs_coherence_cloning(trials: int, seed: int = 0) -> TheoremVerdict:
    """B-H copies the state with fidelity 5/6 but only 2/3 of the coherence; W-Z copies none."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    rng = check_rng(seed, "statevscoherence")
    bh, wz = build_bh(), build_wz()
    violations, worst = 0, 0.0
    fids, ratios, wz_out = [], [], []
    for _ in range(trials):
        psi = haar_random_pure(1, rng)
        rep = apply(bh, psi)
        fid = float(np.vdot(psi, rep.rho_A_final @ psi).real)
        fids.append(fid)
        devs = [abs(fid - BH_FIDELITY)]
        if rep.c_in > 1e-6:
            ratio = rep.c_A / rep.c_in
            ratios.append(ratio)
            devs.append(abs(ratio - BH_COHERENCE_RATIO))
        wz_rep = apply(wz, psi)
        wz_out.append(max(wz_rep.c_A, wz_rep.c_B))
        devs.append(wz_out[-1])
        worst = max(worst, *devs)
        if devs[0] > 1e-9 or (len(devs) == 3 and devs[1] > 1e-9) or wz_out[-1] > 1e-12:
            violations += 1
    witness = {
        "bh_mean_fidelity": float(np.mean(fids)),
        "bh_mean_coherence_ratio": float(np.mean(ratios)) if ratios else None,
        "wz_max_output_coherence": float(max(wz_out)),
    }
    return TheoremVerdict("statevscoherence", trials, violations, float(worst), witness)


# -- sweeps -----------------------------------------------------------------


@dataclass(frozen=True)
class SweepGrid:
    """Bloch-angle grid: theta over [0, pi] inclusive, phi over [0, 2 pi) exclusive."""

    theta_samples: int
    phi_samples: int

    @classmethod
    def parse(cls, text: str) -> "SweepGrid":
        t, p = text.lower().split("x")
        return cls(int(t), int(p))

    def thetas(self) -> np.ndarray:
        return np.linspace(0.0, math.pi, self.theta_samples)

    def phis(self) -> np.ndarray:
        return np.linspace(0.0, 2 * math.pi, self.phi_samples, endpoint=False)


@dataclass(frozen=True)
class SweepRow:
    theta: float
    phi: float
    c_in: float
    c_A: float
    c_B: float
    cloned: bool


SWEEP_HEADER = ("theta", "phi", "c_in", "c_A", "c_B", "cloned")


def fmt(x: float) -> str:
    """12 significant digits; negative zero prints as 0."""
    x = float(x)
    return "0" if x == 0 else f"{x:.12g}"


def _sweep_row_block(machine, theta, phis):
    rows = []
    for phi in phis:
        rep = apply(machine, state_from_angles(theta, phi))
        rows.append(SweepRow(float(theta), float(phi), rep.c_in, rep.c_A, rep.c_B, rep.perfectly_cloned))
    return rows


def sweep(machine: CloningMachine, grid: SweepGrid, out=None, jobs: int = 1) -> list[SweepRow]:
    """Apply ``machine`` over a theta-major Bloch grid; optionally write CSV to ``out``.

    ``out`` is a path or a text stream. The row order does not depend on
    ``jobs``.
    """
    phis = grid.phis()
    thetas = grid.thetas()
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            blocks = list(pool.map(lambda t: _sweep_row_block(machine, t, phis), thetas))
    else:
        blocks = [_sweep_row_block(machine, t, phis) for t in thetas]
    rows = [r for block in blocks for r in block]
    if out is not None:
        if hasattr(out, "write"):
            write_sweep_csv(rows, out)
        else:
            try:
                with open(out, "w", newline="", encoding="utf-8") as fh:
                    write_sweep_csv(rows, fh)
            except OSError as exc:
                raise OSError(f"cannot write sweep to {out}: {exc}") from exc
    return rows


def write_sweep_csv(rows, fh):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    for r in rows:
        writer.writerow([fmt(r.theta), fmt(r.phi), fmt(r.c_in), fmt(r.c_A), fmt(r.c_B),
                         "true" if r.cloned else "false"])
