"""Bloch-ball geometry of coherence cloning.

For a machine whose known branches end in orthogonal machine states, an
input ``sqrt(p) psi1 + sqrt(1-p) e^{i chi} psi2`` leaves subsystem A in
``p rho'_A + (1-p) rho''_A`` (likewise for B). The output coherence is the
distance of that point from the z axis, so it depends on ``p`` alone, while
the input coherence depends on ``p`` and ``chi``. An input is cloned when
both output segments cross the input's coherence cylinder at the same
weight ``p`` and the input itself sits on that cylinder.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .cloners import CloningMachine, KnownPair
from .errors import InvalidMachineError, InvalidStateError
from .qcore import BlochVector, bloch_from_density, bloch_from_state

DEGENERATE = "degenerate-continuum"

TANGENCY_TOL = 1e-12
ROOT_MATCH_TOL = 1e-9
MERGE_TOL = 1e-7
CONTINUUM_FRACTION = 0.05
_EDGE_TOL = 1e-12
_TWO_PI = 2 * np.pi


class DegenerateIntersection(ValueError):
    """The whole segment lies on the cylinder surface."""


@dataclass(frozen=True)
class CoherenceCylinder:
    radius: float

    def __post_init__(self):
        if not 0.0 <= self.radius <= 1.0:
            raise InvalidStateError(f"cylinder radius must lie in [0, 1], got {self.radius!r}")


@dataclass(frozen=True)
class Segment:
    """Chord from ``first`` (weight p = 1) to ``second`` (weight p = 0)."""

    first: BlochVector
    second: BlochVector

    def point(self, p: float) -> np.ndarray:
        return p * self.first.as_array() + (1 - p) * self.second.as_array()


@dataclass(frozen=True, eq=False)
class CircK:
    known: KnownPair
    k: float

    def __post_init__(self):
        if not 0.0 <= self.k <= 1.0:
            raise ValueError(f"k must lie in [0, 1], got {self.k!r}")


class Solution(NamedTuple):
    p: float
    chi: float
    theta: float
    phi: float
    c: float


@dataclass
class CloneableSolutionSet:
    """Inputs whose coherence a machine clones perfectly.

    ``count`` is the number of distinct states, or ``None`` when a whole
    curve of states is cloned (``degenerate`` is then True and
    ``solutions`` holds a sampling of the curve).
    """

    solutions: list[Solution] = field(default_factory=list)
    count: int | None = 0
    degenerate: bool = False
    coherence: float | None = None

    @property
    def status(self) -> str:
        return DEGENERATE if self.degenerate else "discrete"


def _transverse_roots(t1, t2, c):
    """Roots p in [0, 1] of ``|p t1 + (1-p) t2| = c``; None if every p is a root.

    Solved as ``p0 +- sqrt(c^2 - d^2) / |t1 - t2|``, with ``p0`` the foot of
    the perpendicular from the axis and ``d`` the axis-to-line distance.
    Unlike the expanded quadratic this keeps full precision for small c.
    """
    t1, t2 = np.asarray(t1, dtype=float), np.asarray(t2, dtype=float)
    w = t1 - t2
    ww = float(w @ w)
    if ww < 1e-15:
        return None if abs(math.hypot(*t2) - c) <= 1e-12 else []
    norm_w = math.sqrt(ww)
    p0 = -float(t2 @ w) / ww
    d = abs(t2[0] * w[1] - t2[1] * w[0]) / norm_w
    if abs(c - d) <= TANGENCY_TOL:
        roots = [p0]
    elif d > c:
        return []
    else:
        h = math.sqrt((c - d) * (c + d)) / norm_w
        roots = [p0 - h, p0 + h]
    return [min(max(r, 0.0), 1.0) for r in roots if -_EDGE_TOL <= r <= 1 + _EDGE_TOL]


def segment_cylinder_intersect(seg: Segment, cyl: CoherenceCylinder) -> list[float]:
    """Mixing weights p at which the segment crosses the cylinder wall.

    Solves ``|p v' + (1-p) v''|^2 = c^2`` on the transverse components.
    A tangent crossing (axis-to-line distance within 1e-12 of c) is
    reported once.

    Raises
    ------
    DegenerateIntersection
        If the segment is vertical and lies on the cylinder wall.
    """
    roots = _transverse_roots(seg.first.transverse, seg.second.transverse, cyl.radius)
    if roots is None:
        raise DegenerateIntersection("segment lies on the cylinder surface")
    return roots


def _require_branch_machine(machine: CloningMachine):
    if machine.branch_outputs is None or not machine.machine_assisted:
        raise InvalidMachineError(
            f"classification needs a machine-assisted cloner with orthogonal final machine "
            f"states; {machine.variant.value} does not qualify"
        )


def branch_segments(machine: CloningMachine) -> dict[str, Segment]:
    """Segments joining the two branch marginals of subsystems A and B."""
    _require_branch_machine(machine)
    marg = machine.branch_marginals()
    return {k: Segment(bloch_from_density(r1), bloch_from_density(r2)) for k, (r1, r2) in marg.items()}


def _output_coherence(seg: Segment, p):
    p = np.asarray(p, dtype=float)[..., None]
    t = p * seg.first.transverse + (1 - p) * seg.second.transverse
    return np.hypot(t[..., 0], t[..., 1])


def _input_amplitudes(known: KnownPair, p, chi):
    p = np.asarray(p, dtype=float)
    alpha = np.sqrt(p)
    beta = np.sqrt(np.clip(1 - p, 0.0, None)) * np.exp(1j * np.asarray(chi, dtype=float))
    s0 = alpha * known.psi1[0] + beta * known.psi2[0]
    s1 = alpha * known.psi1[1] + beta * known.psi2[1]
    return s0, s1


def _input_coherence(known: KnownPair, p, chi):
    s0, s1 = _input_amplitudes(known, p, chi)
    return 2 * np.abs(s0) * np.abs(s1)


def _solution(known: KnownPair, p: float, chi: float) -> Solution:
    s0, s1 = _input_amplitudes(known, p, chi)
    s0, s1 = complex(s0), complex(s1)
    theta = 2 * math.atan2(abs(s1), abs(s0))
    phi = (np.angle(s1) - np.angle(s0)) % _TWO_PI if abs(s0) > 1e-15 and abs(s1) > 1e-15 else 0.0
    if p <= _EDGE_TOL or p >= 1 - _EDGE_TOL:
        chi = 0.0
    return Solution(float(p), float(chi % _TWO_PI), float(theta), float(phi), float(2 * abs(s0) * abs(s1)))


def _merge(known: KnownPair, solutions) -> list[Solution]:
    merged, points = [], []
    for sol in sorted(solutions):
        s0, s1 = _input_amplitudes(known, sol.p, sol.chi)
        v = bloch_from_state(np.array([complex(s0), complex(s1)])).as_array()
        if all(np.linalg.norm(v - q) > MERGE_TOL for q in points):
            points.append(v)
            merged.append(sol)
    return merged


def _chi_roots_closed_form(known: KnownPair, p: float, c: float):
    """All chi with c_in(p, chi) = c, or None when every chi qualifies."""
    a1, a2 = complex(known.psi1[0]), complex(known.psi2[0])
    base = p * abs(a1) ** 2 + (1 - p) * abs(a2) ** 2
    z = a1.conjugate() * a2
    amp = 2 * math.sqrt(p * (1 - p)) * abs(z)
    shift = np.angle(z)
    # c_in^2 = 4u(1-u) with u = |<0|psi>|^2 = base + amp cos(chi + shift).
    disc = max(1.0 - c * c, 0.0)
    targets = sorted({0.5 * (1 - math.sqrt(disc)), 0.5 * (1 + math.sqrt(disc))})
    if amp <= 1e-15:
        return None if any(abs(base - u) <= 1e-12 for u in targets) else []
    roots = []
    for u in targets:
        r = (u - base) / amp
        if abs(r) > 1 + 1e-10:
            continue
        if abs(abs(r) - 1) <= 1e-10:
            roots.append((0.0 if r > 0 else math.pi) - shift)
        else:
            x = math.acos(r)
            roots.extend([x - shift, -x - shift])
    return [float(x % _TWO_PI) for x in roots]


def solve_for_coherence(machine: CloningMachine, c: float) -> CloneableSolutionSet:
    """Closed-form cloneable inputs with input coherence ``c``.

    Intersects the A and B segments with the cylinder of radius ``c``,
    keeps the weights common to both, and inverts the input coherence in
    ``chi`` at each such weight. The second root of the segment quadratic
    plays the role of the complementary circle.
    """
    CoherenceCylinder(c)
    segs = branch_segments(machine)
    known = machine.known
    roots = {k: _transverse_roots(s.first.transverse, s.second.transverse, c) for k, s in segs.items()}
    result = CloneableSolutionSet(coherence=c)

    if roots["A"] is None and roots["B"] is None:
        if c > TANGENCY_TOL:
            result.degenerate, result.count = True, None
            return result
        # Every weight works; only the two poles have zero coherence.
        sols = []
        for pole in (np.array([1, 0], complex), np.array([0, 1], complex)):
            alpha, beta = known.coefficients(pole)
            p = abs(alpha) ** 2
            chi = np.angle(beta) - np.angle(alpha) if abs(alpha) > 1e-15 else 0.0
            sols.append(_solution(known, p, chi))
        result.solutions = _merge(known, sols)
        result.count = len(result.solutions)
        return result

    if roots["A"] is None:
        common = roots["B"]
    elif roots["B"] is None:
        common = roots["A"]
    else:
        common = [p for p in roots["A"] if any(abs(p - q) <= ROOT_MATCH_TOL for q in roots["B"])]

    sols = []
    for p in common:
        if p <= _EDGE_TOL or p >= 1 - _EDGE_TOL:
            if abs(known.coherence - c) <= ROOT_MATCH_TOL:
                sols.append(_solution(known, round(p), 0.0))
            continue
        chis = _chi_roots_closed_form(known, p, c)
        if chis is None:
            result.degenerate, result.count = True, None
            result.solutions = [_solution(known, p, x) for x in np.linspace(0, _TWO_PI, 64, endpoint=False)]
            return result
        sols.extend(_solution(known, p, x) for x in chis)
    result.solutions = _merge(known, sols)
    result.count = len(result.solutions)
    return result


def count_for_coherence(machine: CloningMachine, c: float):
    """Number of distinct cloneable inputs with coherence ``c``, or ``DEGENERATE``."""
    res = solve_for_coherence(machine, c)
    return DEGENERATE if res.degenerate else res.count


def _bisect(f, lo, hi, xtol=1e-12):
    flo = f(lo)
    if flo == 0:
        return lo
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _golden_min(f, lo, hi, xtol=1e-13):
    inv = (math.sqrt(5) - 1) / 2
    x1, x2 = hi - inv * (hi - lo), lo + inv * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > xtol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - inv * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + inv * (hi - lo)
            f2 = f(x2)
    return 0.5 * (lo + hi)


def _refine_extremum(f, lo, hi, step=1e-6):
    """Locate the extremum of ``f`` in [lo, hi] via the sign of a central difference."""

    def slope(x):
        return f(x + step) - f(x - step)

    if slope(lo) * slope(hi) > 0:
        return _golden_min(lambda y: abs(f(y)), lo, hi)
    return _bisect(slope, lo, hi, xtol=1e-13)


def _grid_roots(f, grid, values, tol, periodic=False):
    """Roots of a scalar function sampled on ``grid``: sign changes plus tangencies."""
    n = len(grid)
    h = grid[1] - grid[0]
    span = _TWO_PI if periodic else 0.0
    roots = []
    for i in range(n if periodic else n - 1):
        j = (i + 1) % n
        if values[i] == 0:
            roots.append(grid[i])
        elif values[i] * values[j] < 0:
            roots.append(_bisect(f, grid[i], grid[j] + (span if j == 0 else 0.0)))
    if not periodic and values[-1] == 0:
        roots.append(grid[-1])
    mag = np.abs(values)
    for i in range(n):
        if not periodic and i in (0, n - 1):
            if mag[i] <= tol:
                roots.append(grid[i])
            continue
        if 0 < mag[i] <= mag[(i - 1) % n] and mag[i] <= mag[(i + 1) % n]:
            lo, hi = grid[i] - h, grid[i] + h
            x = _refine_extremum(f, lo, hi)
            if abs(f(x)) <= tol:
                roots.append(float(x))
    if periodic:
        roots = [x % _TWO_PI for x in roots]
    return _collapse_split_roots(f, sorted(roots), tol, span)


def _collapse_split_roots(f, roots, tol, period=0.0, gap=1e-5):
    # Round-off splits a double root into two roots ~sqrt(eps) apart.
    out = []
    for x in roots:
        if out and x - out[-1] <= gap and abs(f(0.5 * (x + out[-1]))) <= tol:
            out[-1] = 0.5 * (x + out[-1])
        else:
            out.append(x)
    if period and len(out) > 1:
        first, last = out[0] + period, out[-1]
        if first - last <= gap and abs(f(0.5 * (first + last))) <= tol:
            out[0] = (0.5 * (first + last)) % period
            out.pop()
    return out


def _chi_roots_grid(known, p, target, chi_grid, tol):
    def h(x):
        return float(_input_coherence(known, p, x)) - target

    vals = _input_coherence(known, p, chi_grid) - target
    if np.ptp(vals) < 1e-14:
        # chi only moves the global phase here; every chi or none solves.
        return None if abs(vals[0]) <= tol else []
    return [x % _TWO_PI for x in _grid_roots(h, chi_grid, vals, tol, periodic=True)]


def classify_cloneable(machine: CloningMachine, p_samples: int = 256, chi_samples: int = 256,
                       tol: float = 1e-9, coherence: float | None = None) -> CloneableSolutionSet:
    """Scan the (p, chi) input parameterization for perfectly cloned states.

    The weight p is scanned first, since both output coherences depend on
    it alone: candidate weights are where A and B cross at equal
    coherence (and, if ``coherence`` is given, where they equal it). At
    each candidate the relative phase chi is scanned for the input
    coherence to match. Grid hits are refined by bisection (or a bounded
    minimization at tangencies) and duplicates are merged on the Bloch
    sphere. If A and B agree on more than 5% of the weight grid and
    interior phases solve there, the set is reported as a continuum.
    """
    if p_samples < 64 or chi_samples < 64:
        raise ValueError("p_samples and chi_samples must be at least 64")
    if tol < 1e-10:
        raise ValueError("tol must be at least 1e-10")
    segs = branch_segments(machine)
    known = machine.known
    p_grid = np.linspace(0.0, 1.0, p_samples)
    chi_grid = np.linspace(0.0, _TWO_PI, chi_samples, endpoint=False)

    def cA(p):
        return float(_output_coherence(segs["A"], p))

    def g(p):
        return cA(p) - float(_output_coherence(segs["B"], p))

    g_vals = _output_coherence(segs["A"], p_grid) - _output_coherence(segs["B"], p_grid)
    continuum_p = np.mean(np.abs(g_vals) <= tol) > CONTINUUM_FRACTION
    result = CloneableSolutionSet(coherence=coherence)

    if coherence is not None:
        def gc(p):
            return cA(p) - coherence

        gc_vals = _output_coherence(segs["A"], p_grid) - coherence
        if continuum_p and np.mean(np.abs(gc_vals) <= tol) > CONTINUUM_FRACTION:
            candidates = list(p_grid)
            fixed_target = True
        else:
            found = _grid_roots(gc, p_grid, gc_vals, tol)
            candidates = [p for p in found if abs(g(p)) <= tol] if not continuum_p else found
            fixed_target = False
    elif continuum_p:
        candidates = list(p_grid)
        fixed_target = False
    else:
        candidates = _grid_roots(g, p_grid, g_vals, tol)
        fixed_target = False

    sols, interior_hits = [], 0
    for p in candidates:
        # Match the input to what the machine actually outputs at this weight.
        if p <= _EDGE_TOL or p >= 1 - _EDGE_TOL:
            # Input coherence moves like sqrt(p) near the poles, so snap first.
            p = float(round(p))
            if abs(float(_input_coherence(known, p, 0.0)) - cA(p)) <= tol:
                sols.append(_solution(known, p, 0.0))
            continue
        target = cA(p)
        chis = _chi_roots_grid(known, p, target, chi_grid, tol)
        if chis is None:
            result.solutions = [_solution(known, p, x) for x in chi_grid]
            result.degenerate, result.count = True, None
            return result
        if chis:
            interior_hits += 1
        sols.extend(_solution(known, p, x) for x in chis)

    merged = _merge(known, sols)
    degenerate = (continuum_p and coherence is None and interior_hits > CONTINUUM_FRACTION * p_samples) or (
        fixed_target and coherence > 1e-12 and interior_hits > 0
    )
    result.solutions = merged
    result.degenerate = bool(degenerate)
    result.count = None if degenerate else len(merged)
    return result


def circ_points(circ: CircK, n: int) -> list[BlochVector]:
    """``n`` Bloch points of the states ``k psi1 + sqrt(1-k^2) e^{i chi} psi2``, chi evenly spaced."""
    if n < 3:
        raise ValueError("n must be at least 3")
    beta_mod = math.sqrt(max(1.0 - circ.k**2, 0.0))
    points = []
    for chi in np.linspace(0.0, _TWO_PI, n, endpoint=False):
        psi = circ.k * circ.known.psi1 + beta_mod * np.exp(1j * chi) * circ.known.psi2
        points.append(bloch_from_state(psi / np.linalg.norm(psi)))
    return points
