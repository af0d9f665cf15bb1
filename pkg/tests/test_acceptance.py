"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The lines are repeated in the pytest terminal summary.
"""
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from coherence_lab.cloners import KnownPair, apply, build_bh, build_max_cloner, build_wz
from coherence_lab.geometry import branch_segments, classify_cloneable
from coherence_lab.qcore import CoherenceMeasure, coherence, haar_random_pure, partial_trace, state_from_angles
from coherence_lab.verify import (
    MAX_CLONER_OFFSETS,
    check_corollary1,
    check_rng,
    check_theorem1,
    corollary_states,
    random_equal_ratio_machine,
    random_generic_machine,
    random_theorem2_machine,
)
from conftest import ACCEPTANCE_LINES, random_density
from oracles import DenseGridOracle, naive_partial_trace

L1 = CoherenceMeasure.L1
RE = CoherenceMeasure.RELATIVE_ENTROPY


def verdict(number, title, ok, detail):
    line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}: {title} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print("\n" + line)
    assert ok, f"criterion {number} failed: {detail}"


def haar_inputs(n, seed):
    rng = np.random.default_rng(seed)
    return [haar_random_pure(1, rng) for _ in range(n)]


def test_criterion_01_bh_fidelity():
    start = time.perf_counter()
    m = build_bh()
    dev = max(abs(np.vdot(psi, apply(m, psi).rho_A_final @ psi).real - 5 / 6) for psi in haar_inputs(1000, 1))
    elapsed = time.perf_counter() - start
    verdict(1, "B-H fidelity 5/6", dev <= 1e-9 and elapsed < 5,
            f"max deviation {dev:.2e}, {elapsed:.2f} s")


def test_criterion_02_bh_coherence_ratio():
    start = time.perf_counter()
    m = build_bh()
    devs = []
    for psi in haar_inputs(1000, 1):
        rep = apply(m, psi)
        if rep.c_in > 1e-6:
            devs.append(abs(rep.c_A / rep.c_in - 2 / 3))
    elapsed = time.perf_counter() - start
    dev = max(devs)
    verdict(2, "B-H coherence ratio 2/3", dev <= 1e-9 and elapsed < 5,
            f"{len(devs)} inputs, max deviation {dev:.2e}, {elapsed:.2f} s")


def test_criterion_03_wz_annihilation():
    start = time.perf_counter()
    m = build_wz()
    inputs = haar_inputs(300, 3) + [state_from_angles(t, p) for t in np.linspace(0, np.pi, 9)
                                    for p in np.linspace(0, 2 * np.pi, 8, endpoint=False)]
    worst_c, worst_rho = 0.0, 0.0
    for psi in inputs:
        rep = apply(m, psi)
        worst_c = max(worst_c, rep.c_A, rep.c_B)
        worst_rho = max(worst_rho, np.max(np.abs(rep.rho_A_final - np.diag(np.abs(psi) ** 2))))
    elapsed = time.perf_counter() - start
    verdict(3, "W-Z coherence annihilation", worst_c <= 1e-12 and worst_rho <= 1e-12 and elapsed < 1,
            f"max output coherence {worst_c:.1e}, max rho_A deviation {worst_rho:.1e}, {elapsed:.2f} s")


def test_criterion_04_theorem1_bound():
    start = time.perf_counter()
    l1 = check_theorem1(7, 10_000, L1)
    rel = check_theorem1(7, 10_000, RE)
    elapsed = time.perf_counter() - start
    ok = l1.violations == 0 and rel.violations == 0 and elapsed < 60
    verdict(4, "Theorem 1 bound, l1 and relative entropy", ok,
            f"violations {l1.violations}/{rel.violations}, worst margins {l1.worst_margin:.2e}/"
            f"{rel.worst_margin:.2e}, {elapsed:.1f} s")


def test_criterion_05_corollary1_witness():
    start = time.perf_counter()
    v = check_corollary1(math.pi / 4)
    known = KnownPair.equatorial(math.pi / 4)
    chi1, chi2 = corollary_states(known)
    machine = build_max_cloner(math.pi / 4)
    # Also check the final-coherence equality on a second equatorial machine.
    r1, r2 = apply(machine, chi1), apply(machine, chi2)
    initial_gap = abs(v.witness["c_in_chi1"] - v.witness["c_in_chi2"])
    final_gap = max(abs(v.witness["c_A_chi1"] - v.witness["c_A_chi2"]), abs(r1.c_A - r2.c_A))
    elapsed = time.perf_counter() - start
    ok = initial_gap >= 0.5 and final_gap <= 1e-12 and elapsed < 1
    verdict(5, "Corollary 1 witness at phi1 = pi/4", ok,
            f"|c_in(chi1) - c_in(chi2)| = {initial_gap:.3g}, |c_A(chi1) - c_A(chi2)| = {final_gap:.1e}, "
            f"{elapsed:.2f} s")


def test_criterion_06_theorem2():
    start = time.perf_counter()
    rng = check_rng(6, "acceptance")
    machine = random_theorem2_machine(rng)
    worst, cloned, n = 0.0, 0, 0
    while n < 1000:
        psi = haar_random_pure(1, rng)
        rep = apply(machine, psi)
        if rep.c_in >= 1 - 1e-6:
            continue
        n += 1
        worst = max(worst, abs(rep.c_B - 1))
        cloned += rep.perfectly_cloned
    elapsed = time.perf_counter() - start
    verdict(6, "Theorem 2 machine-less cloner", worst <= 1e-12 and cloned == 0 and elapsed < 5,
            f"max |c_B - 1| = {worst:.1e}, {cloned} perfect clonings, {elapsed:.2f} s")


def test_criterion_07_max_cloner():
    start = time.perf_counter()
    phi1 = 0.0
    m = build_max_cloner(phi1)
    thetas = np.linspace(0, np.pi, 256)
    on_dev, all_cloned = 0.0, True
    for t in thetas:
        rep = apply(m, state_from_angles(t, phi1))
        on_dev = max(on_dev, abs(rep.c_A - abs(math.sin(t))))
        all_cloned &= rep.perfectly_cloned
    off_dev = 0.0
    for d in MAX_CLONER_OFFSETS:
        for t in thetas:
            rep = apply(m, state_from_angles(t, phi1 + d))
            off_dev = max(off_dev, abs(rep.c_A - abs(math.sin(t) * math.cos(d))))
    elapsed = time.perf_counter() - start
    ok = on_dev <= 1e-9 and all_cloned and off_dev <= 1e-9 and elapsed < 5
    verdict(7, "max cloner great circle", ok,
            f"on-circle {on_dev:.1e}, all cloned {all_cloned}, off-circle {off_dev:.1e}, {elapsed:.2f} s")


def oracle_machines():
    """20 seeded machines: even seeds generic, odd seeds equal-ratio (A and B cut cylinders alike)."""
    out = []
    for seed in range(20):
        rng = check_rng(seed, "oracle")
        if seed % 2:
            m = random_equal_ratio_machine(rng)
            segs = branch_segments(m)
            p0 = rng.uniform(0.1, 0.9)
            t = p0 * segs["A"].first.transverse + (1 - p0) * segs["A"].second.transverse
            out.append((seed, m, float(np.hypot(*t))))
        else:
            out.append((seed, random_generic_machine(rng), None))
    return out


@pytest.mark.slow
def test_criterion_08_oracle_equivalence():
    start = time.perf_counter()
    mismatches, bad_counts, compared = [], [], 0
    for seed, machine, c in oracle_machines():
        oracle = DenseGridOracle(machine, n_p=4096, n_chi=4096)
        cases = [(None, classify_cloneable(machine))]
        if c is not None:
            cases.append((c, classify_cloneable(machine, coherence=c)))
        for target, res in cases:
            compared += 1
            mine = "continuum" if res.degenerate else res.count
            ref = oracle.count(target=target)
            if mine != ref:
                mismatches.append((seed, target, mine, ref))
            if not res.degenerate and (res.count % 2 or res.count > 8):
                bad_counts.append((seed, target, res.count))
    elapsed = time.perf_counter() - start
    ok = not mismatches and not bad_counts and elapsed < 600
    verdict(8, "classifier vs 4096x4096 dense-grid oracle", ok,
            f"{compared} comparisons on 20 machines, mismatches {mismatches}, "
            f"odd or >8 counts {bad_counts}, {elapsed:.0f} s")


def test_criterion_09_core_numerics():
    start = time.perf_counter()
    rng = np.random.default_rng(9)
    pt_dev = 0.0
    for i in range(200):
        dims = [2, 2] if i % 2 else [2, 2, 2]
        rho = random_density(rng, int(np.prod(dims)), rank=1)
        keep = [i % len(dims)]
        pt_dev = max(pt_dev, np.max(np.abs(partial_trace(rho, keep, dims) - naive_partial_trace(rho, keep, dims))))
    u_dev = 0.0
    for i in range(200):
        m = random_generic_machine(rng) if i % 2 else random_equal_ratio_machine(rng)
        u_dev = max(u_dev, np.max(np.abs(m.unitary.conj().T @ m.unitary - np.eye(8))))
    for m in (build_bh(), build_wz(), build_max_cloner(1.0), random_theorem2_machine(rng)):
        u_dev = max(u_dev, np.max(np.abs(m.unitary.conj().T @ m.unitary - np.eye(m.unitary.shape[0]))))
    convex_fail = 0
    for _ in range(10_000):
        r1, r2 = random_density(rng, 2), random_density(rng, 2)
        p = rng.uniform()
        mix = p * r1 + (1 - p) * r2
        for measure in (L1, RE):
            if coherence(measure, mix) > p * coherence(measure, r1) + (1 - p) * coherence(measure, r2) + 1e-12:
                convex_fail += 1
    elapsed = time.perf_counter() - start
    ok = pt_dev <= 1e-12 and u_dev <= 1e-10 and convex_fail == 0 and elapsed < 30
    verdict(9, "core numerics", ok,
            f"partial trace {pt_dev:.1e}, unitarity {u_dev:.1e}, convexity failures {convex_fail}, "
            f"{elapsed:.1f} s")


def cli(*args):
    res = subprocess.run([sys.executable, "-m", "coherence_lab", *args], capture_output=True)
    return res.returncode, res.stdout


def test_criterion_10_determinism(tmp_path):
    code1, v1 = cli("verify", "theorem1", "--seed", "7", "--trials", "1000")
    code2, v2 = cli("verify", "theorem1", "--seed", "7", "--trials", "1000")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    cli("sweep", "--machine", "max", "--phi1", "0", "--grid", "64x64", "-o", str(a))
    cli("sweep", "--machine", "max", "--phi1", "0", "--grid", "64x64", "-o", str(b))
    ok = code1 == code2 == 0 and v1 == v2 and len(v1) > 0 and a.read_bytes() == b.read_bytes()
    verdict(10, "determinism of verify JSON and sweep CSV", ok,
            f"verify JSON identical {v1 == v2} ({len(v1)} bytes), sweep CSV identical "
            f"{a.read_bytes() == b.read_bytes()}")
