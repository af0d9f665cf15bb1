"""Command-line front end.

Exit codes: 0 success, 1 check violations, 2 invalid state, 3 invalid
machine, 64 usage error, 74 I/O error.
"""
from __future__ import annotations

import argparse
import ast
import csv
import json
import math
import operator
import os
import sys

import numpy as np

from . import __version__
from .cloners import (
    CloningMachine,
    KnownPair,
    apply,
    build_bh,
    build_generic,
    build_machineless,
    build_max_cloner,
    build_wz,
)
from .errors import ContractError, InvalidMachineError, InvalidStateError, NormalizationError
from .geometry import classify_cloneable
from .qcore import CoherenceMeasure, coherence, state_from_angles, validate_pure
from .verify import (
    SweepGrid,
    check_corollary1,
    check_max_cloner,
    check_state_vs_coherence_cloning,
    check_theorem1,
    check_theorem2,
    fmt,
    sweep,
)

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_STATE = 2
EXIT_MACHINE = 3
EXIT_USAGE = 64
EXIT_IO = 74

SEED_ENV = "COHERENCE_LAB_SEED"
RANDOMIZED_CHECKS = ("theorem1", "theorem2", "statevscoherence")
CHECK_NAMES = ("theorem1", "corollary1", "theorem2", "maxcloner", "statevscoherence")
CLASSIFY_HEADER = ("p", "chi", "theta", "phi", "c")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- argument parsing ---------------------------------------------------------

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNOPS = {ast.UAdd: operator.pos, ast.USub: operator.neg}


def parse_angle(text: str) -> float:
    """Evaluate a real number or a pi-expression such as ``3*pi/4``."""
    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
            return _UNOPS[type(node.op)](ev(node.operand))
        raise ValueError(f"unsupported expression {text!r}")

    try:
        value = ev(ast.parse(text.strip(), mode="eval"))
    except (SyntaxError, ZeroDivisionError, OverflowError) as exc:
        raise argparse.ArgumentTypeError(f"bad angle {text!r}: {exc}") from None
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"angle {text!r} is not finite")
    return value


def parse_complex(text: str) -> complex:
    """``re,im`` (or a bare real) to a complex number."""
    parts = text.split(",")
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected re,im but got {text!r}")


def parse_seed(text: str) -> int:
    try:
        seed = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= seed < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return seed


def parse_tol(text: str) -> float:
    value = float(text)
    if not value >= 1e-12:
        raise argparse.ArgumentTypeError("tolerances must be at least 1e-12")
    return value


def parse_grid(text: str) -> SweepGrid:
    try:
        grid = SweepGrid.parse(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like 64x64, got {text!r}") from None
    if grid.theta_samples < 2 or grid.phi_samples < 1:
        raise argparse.ArgumentTypeError("grid needs at least 2 theta and 1 phi samples")
    return grid


def positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return seed
    env = os.environ.get(SEED_ENV)
    if env is None:
        raise UsageError(f"a seed is required: pass --seed or set {SEED_ENV}")
    try:
        return parse_seed(env)
    except argparse.ArgumentTypeError as exc:
        raise UsageError(f"{SEED_ENV}: {exc}") from None


# -- machines and states ----------------------------------------------------


def _cvec(values, label):
    try:
        return np.array([complex(re, im) for re, im in values], dtype=complex)
    except (TypeError, ValueError):
        raise InvalidMachineError(f"{label} must be a list of [re, im] pairs") from None


def machine_from_spec(spec: dict) -> CloningMachine:
    """Build a machine from a JSON-style dict with a ``variant`` tag.

    Complex numbers are ``[re, im]`` pairs. Recognised variants and keys:
    ``wz``; ``bh`` (``c``, ``d``); ``max`` (``phi1``); ``generic``
    (``a``, ``b``, ``Psi1``, ``Psi2``); ``machineless`` (``psi1p``,
    ``psi1pp``, ``psi2p``, ``psi2pp``).
    """
    if not isinstance(spec, dict) or "variant" not in spec:
        raise InvalidMachineError("machine spec must be an object with a 'variant' tag")
    variant = str(spec["variant"]).lower()
    try:
        if variant == "wz":
            return build_wz()
        if variant == "bh":
            kwargs = {k: float(spec[k]) for k in ("c", "d") if k in spec}
            return build_bh(**kwargs)
        if variant == "max":
            return build_max_cloner(float(spec.get("phi1", 0.0)))
        if variant == "generic":
            (a,), (b,) = _cvec([spec["a"]], "a"), _cvec([spec["b"]], "b")
            known = KnownPair.from_amplitudes(a, b)
            return build_generic(known, _cvec(spec["Psi1"], "Psi1"), _cvec(spec["Psi2"], "Psi2"))
        if variant == "machineless":
            keys = ("psi1p", "psi1pp", "psi2p", "psi2pp")
            return build_machineless(*(_cvec(spec[k], k) for k in keys))
    except KeyError as exc:
        raise InvalidMachineError(f"{variant} machine spec is missing {exc.args[0]!r}") from None
    except InvalidMachineError:
        raise
    except (InvalidStateError, TypeError, ValueError) as exc:
        raise InvalidMachineError(f"{variant} machine spec: {exc}") from None
    raise InvalidMachineError(f"unknown machine variant {spec['variant']!r}")


def machine_to_spec(machine: CloningMachine) -> dict:
    """Inverse of :func:`machine_from_spec` for the variants it can rebuild."""
    tag = machine.variant.value
    if tag in ("wz",):
        return {"variant": tag}
    if tag in ("bh", "max"):
        return {"variant": tag, **{k: float(v) for k, v in machine.params.items()}}
    if machine.branch_outputs is not None:
        Psi1, Psi2 = machine.branch_outputs
        return {
            "variant": "generic",
            "a": [machine.known.a.real, machine.known.a.imag],
            "b": [machine.known.b.real, machine.known.b.imag],
            "Psi1": [[float(z.real), float(z.imag)] for z in Psi1],
            "Psi2": [[float(z.real), float(z.imag)] for z in Psi2],
        }
    outs = machine.product_outputs
    keys = ("psi1p", "psi1pp", "psi2p", "psi2pp")
    return {"variant": "machineless",
            **{k: [[float(z.real), float(z.imag)] for z in v] for k, v in zip(keys, outs)}}


def load_machine(args) -> CloningMachine:
    if args.machine_file:
        try:
            with open(args.machine_file, encoding="utf-8") as fh:
                spec = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidMachineError(f"{args.machine_file}: not valid JSON ({exc})") from None
        except OSError as exc:
            raise OSError(f"cannot read machine file {args.machine_file}: {exc.strerror}") from exc
        return machine_from_spec(spec)
    if args.machine is None:
        raise UsageError("choose a machine with --machine or --machine-file")
    spec = {"variant": args.machine}
    if args.machine == "bh":
        spec.update({k: getattr(args, k) for k in ("c", "d") if getattr(args, k) is not None})
    elif args.machine == "max":
        spec["phi1"] = args.phi1
    elif args.machine in ("generic", "machineless"):
        raise UsageError(f"--machine {args.machine} needs its outputs: use --machine-file")
    return machine_from_spec(spec)


def state_from_args(args) -> np.ndarray:
    if args.amp is not None:
        if args.theta is not None or args.phi is not None:
            raise UsageError("give either --amp or --theta/--phi, not both")
        return validate_pure(np.array(args.amp, dtype=complex))
    if args.theta is None:
        raise UsageError("an input state is required: --theta [--phi] or --amp")
    return state_from_angles(args.theta, args.phi or 0.0)


# -- output -----------------------------------------------------------------


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _open_out(path):
    if path is None or path == "-":
        return None
    return open(path, "w", newline="", encoding="utf-8")


def emit(text: str, path: str | None):
    fh = _open_out(path)
    if fh is None:
        sys.stdout.write(text)
        return
    with fh:
        fh.write(text)


def write_classify_csv(result, fh):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CLASSIFY_HEADER)
    for s in result.solutions:
        writer.writerow([fmt(s.p), fmt(s.chi), fmt(s.theta), fmt(s.phi), fmt(s.c)])
    count = "none" if result.count is None else str(result.count)
    fh.write(f"# status={result.status} count={count}\n")


# -- commands ---------------------------------------------------------------


def cmd_coherence(args) -> int:
    psi = state_from_args(args)
    values = {
        "l1": coherence(CoherenceMeasure.L1, psi),
        "relative_entropy": coherence(CoherenceMeasure.RELATIVE_ENTROPY, psi),
    }
    if args.format == "json":
        emit(dump_json(values), None)
    else:
        emit("".join(f"{k} = {fmt(v)}\n" for k, v in values.items()), None)
    return EXIT_OK


def cmd_clone(args) -> int:
    machine = load_machine(args)
    psi = state_from_args(args)
    report = apply(machine, psi, CoherenceMeasure(args.measure))
    out = {"machine": machine.variant.value, "measure": args.measure, **report.to_dict()}
    emit(dump_json(out), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    name = args.check
    if name in RANDOMIZED_CHECKS:
        seed = resolve_seed(args.seed)
    if name == "theorem1":
        verdict = check_theorem1(seed, args.trials, CoherenceMeasure(args.measure))
    elif name == "theorem2":
        verdict = check_theorem2(args.trials, seed)
    elif name == "statevscoherence":
        verdict = check_state_vs_coherence_cloning(args.trials, seed)
    elif name == "corollary1":
        verdict = check_corollary1(math.pi / 4 if args.phi1 is None else args.phi1)
    else:
        verdict = check_max_cloner(0.0 if args.phi1 is None else args.phi1, args.theta_samples)
    emit(verdict.to_json() + "\n", args.out)
    return EXIT_OK if verdict.violations == 0 else EXIT_VIOLATIONS


def cmd_classify(args) -> int:
    machine = load_machine(args)
    if args.coherence is not None and not 0.0 <= args.coherence <= 1.0:
        raise UsageError("--coherence must lie in [0, 1]")
    result = classify_cloneable(machine, args.p_samples, args.chi_samples, args.tol, args.coherence)
    fh = _open_out(args.out)
    if fh is None:
        write_classify_csv(result, sys.stdout)
    else:
        with fh:
            write_classify_csv(result, fh)
    return EXIT_OK


def cmd_sweep(args) -> int:
    machine = load_machine(args)
    out = None if args.out in (None, "-") else args.out
    sweep(machine, args.grid, out if out is not None else sys.stdout, jobs=args.jobs)
    return EXIT_OK


# -- parser -----------------------------------------------------------------


def _add_state_args(p):
    p.add_argument("--theta", type=parse_angle, help="Bloch polar angle (radians, pi-expressions allowed)")
    p.add_argument("--phi", type=parse_angle, help="Bloch azimuth (default 0)")
    p.add_argument("--amp", nargs=2, type=parse_complex, metavar="RE,IM",
                   help="amplitudes of |0> and |1>")


def _add_machine_args(p):
    p.add_argument("--machine", choices=("wz", "bh", "max", "generic", "machineless"))
    p.add_argument("--machine-file", help="JSON machine spec (complex numbers as [re, im])")
    p.add_argument("--phi1", type=parse_angle, default=0.0, help="azimuth of the max cloner")
    p.add_argument("--c", type=float, help="B-H amplitude c")
    p.add_argument("--d", type=float, help="B-H amplitude d")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="coherence-lab", description="Coherence-cloning machines on qubits.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("coherence", help="l1 and relative-entropy coherence of a pure state")
    _add_state_args(p)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_coherence)

    p = sub.add_parser("clone", help="run a machine on one input, print a JSON report")
    _add_machine_args(p)
    _add_state_args(p)
    p.add_argument("--measure", choices=[m.value for m in CoherenceMeasure], default="l1")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_clone)

    p = sub.add_parser("verify", help="run a named check, print a JSON verdict")
    p.add_argument("check", choices=CHECK_NAMES)
    p.add_argument("--seed", type=parse_seed, help=f"64-bit seed (fallback: ${SEED_ENV})")
    p.add_argument("--trials", type=positive_int, default=1000)
    p.add_argument("--phi1", type=parse_angle, help="azimuth for corollary1 / maxcloner")
    p.add_argument("--theta-samples", type=int, default=256)
    p.add_argument("--measure", choices=[m.value for m in CoherenceMeasure], default="l1")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("classify", help="list inputs whose coherence is cloned perfectly (CSV)")
    _add_machine_args(p)
    p.add_argument("--coherence", type=float, help="restrict to inputs of this coherence")
    p.add_argument("--p-samples", type=int, default=256)
    p.add_argument("--chi-samples", type=int, default=256)
    p.add_argument("--tol", type=parse_tol, default=1e-9)
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("sweep", help="coherence transfer over a theta x phi grid (CSV)")
    _add_machine_args(p)
    p.add_argument("--grid", type=parse_grid, default=SweepGrid(64, 64), help="THETAxPHI samples")
    p.add_argument("--jobs", type=positive_int, default=1)
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except NormalizationError as exc:
        known = exc.deficit is None or "deficit" in str(exc)
        deficit = "" if known else f" (norm deficit {exc.deficit:.3e})"
        print(f"invalid state: {exc}{deficit}", file=sys.stderr)
        return EXIT_STATE
    except ContractError as exc:
        print(f"invalid machine: {exc}", file=sys.stderr)
        for label, (want, got) in sorted(exc.failures.items()):
            print(f"  {label}: expected coherence {fmt(want)}, got {fmt(got)}", file=sys.stderr)
        return EXIT_MACHINE
    except InvalidMachineError as exc:
        print(f"invalid machine: {exc}", file=sys.stderr)
        return EXIT_MACHINE
    except InvalidStateError as exc:
        print(f"invalid state: {exc}", file=sys.stderr)
        return EXIT_STATE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
