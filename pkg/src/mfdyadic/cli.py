"""Command-line entry point: ``mfdyadic <subcommand> ...``.

Exit status is 0 on success, 1 when any exact verification line reads
FAIL and 2 on usage errors or malformed input files. Relative output
paths are resolved against ``$MFDYADIC_OUTPUT_DIR`` when it is set.
"""

from __future__ import annotations

import argparse
import os
import random
import sys
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import cantor as cl
from . import measure_file
from .constructions import (
    ApproximantMeasure,
    GridWeights,
    check_floor_inequality,
    mu_n,
    parse_fraction_list,
    parse_generator,
)
from .measure_file import MeasureFileError
from .measures import EXACT, LOG2, AtomicMeasure, MassTree, from_atoms
from .spectra import fmt, legendre_curve, q_grid
from .transport import EXACT_CAP, check_mu_nu_distance, distance

OUTPUT_DIR_ENV = "MFDYADIC_OUTPUT_DIR"


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------- argument parsing helpers

def _range(text: str):
    """``lo:hi:step`` -> exact decimal grid."""
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected lo:hi:step, got {text!r}")
    try:
        lo, hi, step = (Fraction(p) for p in parts)
        return q_grid(lo, hi, step)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _levels(text: str):
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return int(parts[0]), int(parts[0])
        if len(parts) == 2:
            return int(parts[0]), int(parts[1])
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected j or jmin:jmax, got {text!r}")


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _int_list(text: str) -> List[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _box(text: str):
    """``lo:hi,lo:hi,...`` with rational endpoints, one pair per axis."""
    try:
        return tuple(tuple(Fraction(v) for v in side.split(":")) for side in text.split(","))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"bad box {text!r}") from None


def rat(x) -> str:
    """Rationals as n/d, integers bare."""
    return str(Fraction(x))


def _render(value) -> str:
    if isinstance(value, np.ndarray):
        return f"{fmt(value[0])}:{fmt(value[-1])}:n={len(value)}" if len(value) else "empty"
    if isinstance(value, Fraction):
        return rat(value)
    if isinstance(value, (list, tuple)):
        return ",".join(_render(v) for v in value)
    return str(value)


def format_address(address) -> str:
    return "/".join(":".join(str(c) for c in k) for k in address) or "root"


def parse_address(text: str):
    if text in ("", "root"):
        return ()
    return tuple(tuple(int(c) for c in part.split(":")) for part in text.split("/"))


def header(args: argparse.Namespace) -> str:
    """Comment line echoing the resolved configuration."""
    skip = {"func", "output", "csv"}
    items = []
    for key in sorted(vars(args)):
        if key in skip:
            continue
        if key == "box" and args.box:
            value = ";".join(",".join(f"{rat(lo)}:{rat(hi)}" for lo, hi in b) for b in args.box)
        else:
            value = _render(getattr(args, key))
        items.append(f"{key}={value}")
    return "# mfdyadic " + " ".join(items) + "\n"


def resolve_output(path: Optional[str]) -> Optional[Path]:
    if path is None or path == "-":
        return None
    p = Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def emit(text: str, path: Optional[str]) -> None:
    target = resolve_output(path)
    if target is None:
        sys.stdout.write(text)
    else:
        target.write_text(text)


def load(path: str):
    return measure_file.read(path)


# ---------------------------------------------------------------- subcommands

def cmd_generate(args) -> int:
    m = parse_generator(args.spec, mode=args.mode)
    if isinstance(m, ApproximantMeasure):
        m = m.mass_tree(args.depth) if args.depth is not None else m.to_atomic()
    elif isinstance(m, AtomicMeasure) and args.depth is not None:
        m = from_atoms(m, args.depth)
        if args.mode == LOG2:
            m = m.to_log2()
    elif isinstance(m, MassTree) and args.depth is not None:
        m = m.truncate(args.depth)
    target = resolve_output(args.output)
    if target is None:
        sys.stdout.write(measure_file.dumps(m))
    else:
        measure_file.write(m, target)
    return 0


def cmd_tau(args) -> int:
    from .estimators import LqSpectrum  # sklearn is slow to import
    est = LqSpectrum(q=args.q, j_min=args.j[0], j_max=args.j[1], method=args.method)
    est.fit(load(args.input))
    emit(header(args) + est.curve_.to_csv(), args.output)
    return 0


def cmd_legendre(args) -> int:
    from .estimators import LqSpectrum
    est = LqSpectrum(q=args.q, j_min=args.j[0], j_max=args.j[1], method=args.method)
    est.fit(load(args.input))
    curve, details = legendre_curve(est.curve_, args.h, drop_boundary=args.drop_boundary)
    lines = [header(args), f"# kind={curve.kind} boundary_flagged={curve.meta['boundary_flagged']}\n",
             "h,value,attained_q,boundary\n"]
    for h, r in zip(curve.abscissa, details):
        lines.append(f"{fmt(h)},{fmt(r.value)},{fmt(r.attained_q)},{int(r.boundary)}\n")
    emit("".join(lines), args.output)
    return 0


def cmd_coarse(args) -> int:
    if args.eps <= 0:
        raise UsageError("--eps must be positive")
    from .estimators import CoarseSpectrum
    est = CoarseSpectrum(j=args.j, bin_width=args.eps).fit(load(args.input))
    emit(header(args) + est.curve_.to_csv(), args.output)
    return 0


def _random_points(rng: random.Random, count: int, dim: int, level: int):
    scale = 1 << (level + 4)
    return [tuple(Fraction(rng.randrange(scale + 1), scale) for _ in range(dim)) for _ in range(count)]


def cmd_exponent(args) -> int:
    m = load(args.input)
    from .estimators import LocalExponent
    est = LocalExponent(j=args.j).fit(m)
    dim = est.tree_.dim
    if args.points:
        points = [tuple(Fraction(c) for c in p.split(",")) for p in args.points.split(";")]
    else:
        points = _random_points(random.Random(args.seed), args.random, dim, args.j)
    alphas = est.transform(points)
    cols = ",".join(f"x{i}" for i in range(1, dim + 1))
    lines = [header(args), f"{cols},alpha\n"]
    for p, a in zip(points, alphas):
        lines.append(",".join(rat(c) for c in p) + f",{fmt(a)}\n")
    emit("".join(lines), args.output)
    return 0


def cmd_distance(args) -> int:
    a, b = load(args.input[0]), load(args.input[1])
    if not isinstance(a, AtomicMeasure) or not isinstance(b, AtomicMeasure):
        raise UsageError("distance needs two atomic measure files")
    value, plan = distance(a, b, exact_cap=args.exact_cap)
    lines = [header(args)]
    if plan.exact:
        lines.append(f"distance={rat(value)} decimal={fmt(value)} exact=1\n")
    else:
        lines.append(f"distance={fmt(value)} exact=0 duality_gap={fmt(plan.duality_gap)}\n")
    if args.plan:
        lines.append("source,target,flow\n")
        for i, j, x in plan.flows:
            x = rat(x) if plan.exact else fmt(x)
            lines.append(f"{i},{j},{x}\n")
    emit("".join(lines), args.output)
    return 0


def _status(ok: bool) -> str:
    return "PASS" if ok else "FAIL"


def cmd_verify_mun(args) -> int:
    size = 1 << (args.d * args.jn)
    if args.weights is None:
        rng = random.Random(args.seed)
        raw = [rng.randint(1, 9) for _ in range(size)]
        weights = [Fraction(w, sum(raw)) for w in raw]
    else:
        weights = parse_fraction_list(args.weights)
    grid = GridWeights(args.jn, args.d, tuple(weights))
    approx = mu_n(grid, args.n)
    J = approx.level
    lines = [header(args)]
    failed = False
    floor = check_floor_inequality(approx, args.n, J)
    failed |= not floor.passed
    lines.append(f"{_status(floor.passed)} floor n={args.n} J={J} cubes={floor.n_cubes} "
                 f"violations={floor.n_violations} min_log2_margin={fmt(floor.margin_log2)}\n")
    if approx.n_atoms + len(approx.nu) + size <= EXACT_CAP:
        report = check_mu_nu_distance(grid, args.n)
        failed |= not report.passed
        lines.append(f"{_status(report.identity_holds)} distance-identity "
                     f"rho(mu,nu)={rat(report.rho_mu_nu)} "
                     f"blend*rho(nu,pi)={rat(report.blend * report.rho_nu_pi)}\n")
        lines.append(f"{_status(report.bound_holds)} distance-bound "
                     f"rho(mu,nu)={rat(report.rho_mu_nu)} bound={rat(report.bound)}\n")
    else:
        lines.append(f"SKIP distance-identity atoms={approx.n_atoms} exceeds exact cap {EXACT_CAP}\n")
    emit("".join(lines), args.output)
    return 1 if failed else 0


# ---------------------------------------------------------------- cantor subcommands

def _schedule(args) -> cl.CantorSchedule:
    return cl.CantorSchedule(args.d, args.theta, tuple(args.levels))


def cmd_cantor_validate(args) -> int:
    s = _schedule(args)
    report = cl.validate_schedule(s)
    lines = [header(args), "constraint,p,holds,margin\n"]
    for c in report.checks:
        lines.append(f"{c.name},{c.p},{int(c.holds)},{rat(c.margin)}\n")
    lines.append(f"# construction_valid={int(report.construction_valid)} "
                 f"strict={int(report.strict)} "
                 f"deltas={','.join(str(D) for D in report.deltas)}\n")
    emit("".join(lines), args.output)
    return 0


def cmd_cantor_count(args) -> int:
    s = _schedule(args)
    lines = [header(args)]
    if args.address is not None:
        node = cl.make_node(s, parse_address(args.address))
        lines.append(f"node={format_address(node.address)} children={cl.branching_count(s, node)}\n")
    else:
        lines.append("p,J,delta,generation_size\n")
        deltas = cl.generation_deltas(s)
        size = 1
        for p, D in enumerate(deltas, start=1):
            size *= D
            lines.append(f"{p},{s.level(p)},{D},{size}\n")
    emit("".join(lines), args.output)
    return 0


def cmd_cantor_mass(args) -> int:
    s = _schedule(args)
    if args.address is not None:
        node = cl.make_node(s, parse_address(args.address))
    else:
        node = cl.random_node(s, args.p or s.P, random.Random(args.seed))
    m = cl.node_mass(s, node)
    text = (header(args) + "address,deltas,mass,log2_mass\n"
            + f"{format_address(node.address)},{'x'.join(map(str, m.deltas)) or '-'},"
              f"{rat(m.exact)},{fmt(m.log2)}\n")
    emit(text, args.output)
    return 0


def cmd_cantor_verify_bounds(args) -> int:
    s = _schedule(args)
    report = cl.validate_schedule(s)
    gens = [args.p] if args.p else list(range(1, s.P + 1))
    text = [header(args)]
    rows = ["p,address,deltas,log2_mass,I_lower_margin,I_upper_margin,ratio,ratio_deviation\n"]
    failed = False
    for p in gens:
        r = cl.verify_mass_bounds(s, p, samples=args.samples, seed=args.seed, report=report)
        failed |= not r.passed
        target = float(r.target_ratio)
        text.append(f"{r.I_status} mass-bounds p={p} nodes={r.n_nodes} checked={len(r.rows)}\n")
        text.append(f"INFO scaling p={p} {r.scaling_status}\n")
        text.append(f"INFO ratio p={p} value={fmt(r.rows[0].ratio)} target={fmt(target)} "
                    f"deviation={fmt(r.rows[0].ratio - target)}\n")
        for row in r.rows:
            rows.append(f"{p},{format_address(row.address)},{'x'.join(map(str, row.deltas))},"
                        f"{fmt(row.log2_mass)},{fmt(row.I_lower_margin)},{fmt(row.I_upper_margin)},"
                        f"{fmt(row.ratio)},{fmt(row.ratio - target)}\n")
    if not report.strict:
        text.append("INFO desk-mode schedule: growth constraints do not all hold\n")
    sys.stdout.write("".join(text))
    if args.csv:
        emit(header(args) + "".join(rows), args.csv)
    return 1 if failed else 0


def _random_boxes(s: cl.CantorSchedule, depth: int, count: int, rng: random.Random):
    boxes = []
    for _ in range(count):
        node = cl.random_node(s, depth, rng)
        center = cl.node_ball(s, node).center
        p = rng.randint(2, depth)
        e = rng.randint(s.level(p - 1) + 1, s.level(p))
        half = Fraction(1, 1 << (e + 1))
        shift = [Fraction(rng.randint(-4, 4), 1 << (e + 3)) for _ in center]
        boxes.append(tuple((max(Fraction(0), c + t - half), min(Fraction(1), c + t + half))
                           for c, t in zip(center, shift)))
    return boxes


def cmd_cantor_verify_borel(args) -> int:
    s = _schedule(args)
    depth = args.depth or s.P
    if depth < 2:
        raise UsageError("verify-borel needs at least two generations")
    boxes = list(args.box or [])
    if args.random_boxes:
        boxes += _random_boxes(s, depth, args.random_boxes, random.Random(args.seed))
    if not boxes:
        raise UsageError("give --box or --random-boxes")
    report = cl.verify_borel_bound(s, depth, boxes)
    text = [header(args)]
    for i, row in enumerate(report.rows):
        box = ",".join(f"{rat(lo)}:{rat(hi)}" for lo, hi in row.box)
        text.append(f"box {i} [{box}] case={row.case} p={row.p} mass={rat(row.mass)} "
                    f"meet_prev={row.meet_prev} meet_p={row.meet_p}"
                    + (f" exponent={fmt(row.exponent)}" if row.exponent is not None else "") + "\n")
        for name, status in row.checks:
            text.append(f"{status} box {i} {name}\n")
    sys.stdout.write("".join(text))
    return 0 if report.passed else 1


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mfdyadic", description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=0, help="seed for every random choice")
    sub = parser.add_subparsers(dest="command", required=True)

    def out(p):
        p.add_argument("-o", "--output", help="output path (default stdout)")

    p = sub.add_parser("generate", help="write a measure file from a generator spec")
    p.add_argument("--spec", required=True)
    p.add_argument("--mode", choices=[EXACT, LOG2], default=EXACT)
    p.add_argument("--depth", type=int, help="discretize to a mass tree of this depth")
    out(p)
    p.set_defaults(func=cmd_generate)

    def spectrum_args(p):
        p.add_argument("-i", "--input", required=True)
        p.add_argument("--q", type=_range, default=q_grid(), help="lo:hi:step")
        p.add_argument("--j", type=_levels, required=True, help="jmin:jmax")
        p.add_argument("--method", choices=["min", "slope"], default="min")
        out(p)

    p = sub.add_parser("tau", help="L^q spectrum estimate")
    spectrum_args(p)
    p.set_defaults(func=cmd_tau)

    p = sub.add_parser("legendre", help="Legendre transform of the estimated tau")
    spectrum_args(p)
    p.add_argument("--h", type=_range, required=True, help="lo:hi:step")
    p.add_argument("--drop-boundary", action="store_true")
    p.set_defaults(func=cmd_legendre)

    p = sub.add_parser("coarse", help="coarse-grained spectrum histogram")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--eps", type=float, default=0.05)
    out(p)
    p.set_defaults(func=cmd_coarse)

    p = sub.add_parser("exponent", help="cube exponents at points")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--j", type=int, required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--points", help="x1,y1;x2,y2;... with rational coordinates")
    g.add_argument("--random", type=int, help="number of seeded random points")
    out(p)
    p.set_defaults(func=cmd_exponent)

    p = sub.add_parser("distance", help="optimal transport distance of two atomic measures")
    p.add_argument("-i", "--input", nargs=2, required=True)
    p.add_argument("--plan", action="store_true", help="also dump the transport plan")
    p.add_argument("--exact-cap", type=int, default=EXACT_CAP)
    out(p)
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("verify-mun", help="floor inequality and distance identity for mu_n")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--jn", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--weights", help="grid weights (seeded random when omitted)")
    out(p)
    p.set_defaults(func=cmd_verify_mun)

    p = sub.add_parser("cantor", help="Cantor construction inside the approximation sets")
    csub = p.add_subparsers(dest="cantor_command", required=True)

    def schedule_args(c):
        c.add_argument("--theta", type=_fraction, required=True)
        c.add_argument("--levels", type=_int_list, required=True, help="J1,J2,...")
        c.add_argument("--d", type=int, default=1)

    c = csub.add_parser("validate")
    schedule_args(c)
    out(c)
    c.set_defaults(func=cmd_cantor_validate)

    c = csub.add_parser("count")
    schedule_args(c)
    c.add_argument("--address", help="node address k1/k2/... (axes joined by ':')")
    out(c)
    c.set_defaults(func=cmd_cantor_count)

    c = csub.add_parser("mass")
    schedule_args(c)
    c.add_argument("--address")
    c.add_argument("--p", type=int, help="generation of a seeded random node")
    out(c)
    c.set_defaults(func=cmd_cantor_mass)

    c = csub.add_parser("verify-bounds")
    schedule_args(c)
    c.add_argument("--p", type=int)
    c.add_argument("--samples", type=int, default=16)
    c.add_argument("--csv", help="write per-node CSV here")
    c.set_defaults(func=cmd_cantor_verify_bounds)

    c = csub.add_parser("verify-borel")
    schedule_args(c)
    c.add_argument("--depth", type=int)
    c.add_argument("--box", type=_box, action="append", help="lo:hi,lo:hi,... (repeatable)")
    c.add_argument("--random-boxes", type=int, default=0)
    c.set_defaults(func=cmd_cantor_verify_borel)
    return parser


def _glue_negative_values(argv: Sequence[str]) -> List[str]:
    """Let ``--q -2:2:0.5`` through; argparse would read -2:2:0.5 as a flag."""
    out: List[str] = []
    it = iter(argv)
    for tok in it:
        if tok in _RANGE_FLAGS:
            nxt = next(it, None)
            if nxt is not None and nxt.startswith("-") and nxt[1:2].isdigit():
                out.append(f"{tok}={nxt}")
                continue
            out.append(tok)
            if nxt is not None:
                out.append(nxt)
            continue
        out.append(tok)
    return out


_RANGE_FLAGS = ("--q", "--h")


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    argv = _glue_negative_values(sys.argv[1:] if argv is None else list(argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except MeasureFileError as exc:
        print(f"mfdyadic: {exc}", file=sys.stderr)
        return 2
    except (UsageError, ValueError, LookupError, OSError) as exc:
        print(f"mfdyadic: error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())
