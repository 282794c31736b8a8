"""Reader and writer for the line-oriented ``mfm v1`` measure file.

::

    mfm v1
    dim <d>
    kind atomic|masstree
    atom <x1> ... <xd> <weight>                       (atomic)
    depth <J>                                          (masstree)
    cube <j> <k1> ... <kd> <num/den | log2:<float>>    (masstree)

Rationals are written as ``num/den`` so files are bit-exact.
"""

from __future__ import annotations

import math
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Tuple, Union

from .measures import EXACT, LOG2, AtomicMeasure, MassTree

MAGIC = "mfm v1"


class MeasureFileError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def format_fraction(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def _parse_fraction(token: str, lineno: int) -> Fraction:
    try:
        return Fraction(token)
    except (ValueError, ZeroDivisionError):
        raise MeasureFileError(lineno, f"not a rational: {token!r}") from None


def _parse_int(token: str, lineno: int, what: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise MeasureFileError(lineno, f"{what} is not an integer: {token!r}") from None


def dumps(m: Union[AtomicMeasure, MassTree]) -> str:
    lines = [MAGIC, f"dim {m.dim}"]
    if isinstance(m, AtomicMeasure):
        lines.append("kind atomic")
        for x, w in m.atoms:
            lines.append(" ".join(["atom", *map(format_fraction, x), format_fraction(w)]))
    else:
        lines.append("kind masstree")
        lines.append(f"depth {m.depth}")
        for j in range(m.depth + 1):
            for k, v in m.items(j):
                mass = format_fraction(v) if m.mode == EXACT else f"log2:{float(v)!r}"
                lines.append(" ".join(["cube", str(j), *map(str, k), mass]))
    return "\n".join(lines) + "\n"


def write(m: Union[AtomicMeasure, MassTree], path) -> None:
    Path(path).write_text(dumps(m), encoding="utf-8")


def read(path) -> Union[AtomicMeasure, MassTree]:
    return loads(Path(path).read_text(encoding="utf-8"))


def loads(text: str) -> Union[AtomicMeasure, MassTree]:
    lines = text.splitlines()
    header = [(i + 1, ln.strip()) for i, ln in enumerate(lines[:3])]
    if len(header) < 3:
        raise MeasureFileError(len(lines) + 1, "truncated header")
    if header[0][1] != MAGIC:
        raise MeasureFileError(1, f"expected {MAGIC!r}")
    parts = header[1][1].split()
    if len(parts) != 2 or parts[0] != "dim":
        raise MeasureFileError(2, "expected 'dim <d>'")
    dim = _parse_int(parts[1], 2, "dimension")
    if dim < 1:
        raise MeasureFileError(2, "dimension must be positive")
    parts = header[2][1].split()
    if len(parts) != 2 or parts[0] != "kind" or parts[1] not in ("atomic", "masstree"):
        raise MeasureFileError(3, "expected 'kind atomic' or 'kind masstree'")
    body = [(i + 4, ln.strip()) for i, ln in enumerate(lines[3:]) if ln.strip()]
    if parts[1] == "atomic":
        return _load_atomic(dim, body)
    return _load_masstree(dim, body)


def _load_atomic(dim: int, body: List[Tuple[int, str]]) -> AtomicMeasure:
    atoms = []
    total = Fraction(0)
    for lineno, line in body:
        tok = line.split()
        if tok[0] != "atom":
            raise MeasureFileError(lineno, f"expected an 'atom' line, got {tok[0]!r}")
        if len(tok) != dim + 2:
            raise MeasureFileError(lineno, f"atom needs {dim} coordinates and a weight")
        x = [_parse_fraction(t, lineno) for t in tok[1:-1]]
        w = _parse_fraction(tok[-1], lineno)
        if any(c < 0 or c > 1 for c in x):
            raise MeasureFileError(lineno, "atom outside [0,1]^d")
        if w <= 0:
            raise MeasureFileError(lineno, "atom weight must be positive")
        total += w
        if total > 1:
            raise MeasureFileError(lineno, "weights exceed total mass 1")
        atoms.append((x, w))
    if total != 1:
        last = body[-1][0] if body else 4
        raise MeasureFileError(last, f"weights sum to {total}, not 1")
    return AtomicMeasure(atoms, dim=dim)


def _load_masstree(dim: int, body: List[Tuple[int, str]]) -> MassTree:
    if not body:
        raise MeasureFileError(4, "expected 'depth <J>'")
    lineno, line = body[0]
    tok = line.split()
    if len(tok) != 2 or tok[0] != "depth":
        raise MeasureFileError(lineno, "expected 'depth <J>'")
    depth = _parse_int(tok[1], lineno, "depth")
    if depth < 0:
        raise MeasureFileError(lineno, "depth must be nonnegative")
    levels: List[Dict[tuple, object]] = [dict() for _ in range(depth + 1)]
    where: Dict[tuple, int] = {}
    mode = None
    for lineno, line in body[1:]:
        tok = line.split()
        if tok[0] != "cube":
            raise MeasureFileError(lineno, f"expected a 'cube' line, got {tok[0]!r}")
        if len(tok) != dim + 3:
            raise MeasureFileError(lineno, f"cube needs a level, {dim} indices and a mass")
        j = _parse_int(tok[1], lineno, "level")
        if not 0 <= j <= depth:
            raise MeasureFileError(lineno, f"level {j} outside 0..{depth}")
        k = tuple(_parse_int(t, lineno, "index") for t in tok[2:-1])
        if any(not 0 <= c < (1 << j) for c in k):
            raise MeasureFileError(lineno, f"index {k} outside Z_{j}")
        raw = tok[-1]
        if raw.startswith("log2:"):
            this_mode = LOG2
            try:
                value = float(raw[5:])
            except ValueError:
                raise MeasureFileError(lineno, f"bad log2 mass {raw!r}") from None
            if math.isnan(value) or value > 1e-12:
                raise MeasureFileError(lineno, "log2 mass must be <= 0")
        else:
            this_mode = EXACT
            value = _parse_fraction(raw, lineno)
            if value <= 0:
                raise MeasureFileError(lineno, "listed cubes must carry positive mass")
        if mode is None:
            mode = this_mode
        elif mode != this_mode:
            raise MeasureFileError(lineno, "exact and log2 masses mixed in one file")
        if k in levels[j]:
            raise MeasureFileError(lineno, f"cube {j} {k} listed twice")
        levels[j][k] = value
        where[(j, k)] = lineno
    mode = mode or EXACT
    tree = MassTree(dim, levels, mode=mode, validate=False)
    _check_lines(tree, where)
    return tree


def _check_lines(tree: MassTree, where: Dict[tuple, int]) -> None:
    """Re-run the tree invariants, reporting the first offending line."""
    bad: List[Tuple[int, str]] = []
    root = (0, (0,) * tree.dim)
    if root not in where:
        raise MeasureFileError(4, "root cube missing")
    r = tree.level(0)[root[1]]
    if (tree.mode == EXACT and r != 1) or (tree.mode == LOG2 and abs(r) > 1e-12):
        bad.append((where[root], "root mass is not 1"))
    for j in range(tree.depth):
        parents = tree.level(j)
        sums = tree._child_sums(j + 1)
        for k in set(parents) | set(sums):
            if k not in parents:
                child_lines = [ln for (jj, kk), ln in where.items()
                               if jj == j + 1 and tuple(c >> 1 for c in kk) == k]
                bad.append((min(child_lines), "charged cube whose parent is not listed"))
            elif k not in sums:
                bad.append((where[(j, k)], "charged cube with no charged children"))
            elif not tree._close(parents[k], sums[k]):
                bad.append((where[(j, k)], "mass differs from the sum of its children"))
    if bad:
        lineno, msg = min(bad)
        raise MeasureFileError(lineno, msg)
