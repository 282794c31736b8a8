"""Probability measures on [0,1]^d: finite atomic measures and dyadic mass trees."""

from __future__ import annotations

import math
from collections import defaultdict
from fractions import Fraction
from typing import Dict, Iterable, Iterator, Mapping, Sequence, Tuple

import numpy as np

from .dyadic import CubeIndex, Point, SupBall, as_fraction, as_point, containing_cube

EXACT = "exact"
LOG2 = "log2"

Coords = Tuple[int, ...]


class DepthError(LookupError):
    """A cube below the depth of the tree was queried."""


class EmptyLevelError(ValueError):
    """A level carries no mass at all."""


class AtomicMeasure:
    """A finite probability measure sum_n r_n delta_{x_n} with exact data.

    Atoms at the same location are merged; the atom list is kept sorted by
    location so that iteration order, and everything derived from it, is
    deterministic.
    """

    def __init__(self, atoms: Iterable[Tuple[Sequence, object]], dim: int | None = None):
        merged: Dict[Point, Fraction] = defaultdict(Fraction)
        for loc, weight in atoms:
            loc = as_point(loc)
            weight = as_fraction(weight)
            if weight <= 0:
                raise ValueError(f"atom weight {weight} is not positive")
            if dim is None:
                dim = len(loc)
            elif len(loc) != dim:
                raise ValueError("atoms of mixed dimension")
            merged[loc] += weight
        if dim is None:
            raise ValueError("an atomic measure needs at least one atom")
        total = sum(merged.values(), Fraction(0))
        if total != 1:
            raise ValueError(f"weights sum to {total}, not 1")
        self.dim = dim
        self.atoms: Tuple[Tuple[Point, Fraction], ...] = tuple(sorted(merged.items()))

    @classmethod
    def dirac(cls, x: Sequence) -> "AtomicMeasure":
        return cls([(x, 1)])

    def __len__(self) -> int:
        return len(self.atoms)

    def __iter__(self) -> Iterator[Tuple[Point, Fraction]]:
        return iter(self.atoms)

    def __eq__(self, other) -> bool:
        return isinstance(other, AtomicMeasure) and self.atoms == other.atoms

    def __hash__(self) -> int:
        return hash(self.atoms)

    def __repr__(self) -> str:
        return f"AtomicMeasure(dim={self.dim}, n_atoms={len(self.atoms)})"

    @property
    def locations(self) -> list[Point]:
        return [x for x, _ in self.atoms]

    @property
    def weights(self) -> list[Fraction]:
        return [w for _, w in self.atoms]

    def ball_mass(self, b: SupBall) -> Fraction:
        return ball_mass(self, b)

    def level_masses(self, j: int) -> Tuple[Dict[Coords, Fraction], Fraction, int]:
        """Masses of the level-j cubes as (charged cubes, background mass, background count).

        For an atomic measure the background is the set of empty cubes.
        """
        masses: Dict[Coords, Fraction] = defaultdict(Fraction)
        for x, w in self.atoms:
            masses[containing_cube(x, j).coords] += w
        return dict(masses), Fraction(0), (1 << (self.dim * j)) - len(masses)


def ball_mass(m: AtomicMeasure, b: SupBall) -> Fraction:
    """Exact mass of the atoms inside b (non-strict if closed, strict if open)."""
    if b.dim != m.dim:
        raise ValueError("dimension mismatch")
    return sum((w for x, w in m.atoms if b.contains(x)), Fraction(0))


class MassTree:
    """Masses of every dyadic cube of levels 0..depth, children summing to parents.

    Storage is sparse: one dict per level mapping integer coordinates to the
    cube mass, absent meaning zero. ``mode`` is ``"exact"`` (Fraction masses)
    or ``"log2"`` (float log2 masses); the two never mix.
    """

    def __init__(self, dim: int, levels: Sequence[Mapping[Coords, object]], mode: str = EXACT,
                 validate: bool = True):
        if mode not in (EXACT, LOG2):
            raise ValueError(f"unknown mass mode {mode!r}")
        if not levels:
            raise ValueError("a mass tree needs at least the root level")
        self.dim = dim
        self.mode = mode
        self.depth = len(levels) - 1
        if mode == EXACT:
            self._levels = [{tuple(k): as_fraction(v) for k, v in lvl.items() if v != 0}
                            for lvl in levels]
        else:
            self._levels = [{tuple(k): float(v) for k, v in lvl.items() if v != -math.inf}
                            for lvl in levels]
        self._log2_cache: Dict[int, np.ndarray] = {}
        self._count_cache: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}
        if validate:
            self.check()

    def __repr__(self) -> str:
        return f"MassTree(dim={self.dim}, depth={self.depth}, mode={self.mode!r})"

    def check(self) -> None:
        """Raise ValueError if the tree breaks a MassTree invariant."""
        root = self._levels[0].get((0,) * self.dim)
        if self.mode == EXACT:
            if root != 1:
                raise ValueError(f"root mass is {root}, not 1")
        elif root is None or abs(root) > 1e-12:
            raise ValueError(f"root log2 mass is {root}, not 0")
        for j, lvl in enumerate(self._levels):
            top = 1 << j
            for k, v in lvl.items():
                if len(k) != self.dim or any(not 0 <= c < top for c in k):
                    raise ValueError(f"cube {k} invalid at level {j}")
                if self.mode == EXACT and v < 0:
                    raise ValueError(f"negative mass at level {j} cube {k}")
        for j in range(self.depth):
            sums = self._child_sums(j + 1)
            parents = self._levels[j]
            for k in set(sums) | set(parents):
                if k not in parents:
                    raise ValueError(f"cube {k} at level {j} is empty but has charged children")
                if k not in sums:
                    raise ValueError(f"cube {k} at level {j} is charged but its children are empty")
                if not self._close(parents[k], sums[k]):
                    raise ValueError(f"cube {k} at level {j}: mass differs from the sum of its children")

    def _close(self, a, b) -> bool:
        if self.mode == EXACT:
            return a == b
        # 1e-9 relative in mass is 1e-9 / ln 2 in log2
        return abs(a - b) <= 1e-9 / math.log(2)

    def _child_sums(self, j: int) -> Dict[Coords, object]:
        if self.mode == EXACT:
            sums: Dict[Coords, object] = defaultdict(Fraction)
            for k, v in self._levels[j].items():
                sums[tuple(c >> 1 for c in k)] += v
            return dict(sums)
        groups: Dict[Coords, list] = defaultdict(list)
        for k, v in self._levels[j].items():
            groups[tuple(c >> 1 for c in k)].append(v)
        return {k: _log2_sum(vals) for k, vals in groups.items()}

    def cube_mass(self, c: CubeIndex):
        return cube_mass(self, c)

    def level(self, j: int) -> Dict[Coords, object]:
        """A copy of the charged cubes of level j as {coords: mass}."""
        self._require(j)
        return dict(self._levels[j])

    def items(self, j: int) -> Iterator[Tuple[Coords, object]]:
        self._require(j)
        return iter(sorted(self._levels[j].items()))

    def level_masses(self, j: int) -> Tuple[Dict[Coords, Fraction], Fraction, int]:
        """Same triple as :meth:`AtomicMeasure.level_masses`; exact mode only."""
        if self.mode != EXACT:
            raise ValueError("exact level masses need an exact-mode tree")
        lvl = self.level(j)
        return lvl, Fraction(0), (1 << (self.dim * j)) - len(lvl)

    def n_charged(self, j: int) -> int:
        self._require(j)
        return len(self._levels[j])

    def log2_masses(self, j: int) -> np.ndarray:
        """log2 masses of the charged level-j cubes, in sorted cube order."""
        self._require(j)
        if j not in self._log2_cache:
            vals = [v for _, v in sorted(self._levels[j].items())]
            if self.mode == EXACT:
                vals = [_log2_fraction(v) for v in vals]
            arr = np.asarray(vals, dtype=float)
            arr.setflags(write=False)
            self._log2_cache[j] = arr
        return self._log2_cache[j]

    def log2_mass_counts(self, j: int) -> Tuple[np.ndarray, np.ndarray]:
        """Distinct log2 masses of level j (ascending) with their multiplicities.

        Structured measures repeat few masses, so sums over cubes shrink to
        sums over this short list.
        """
        if j not in self._count_cache:
            values, counts = np.unique(self.log2_masses(j), return_counts=True)
            values.setflags(write=False)
            counts.setflags(write=False)
            self._count_cache[j] = (values, counts)
        return self._count_cache[j]

    def to_log2(self) -> "MassTree":
        if self.mode == LOG2:
            return self
        levels = [{k: _log2_fraction(v) for k, v in lvl.items()} for lvl in self._levels]
        return MassTree(self.dim, levels, mode=LOG2, validate=False)

    def truncate(self, depth: int) -> "MassTree":
        self._require(depth)
        return MassTree(self.dim, self._levels[:depth + 1], mode=self.mode, validate=False)

    def _require(self, j: int) -> None:
        if j < 0:
            raise ValueError("level must be nonnegative")
        if j > self.depth:
            raise DepthError(f"level {j} is below the tree depth {self.depth}; rebuild deeper")

    def __eq__(self, other) -> bool:
        return (isinstance(other, MassTree) and self.dim == other.dim and self.mode == other.mode
                and self._levels == other._levels)


def _log2_fraction(v: Fraction) -> float:
    return math.log2(v.numerator) - math.log2(v.denominator)


def _log2_sum(vals: Sequence[float]) -> float:
    top = max(vals)
    return top + math.log2(math.fsum(2.0 ** (v - top) for v in vals))


def cube_mass(t: MassTree, c: CubeIndex):
    """Stored mass of c; zero (or -inf in log2 mode) for an uncharged cube."""
    if c.dim != t.dim:
        raise ValueError("dimension mismatch")
    t._require(c.level)
    default = Fraction(0) if t.mode == EXACT else -math.inf
    return t._levels[c.level].get(c.coords, default)


def aggregate(level_masses: Mapping[Coords, object], depth: int, dim: int,
              mode: str = EXACT) -> MassTree:
    """Build a tree from masses at the deepest level by summing upwards."""
    levels = [dict(level_masses)]
    for _ in range(depth):
        below = levels[-1]
        if mode == EXACT:
            up: Dict[Coords, object] = defaultdict(Fraction)
            for k, v in below.items():
                up[tuple(c >> 1 for c in k)] += v
        else:
            groups: Dict[Coords, list] = defaultdict(list)
            for k, v in below.items():
                groups[tuple(c >> 1 for c in k)].append(v)
            up = {k: _log2_sum(vs) for k, vs in groups.items()}
        levels.append(dict(up))
    levels.reverse()
    return MassTree(dim, levels, mode=mode, validate=False)


def from_atoms(m: AtomicMeasure, depth: int) -> MassTree:
    """Discretize an atomic measure onto the dyadic grids of levels 0..depth."""
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    deepest, _, _ = m.level_masses(depth)
    return aggregate(deepest, depth, m.dim)
