"""Exact geometry of dyadic cubes in [0,1]^d under the supremum metric.

Points are tuples of :class:`fractions.Fraction`. Nothing in this module
touches floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Tuple

Point = Tuple[Fraction, ...]

HALF = Fraction(1, 2)


def as_fraction(value) -> Fraction:
    """Coerce ints, Fractions and "num/den" strings to an exact Fraction.

    Floats are refused on purpose: a float coordinate has already lost the
    exactness everything downstream relies on.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not coordinates")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


def as_point(coords: Iterable) -> Point:
    point = tuple(as_fraction(c) for c in coords)
    if not point:
        raise ValueError("a point needs at least one coordinate")
    for c in point:
        if c < 0 or c > 1:
            raise ValueError(f"coordinate {c} outside [0, 1]")
    return point


@dataclass(frozen=True, order=True)
class CubeIndex:
    """The dyadic cube I_{j,k} = prod_i [k_i 2^-j, (k_i + 1) 2^-j)."""

    level: int
    coords: Tuple[int, ...]

    def __post_init__(self):
        if self.level < 0:
            raise ValueError("level must be nonnegative")
        object.__setattr__(self, "coords", tuple(int(k) for k in self.coords))
        top = 1 << self.level
        for k in self.coords:
            if not 0 <= k < top:
                raise ValueError(f"coordinate {k} outside Z_{self.level}")

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def side(self) -> Fraction:
        return Fraction(1, 1 << self.level)

    diameter = side

    def lower(self) -> Point:
        return tuple(Fraction(k, 1 << self.level) for k in self.coords)

    def upper(self) -> Point:
        return tuple(Fraction(k + 1, 1 << self.level) for k in self.coords)

    def parent(self) -> "CubeIndex":
        if self.level == 0:
            raise ValueError("the root cube has no parent")
        return CubeIndex(self.level - 1, tuple(k >> 1 for k in self.coords))

    def children(self) -> list["CubeIndex"]:
        out = [()]
        for k in self.coords:
            out = [c + (2 * k + b,) for c in out for b in (0, 1)]
        return [CubeIndex(self.level + 1, c) for c in out]


@dataclass(frozen=True)
class SupBall:
    """A ball of the sup metric: an axis-aligned cube of side 2 * radius."""

    center: Point
    radius: Fraction
    closed: bool = True

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(as_fraction(c) for c in self.center))
        object.__setattr__(self, "radius", as_fraction(self.radius))
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def diameter(self) -> Fraction:
        return 2 * self.radius

    def bounds(self) -> list[tuple[Fraction, Fraction]]:
        return [(c - self.radius, c + self.radius) for c in self.center]

    def contains(self, x: Sequence[Fraction]) -> bool:
        dist = sup_distance(self.center, x)
        return dist <= self.radius if self.closed else dist < self.radius


def containing_cube(x: Sequence, j: int) -> CubeIndex:
    """The level-j cube holding x; coordinates equal to 1 go to the last cube."""
    if j < 0:
        raise ValueError("level must be nonnegative")
    scale = 1 << j
    coords = []
    for c in x:
        c = as_fraction(c)
        coords.append(min(math.floor(c * scale), scale - 1))
    return CubeIndex(j, tuple(coords))


def cube_center(c: CubeIndex) -> Point:
    return tuple(Fraction(2 * k + 1, 1 << (c.level + 1)) for k in c.coords)


def sup_distance(x: Sequence[Fraction], y: Sequence[Fraction]) -> Fraction:
    if len(x) != len(y):
        raise ValueError("points of different dimension")
    return max((abs(a - b) for a, b in zip(x, y)), default=Fraction(0))


def ball_contains_cube(b: SupBall, c: CubeIndex) -> bool:
    """Whether the half-open cube I_{j,k} lies inside the ball b."""
    if b.dim != c.dim:
        raise ValueError("dimension mismatch")
    for (lo, hi), l, u in zip(b.bounds(), c.lower(), c.upper()):
        # [l, u) inside a closed or open interval: only the lower end can touch
        if u > hi:
            return False
        if l < lo or (not b.closed and l == lo):
            return False
    return True


def centers_in_interval(lo: Fraction, hi: Fraction, j: int, child_radius: Fraction,
                        strict: bool = False) -> tuple[int, int]:
    """Index range [k_min, k_max] of level-j centres (k + 1/2) 2^-j whose
    child interval [c - r, c + r] lies in [lo, hi] (or (lo, hi) if strict).

    Returns an empty range (k_min > k_max) when nothing fits.
    """
    scale = 1 << j
    # c - r >= lo  <=>  k >= (lo + r) 2^j - 1/2
    low = (lo + child_radius) * scale - HALF
    high = (hi - child_radius) * scale - HALF
    k_min = math.ceil(low)
    k_max = math.floor(high)
    if strict:
        if k_min == low:
            k_min += 1
        if k_max == high:
            k_max -= 1
    return max(k_min, 0), min(k_max, scale - 1)


def cube_in_ball_count(parent: SupBall, j: int, child_radius) -> int:
    """Number of level-j centres whose closed child ball fits in ``parent``.

    Computed per axis in closed form and multiplied; never enumerates.
    """
    child_radius = as_fraction(child_radius)
    if child_radius < 0:
        raise ValueError("child radius must be nonnegative")
    count = 1
    for lo, hi in parent.bounds():
        k_min, k_max = centers_in_interval(lo, hi, j, child_radius, strict=not parent.closed)
        if k_max < k_min:
            return 0
        count *= k_max - k_min + 1
    return count
