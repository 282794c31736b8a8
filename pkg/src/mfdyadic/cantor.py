"""Finite-depth Cantor construction inside the approximation sets A_{theta,p}.

Generation p consists of the closed sup-balls of radius 2^(-theta J_p - 1)
centred at (k + e) 2^(-J_p) that fit inside a generation p-1 ball; the
measure splits each parent's mass equally among its children. Generations
are never materialized: nodes are addressed lazily and every count is a
per-axis closed form.

Two facts keep the counting cheap. Containment of sup-balls is decided
axis by axis, so generation p is the product of d copies of a 1-d
construction. And in one dimension every generation p-1 interval has its
endpoints at the same offset modulo 2^(-J_p) (J_p > J_{p-1}), so all
parents of a generation have the same number of children.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, List, Optional, Sequence, Tuple

from .constructions import ApproximantMeasure
from .dyadic import HALF, SupBall, as_fraction, as_point, centers_in_interval, sup_distance

Address = Tuple[Tuple[int, ...], ...]


class DegenerateScheduleError(ValueError):
    """A generation has no room for any child ball."""


@dataclass(frozen=True)
class CantorSchedule:
    """Dimension, exponent theta > 1 and increasing levels J_1 < ... < J_P.

    theta * J_p must be an integer so that every ball endpoint is dyadic.
    """

    dim: int
    theta: Fraction
    levels: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "theta", as_fraction(self.theta))
        object.__setattr__(self, "levels", tuple(int(J) for J in self.levels))
        if self.dim < 1:
            raise ValueError("dimension must be positive")
        if self.theta <= 1:
            raise ValueError("theta must exceed 1")
        if not self.levels:
            raise ValueError("empty schedule")
        if self.levels[0] < 1 or any(b <= a for a, b in zip(self.levels, self.levels[1:])):
            raise ValueError("levels must be positive and strictly increasing")
        for J in self.levels:
            if (self.theta * J).denominator != 1:
                raise ValueError(f"theta * J = {self.theta * J} is not an integer for J = {J}")

    @classmethod
    def desk(cls, dim: int, theta, first: int, generations: int, multiplier: int = 4
             ) -> "CantorSchedule":
        """Levels with J_{p+1} the smallest admissible level >= multiplier * theta * J_p."""
        theta = as_fraction(theta)
        step = theta.denominator
        first = -(-first // step) * step
        levels = [first]
        for _ in range(generations - 1):
            target = math.ceil(multiplier * theta * levels[-1])
            levels.append(-(-target // step) * step)
        return cls(dim, theta, tuple(levels))

    @property
    def P(self) -> int:
        return len(self.levels)

    def level(self, p: int) -> int:
        self._check_generation(p)
        return self.levels[p - 1]

    def theta_level(self, p: int) -> int:
        """theta * J_p, the log2 of the reciprocal diameter of a generation-p ball."""
        return int(self.theta * self.level(p))

    def radius(self, p: int) -> Fraction:
        return Fraction(1, 1 << (self.theta_level(p) + 1))

    def diameter(self, p: int) -> Fraction:
        return Fraction(1, 1 << self.theta_level(p))

    def _check_generation(self, p: int) -> None:
        if not 1 <= p <= self.P:
            raise ValueError(f"generation {p} outside 1..{self.P}")


# ---------------------------------------------------------------- schedule checks

@dataclass
class ConstraintCheck:
    name: str
    p: int
    holds: bool
    margin: Fraction


@dataclass
class ScheduleReport:
    schedule: CantorSchedule
    checks: List[ConstraintCheck]
    deltas: Tuple[int, ...]

    @property
    def construction_valid(self) -> bool:
        return all(D >= 1 for D in self.deltas)

    def get(self, name: str, p: int) -> Optional[ConstraintCheck]:
        for c in self.checks:
            if c.name == name and c.p == p:
                return c
        return None

    def holds(self, name: str, p: int) -> bool:
        c = self.get(name, p)
        return c is not None and c.holds

    @property
    def strict(self) -> bool:
        """Whether every growth constraint of the full construction holds."""
        needed = [c for c in self.checks if c.name in ("level-gap", "child-room")
                  or (c.name == "mass-product" and c.p >= 3)]
        return all(c.holds for c in needed)

    def mass_bounds_guaranteed(self, p: int) -> bool:
        """Whether the two-sided generation-p mass bound follows from checked facts:
        the per-generation branching bounds up to p and the product inequality at p."""
        if not self.holds("mass-product", p):
            return False
        return all(self.holds("branching-range", k) for k in range(2, p + 1))


def validate_schedule(s: CantorSchedule, desk_multiplier: int = 4) -> ScheduleReport:
    """Evaluate every growth constraint with its exact margin; never rejects."""
    d, theta, J = s.dim, s.theta, s.levels
    checks: List[ConstraintCheck] = []
    for p in range(1, s.P):
        a, b = J[p - 1], J[p]
        m = b - max(100 * theta * a, p * p)
        checks.append(ConstraintCheck("level-gap", p, m > 0, m))
        # 2^{d b (1 - 1/(p+1))} <= 2^{-d theta a} 2^{d b - 2}
        m = (d * b - d * theta * a - 2) - d * b * (1 - Fraction(1, p + 1))
        checks.append(ConstraintCheck("child-room", p, m >= 0, m))
        m = b - desk_multiplier * theta * a
        checks.append(ConstraintCheck("desk", p, m >= 0, m))
    for p in range(1, s.P + 1):
        total = sum(J[:p])
        m1 = d * J[p - 1] * (1 + Fraction(1, p)) - d * total
        m2 = sum(d * J[k - 1] * (1 - Fraction(1, k)) for k in range(1, p + 1)) \
            - d * J[p - 1] * (1 - Fraction(2, p))
        m = min(m1, m2)
        checks.append(ConstraintCheck("mass-product", p, m >= 0, m))
    deltas = generation_deltas(s, strict=False)
    for p in range(2, s.P + 1):
        D = deltas[p - 1]
        # 2^{d J_p (1 - 1/p)} <= D <= 2^{d J_p}
        lower_ok = D ** p >= 1 << (d * J[p - 1] * (p - 1))
        upper_ok = D <= 1 << (d * J[p - 1])
        margin = Fraction(D.bit_length() - 1) - d * J[p - 1] * (1 - Fraction(1, p)) if D else \
            Fraction(-d * J[p - 1])
        checks.append(ConstraintCheck("branching-range", p, lower_ok and upper_ok, margin))
        lo_ok, hi_ok = delta_bounds_hold(s, p, D)
        checks.append(ConstraintCheck("branching-scale", p, lo_ok and hi_ok,
                                      Fraction(D) / (Fraction(2) ** (d * (J[p - 1] - s.theta_level(p - 1))))))
    return ScheduleReport(s, checks, deltas)


def delta_bounds_hold(s: CantorSchedule, p: int, D: int) -> Tuple[bool, bool]:
    """Check (1/2)|I|^d 2^{d J_p} <= D <= 2 |I|^d 2^{d J_p} for a generation p-1 parent I."""
    e = s.dim * (s.level(p) - s.theta_level(p - 1))
    scale = Fraction(2) ** e
    return D >= scale / 2, D <= 2 * scale


def covering_sum(s: CantorSchedule, s_exp, P: Optional[int] = None) -> Tuple[float, List[float]]:
    """Sum over p <= P of 2^{d J_p - s theta J_p}, with the log2 of each term."""
    s_exp = as_fraction(s_exp) if not isinstance(s_exp, float) else s_exp
    P = s.P if P is None else P
    logs = [float(s.dim * s.level(p) - s_exp * s.theta_level(p)) for p in range(1, P + 1)]
    return math.fsum(2.0 ** e for e in logs), logs


# ---------------------------------------------------------------- nodes

@dataclass(frozen=True)
class CantorNode:
    """A generation-p ball addressed by its centre index at every generation 1..p."""

    generation: int
    address: Address

    def __post_init__(self):
        object.__setattr__(self, "address", tuple(tuple(int(c) for c in k) for k in self.address))
        if len(self.address) != self.generation:
            raise ValueError("address length must equal the generation")

    @classmethod
    def root(cls) -> "CantorNode":
        return cls(0, ())

    def child(self, k: Sequence[int]) -> "CantorNode":
        return CantorNode(self.generation + 1, self.address + (tuple(k),))


def node_ball(s: CantorSchedule, node: CantorNode) -> SupBall:
    if node.generation == 0:
        return SupBall((HALF,) * s.dim, HALF)
    p = node.generation
    J = s.level(p)
    center = tuple(Fraction(2 * k + 1, 1 << (J + 1)) for k in node.address[-1])
    return SupBall(center, s.radius(p))


def child_ranges(s: CantorSchedule, node: CantorNode) -> List[Tuple[int, int]]:
    """Per-axis index ranges of the children of ``node`` at the next level."""
    p = node.generation + 1
    ball = node_ball(s, node)
    return [centers_in_interval(lo, hi, s.level(p), s.radius(p)) for lo, hi in ball.bounds()]


def branching_count(s: CantorSchedule, parent: CantorNode) -> int:
    """Number of next-generation balls inside ``parent``; raises if there are none."""
    count = 1
    for k_min, k_max in child_ranges(s, parent):
        count *= max(0, k_max - k_min + 1)
    if count == 0:
        raise DegenerateScheduleError(
            f"no generation-{parent.generation + 1} ball fits in {parent.address}; "
            "J_{p+1} is too close to theta J_p")
    return count


def make_node(s: CantorSchedule, address: Sequence[Sequence[int]]) -> CantorNode:
    """Validate an address generation by generation and return the node."""
    node = CantorNode.root()
    for k in address:
        ranges = child_ranges(s, node)
        if len(k) != s.dim or any(not lo <= c <= hi for c, (lo, hi) in zip(k, ranges)):
            raise ValueError(f"{tuple(k)} is not a child of {node.address}")
        node = node.child(k)
    return node


def generation_deltas(s: CantorSchedule, strict: bool = True) -> Tuple[int, ...]:
    """Branching count of each generation, read off the first node of the previous one."""
    deltas = []
    node = CantorNode.root()
    for _ in range(s.P):
        ranges = child_ranges(s, node)
        D = 1
        for lo, hi in ranges:
            D *= max(0, hi - lo + 1)
        if D == 0:
            if strict:
                raise DegenerateScheduleError(f"generation {node.generation + 1} is empty")
            deltas.extend([0] * (s.P - len(deltas)))
            break
        deltas.append(D)
        node = node.child(tuple(lo for lo, _ in ranges))
    return tuple(deltas)


def generation_size(s: CantorSchedule, p: int) -> int:
    return math.prod(generation_deltas(s)[:p])


def iter_nodes(s: CantorSchedule, p: int, limit: int = 1 << 16) -> Iterator[CantorNode]:
    """Enumerate generation p; refuses generations larger than ``limit``."""
    if generation_size(s, p) > limit:
        raise ValueError(f"generation {p} has more than {limit} nodes")

    def walk(node):
        if node.generation == p:
            yield node
            return
        ranges = child_ranges(s, node)
        for k in itertools.product(*(range(lo, hi + 1) for lo, hi in ranges)):
            yield from walk(node.child(k))

    yield from walk(CantorNode.root())


def random_node(s: CantorSchedule, p: int, rng: random.Random) -> CantorNode:
    node = CantorNode.root()
    for _ in range(p):
        ranges = child_ranges(s, node)
        if any(hi < lo for lo, hi in ranges):
            raise DegenerateScheduleError(f"generation {node.generation + 1} is empty")
        node = node.child(tuple(rng.randint(lo, hi) for lo, hi in ranges))
    return node


@dataclass(frozen=True)
class NodeMass:
    """m(I) = 1 / prod(deltas), kept factored."""

    deltas: Tuple[int, ...]

    @property
    def denominator(self) -> int:
        return math.prod(self.deltas)

    @property
    def exact(self) -> Fraction:
        return Fraction(1, self.denominator)

    @property
    def log2(self) -> float:
        return -math.fsum(math.log2(D) for D in self.deltas)


def node_mass(s: CantorSchedule, node: CantorNode) -> NodeMass:
    """Product of reciprocal branching counts along the address."""
    node = make_node(s, node.address)
    deltas = []
    current = CantorNode.root()
    for k in node.address:
        deltas.append(branching_count(s, current))
        current = current.child(k)
    return NodeMass(tuple(deltas))


# ---------------------------------------------------------------- approximation sets

@dataclass(frozen=True)
class ApproxSet:
    """Union of closed balls of radius 2^(-theta J) around the level-J cube centres."""

    level: int
    theta: Fraction

    def __post_init__(self):
        object.__setattr__(self, "theta", as_fraction(self.theta))
        if (self.theta * self.level).denominator != 1:
            raise ValueError("theta * J must be an integer")

    @property
    def radius(self) -> Fraction:
        return Fraction(1, 1 << int(self.theta * self.level))

    def nearest_center(self, x) -> Tuple[Fraction, ...]:
        scale = 1 << self.level
        return tuple(Fraction(2 * min(math.floor(c * scale), scale - 1) + 1, 2 * scale) for c in x)


def membership(x, a: ApproxSet) -> bool:
    """Exact test sup_distance(x, nearest centre) <= 2^(-theta J)."""
    x = as_point(x)
    return sup_distance(x, a.nearest_center(x)) <= a.radius


def approx_centers(dim: int, a: ApproxSet) -> Iterator[Tuple[Fraction, ...]]:
    scale = 1 << a.level
    for k in itertools.product(range(scale), repeat=dim):
        yield tuple(Fraction(2 * c + 1, 2 * scale) for c in k)


@dataclass
class BallMassRow:
    point: Tuple[Fraction, ...]
    member: bool
    mass: Optional[Fraction] = None
    floor_ok: Optional[bool] = None
    weak_ok: Optional[bool] = None


@dataclass
class BallMassReport:
    theta: Fraction
    eps: Fraction
    level: int
    floor: Fraction
    weak_precondition: bool
    rows: List[BallMassRow]

    @property
    def passed(self) -> bool:
        return all(r.floor_ok for r in self.rows if r.member)

    @property
    def n_skipped(self) -> int:
        return sum(not r.member for r in self.rows)


def ball_mass_lower_bound_check(mu: ApproximantMeasure, theta, eps, points) -> BallMassReport:
    """For x in A_{theta} at the level of mu, check mu(B(x, 2 * 2^(-theta J))) >= w 2^(-dJ).

    The closed ball of radius 2^(-theta J) around x already holds a centre
    atom, which is where the floor comes from. The weaker bound
    2^(-d (1 + 2 eps) J) is reported too, with its precondition eps > 1/(d n).
    """
    theta, eps = as_fraction(theta), as_fraction(eps)
    a = ApproxSet(mu.level, theta)
    d, J = mu.dim, mu.level
    floor = mu.atom_mass
    n = mu.n if mu.n is not None else 1
    precondition = eps > Fraction(1, d * n)
    rows = []
    for x in points:
        x = as_point(x)
        if not membership(x, a):
            rows.append(BallMassRow(x, False))
            continue
        mass = mu.ball_mass(SupBall(x, 2 * a.radius, closed=True))
        # mass >= 2^{-d (1 + 2 eps) J}  <=>  mass^b >= 2^{-d J (b + 2 a)} with eps = a/b
        e = d * J * (1 + 2 * eps)
        weak_ok = mass.numerator ** e.denominator << e.numerator >= mass.denominator ** e.denominator
        rows.append(BallMassRow(x, True, mass, mass >= floor, weak_ok))
    return BallMassReport(theta, eps, J, floor, precondition, rows)


# ---------------------------------------------------------------- mass bounds

PASS, FAIL, NOT_GUARANTEED, ASYMPTOTIC = "PASS", "FAIL", "NOT-GUARANTEED", "ASYMPTOTIC"


@dataclass
class MassRow:
    address: Address
    deltas: Tuple[int, ...]
    log2_mass: float
    I_lower: bool
    I_upper: bool
    scaling_lower: bool
    scaling_upper: bool
    ratio: float
    I_lower_margin: float
    I_upper_margin: float


@dataclass
class MassBoundsReport:
    schedule: CantorSchedule
    p: int
    guaranteed: bool
    rows: List[MassRow]
    n_nodes: int

    @property
    def target_ratio(self) -> Fraction:
        return self.schedule.dim / self.schedule.theta

    @property
    def I_status(self) -> str:
        ok = all(r.I_lower and r.I_upper for r in self.rows)
        if self.guaranteed:
            return PASS if ok else FAIL
        return f"{NOT_GUARANTEED}({'holds' if ok else 'fails'})"

    @property
    def scaling_status(self) -> str:
        ok = all(r.scaling_lower and r.scaling_upper for r in self.rows)
        return f"{ASYMPTOTIC}({'holds' if ok else 'fails'})"

    @property
    def passed(self) -> bool:
        return self.I_status != FAIL


def verify_mass_bounds(s: CantorSchedule, p: int, samples: int = 16, seed: int = 0,
                       report: Optional[ScheduleReport] = None,
                       enumerate_limit: int = 4096) -> MassBoundsReport:
    """Compare generation-p node masses with 2^{-d J_p (1 + 1/p)} <= m <= 2^{-d J_p (1 - 2/p)}
    and with |I|^{d/theta +- 1/log2(1/|I|)}, exactly.

    The first pair is PASS/FAIL only when the schedule report shows its
    preconditions hold; otherwise it is reported as not guaranteed. The
    second pair only holds for large p and is always informational.
    """
    report = report or validate_schedule(s)
    d, J, TJ = s.dim, s.level(p), s.theta_level(p)
    size = generation_size(s, p)
    if size <= enumerate_limit:
        nodes = list(iter_nodes(s, p, limit=enumerate_limit))
    else:
        rng = random.Random(seed)
        nodes = [random_node(s, p, rng) for _ in range(samples)]
    rows = []
    for node in nodes:
        m = node_mass(s, node)
        D = m.denominator
        I_lower = D ** p <= 1 << (d * J * (p + 1))
        I_upper = (1 << max(0, d * J * (p - 2))) <= D ** p * (1 << max(0, -d * J * (p - 2)))
        # |I| = 2^{-TJ}; |I|^{1/log2(1/|I|)} = 1/2
        scaling_lower = D <= 1 << (d * J + 1)
        scaling_upper = (D << 1) >= 1 << (d * J)
        log2_m = m.log2
        rows.append(MassRow(node.address, m.deltas, log2_m, I_lower, I_upper,
                            scaling_lower, scaling_upper, -log2_m / TJ,
                            log2_m + d * J * (1 + 1 / p), -d * J * (1 - 2 / p) - log2_m))
    return MassBoundsReport(s, p, report.mass_bounds_guaranteed(p), rows, size)


def total_mass(s: CantorSchedule, p: int) -> Fraction:
    """Sum of m(I) over generation p via the counting identity (prod D) * (prod D)^-1."""
    deltas = generation_deltas(s)[:p]
    return math.prod(deltas) * Fraction(1, math.prod(deltas))


# ---------------------------------------------------------------- Borel probes

def _count_meeting_1d(s: CantorSchedule, q: int, lo: Fraction, hi: Fraction,
                      deltas_1d: Sequence[int]) -> int:
    """Generation-q intervals of one axis meeting [lo, hi], by closed form.

    Intervals fully inside [lo, hi] contribute all their descendants at
    once; only the at most two intervals straddling an endpoint recurse.
    """

    def rec(t: int, k_min: int, k_max: int) -> int:
        J, r = s.level(t), s.radius(t)
        a, b = centers_in_interval(lo, hi, J, -r)
        a, b = max(a, k_min), min(b, k_max)
        if a > b:
            return 0
        if t == q:
            return b - a + 1
        c, e = centers_in_interval(lo, hi, J, r)
        c, e = max(c, k_min), min(e, k_max)
        below = math.prod(deltas_1d[t:q])
        total = 0
        if c <= e:
            total += (e - c + 1) * below
            partial = list(range(a, c)) + list(range(e + 1, b + 1))
        else:
            partial = list(range(a, b + 1))
        for k in partial:
            center = Fraction(2 * k + 1, 1 << (J + 1))
            cmin, cmax = centers_in_interval(center - r, center + r, s.level(t + 1),
                                             s.radius(t + 1))
            total += rec(t + 1, cmin, cmax)
        return total

    return rec(1, 0, (1 << s.level(1)) - 1)


def _deltas_1d(s: CantorSchedule) -> List[int]:
    one = CantorSchedule(1, s.theta, s.levels)
    return list(generation_deltas(one))


def count_meeting(s: CantorSchedule, q: int, box: Sequence[Tuple[Fraction, Fraction]]) -> int:
    """Number of generation-q balls meeting the closed box prod [lo_i, hi_i]."""
    d1 = _deltas_1d(s)
    return math.prod(_count_meeting_1d(s, q, lo, hi, d1) for lo, hi in box)


@dataclass
class BorelRow:
    box: Tuple[Tuple[Fraction, Fraction], ...]
    diameter: Fraction
    p: Optional[int]
    case: str
    mass: Fraction
    meet_prev: Optional[int] = None
    meet_p: Optional[int] = None
    checks: List[Tuple[str, str]] = field(default_factory=list)
    exponent: Optional[float] = None

    @property
    def failed(self) -> bool:
        return any(status == FAIL for _, status in self.checks)


@dataclass
class BorelReport:
    schedule: CantorSchedule
    depth: int
    rows: List[BorelRow]

    @property
    def passed(self) -> bool:
        return not any(r.failed for r in self.rows)


def _status(ok: bool, guaranteed: bool = True) -> str:
    if guaranteed:
        return PASS if ok else FAIL
    return f"{NOT_GUARANTEED}({'holds' if ok else 'fails'})"


def probe_mass(s: CantorSchedule, P: int, box) -> Fraction:
    """m_P(B): total mass of the generation-P balls meeting the box."""
    return count_meeting(s, P, box) * Fraction(1, generation_size(s, P))


def verify_borel_bound(s: CantorSchedule, P: int, boxes, report: Optional[ScheduleReport] = None
                       ) -> BorelReport:
    """Check the combinatorial steps behind m(B) <= |B|^{d/theta - psi(|B|)} on probe boxes.

    A box of diameter |B| with 2^{-J_p} <= |B| < 2^{-J_{p-1}} falls in case 1
    (|B| >= 2^{-theta J_{p-1}}: B meets at most 2^d generation p-1 balls) or
    case 2 (B meets at most one generation p-1 ball and at most
    4^d |B|^d 2^{d J_p} generation-p balls). Masses are those of the depth-P
    construction: the total mass of generation-P balls meeting B.
    """
    report = report or validate_schedule(s)
    if not 1 <= P <= s.P:
        raise ValueError(f"depth {P} outside 1..{s.P}")
    d = s.dim
    sizes = [generation_size(s, p) for p in range(1, P + 1)]
    rows = []
    for box in boxes:
        box = tuple((as_fraction(lo), as_fraction(hi)) for lo, hi in box)
        if len(box) != d:
            raise ValueError("probe box has the wrong dimension")
        if any(lo < 0 or hi > 1 or hi < lo for lo, hi in box):
            raise ValueError(f"probe box {box} is not inside [0,1]^d")
        diam = max(hi - lo for lo, hi in box)
        mass = count_meeting(s, P, box) * Fraction(1, sizes[P - 1])
        p = next((p for p in range(2, P + 1)
                  if Fraction(1, 1 << s.level(p)) <= diam < Fraction(1, 1 << s.level(p - 1))), None)
        if p is None:
            rows.append(BorelRow(box, diam, None, "out-of-range", mass))
            continue
        row = BorelRow(box, diam, p, "", mass)
        row.meet_prev = count_meeting(s, p - 1, box)
        row.meet_p = count_meeting(s, p, box)
        m_prev = Fraction(1, sizes[p - 2])
        m_p = Fraction(1, sizes[p - 1])
        row.checks.append(("mass<=meet_p*m_p", _status(mass <= row.meet_p * m_p)))
        if diam >= s.diameter(p - 1):
            row.case = "1"
            row.checks.append(("meet_prev<=2^d", _status(row.meet_prev <= 1 << d)))
            row.checks.append(("mass<=2^d*m_prev", _status(mass <= (1 << d) * m_prev)))
        else:
            row.case = "2"
            separated = (s.theta - 1) * s.level(p - 1) >= 1
            row.checks.append(("meet_prev<=1", _status(row.meet_prev <= 1, separated)))
            row.checks.append(("meet_p<=4^d|B|^d2^(dJ_p)",
                               _status(row.meet_p <= (4 * diam) ** d * (1 << (d * s.level(p))))))
            factor = Fraction(2) ** (1 + d * s.theta_level(p - 1) - d * s.level(p))
            row.checks.append(("m_p<=m_prev*2^(1+d*theta*J_{p-1}-d*J_p)",
                               _status(m_p <= m_prev * factor, report.holds("branching-scale", p))))
        if mass > 0:
            row.exponent = ((math.log2(mass.numerator) - math.log2(mass.denominator))
                            / (math.log2(diam.numerator) - math.log2(diam.denominator)))
            target = (d / s.theta) * (1 - Fraction(2, p - 1)) if p > 1 else None
            ok = row.exponent >= float(target) if target is not None else True
            row.checks.append(("exponent>=d/theta*(1-2/(p-1))", f"{ASYMPTOTIC}({'holds' if ok else 'fails'})"))
        rows.append(row)
    return BorelReport(s, P, rows)
