"""Measure generators: Lebesgue, uniform centre grids, grid measures nu_n,
their approximants mu_n, binomial cascades, plus the exact floor check."""

from __future__ import annotations

import itertools
import math
import shlex
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Tuple, Union

from .dyadic import CubeIndex, SupBall, as_fraction, centers_in_interval, cube_center
from .measures import EXACT, AtomicMeasure, MassTree, aggregate, from_atoms

Coords = Tuple[int, ...]


def _grid(j: int, d: int):
    return itertools.product(range(1 << j), repeat=d)


def lebesgue(d: int, J: int, mode: str = EXACT) -> MassTree:
    """Every level-j cube gets mass 2^(-d j)."""
    if d < 1 or J < 0:
        raise ValueError("need d >= 1 and J >= 0")
    levels = []
    for j in range(J + 1):
        mass = Fraction(1, 1 << (d * j)) if mode == EXACT else float(-d * j)
        levels.append(dict.fromkeys(_grid(j, d), mass))
    return MassTree(d, levels, mode=mode, validate=False)


def pi_j(d: int, j: int) -> AtomicMeasure:
    """Equal atoms 2^(-dj) at the centres of all level-j cubes."""
    if j < 1:
        raise ValueError("pi_j needs j >= 1")
    w = Fraction(1, 1 << (d * j))
    return AtomicMeasure([(cube_center(CubeIndex(j, k)), w) for k in _grid(j, d)], dim=d)


@dataclass(frozen=True)
class GridWeights:
    """Strictly positive rational weights r_{j,k} on the corners k 2^-j, k in Z_j."""

    level: int
    dim: int
    weights: Tuple[Fraction, ...]

    def __post_init__(self):
        if self.level < 1 or self.dim < 1:
            raise ValueError("grid measures need level >= 1 and dim >= 1")
        w = tuple(as_fraction(x) for x in self.weights)
        object.__setattr__(self, "weights", w)
        if len(w) != 1 << (self.level * self.dim):
            raise ValueError(f"expected {1 << (self.level * self.dim)} weights, got {len(w)}")
        if any(x <= 0 for x in w):
            raise ValueError("grid weights must be strictly positive")
        if sum(w, Fraction(0)) != 1:
            raise ValueError("grid weights must sum to 1")

    def items(self):
        """(k, r_k) with k in lexicographic order, last axis fastest."""
        return zip(_grid(self.level, self.dim), self.weights)

    @classmethod
    def from_measure(cls, nu: AtomicMeasure) -> "GridWeights":
        """Recover the grid description of an atomic measure on a full corner grid."""
        n = len(nu)
        j, rem = divmod(n.bit_length() - 1, nu.dim)
        if rem or n != 1 << (j * nu.dim) or j < 1:
            raise ValueError("atom count is not 2^(d j) for any j >= 1")
        weights = dict(nu.atoms)
        scale = 1 << j
        try:
            w = [weights[tuple(Fraction(c, scale) for c in k)] for k in _grid(j, nu.dim)]
        except KeyError:
            raise ValueError("atoms do not sit on the corners k 2^-j") from None
        return cls(j, nu.dim, tuple(w))


def nu_from_grid(w: GridWeights) -> AtomicMeasure:
    scale = 1 << w.level
    return AtomicMeasure([(tuple(Fraction(c, scale) for c in k), r) for k, r in w.items()],
                         dim=w.dim)


def J_of(n: int, j_n: int) -> int:
    """The approximation level J_n = 2 n j_n^2."""
    if n < 1 or j_n < 1:
        raise ValueError("n and j_n must be positive")
    return 2 * n * j_n * j_n


class ApproximantMeasure:
    """The blend w * pi_J + (1 - w) * nu, kept in structured form.

    pi_J has 2^(dJ) atoms, far too many to list for the parameters of
    interest, so masses of cubes and balls are computed in closed form and
    the atom list is only materialized on request.
    """

    def __init__(self, nu: AtomicMeasure, level: int, blend: Fraction, n: int | None = None,
                 grid: GridWeights | None = None):
        blend = as_fraction(blend)
        if not 0 < blend <= 1:
            raise ValueError("blend weight must lie in (0, 1]")
        self.nu = nu
        self.level = level
        self.blend = blend
        self.n = n
        self.grid = grid
        self.dim = nu.dim

    def __repr__(self) -> str:
        return (f"ApproximantMeasure(dim={self.dim}, level={self.level}, blend={self.blend}, "
                f"n_nu_atoms={len(self.nu)})")

    @property
    def atom_mass(self) -> Fraction:
        """Mass each centre atom of pi_J receives: w 2^(-dJ)."""
        return self.blend / (1 << (self.dim * self.level))

    @property
    def n_atoms(self) -> int:
        centers = 1 << (self.dim * self.level)
        return centers + len(self.nu) - sum(1 for x, _ in self.nu if self._is_center(x))

    def _is_center(self, x) -> bool:
        twice = 1 << (self.level + 1)
        return all((c * twice).denominator == 1 and (c * twice).numerator % 2 == 1 for c in x)

    def level_masses(self, j: int) -> Tuple[Dict[Coords, Fraction], Fraction, int]:
        """(cubes touched by nu, mass of every other cube, number of other cubes) at level j <= J."""
        if j > self.level:
            return self.to_atomic().level_masses(j)
        per_cube = self.blend / (1 << (self.dim * j))
        nu_masses, _, _ = self.nu.level_masses(j)
        explicit = {k: per_cube + (1 - self.blend) * v for k, v in nu_masses.items()}
        return explicit, per_cube, (1 << (self.dim * j)) - len(explicit)

    def ball_mass(self, b: SupBall) -> Fraction:
        if b.dim != self.dim:
            raise ValueError("dimension mismatch")
        count = 1
        for lo, hi in b.bounds():
            k_min, k_max = centers_in_interval(lo, hi, self.level, Fraction(0), strict=not b.closed)
            count *= max(0, k_max - k_min + 1)
        return count * self.atom_mass + (1 - self.blend) * self.nu.ball_mass(b)

    def to_atomic(self, max_atoms: int = 1 << 20) -> AtomicMeasure:
        if (1 << (self.dim * self.level)) > max_atoms:
            raise ValueError(f"2^{self.dim * self.level} centre atoms exceed the cap {max_atoms}")
        atoms = [(x, self.atom_mass) for x, _ in pi_j(self.dim, self.level)]
        if self.blend < 1:
            atoms += [(x, (1 - self.blend) * w) for x, w in self.nu]
        return AtomicMeasure(atoms, dim=self.dim)

    def mass_tree(self, depth: int | None = None) -> MassTree:
        depth = self.level if depth is None else depth
        if depth <= self.level:
            # every level-J cube is charged; build the deepest level in closed form
            explicit, background, _ = self.level_masses(depth)
            full = dict.fromkeys(_grid(depth, self.dim), background)
            full.update(explicit)
            return aggregate(full, depth, self.dim)
        return from_atoms(self.to_atomic(), depth)


def mu_n(nu: Union[GridWeights, AtomicMeasure], n: int) -> ApproximantMeasure:
    """mu_n = 2^(-J_n/n) pi_{J_n} + (1 - 2^(-J_n/n)) nu_n with J_n = 2 n j_n^2."""
    grid = nu if isinstance(nu, GridWeights) else GridWeights.from_measure(nu)
    J = J_of(n, grid.level)
    # J / n = 2 j_n^2 is an integer, so the blend weight is dyadic
    blend = Fraction(1, 1 << (J // n))
    return ApproximantMeasure(nu_from_grid(grid), J, blend, n=n, grid=grid)


@dataclass
class FloorReport:
    """Outcome of checking mu(I)^n >= 2^(-J (d n + 1)) over every level-J cube."""

    n: int
    level: int
    dim: int
    n_cubes: int
    min_mass: Fraction
    n_violations: int
    examples: List[Tuple[Coords, Fraction]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.n_violations == 0

    @property
    def bound_log2(self) -> Fraction:
        return -self.level * (self.dim + Fraction(1, self.n))

    @property
    def margin_log2(self) -> float:
        if self.min_mass == 0:
            return -math.inf
        return (math.log2(self.min_mass.numerator) - math.log2(self.min_mass.denominator)
                - float(self.bound_log2))


def _floor_holds(mass: Fraction, n: int, J: int, d: int) -> bool:
    # mass^n >= 2^(-J(dn+1)), cleared of denominators
    return mass.numerator ** n << (J * (d * n + 1)) >= mass.denominator ** n


def check_floor_inequality(mu, n: int, J: int, max_examples: int = 10) -> FloorReport:
    """Check mu(I_{J,k}) >= |I_{J,k}|^(d + 1/n) for every k, in integer arithmetic."""
    if n <= 0:
        raise ValueError("n must be positive")
    if J < 0:
        raise ValueError("J must be nonnegative")
    d = mu.dim
    explicit, background, n_background = mu.level_masses(J)
    bad: List[Tuple[Coords, Fraction]] = []
    n_bad = 0
    for k in sorted(explicit):
        if not _floor_holds(explicit[k], n, J, d):
            n_bad += 1
            if len(bad) < max_examples:
                bad.append((k, explicit[k]))
    masses = list(explicit.values())
    if n_background:
        masses.append(background)
        if background == 0 or not _floor_holds(background, n, J, d):
            n_bad += n_background
            if len(bad) < max_examples:
                k = next(k for k in _grid(J, d) if k not in explicit)
                bad.append((k, background))
    return FloorReport(n=n, level=J, dim=d, n_cubes=1 << (d * J), min_mass=min(masses),
                       n_violations=n_bad, examples=bad)


@dataclass(frozen=True)
class CascadeSpec:
    """Deterministic binomial cascade on [0,1] with child weights (m0, m1)."""

    m0: Fraction
    m1: Fraction
    depth: int

    def __post_init__(self):
        object.__setattr__(self, "m0", as_fraction(self.m0))
        object.__setattr__(self, "m1", as_fraction(self.m1))
        if self.m0 <= 0 or self.m1 <= 0 or self.m0 + self.m1 != 1:
            raise ValueError("cascade weights must be positive and sum to 1")
        if self.depth < 0:
            raise ValueError("depth must be nonnegative")

    def tau(self, q: float) -> float:
        """Closed form -log2(m0^q + m1^q)."""
        return -math.log2(float(self.m0) ** q + float(self.m1) ** q)


def cascade(spec: CascadeSpec, mode: str = EXACT) -> MassTree:
    """Cube with binary address b_1..b_j gets prod m_{b_i}; left child takes m0."""
    levels = [{(0,): Fraction(1)}]
    for _ in range(spec.depth):
        below = {}
        for (k,), v in levels[-1].items():
            below[(2 * k,)] = v * spec.m0
            below[(2 * k + 1,)] = v * spec.m1
        levels.append(below)
    tree = MassTree(1, levels, mode=EXACT, validate=False)
    return tree if mode == EXACT else tree.to_log2()


def generic_ball_radius(n: int, J_n: int, d: int) -> int:
    """log2 of the radius 2^(-(d+4) J_n^2) of the ball around mu_n."""
    if n < 1 or J_n < 1 or d < 1:
        raise ValueError("n, J_n and d must be positive")
    return -(d + 4) * J_n * J_n


def parse_fraction_list(text: str) -> List[Fraction]:
    return [Fraction(t) for t in text.split(",") if t.strip()]


def parse_generator(spec: str, mode: str = EXACT):
    """Build a measure from generator text such as ``"cascade m0=1/4 J=10"``.

    Accepted forms::

        pi j=<j> d=<d>
        grid j=<j> d=<d> weights=<r1,r2,...>
        mun n=<n> j=<j> d=<d> weights=<r1,r2,...>
        mun n=<n> grid="j=<j> d=<d> weights=<r1,r2,...>"
        cascade m0=<num/den> J=<J>
        lebesgue d=<d> J=<J>
    """
    tokens = shlex.split(spec)
    if not tokens:
        raise ValueError("empty generator spec")
    kind, params = tokens[0], {}
    for tok in tokens[1:]:
        key, sep, value = tok.partition("=")
        if not sep:
            raise ValueError(f"expected key=value, got {tok!r}")
        if key in params:
            raise ValueError(f"{key} given twice")
        params[key] = value
    if kind == "mun" and "grid" in params:
        for tok in shlex.split(params.pop("grid")):
            key, sep, value = tok.partition("=")
            if not sep or key in params:
                raise ValueError(f"bad grid parameter {tok!r}")
            params[key] = value

    def need(*keys):
        missing = [k for k in keys if k not in params]
        if missing:
            raise ValueError(f"{kind}: missing {', '.join(missing)}")
        extra = set(params) - set(keys)
        if extra:
            raise ValueError(f"{kind}: unexpected {', '.join(sorted(extra))}")

    if kind == "pi":
        need("j", "d")
        return pi_j(int(params["d"]), int(params["j"]))
    if kind == "grid":
        need("j", "d", "weights")
        return nu_from_grid(GridWeights(int(params["j"]), int(params["d"]),
                                        tuple(parse_fraction_list(params["weights"]))))
    if kind == "mun":
        need("n", "j", "d", "weights")
        grid = GridWeights(int(params["j"]), int(params["d"]),
                           tuple(parse_fraction_list(params["weights"])))
        return mu_n(grid, int(params["n"]))
    if kind == "cascade":
        need("m0", "J")
        m0 = Fraction(params["m0"])
        return cascade(CascadeSpec(m0, 1 - m0, int(params["J"])), mode=mode)
    if kind == "lebesgue":
        need("d", "J")
        return lebesgue(int(params["d"]), int(params["J"]), mode=mode)
    raise ValueError(f"unknown generator {kind!r}")
