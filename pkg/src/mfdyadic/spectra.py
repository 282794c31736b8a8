"""Finite-scale L^q spectra, Legendre transforms, cube exponents and coarse spectra.

All partition sums run in the log2 domain over charged cubes only, so a
cube of mass zero never contributes, whatever the sign of q.
"""

from __future__ import annotations

import io
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from .dyadic import containing_cube
from .measures import EmptyLevelError, MassTree, cube_mass

TAU = "tau-of-q"
LEGENDRE = "legendre-of-h"
COARSE = "coarse-of-h"
KINDS = (TAU, LEGENDRE, COARSE)


@dataclass
class SpectrumCurve:
    """A sampled real function with the scale range it was estimated on."""

    abscissa: np.ndarray
    values: np.ndarray
    kind: str
    levels: Tuple[int, int]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.abscissa = np.asarray(self.abscissa, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.kind not in KINDS:
            raise ValueError(f"unknown curve kind {self.kind!r}")
        if self.abscissa.shape != self.values.shape or self.abscissa.ndim != 1:
            raise ValueError("abscissa and values must be 1-d of equal length")
        if np.any(np.diff(self.abscissa) <= 0):
            raise ValueError("abscissas must be strictly increasing")

    def __len__(self) -> int:
        return len(self.abscissa)

    def concavity_violation(self) -> float:
        """Largest amount by which consecutive chord slopes increase (0 if concave)."""
        if len(self) < 3:
            return 0.0
        slopes = np.diff(self.values) / np.diff(self.abscissa)
        return float(max(0.0, np.max(np.diff(slopes))))

    def to_csv(self) -> str:
        buf = io.StringIO()
        lo, hi = self.levels
        j = str(lo) if lo == hi else f"{lo}:{hi}"
        extra = "".join(f" {k}={v}" for k, v in self.meta.items())
        buf.write(f"# kind={self.kind} j={j}{extra}\n")
        for a, v in zip(self.abscissa, self.values):
            buf.write(f"{fmt(a)},{fmt(v)}\n")
        return buf.getvalue()


def fmt(x: float) -> str:
    """Fixed 12-significant-digit rendering used in every CSV output."""
    x = float(x)
    if x == 0:
        return "0"
    return f"{x:.12g}"


def _log2_sum(values: np.ndarray, counts: np.ndarray) -> float:
    """log2 of sum_i counts_i 2^values_i."""
    top = float(np.max(values))
    if math.isinf(top):
        return top
    # fsum is exactly rounded, hence independent of summation order
    return top + math.log2(math.fsum((counts * np.exp2(values - top)).tolist()))


def partition_sum_log2(t: MassTree, j: int, q: float) -> float:
    """log2 of s_j(q) = sum of mu(Q)^q over charged level-j cubes."""
    values, counts = t.log2_mass_counts(j)
    if values.size == 0:
        raise EmptyLevelError(f"no charged cube at level {j}")
    if q == 0:
        return math.log2(int(counts.sum()))
    return _log2_sum(q * values, counts)


def tau_hat(t: MassTree, j: int, q: float) -> float:
    """-(1/j) log2 s_j(q)."""
    if j < 1:
        raise ValueError("tau_hat needs j >= 1")
    return -partition_sum_log2(t, j, q) / j


def _check_range(t: MassTree, j_min: int, j_max: int) -> None:
    if j_min < 1 or j_min > j_max:
        raise ValueError(f"bad level range {j_min}:{j_max}")
    if j_max > t.depth:
        raise ValueError(f"j_max={j_max} exceeds tree depth {t.depth}")


def tau_estimate(t: MassTree, q: float, j_min: int, j_max: int, method: str = "min") -> float:
    """Finite-scale proxy for the liminf defining tau.

    ``min`` takes the smallest tau_hat over the range; ``slope`` regresses
    log2 s_j(q) on -j by least squares.
    """
    _check_range(t, j_min, j_max)
    js = np.arange(j_min, j_max + 1)
    logs = np.array([partition_sum_log2(t, int(j), q) for j in js])
    if method == "min":
        return float(np.min(-logs / js))
    if method == "slope":
        if len(js) < 2:
            raise ValueError("the slope method needs at least two levels")
        x = -js.astype(float)
        xc = x - x.mean()
        return float(np.dot(xc, logs - logs.mean()) / np.dot(xc, xc))
    raise ValueError(f"unknown method {method!r}")


def tau_curve(t: MassTree, qs: Sequence[float], j_min: int, j_max: int,
              method: str = "min") -> SpectrumCurve:
    values = [tau_estimate(t, float(q), j_min, j_max, method) for q in qs]
    return SpectrumCurve(np.asarray(qs, dtype=float), np.asarray(values), TAU, (j_min, j_max),
                         meta={"method": method})


def q_grid(lo=-5, hi=5, step=Fraction(1, 100)) -> np.ndarray:
    """Grid lo, lo+step, ..., hi built in exact arithmetic so that decimal
    points such as q = 1 land exactly on the grid."""
    lo, hi, step = Fraction(lo), Fraction(hi), Fraction(step)
    if step <= 0 or hi < lo:
        raise ValueError("need step > 0 and hi >= lo")
    n = int((hi - lo) / step)
    return np.array([float(lo + i * step) for i in range(n + 1)])


@dataclass(frozen=True)
class LegendreValue:
    value: float
    attained_q: float
    boundary: bool


def legendre(curve: SpectrumCurve, h: float, rtol: float = 1e-12) -> LegendreValue:
    """inf over the sampled q of (q h - tau(q)).

    The smallest attaining q wins ties; ``boundary`` flags a minimizer at
    either end of the grid, where the infimum over all real q may be lower.
    """
    if curve.kind != TAU:
        raise ValueError("legendre needs a tau-of-q curve")
    if len(curve) == 0:
        raise ValueError("empty curve")
    vals = curve.abscissa * h - curve.values
    best = float(np.min(vals))
    tol = rtol * max(1.0, abs(best))
    i = int(np.flatnonzero(vals <= best + tol)[0])
    return LegendreValue(float(vals[i]), float(curve.abscissa[i]),
                         i == 0 or i == len(curve) - 1)


def legendre_curve(curve: SpectrumCurve, hs: Iterable[float],
                   drop_boundary: bool = False) -> Tuple[SpectrumCurve, List[LegendreValue]]:
    results = [(float(h), legendre(curve, float(h))) for h in hs]
    if drop_boundary:
        results = [(h, r) for h, r in results if not r.boundary]
    hs_out = [h for h, _ in results]
    out = SpectrumCurve(np.asarray(hs_out), np.asarray([r.value for _, r in results]), LEGENDRE,
                        curve.levels,
                        meta={**curve.meta,
                              "boundary_flagged": sum(r.boundary for _, r in results)})
    return out, [r for _, r in results]


def cube_exponent(t: MassTree, x, j: int) -> float:
    """log2 mu(I_j(x)) / (-j); +inf when the cube is empty."""
    if j < 1:
        raise ValueError("cube_exponent needs j >= 1")
    m = cube_mass(t, containing_cube(x, j))
    if t.mode == "exact":
        if m == 0:
            return math.inf
        lg = math.log2(m.numerator) - math.log2(m.denominator)
    else:
        lg = m
        if math.isinf(lg):
            return math.inf
    return lg / -j if lg != 0 else 0.0


def coarse_spectrum(t: MassTree, j: int, bin_width: float) -> SpectrumCurve:
    """Histogram f_j(h) = log2 N_j(h) / j of cube exponents in bins [h - eps/2, h + eps/2).

    Bin centres sit on the lattice h = i * eps; empty bins are omitted.
    """
    if bin_width <= 0:
        raise ValueError("bin width must be positive")
    if j < 1:
        raise ValueError("coarse_spectrum needs j >= 1")
    values, mult = t.log2_mass_counts(j)
    if values.size == 0:
        raise EmptyLevelError(f"no charged cube at level {j}")
    idx = np.floor(-values / j / bin_width + 0.5).astype(np.int64)
    tally: Counter = Counter()
    for i, c in zip(idx.tolist(), mult.tolist()):
        tally[i] += c
    counts = sorted(tally.items())
    h = np.array([i * bin_width for i, _ in counts])
    f = np.array([math.log2(c) / j for _, c in counts])
    return SpectrumCurve(h, f, COARSE, (j, j),
                         meta={"eps": fmt(bin_width), "counts": ";".join(str(c) for _, c in counts)})
