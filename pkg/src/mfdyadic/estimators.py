"""Estimator-style wrappers so spectra compose with scikit-learn tooling.

The "data" handed to ``fit`` is a measure: a :class:`MassTree`, or an
atomic/approximant measure that gets discretized to the needed depth.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .dyadic import as_point
from .measures import AtomicMeasure, MassTree, from_atoms
from .spectra import (
    SpectrumCurve,
    coarse_spectrum,
    cube_exponent,
    legendre,
    q_grid,
    tau_curve,
)


def check_mass_tree(X, depth: int) -> MassTree:
    """Return X as a MassTree deep enough for ``depth``."""
    if isinstance(X, MassTree):
        if X.depth < depth:
            raise ValueError(f"tree depth {X.depth} is below the required level {depth}")
        return X
    if isinstance(X, AtomicMeasure):
        return from_atoms(X, depth)
    if hasattr(X, "mass_tree"):
        return X.mass_tree(depth)
    raise TypeError(f"cannot interpret {type(X).__name__} as a measure")


def check_q(q) -> np.ndarray:
    q = q_grid() if q is None else np.asarray(q, dtype=float)
    if q.ndim != 1 or q.size == 0:
        raise ValueError("q must be a non-empty 1-d grid")
    if np.any(np.diff(q) <= 0):
        raise ValueError("q must be strictly increasing")
    if not np.all(np.isfinite(q)):
        raise ValueError("q must be finite")
    return q


def check_levels(j_min: int, j_max):
    if j_max is None:
        raise ValueError("j_max is required")
    if not 1 <= j_min <= j_max:
        raise ValueError(f"bad level range {j_min}:{j_max}")
    return int(j_min), int(j_max)


class LqSpectrum(BaseEstimator, TransformerMixin):
    """Estimate tau(q) over a level range; ``transform`` maps exponents h to
    the Legendre transform of the fitted curve.

    Parameters
    ----------
    q : array-like, optional
        Grid of moment orders, default [-5, 5] in steps of 0.01.
    j_min, j_max : int
        Scale range of the estimate.
    method : {"min", "slope"}
        Finite-scale proxy for the liminf.
    """

    def __init__(self, q=None, j_min=1, j_max=None, method="min"):
        self.q = q
        self.j_min = j_min
        self.j_max = j_max
        self.method = method

    def fit(self, X, y=None):
        q = check_q(self.q)
        j_min, j_max = check_levels(self.j_min, self.j_max)
        if self.method not in ("min", "slope"):
            raise ValueError(f"unknown method {self.method!r}")
        tree = check_mass_tree(X, j_max)
        self.curve_ = tau_curve(tree, q, j_min, j_max, self.method)
        self.q_ = self.curve_.abscissa
        self.tau_ = self.curve_.values
        self.dim_ = tree.dim
        return self

    def transform(self, X):
        """Legendre transform values at the exponents in X."""
        check_is_fitted(self, "curve_")
        h = np.atleast_1d(np.asarray(X, dtype=float))
        return np.array([legendre(self.curve_, float(v)).value for v in h.ravel()]).reshape(h.shape)

    def legendre_details(self, h):
        check_is_fitted(self, "curve_")
        return [legendre(self.curve_, float(v)) for v in np.atleast_1d(h)]


class CoarseSpectrum(BaseEstimator):
    """Histogram of level-j cube exponents, f_j(h) = log2 N_j(h) / j."""

    def __init__(self, j=8, bin_width=0.05):
        self.j = j
        self.bin_width = bin_width

    def fit(self, X, y=None):
        if self.bin_width <= 0:
            raise ValueError("bin_width must be positive")
        tree = check_mass_tree(X, self.j)
        self.curve_: SpectrumCurve = coarse_spectrum(tree, self.j, self.bin_width)
        self.h_ = self.curve_.abscissa
        self.f_ = self.curve_.values
        return self


class LocalExponent(BaseEstimator, TransformerMixin):
    """Maps points x to the level-j cube exponent log2 mu(I_j(x)) / (-j)."""

    def __init__(self, j=8):
        self.j = j

    def fit(self, X, y=None):
        if self.j < 1:
            raise ValueError("j must be at least 1")
        self.tree_ = check_mass_tree(X, self.j)
        return self

    def transform(self, X):
        check_is_fitted(self, "tree_")
        return np.array([cube_exponent(self.tree_, as_point(x), self.j) for x in X])
