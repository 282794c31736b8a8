"""Multifractal analysis of probability measures on dyadic grids of [0,1]^d.

Masses are exact rationals wherever the size allows; spectra are computed
in the log2 domain. Submodules:

- ``dyadic``: cubes, balls and the sup metric
- ``measures`` and ``measure_file``: mass trees, atomic measures, file I/O
- ``constructions``: Lebesgue, grid, cascade and approximant measures
- ``spectra`` and ``estimators``: L^q spectrum, Legendre transform, coarse spectrum
- ``transport``: exact optimal transport distance
- ``cantor``: Cantor measures supported on approximation sets
"""

__version__ = "0.1.0"
