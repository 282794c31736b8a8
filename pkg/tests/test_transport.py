import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mfdyadic.constructions import GridWeights, mu_n, nu_from_grid, pi_j
from mfdyadic.dyadic import sup_distance
from mfdyadic.measures import AtomicMeasure
from mfdyadic.transport import (
    brute_force_distance,
    check_mu_nu_distance,
    distance,
    distance_1d,
    in_generic_ball,
    lipschitz_witness,
)


@st.composite
def atomic(draw, dim=1, max_atoms=8, denom=16):
    k = draw(st.integers(1, max_atoms))
    locs = [tuple(F(draw(st.integers(0, denom)), denom) for _ in range(dim)) for _ in range(k)]
    raw = [draw(st.integers(1, 9)) for _ in range(k)]
    return AtomicMeasure([(x, F(w, sum(raw))) for x, w in zip(locs, raw)], dim=dim)


def check_plan(mu, nu, plan):
    rows = [F(0)] * len(mu)
    cols = [F(0)] * len(nu)
    cost = F(0)
    for i, j, x in plan.flows:
        assert x >= 0
        rows[i] += x
        cols[j] += x
        cost += x * sup_distance(mu.locations[i], nu.locations[j])
    assert rows == mu.weights and cols == nu.weights
    assert cost == plan.cost


def test_examples():
    x, y = (F(1, 5), F(1, 3)), (F(7, 8), F(0))
    assert distance(AtomicMeasure.dirac(x), AtomicMeasure.dirac(y))[0] == sup_distance(x, y)
    half = AtomicMeasure.dirac((F(1, 2),))
    assert distance(pi_j(1, 1), half)[0] == F(1, 4)
    assert distance_1d(pi_j(1, 1), half) == F(1, 4)
    assert distance(pi_j(2, 2), pi_j(2, 2))[0] == 0
    assert distance_1d(AtomicMeasure.dirac((F(0),)), AtomicMeasure.dirac((F(1),))) == 1


def test_grid_versus_finer_corners():
    coarse = nu_from_grid(GridWeights(2, 1, tuple([F(1, 4)] * 4)))
    fine = nu_from_grid(GridWeights(3, 1, tuple([F(1, 8)] * 8)))
    assert distance(coarse, fine)[0] == distance_1d(coarse, fine) == F(1, 16)


def test_errors():
    with pytest.raises(ValueError):
        distance(pi_j(1, 1), pi_j(2, 1))
    with pytest.raises(ValueError):
        distance_1d(pi_j(2, 1), pi_j(2, 1))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 2), st.data())
def test_plan_invariants_and_dual_witness(d, data):
    mu, nu = data.draw(atomic(d)), data.draw(atomic(d))
    value, plan = distance(mu, nu)
    assert plan.exact and 0 <= value <= 1
    check_plan(mu, nu, plan)
    assert plan.duality_gap == 0
    w = lipschitz_witness(mu, nu, plan)
    assert w.lipschitz and w.gap == 0


@settings(max_examples=60, deadline=None)
@given(atomic(max_atoms=64, denom=256), atomic(max_atoms=64, denom=256))
def test_matches_cdf_formula(mu, nu):
    assert distance(mu, nu)[0] == distance_1d(mu, nu)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 2), st.data())
def test_matches_vertex_enumeration(d, data):
    mu, nu = data.draw(atomic(d, max_atoms=4)), data.draw(atomic(d, max_atoms=4))
    assert distance(mu, nu)[0] == brute_force_distance(mu, nu)


def test_numeric_route_agrees():
    rng = random.Random(3)

    def rm(k):
        raw = [rng.randint(1, 9) for _ in range(k)]
        return AtomicMeasure([((F(rng.randint(0, 1024), 1024), F(rng.randint(0, 1024), 1024)),
                               F(w, sum(raw))) for w in raw])

    mu, nu = rm(40), rm(40)
    exact, _ = distance(mu, nu)
    approx, plan = distance(mu, nu, exact_cap=0)
    assert not plan.exact and plan.duality_gap <= 1e-9
    assert abs(float(exact) - approx) <= 1e-9


def test_mu_nu_report_examples():
    r = check_mu_nu_distance(GridWeights(1, 1, (F(1, 3), F(2, 3))), 1)
    assert r.identity_residual == 0 and r.bound == F(1, 2) and r.passed
    # brute force over vertex plans on the same instance
    mu = mu_n(GridWeights(1, 1, (F(1, 3), F(2, 3))), 1)
    assert r.rho_mu_nu == brute_force_distance(mu.to_atomic(), mu.nu, max_cells=16)


def test_generic_ball_membership():
    mu = mu_n(GridWeights(1, 1, (F(1, 2), F(1, 2))), 1)
    assert in_generic_ball(mu.to_atomic(), mu)
    assert not in_generic_ball(mu.nu, mu)
