import itertools
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mfdyadic.constructions import (
    ApproximantMeasure,
    CascadeSpec,
    GridWeights,
    J_of,
    cascade,
    check_floor_inequality,
    generic_ball_radius,
    lebesgue,
    mu_n,
    nu_from_grid,
    parse_generator,
    pi_j,
)
from mfdyadic.dyadic import CubeIndex, SupBall
from mfdyadic.measures import AtomicMeasure, MassTree, cube_mass, from_atoms


def random_grid(rng, j, d):
    raw = [rng.randint(1, 12) for _ in range(1 << (j * d))]
    return GridWeights(j, d, tuple(F(w, sum(raw)) for w in raw))


def test_lebesgue_and_pi():
    t = lebesgue(2, 3)
    assert cube_mass(t, CubeIndex(0, (0, 0))) == 1
    assert cube_mass(t, CubeIndex(1, (1, 0))) == F(1, 4)
    assert sum(t.level(3).values()) == 1
    assert pi_j(1, 1).atoms == (((F(1, 4),), F(1, 2)), ((F(3, 4),), F(1, 2)))
    p = pi_j(2, 1)
    assert len(p) == 4 and set(p.weights) == {F(1, 4)}


def test_nu_from_grid():
    nu = nu_from_grid(GridWeights(1, 1, (F(1, 3), F(2, 3))))
    assert nu.atoms == (((F(0),), F(1, 3)), ((F(1, 2),), F(2, 3)))
    with pytest.raises(ValueError):
        GridWeights(1, 1, (F(1, 2), F(1, 3)))
    with pytest.raises(ValueError):
        GridWeights(1, 1, (F(0), F(1)))
    g = GridWeights(2, 2, tuple([F(1, 16)] * 16))
    assert GridWeights.from_measure(nu_from_grid(g)) == g


def test_J_of_examples():
    assert J_of(1, 1) == 2
    assert J_of(2, 3) == 36
    assert J_of(1, 2) == 8


def test_mu_n_worked_example():
    mu = mu_n(GridWeights(1, 1, (F(1, 3), F(2, 3))), 1)
    assert mu.level == 2 and mu.blend == F(1, 4)
    explicit, background, count = mu.level_masses(2)
    assert explicit[(0,)] == F(5, 16)
    assert background == F(1, 16) and count == 2
    atomic = mu.to_atomic()
    assert sum(atomic.weights) == 1
    assert from_atoms(atomic, 2).level(2) == {**{(k,): background for k in (1, 3)}, **explicit}


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 2), st.integers(1, 3), st.integers(0, 10 ** 6))
def test_structured_matches_materialized(d, n, seed):
    rng = random.Random(seed)
    if d == 2 and n > 1:
        n = 1
    mu = mu_n(random_grid(rng, 1, d), n)
    atomic = mu.to_atomic()
    assert len(atomic) == mu.n_atoms
    for j in range(mu.level + 1):
        explicit, background, _ = mu.level_masses(j)
        direct, _, _ = atomic.level_masses(j)
        for k in itertools.product(range(1 << j), repeat=d):
            assert direct.get(k, 0) == explicit.get(k, background)
    for _ in range(10):
        c = tuple(F(rng.randint(0, 64), 64) for _ in range(d))
        b = SupBall(c, F(rng.randint(1, 32), 64), closed=rng.random() < 0.5)
        assert mu.ball_mass(b) == atomic.ball_mass(b)
    assert mu.mass_tree(mu.level) == from_atoms(atomic, mu.level)


def test_floor_examples():
    mu = mu_n(GridWeights(1, 1, (F(1, 3), F(2, 3))), 1)
    r = check_floor_inequality(mu, 1, 2)
    assert r.passed and r.min_mass == F(1, 16)
    assert r.margin_log2 == 0
    assert check_floor_inequality(lebesgue(2, 4), 3, 4).passed
    delta = AtomicMeasure.dirac((F(1, 3),))
    bad = check_floor_inequality(delta, 1, 2)
    assert not bad.passed and bad.n_violations == 3
    with pytest.raises(ValueError):
        check_floor_inequality(mu, 0, 2)


def test_floor_rejects_log2_trees():
    with pytest.raises(ValueError):
        check_floor_inequality(lebesgue(1, 3, mode="log2"), 1, 3)


def test_cascade():
    t = cascade(CascadeSpec(F(1, 2), F(1, 2), 5))
    assert t == lebesgue(1, 5)
    t = cascade(CascadeSpec(F(1, 4), F(3, 4), 4))
    assert cube_mass(t, CubeIndex(2, (3,))) == F(9, 16)
    for j in range(5):
        assert sum(t.level(j).values()) == 1
    with pytest.raises(ValueError):
        CascadeSpec(F(1, 2), F(1, 3), 2)


def test_generic_ball_radius():
    assert generic_ball_radius(1, 2, 1) == -20
    assert generic_ball_radius(1, 2, 2) == -24
    assert generic_ball_radius(1, 3, 1) < generic_ball_radius(1, 2, 1)


def test_parse_generator():
    assert parse_generator("pi j=2 d=1") == pi_j(1, 2)
    assert isinstance(parse_generator("lebesgue d=2 J=3"), MassTree)
    assert parse_generator("cascade m0=1/4 J=3") == cascade(CascadeSpec(F(1, 4), F(3, 4), 3))
    assert parse_generator("grid j=1 d=1 weights=1/3,2/3") == nu_from_grid(
        GridWeights(1, 1, (F(1, 3), F(2, 3))))
    a = parse_generator("mun n=2 j=1 d=1 weights=1/3,2/3")
    b = parse_generator('mun n=2 grid="j=1 d=1 weights=1/3,2/3"')
    assert isinstance(a, ApproximantMeasure) and a.level == b.level == 4 and a.nu == b.nu
    for bad in ["", "pi j=2", "pi j=2 d=1 x=3", "blob a=1", "pi j"]:
        with pytest.raises(ValueError):
            parse_generator(bad)
