"""Acceptance suite: one test per criterion, each with its runtime budget.

The conftest prints one ACCEPTANCE line per criterion at the end of the run.
"""

import contextlib
import itertools
import math
import os
import random
import subprocess
import sys
import time
from fractions import Fraction as F

import numpy as np
import pytest

from mfdyadic import cantor as cl
from mfdyadic.constructions import (
    CascadeSpec,
    GridWeights,
    cascade,
    check_floor_inequality,
    lebesgue,
    mu_n,
    pi_j,
)
from mfdyadic.dyadic import SupBall, sup_distance
from mfdyadic.measures import AtomicMeasure, from_atoms
from mfdyadic.spectra import coarse_spectrum, cube_exponent, legendre, q_grid, tau_curve, tau_hat
from mfdyadic.transport import EXACT_CAP, brute_force_distance, distance, distance_1d
from oracles import brute_delta, scan_delta


@contextlib.contextmanager
def budget(seconds):
    start = time.perf_counter()
    yield
    elapsed = time.perf_counter() - start
    assert elapsed < seconds, f"took {elapsed:.1f} s, budget {seconds} s"


def random_weights(rng, j, d):
    raw = [rng.randint(1, 20) for _ in range(1 << (j * d))]
    return GridWeights(j, d, tuple(F(w, sum(raw)) for w in raw))


def random_atomic(rng, dim, max_atoms, denom=32):
    k = rng.randint(1, max_atoms)
    raw = [rng.randint(1, 9) for _ in range(k)]
    return AtomicMeasure([(tuple(F(rng.randint(0, denom), denom) for _ in range(dim)),
                           F(w, sum(raw))) for w in raw], dim=dim)


def floor_holds(mass: F, n: int, J: int, d: int) -> bool:
    """mass >= 2^{-J (d + 1/n)}, i.e. mass^n 2^{J (d n + 1)} >= 1."""
    return mass.numerator ** n << (J * (d * n + 1)) >= mass.denominator ** n


@pytest.mark.acceptance(1)
def test_floor_inequality():
    rng = random.Random(101)
    with budget(10):
        for d, j, n in itertools.product((1, 2, 3), (1, 2), (1, 2, 3)):
            for _ in range(5):
                mu = mu_n(random_weights(rng, j, d), n)
                J = mu.level
                assert J == 2 * n * j * j
                report = check_floor_inequality(mu, n, J)
                assert report.passed and report.n_violations == 0
                # every cube is either an explicit one or carries the background mass
                explicit, background, n_background = mu.level_masses(J)
                assert len(explicit) + n_background == 1 << (d * J)
                assert all(floor_holds(m, n, J, d) for m in explicit.values())
                assert n_background == 0 or floor_holds(background, n, J, d)


@pytest.mark.acceptance(2)
def test_distance_identity_and_bound():
    rng = random.Random(202)
    with budget(60):
        for n in (1, 2):
            for _ in range(3):
                mu = mu_n(random_weights(rng, 1, 1), n)
                J = mu.level
                blend = F(1, 2 ** (J // n))
                atoms = mu.to_atomic()
                assert len(atoms) + len(mu.nu) <= EXACT_CAP
                rho_mu_nu, plan = distance(atoms, mu.nu)
                rho_nu_pi, plan_pi = distance(mu.nu, pi_j(1, J))
                assert plan.exact and plan_pi.exact
                # cross-check both values against the CDF formula on the line
                assert rho_mu_nu == distance_1d(atoms, mu.nu)
                assert rho_nu_pi == distance_1d(mu.nu, pi_j(1, J))
                assert rho_mu_nu - blend * rho_nu_pi == 0
                assert rho_mu_nu <= 2 * blend


def corpus():
    rng = random.Random(303)
    trees = [lebesgue(1, 8), lebesgue(2, 5)]
    trees += [cascade(CascadeSpec(m0, 1 - m0, 8)) for m0 in (F(1, 4), F(1, 3), F(1, 10))]
    trees += [from_atoms(pi_j(d, j), j + 2) for d, j in ((1, 3), (2, 2))]
    for _ in range(20):
        d = rng.randint(1, 2)
        trees.append(from_atoms(random_atomic(rng, d, 12, denom=64), rng.randint(2, 6)))
    for d, j, n in ((1, 1, 1), (1, 1, 2), (2, 1, 1), (1, 2, 1)):
        trees.append(mu_n(random_weights(rng, j, d), n).mass_tree())
    return trees


@pytest.mark.acceptance(3)
def test_tau_bounds():
    qs = [float(q) for q in q_grid(F(1, 20), F(19, 20), F(1, 20))]
    with budget(30):
        for t in corpus():
            assert sum(t.level(t.depth).values()) == 1
            for j in range(1, t.depth + 1):
                for q in qs:
                    assert tau_hat(t, j, q) >= t.dim * (q - 1) - 1e-9
        rng = random.Random(304)
        for d, j, n in ((1, 1, 1), (1, 1, 2), (2, 1, 1), (1, 2, 1), (3, 1, 1)):
            for _ in range(3):
                mu = mu_n(random_weights(rng, j, d), n)
                t, J = mu.mass_tree(), mu.level
                for q in qs:
                    val = tau_hat(t, J, q)
                    assert d * (q - 1) - 1e-9 <= val <= d * (q - 1) + q / n + 1e-9


@pytest.mark.acceptance(4)
def test_cascade_oracle():
    qs = q_grid(-3, 3, F(1, 100))
    with budget(30):
        for m0 in (F(1, 4), F(1, 3)):
            spec = CascadeSpec(m0, 1 - m0, 14)
            t = cascade(spec, mode="log2")
            for j in range(1, 15):
                got = np.array([tau_hat(t, j, float(q)) for q in qs])
                want = np.array([spec.tau(float(q)) for q in qs])
                assert np.max(np.abs(got - want)) <= 1e-9
            a, b = float(m0), float(1 - m0)
            h = -(a * math.log2(a) + b * math.log2(b))
            # numerical derivative of the closed form as an independent check of h
            assert h == pytest.approx((spec.tau(1 + 1e-6) - spec.tau(1 - 1e-6)) / 2e-6, abs=1e-6)
            r = legendre(tau_curve(t, q_grid(), 14, 14), h)
            assert abs(r.value - h) <= 1e-6
            assert abs(r.attained_q - 1) <= 0.01 + 1e-12


@pytest.mark.acceptance(5)
def test_lebesgue_identities():
    rng = random.Random(505)
    qs = q_grid()
    with budget(10):
        for d in (1, 2):
            t = lebesgue(d, 10, mode="log2")
            for j in range(1, 11):
                got = np.array([tau_hat(t, j, float(q)) for q in qs])
                assert np.max(np.abs(got - d * (qs - 1))) <= 1e-12
                curve = coarse_spectrum(t, j, 0.05)
                assert len(curve.abscissa) == 1
                assert abs(curve.abscissa[0] - d) <= 1e-12 and abs(curve.values[0] - d) <= 1e-12
                for _ in range(20):
                    x = tuple(F(rng.randint(0, 1 << 12), 1 << 12) for _ in range(d))
                    assert abs(cube_exponent(t, x, j) - d) <= 1e-12


def branching_configs():
    for d, theta in itertools.product((1, 2), (F(3, 2), F(2))):
        for J1, J2 in itertools.combinations(range(1, 13), 2):
            if (theta * J1).denominator == 1 and (theta * J2).denominator == 1:
                yield cl.CantorSchedule(d, theta, (J1, J2))


@pytest.mark.acceptance(6)
def test_branching_count_oracle():
    rng = random.Random(606)
    n_bounds = 0
    with budget(60):
        for s in branching_configs():
            root = cl.CantorNode.root()
            assert cl.branching_count(s, root) == brute_delta(s, root)
            parents = [cl.random_node(s, 1, rng) for _ in range(50)]
            seen = {}
            for node in parents:
                if node.address not in seen:
                    seen[node.address] = brute_delta(s, node)
                want = seen[node.address]
                if want == 0:
                    with pytest.raises(cl.DegenerateScheduleError):
                        cl.branching_count(s, node)
                    continue
                got = cl.branching_count(s, node)
                assert got == want
                if s.levels[1] >= 4 * s.theta * s.levels[0]:
                    n_bounds += 1
                    # |I| is the parent diameter 2^{-theta J_1}
                    scale = F(2) ** (s.dim * (s.levels[1] - s.theta_level(1)))
                    assert scale / 2 <= got <= 2 * scale
                    assert cl.delta_bounds_hold(s, 2, got) == (True, True)
    assert n_bounds > 0


MASS_SCHEDULES = [
    (1, 2, (2, 6)), (1, 2, (1, 4, 10)), (1, F(3, 2), (2, 6, 12)), (2, 2, (1, 4, 10)),
    (2, F(3, 2), (2, 6)), (1, 2, (2, 8, 60)), (1, 2, (4, 801)), (2, 2, (1, 8, 64)),
]


def child_count_oracle(s, node):
    if s.level(node.generation + 1) <= 14:
        return brute_delta(s, node)
    return scan_delta(s, node)


@pytest.mark.acceptance(7)
def test_cantor_mass_identities():
    rng = random.Random(707)
    n_gated = 0
    with budget(60):
        for d, theta, levels in MASS_SCHEDULES:
            s = cl.CantorSchedule(d, theta, levels)
            report = cl.validate_schedule(s)
            assert report.construction_valid
            for p in range(1, s.P + 1):
                assert cl.total_mass(s, p) == 1
                if cl.generation_size(s, p) <= 4096:
                    nodes = list(cl.iter_nodes(s, p))
                    assert sum(cl.node_mass(s, v).exact for v in nodes) == 1
                else:
                    nodes = [cl.random_node(s, p, rng) for _ in range(30)]
                for node in nodes[:200]:
                    product = F(1)
                    for g in range(p):
                        ancestor = cl.CantorNode(g, node.address[:g])
                        product /= child_count_oracle(s, ancestor)
                    assert cl.node_mass(s, node).exact == product
                if not report.mass_bounds_guaranteed(p):
                    continue
                n_gated += 1
                rows = cl.verify_mass_bounds(s, p, samples=30, seed=p, report=report)
                assert rows.I_status == cl.PASS
                J = s.level(p)
                for row in rows.rows:
                    D = 1
                    for delta in row.deltas:
                        D *= delta
                    # d/theta (1 - 2/p) <= log2 m / log2 |I| <= d/theta (1 + 1/p), with
                    # m = 1/D and |I| = 2^{-theta J}, cleared of logarithms
                    assert D ** p <= 1 << (d * J * (p + 1))
                    assert p < 2 or D ** p >= 1 << (d * J * (p - 2))
    assert n_gated > 0


@pytest.mark.acceptance(8)
def test_ball_mass_floor():
    rng = random.Random(808)
    with budget(10):
        for n, theta in itertools.product((1, 2), (F(3, 2), F(2))):
            for _ in range(3):
                mu = mu_n(random_weights(rng, 1, 1), n)
                d, J = 1, mu.level
                floor = F(1, 2 ** (J // n + d * J))
                a = cl.ApproxSet(J, theta)
                centres = list(cl.approx_centers(d, a))
                assert len(centres) == 1 << (d * J)
                report = cl.ball_mass_lower_bound_check(mu, theta, F(1, 2), centres)
                assert report.n_skipped == 0 and report.passed
                for x in centres:
                    mass = mu.ball_mass(SupBall(x, 2 * a.radius, closed=True))
                    assert mass >= floor


@pytest.mark.acceptance(9)
def test_transport_metric():
    rng = random.Random(909)
    with budget(120):
        for i in range(200):
            d = 1 + i % 2
            a, b, c = (random_atomic(rng, d, 8) for _ in range(3))
            ab, ba = distance(a, b)[0], distance(b, a)[0]
            assert ab == ba
            assert distance(a, a)[0] == 0
            assert (ab == 0) == (a == b)
            assert ab <= distance(a, c)[0] + distance(c, b)[0]
        for i in range(60):
            d = 1 + i % 2
            a, b = random_atomic(rng, d, 4), random_atomic(rng, d, 4)
            assert distance(a, b)[0] == brute_force_distance(a, b)
        for _ in range(100):
            a, b = random_atomic(rng, 1, 30, denom=256), random_atomic(rng, 1, 30, denom=256)
            assert distance_1d(a, b) == distance(a, b)[0]
        # a one-atom pair has the sup distance as its value
        x, y = (F(1, 7), F(2, 3)), (F(5, 9), F(0))
        assert distance(AtomicMeasure.dirac(x), AtomicMeasure.dirac(y))[0] == sup_distance(x, y)


CLI_RUNS = [
    ["generate", "--spec", "cascade m0=1/3 J=8", "--mode", "log2", "-o", "c.mfm"],
    ["tau", "-i", "c.mfm", "--q", "-2:2:0.25", "--j", "4:8", "-o", "tau.csv"],
    ["legendre", "-i", "c.mfm", "--j", "8:8", "--h", "0.6:1.6:0.1", "-o", "leg.csv"],
    ["coarse", "-i", "c.mfm", "--j", "8", "--eps", "0.02", "-o", "coarse.csv"],
    ["exponent", "-i", "c.mfm", "--j", "6", "--random", "7", "-o", "exp.csv"],
    ["generate", "--spec", "pi j=3 d=1", "-o", "pi.mfm"],
    ["generate", "--spec", "grid j=1 d=1 weights=1/3,2/3", "-o", "nu.mfm"],
    ["distance", "-i", "pi.mfm", "nu.mfm", "--plan", "-o", "dist.txt"],
    ["verify-mun", "--d", "1", "--jn", "1", "--n", "2", "-o", "mun.txt"],
    ["cantor", "mass", "--theta", "2", "--levels", "2,6", "--p", "2", "-o", "mass.txt"],
    ["cantor", "verify-bounds", "--theta", "2", "--levels", "2,6", "--csv", "bounds.csv"],
    ["cantor", "verify-borel", "--theta", "2", "--levels", "1,8,40", "--random-boxes", "12"],
]


def run_all(workdir):
    env = dict(os.environ, MFDYADIC_OUTPUT_DIR=str(workdir))
    transcript = []
    for argv in CLI_RUNS:
        proc = subprocess.run([sys.executable, "-m", "mfdyadic", "--seed", "3", *argv],
                              cwd=workdir, env=env, capture_output=True, timeout=120)
        assert proc.returncode == 0, proc.stderr.decode()
        transcript.append(proc.stdout)
    files = {p.name: p.read_bytes() for p in sorted(workdir.iterdir())}
    return transcript, files


@pytest.mark.acceptance(10)
def test_cli_determinism(tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    first.mkdir()
    second.mkdir()
    out1, files1 = run_all(first)
    out2, files2 = run_all(second)
    assert out1 == out2
    assert files1.keys() == files2.keys() and len(files1) >= 9
    for name in files1:
        assert files1[name] == files2[name], name
