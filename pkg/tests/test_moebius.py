import cmath
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from manhattan_workbench import moebius as mb
from manhattan_workbench.errors import AmbiguousClass, NoBoundaryFixedPoints, NotHyperbolic
from manhattan_workbench.moebius import Isometry, IsometryClass

from conftest import random_boundary, random_hyperbolic, random_isometry, random_point

D = Isometry(2.0, 0.0, 0.0, 0.5)
T = Isometry(1.0, 1.0, 0.0, 1.0)
R = Isometry(0.0, 1.0, -1.0, 0.0)


def limit_busemann(xi, x, y, dps=60):
    """B_ξ(x,y) = lim d(x,z) − d(y,z) evaluated in high precision near ξ."""
    with mp.workdps(dps):
        x, y = mp.mpc(x.real, x.imag), mp.mpc(y.real, y.imag)
        z = mp.mpc(0, mp.mpf(10) ** 20) if math.isinf(xi) else mp.mpc(xi, mp.mpf(10) ** -20)

        def d(p, q):
            return mp.acosh(1 + abs(p - q) ** 2 / (2 * p.imag * q.imag))

        return float(d(x, z) - d(y, z))


def test_compose_examples():
    assert mb.compose(mb.IDENTITY, D).almost_equal(D)
    assert mb.compose(D, mb.inverse(D)).is_identity()
    assert mb.compose(D, T).almost_equal(Isometry(2.0, 2.0, 0.0, 0.5))


def test_sign_normalization():
    g = Isometry(-2.0, 0.0, 0.0, -0.5)
    assert g.to_list() == [2.0, 0.0, 0.0, 0.5]
    assert Isometry(0.0, -1.0, 1.0, 0.0).to_list() == [0.0, 1.0, -1.0, 0.0]


def test_dist_examples():
    assert mb.dist(1j, 2j) == pytest.approx(math.log(2), abs=1e-12)
    assert mb.dist(1j, 2 + 1j) == pytest.approx(math.acosh(3), abs=1e-12)
    c = 2.0
    assert mb.dist(1j, 2 + 1j) == pytest.approx(math.log((math.sqrt(8) + c) / (math.sqrt(8) - c)), abs=1e-12)
    assert mb.dist(0.3 + 0.7j, 0.3 + 0.7j) == 0.0


def test_classify_examples():
    assert mb.classify(D) is IsometryClass.HYPERBOLIC
    assert mb.classify(T) is IsometryClass.PARABOLIC
    assert mb.classify(R) is IsometryClass.ELLIPTIC
    assert mb.classify(mb.IDENTITY) is IsometryClass.IDENTITY
    near = Isometry(1.0 + 1e-10, 1.0, 0.0, 1.0 / (1.0 + 1e-10))
    with pytest.raises(AmbiguousClass):
        mb.classify(near, strict=True)


def test_translation_length_examples():
    assert mb.translation_length(D) == pytest.approx(2 * math.log(2), abs=1e-12)
    with pytest.raises(NotHyperbolic):
        mb.translation_length(T)


def test_translation_length_is_min_displacement():
    rng = np.random.default_rng(5)
    for _ in range(20):
        g = random_hyperbolic(rng)
        att, rep = mb.fixed_points(g)
        # sample the axis: the geodesic between the fixed points
        w = Isometry(1.0, 0.0, 0.0, 1.0)
        if math.isinf(att) or math.isinf(rep):
            continue
        c, r = (att + rep) / 2, abs(att - rep) / 2
        ts = np.linspace(1e-3, math.pi - 1e-3, 20001)
        pts = c + r * np.exp(1j * ts)
        disp = min(mb.dist(complex(p), mb.act(g, complex(p))) for p in pts[::50])
        fine = min(mb.dist(complex(p), mb.act(g, complex(p))) for p in pts)
        assert fine == pytest.approx(mb.translation_length(g), abs=1e-6)
        assert disp >= mb.translation_length(g) - 1e-10


def test_fixed_points_examples():
    assert mb.fixed_points(D) == (math.inf, 0.0)
    assert mb.fixed_points(T) == (math.inf,)
    with pytest.raises(NoBoundaryFixedPoints):
        mb.fixed_points(R)


def test_attracting_point_is_limit_of_iterates():
    rng = np.random.default_rng(7)
    for _ in range(50):
        g = random_hyperbolic(rng)
        z = 1j
        for _ in range(60):
            z = mb.act(g, z)
            if abs(z) > 1e150:
                break
        att = mb.attracting_fixed_point(g)
        w = mb.cayley(z) if abs(z) < 1e150 else 1j
        assert abs(w - mb.cayley_boundary(att)) < 1e-8


def test_cayley_examples():
    assert mb.cayley(1j) == 0
    assert abs(mb.cayley(2j) - 1j / 3) < 1e-15
    assert mb.cayley_boundary(0.0) == pytest.approx(-1j)
    assert abs(mb.angle_to_boundary(mb.boundary_angle(0.0))) < 1e-12
    assert mb.angle_to_boundary(mb.boundary_angle(math.inf)) == math.inf
    for xi in np.random.default_rng(4).normal(0, 5, 100):
        assert mb.angle_to_boundary(mb.boundary_angle(xi)) == pytest.approx(xi, rel=1e-12, abs=1e-12)
    rng = np.random.default_rng(0)
    for _ in range(100):
        z = random_point(rng)
        w = mb.cayley(z)
        assert abs(w) < 1
        assert abs(mb.cayley_inv(w) - z) < 1e-12 * max(1.0, abs(z))


def test_busemann_examples():
    assert mb.busemann(math.inf, 1j, 2j) == pytest.approx(math.log(2), abs=1e-12)
    assert limit_busemann(math.inf, 1j, 2j) == pytest.approx(math.log(2), abs=1e-6)
    assert mb.busemann(0.4, 0.1 + 2j, 0.1 + 2j) == 0.0


def test_busemann_matches_limit_definition():
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(1000):
        xi, x, y = random_boundary(rng), random_point(rng), random_point(rng)
        worst = max(worst, abs(mb.busemann(xi, x, y) - limit_busemann(xi, x, y)))
    assert worst < 1e-6


def test_disk_derivative_formula():
    rng = np.random.default_rng(2)
    for _ in range(300):
        g = random_isometry(rng)
        xi = random_boundary(rng)
        if math.isinf(xi):
            continue
        lhs = mb.disk_derivative(g, xi)
        rhs = math.exp(mb.busemann(xi, 1j, mb.act(mb.inverse(g), 1j)))
        assert lhs == pytest.approx(rhs, rel=1e-8)


def test_disk_derivative_against_numerical_derivative():
    rng = np.random.default_rng(3)
    for _ in range(50):
        g = random_isometry(rng, scale=1.0)
        phi = float(rng.uniform(0.1, 2 * math.pi - 0.1))
        xi = mb.angle_to_boundary(phi)
        h = 1e-6
        f = lambda p: mb.boundary_angle(mb.act_boundary(g, mb.angle_to_boundary(p)))
        step = (f(phi + h) - f(phi - h) + math.pi) % (2 * math.pi) - math.pi  # unwrap a 2π jump
        num = step / (2 * h)
        assert abs(num) == pytest.approx(mb.disk_derivative(g, xi), rel=1e-5)


finite = st.floats(-5, 5, allow_nan=False)
pos = st.floats(0.05, 5)
points = st.builds(complex, finite, pos)
boundary = st.one_of(finite, st.just(math.inf))
entries = st.tuples(st.floats(0.2, 3), st.floats(-3, 3), st.floats(-3, 3))


def make(e):
    a, b, c = e
    return Isometry(a, b, c, (1 + b * c) / a)


@given(boundary, points, points, points)
def test_busemann_cocycle(xi, x, y, z):
    assert abs(mb.busemann(xi, x, y) + mb.busemann(xi, y, z) - mb.busemann(xi, x, z)) < 1e-10 * (1 + mb.dist(x, z))


@given(boundary, points, points, entries)
def test_busemann_equivariance(xi, x, y, e):
    g = make(e)
    lhs = mb.busemann(mb.act_boundary(g, xi), mb.act(g, x), mb.act(g, y))
    assert abs(lhs - mb.busemann(xi, x, y)) < 1e-9 * (1 + mb.dist(x, y) + mb.dist(x, mb.act(g, x)))


@given(boundary, points, points)
def test_busemann_bounded_by_distance(xi, x, y):
    assert mb.busemann(xi, x, y) <= mb.dist(x, y) + 1e-10


@given(points, points, points)
def test_triangle_inequality(x, y, z):
    assert mb.dist(x, z) <= mb.dist(x, y) + mb.dist(y, z) + 1e-10


@given(entries, entries)
def test_translation_length_conjugation_invariant(e1, e2):
    g, w = make(e1), make(e2)
    if mb.classify(g) is not IsometryClass.HYPERBOLIC or abs(g.trace) < 2.01:
        return
    h = mb.compose(mb.compose(w, g), mb.inverse(w))
    assert abs(mb.translation_length(h) - mb.translation_length(g)) < 1e-10 * max(1.0, mb.translation_length(g)) * (1 + abs(w.trace)) ** 2


@given(entries, entries, entries)
def test_compose_associative_and_unimodular(e1, e2, e3):
    f, g, h = make(e1), make(e2), make(e3)
    left = mb.compose(mb.compose(f, g), h)
    right = mb.compose(f, mb.compose(g, h))
    m = left.matrix
    assert abs(np.linalg.det(m) - 1) < 1e-12 * max(1.0, float(np.sum(m * m)))
    assert np.allclose(left.matrix, right.matrix, rtol=1e-10, atol=1e-10 * float(np.abs(m).max()))


def test_power_busemann_shift_matches_high_precision():
    rng = np.random.default_rng(11)
    for _ in range(100):
        g = random_hyperbolic(rng)
        m = int(rng.integers(-15, 16)) or 1
        xi = float(rng.normal(0, 2))
        with mp.workdps(80):
            M = mp.matrix([[g.m11, g.m12], [g.m21, g.m22]]) ** m
            a, b, c, d = M[0, 0], M[0, 1], M[1, 0], M[1, 1]
            z = (a * 1j + b) / (c * 1j + d)
            ref = float(mp.log(z.imag) - mp.log(abs(z - xi) ** 2) + mp.log(1 + xi * xi))
        # B_ξ(gᵐo, o) with o = i
        got = mb.power_busemann_shift(xi, g, m, 1j)
        assert got == pytest.approx(-ref, abs=1e-9 * max(1.0, abs(ref)))
