import math
import warnings

import numpy as np
import pytest

from manhattan_workbench import manhattan as mh
from manhattan_workbench.coding import TruncationParams
from manhattan_workbench.errors import InsufficientPoints, PrecisionFloorWarning
from manhattan_workbench.pressure import WeightedPotentialQuery, pressure_estimate

pytestmark = pytest.mark.filterwarnings("ignore::manhattan_workbench.errors.PrecisionFloorWarning")


def test_root_examples(F1):
    r = mh.bowen_root(F1, 1.0, 0.0)
    assert r.t > 0.5
    assert r.bracket[0] <= r.t <= r.bracket[1]
    assert r.residual <= 2 * r.pressure_error
    assert mh.entropy(F1, 1).t == r.t


@pytest.mark.parametrize("a,b", [(1, 0), (0, 1), (1, 1), (2, 1), (0.3, 1.7)])
def test_root_above_phase_boundary(F1F3, a, b):
    r = mh.bowen_root(F1F3, a, b)
    assert r.t > 1 / (2 * (a + b))
    est = pressure_estimate(F1F3, WeightedPotentialQuery(a, b, r.t))
    assert abs(est.value) <= 2 * est.total_error


@pytest.mark.parametrize("lam", [0.5, 2.0, 10.0])
def test_homogeneity(F1F3, lam):
    r = mh.bowen_root(F1F3, 1.0, 0.6)
    rl = mh.bowen_root(F1F3, lam, 0.6 * lam)
    assert abs(rl.t * lam - r.t) <= 1e-9


def test_classical_root_has_no_phase_floor(F4):
    r = mh.bowen_root(F4, 1.0, 0.0)
    assert 0 < r.t < 1


def test_precision_floor_warning(F1):
    with pytest.warns(PrecisionFloorWarning):
        mh.bowen_root(F1, 1.0, 0.0, tol_root=1e-10)


def test_ray_angles():
    th = mh.ray_angles(3)
    assert np.allclose(th, [math.pi / 8, math.pi / 4, 3 * math.pi / 8])
    with pytest.raises(ValueError):
        mh.ray_angles(2)


def test_trace_curve_structure(F1F3):
    pts = mh.trace_curve(F1F3, ray_count=5)
    assert len(pts) == 7
    assert [p.a for p in pts] == sorted(p.a for p in pts)
    for p in pts:
        assert p.a == pytest.approx(p.t_root * p.ray[0], abs=1e-15)
        assert p.b == pytest.approx(p.t_root * p.ray[1], abs=1e-15)
    mid = [p for p in pts if abs(p.theta - math.pi / 4) < 1e-12][0]
    d11 = mh.bowen_root(F1F3, 1.0, 1.0)
    assert mid.a == pytest.approx(mid.b, abs=1e-12)
    assert mid.a == pytest.approx(d11.t, abs=2 * d11.error_bar)
    h1 = mh.bowen_root(F1F3, 1.0, 0.0).t
    assert pts[-1].a == pytest.approx(h1, abs=1e-12) and pts[-1].b == 0.0


def test_curve_deterministic(F1F3):
    a = mh.trace_curve(F1F3, ray_count=3)
    b = mh.trace_curve(F1F3, ray_count=3, threads=2)
    assert [p.to_dict() for p in a] == [p.to_dict() for p in b]


def test_conjugate_curve_is_chord(curve_F1F2):
    pts = curve_F1F2
    h1 = max(p.a for p in pts)
    h2 = max(p.b for p in pts)
    assert h1 == pytest.approx(h2, abs=1e-9)
    assert mh.chord_distance(pts, h1, h2).max() <= 1e-3


def test_convexity_sign(curve_F1F3):
    d2, err = mh.second_differences(curve_F1F3)
    assert np.all(d2 >= -2 * err)
    assert np.mean(d2 > 2 * err) >= 0.8


def test_rigidity_conjugate(rigidity_F1F2):
    r = rigidity_F1F2
    assert abs(r.delta11 - r.h1 / 2) <= 1e-3
    assert abs(r.bishop_steger_gap) <= 1e-3
    assert abs(r.intersection_number - 1) <= 1e-2
    assert r.line_deviation <= 1e-3
    assert r.verdicts["conjugate_consistent"]
    assert not r.verdicts["bishop_steger_violated"] and not r.verdicts["thurston_violated"]


def test_rigidity_perturbed(rigidity_F1F3):
    r = rigidity_F1F3
    assert r.delta11 <= r.bishop_steger_bound
    assert r.intersection_number >= r.h1 / r.h2
    assert r.verdicts["bishop_steger_strict"] and r.verdicts["thurston_strict"]
    assert not r.verdicts["conjugate_consistent"]
    d = r.to_dict()
    assert d["bishop_steger_gap"] == r.bishop_steger_gap


def test_thurston_oracle_agrees_with_slope(F1F3, rigidity_F1F3):
    from manhattan_workbench.orbit_oracle import thurston_ratio
    ratio, count = thurston_ratio(F1F3, 12.0, max_period=20)
    assert count >= 200
    assert abs(ratio - rigidity_F1F3.intersection_number) <= 0.1 * rigidity_F1F3.intersection_number


def test_insufficient_points(F1F3):
    pts = mh.trace_curve(F1F3, ray_count=3)[:4]
    with pytest.raises(InsufficientPoints):
        mh.rigidity_report(F1F3, points=pts)


def test_swap_mirrors_curve(F1F3):
    pts = sorted(mh.trace_curve(F1F3, ray_count=5), key=lambda p: p.theta)
    sw = sorted(mh.trace_curve(F1F3.swapped(), ray_count=5), key=lambda p: p.theta, reverse=True)
    for p, q in zip(pts, sw):
        assert abs(p.a - q.b) <= p.error_bar + q.error_bar
        assert abs(p.b - q.a) <= p.error_bar + q.error_bar


def test_thread_count(monkeypatch):
    monkeypatch.setenv("MANHATTAN_THREADS", "3")
    assert mh.thread_count() == 3
    monkeypatch.setenv("MANHATTAN_THREADS", "0")
    assert mh.thread_count() == 1
