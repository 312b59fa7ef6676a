import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from manhattan_workbench import fixtures
from manhattan_workbench import moebius as mb
from manhattan_workbench import pressure as pr
from manhattan_workbench.coding import Alphabet, TruncationParams, enumerate_periodic, orbit_lengths
from manhattan_workbench.errors import ConfigError, DivergentTail, StepTooLarge
from manhattan_workbench.pressure import WeightedPotentialQuery as Q


def hand_log_z(pair, q, n, params):
    """Independent summation over the enumerated words with exact lengths."""
    terms = []
    for w in enumerate_periodic(Alphabet.from_pair(pair), n, params):
        l1, l2 = orbit_lengths(pair, w)
        terms.append(-q.t * (q.a * l1 + q.b * l2))
    return float(np.logaddexp.reduce(terms))


def test_query_validation():
    for bad in [(-1, 1, 1), (0, 0, 1), (1, 1, 0), (1, math.nan, 1)]:
        with pytest.raises(ConfigError):
            Q(*bad)
    assert Q(1, 1, 1).threshold == 0.25


def test_hyperbolic_letters_small_sum(F4):
    q = Q(1.0, 0.5, 0.9)
    params = TruncationParams(n_max=4, max_power=1)
    alpha = Alphabet.from_pair(F4)
    words = list(enumerate_periodic(alpha, 2, params))
    assert len(words) <= 8
    total = 0.0
    for w in words:
        g1 = F4.rho1.generators
        m1 = mb.compose(mb.power(g1[w.blocks[0][0]].matrix, w.blocks[0][1]),
                        mb.power(g1[w.blocks[1][0]].matrix, w.blocks[1][1]))
        l = 2 * math.acosh(abs(m1.trace) / 2)
        total += math.exp(-q.t * (q.a + q.b) * l)
    got, _ = pr.partition_sum(F4, q, 2, params, mode=pr.EXACT)
    assert got == pytest.approx(math.log(total), abs=1e-12)


@pytest.mark.parametrize("name", ["F1", "F1F3", "F4"])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_accelerator_exact_for_short_periods(name, n):
    pair = fixtures.pair(name)
    params = TruncationParams(n_max=4, max_power=4)
    q = Q(1.0, 0.5, 0.7)
    exact, _ = pr.partition_sum(pair, q, n, params, mode=pr.EXACT)
    fast, _ = pr.partition_sum(pair, q, n, params, mode=pr.ACCELERATED, tail=False)
    assert fast == pytest.approx(exact, abs=1e-9)
    assert exact == pytest.approx(hand_log_z(pair, q, n, params), abs=1e-9)


def test_accelerator_bias_at_period_four(F1):
    # junction approximation: measured, not assumed
    params = TruncationParams(n_max=4, max_power=4)
    q = Q(1.0, 0.0, 0.8)
    exact, _ = pr.partition_sum(F1, q, 4, params, mode=pr.EXACT)
    fast, _ = pr.partition_sum(F1, q, 4, params, mode=pr.ACCELERATED, tail=False)
    assert abs(fast - exact) < 0.05


def test_partition_monotone_and_convex_in_t(F1):
    params = TruncationParams(n_max=6, max_power=6)
    ts = np.linspace(0.8, 1.6, 9)
    z = np.array([pr.partition_sum(F1, Q(1.0, 0.5, t), 4, params, tail=False)[0] for t in ts])
    assert np.all(np.diff(z) < 0)
    assert np.all(np.diff(z, 2) > 0)


@given(st.floats(0.1, 2), st.floats(0.1, 2), st.floats(0.5, 3), st.floats(0.3, 3))
def test_partition_scaling(a, b, t, lam):
    pair = fixtures.pair("F1F3")
    params = TruncationParams(n_max=4, max_power=3)
    lhs = pr.partition_sum(pair, Q(lam * a, lam * b, t), 3, params, mode=pr.EXACT)[0] \
        if t * lam * (a + b) > 0.5 else None
    if lhs is None:
        return
    rhs = pr.partition_sum(pair, Q(a, b, lam * t), 3, params, mode=pr.EXACT)[0]
    assert lhs == pytest.approx(rhs, abs=1e-12 * max(1.0, abs(rhs)))


def test_divergent_tail(F1):
    with pytest.raises(DivergentTail):
        pr.partition_sum(F1, Q(1.0, 1.0, 0.2), 2, TruncationParams(n_max=4, max_power=3), mode=pr.EXACT)


def test_pressure_examples(F1):
    assert pr.pressure_estimate(F1, Q(1, 1, 0.2)).is_infinite
    assert pr.pressure_estimate(F1, Q(1, 0, 0.4)).is_infinite
    assert pr.pressure_estimate(F1, Q(1, 0, 0.5)).is_infinite
    assert not pr.pressure_estimate(F1, Q(1, 0, 0.51)).is_infinite


def test_pressure_vanishes_at_entropy(F1):
    from manhattan_workbench.manhattan import bowen_root
    r = bowen_root(F1, 1.0, 0.0, tol_root=1e-8)
    est = pr.pressure_estimate(F1, Q(1.0, 0.0, r.t))
    assert abs(est.value) <= est.total_error


def test_no_phase_transition_without_cusp(F4):
    for a, b in [(1, 0), (1, 1), (0.5, 2)]:
        for t in (0.05, 0.1, 1 / (2 * (a + b))):
            assert not pr.pressure_estimate(F4, Q(a, b, t)).is_infinite


def test_anchor_independence(F1F3):
    q = Q(1.0, 0.5, 0.6)
    e1 = pr.pressure_estimate(F1F3, q, TruncationParams(anchor=(0, 1)))
    e2 = pr.pressure_estimate(F1F3, q, TruncationParams(anchor=(1, 1)))
    assert abs(e1.value - e2.value) <= 2 * (e1.total_error + e2.total_error)


def test_pressure_monotone_in_t(F1F3):
    vals = [pr.pressure_estimate(F1F3, Q(1.0, 1.0, t)).value for t in (0.3, 0.35, 0.4, 0.5, 0.7)]
    assert all(x > y for x, y in zip(vals, vals[1:]))


@pytest.mark.parametrize("name", ["F1", "F4"])
def test_tail_soundness_exact(name):
    pair = fixtures.pair(name)
    q = Q(1.0, 0.0, 0.8)
    for n in (2, 3):
        z1, bound = pr.partition_sum(pair, q, n, TruncationParams(n_max=4, max_power=5), mode=pr.EXACT)
        z2, _ = pr.partition_sum(pair, q, n, TruncationParams(n_max=4, max_power=10), mode=pr.EXACT)
        assert 0 <= z2 - z1 <= bound


def test_tail_soundness_accelerated(F1F3):
    q = Q(1.0, 0.5, 0.6)
    for n in (4, 16, 64):
        z1, bound = pr.partition_sum(F1F3, q, n, TruncationParams(n_max=64, max_power=8))
        z2, _ = pr.partition_sum(F1F3, q, n, TruncationParams(n_max=64, max_power=16))
        assert abs(z2 - z1) <= bound


def test_tail_model_brackets_held_out(F1):
    model = pr._tail_model(F1)
    rng = np.random.default_rng(0)
    for (r, j), (lo, hi) in model.bounds.items():
        rep = F1.reps()[r]
        g = rep.generators[j].matrix
        for m in list(rng.integers(model.m0, 50 * model.m0, 40)) + [-int(model.m0) * 7, 10 ** 5]:
            d = mb.displacement(mb.power(g, int(m)), rep.basepoint)
            assert lo - 1e-9 <= d - 2 * math.log(abs(int(m))) <= hi + 1e-9


def test_derivative_sign_and_symmetry(F1F3):
    for a, b, t in [(1, 0, 0.8), (0, 1, 0.8), (1, 1, 0.4), (2, 1, 0.3)]:
        d = pr.pressure_derivative_t(F1F3, Q(a, b, t))
        assert d < 0
        ds = pr.pressure_derivative_t(F1F3.swapped(), Q(b, a, t))
        assert d == pytest.approx(ds, rel=1e-6)


def test_derivative_magnitude_bounded_by_gap(F1):
    from manhattan_workbench.coding import positivity_gap, random_cyclic_word
    rng = np.random.default_rng(1)
    alpha = Alphabet.from_pair(F1)
    c0 = positivity_gap(F1.rho1, [random_cyclic_word(rng, alpha, 4, 6) for _ in range(300)])
    d = pr.pressure_derivative_t(F1, Q(1.0, 0.0, 0.9))
    assert -d >= 0.5 * c0


def test_derivative_step_convergence(F1F3):
    q = Q(1.0, 0.5, 0.7)
    d1 = pr.pressure_derivative_t(F1F3, q, h_step=2e-3)
    d2 = pr.pressure_derivative_t(F1F3, q, h_step=1e-3)
    est = pr.pressure_estimate(F1F3, q)
    assert abs(d1 - d2) < est.error_bar / 1e-3 + 1e-3


def test_derivative_step_too_large(F1):
    with pytest.raises(StepTooLarge):
        pr.pressure_derivative_t(F1, Q(1.0, 0.0, 0.505), h_step=0.01)


def test_estimate_is_deterministic(F1F3):
    q = Q(0.7, 0.4, 0.8)
    assert pr.pressure_estimate(F1F3, q).to_dict() == pr.pressure_estimate(F1F3, q).to_dict()
