"""Predictive random set tests: miss probabilities, nestedness, validity and
efficiency of the built-in families."""

import math

import numpy as np
import pytest

from iminfer import kernel as K
from iminfer.prs import (
    IntervalSet,
    SublevelSet,
    default_prs,
    h_nested_prs,
    one_sided_prs,
    prs_by_name,
    singleton_prs,
)

KS_CRIT_1PCT = 1.6276


def ks_distance_uniform(sample):
    s = np.sort(np.asarray(sample, dtype=float))
    n = len(s)
    return max(np.max(np.arange(1, n + 1) / n - s), np.max(s - np.arange(0, n) / n))


# ---------------------------------------------------------------------------
# miss probabilities
# ---------------------------------------------------------------------------


def test_default_miss_prob():
    q = default_prs().miss_prob
    assert q(0.5) == 0.0
    assert q(1.0) == 1.0
    assert q(0.0) == 1.0
    us = np.linspace(0, 1, 21)
    np.testing.assert_allclose(q(us), np.abs(2 * us - 1), atol=1e-15)


def test_one_sided_miss_prob():
    lower = one_sided_prs("lower").miss_prob
    upper = one_sided_prs("upper").miss_prob
    assert lower(0.0) == 0.0
    us = np.linspace(0, 1, 21)
    np.testing.assert_allclose(lower(us), us, atol=1e-15)
    np.testing.assert_allclose(upper(us), 1 - us, atol=1e-15)


def test_singleton_miss_prob_is_one():
    q = singleton_prs().miss_prob
    assert q(0.3) == 1.0
    np.testing.assert_array_equal(q(np.linspace(0, 1, 7)), np.ones(7))


def test_one_sided_rejects_unknown_side():
    with pytest.raises(K.DomainError):
        one_sided_prs("middle")


# ---------------------------------------------------------------------------
# draws and nestedness
# ---------------------------------------------------------------------------


def test_default_draw_shape():
    s = default_prs().draw(K.RandomStream(11, 0))
    assert isinstance(s, IntervalSet)
    assert abs((s.lo + s.hi) - 1.0) < 1e-12  # symmetric about 0.5


def test_one_sided_draw_shapes():
    lo_set = one_sided_prs("lower").draw(K.RandomStream(11, 1))
    assert lo_set.lo == 0.0
    hi_set = one_sided_prs("upper").draw(K.RandomStream(11, 2))
    assert hi_set.hi == 1.0


def test_singleton_draw_is_degenerate():
    s = singleton_prs().draw(K.RandomStream(11, 3))
    assert s.lo == s.hi


@pytest.mark.parametrize("name", ["default", "lower", "upper"])
def test_nestedness_of_realized_pairs(name):
    prs = prs_by_name(name)
    stream = K.RandomStream(500, 0)
    for i in range(1000):
        a = prs.draw(stream)
        b = prs.draw(stream)
        a_in_b = b.lo <= a.lo and a.hi <= b.hi
        b_in_a = a.lo <= b.lo and b.hi <= a.hi
        assert a_in_b or b_in_a


def test_h_nested_reproduces_default_sets():
    h = lambda u: abs(u - 0.5)
    prs = h_nested_prs(h)
    s = prs.draw(K.RandomStream(77, 0))
    pieces = s.intervals()
    assert len(pieces) == 1
    lo, hi = pieces[0]
    # sublevel sets of |u - 0.5| are the centered intervals of the default family
    assert abs((lo + hi) - 1.0) < 1e-9
    assert abs((hi - lo) - 2 * s.threshold) < 1e-9


def test_h_nested_reproduces_lower_sets():
    prs = h_nested_prs(lambda u: u)
    s = prs.draw(K.RandomStream(77, 1))
    ((lo, hi),) = s.intervals()
    assert lo < 1e-9
    assert abs(hi - s.threshold) < 1e-9


def test_sublevel_set_decomposition_two_pieces():
    # h with two wells -> sublevel set splits into two intervals
    h = lambda u: math.cos(4 * math.pi * u)
    s = SublevelSet(h, -0.5)
    pieces = s.intervals()
    assert len(pieces) == 2
    for lo, hi in pieces:
        mid = 0.5 * (lo + hi)
        assert h(mid) <= -0.5


# ---------------------------------------------------------------------------
# validity / efficiency (Q(U) stochastically below / equal to uniform)
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("name", ["default", "lower", "upper"])
def test_builtin_families_are_valid_and_efficient(name):
    prs = prs_by_name(name)
    u = K.RandomStream(321, 4).uniform(100_000)
    q = prs.miss_prob(u)
    n = len(q)
    for alpha in [0.01, 0.05, 0.1, 0.25, 0.5]:
        emp = np.mean(q >= 1 - alpha)
        se = math.sqrt(emp * (1 - emp) / n) if 0 < emp < 1 else 1.0 / n
        assert emp <= alpha + 3 * se
    assert ks_distance_uniform(q) < KS_CRIT_1PCT / math.sqrt(n)


def test_singleton_family_fails_validity():
    prs = singleton_prs()
    u = K.RandomStream(321, 5).uniform(10_000)
    q = prs.miss_prob(u)
    alpha = 0.2
    assert np.mean(q >= 1 - alpha) == 1.0  # constant 1: not below uniform


def test_h_nested_family_is_efficient_for_continuous_h():
    # an asymmetric continuous h, constant only on null sets
    h = lambda u: (u - 0.3) ** 2 + 0.1 * u
    prs = h_nested_prs(h)
    u = K.RandomStream(321, 6).uniform(100_000)
    q = prs.miss_prob(u)
    assert ks_distance_uniform(q) < KS_CRIT_1PCT / math.sqrt(len(q))


def test_h_nested_analytic_override():
    prs = h_nested_prs(lambda u: u, miss_prob=lambda u: np.asarray(u, dtype=float))
    assert prs.miss_prob(0.25) == 0.25


def test_prs_lookup():
    assert prs_by_name("default").family_tag == "default"
    with pytest.raises(K.DomainError):
        prs_by_name("score-balanced")
