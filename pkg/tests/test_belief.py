"""Belief engine tests: closed forms against the published formulas, Monte
Carlo agreement, regions, tests, and the fiducial-efficiency bound."""

import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iminfer import kernel as K
from iminfer.association import (
    Assertion,
    exponential_mean_assoc,
    gaussian_mean_assoc,
    poisson_mean_assoc,
)
from iminfer.belief import (
    BeliefResult,
    EmptyFocalError,
    RegionSearch,
    belief,
    dempster_r,
    im_test,
    plausibility_point,
    plausibility_region,
    relative_efficiency,
)
from iminfer.prs import default_prs, h_nested_prs, one_sided_prs, singleton_prs

GAUSS = gaussian_mean_assoc()
POIS = poisson_mean_assoc()
EXPO = exponential_mean_assoc()


def gauss_pl_formula(x, theta):
    return 1.0 - abs(2.0 * K.norm_cdf(x - theta) - 1.0)


def pois_pl_formula(x, theta):
    g_lo = K.gamma_cdf(theta, x) if x > 0 else 1.0
    g_hi = K.gamma_cdf(theta, x + 1)
    return 1.0 - max(1.0 - 2.0 * g_lo, 0.0) - max(2.0 * g_hi - 1.0, 0.0)


# ---------------------------------------------------------------------------
# closed forms vs published formulas
# ---------------------------------------------------------------------------


def test_gaussian_point_plausibility_closed_form():
    for theta in np.linspace(1.0, 9.0, 33):
        got = plausibility_point(GAUSS, default_prs(), 5.0, theta)
        assert abs(got - gauss_pl_formula(5.0, theta)) < 1e-12


def test_gaussian_point_belief_is_zero():
    res = belief(GAUSS, default_prs(), 5.0, Assertion.point(4.0))
    assert res.belief == 0.0
    assert res.replicates == 0


def test_poisson_point_plausibility_closed_form():
    for x in [0, 1, 5, 11]:
        for theta in np.linspace(0.05, 25.0, 40):
            got = plausibility_point(POIS, default_prs(), x, theta)
            assert abs(got - pois_pl_formula(x, theta)) < 1e-12


def test_poisson_pl_at_observed_value_is_one():
    assert plausibility_point(POIS, default_prs(), 5, 5.0) == 1.0


def test_gaussian_pl_at_10pct_quantile_offset():
    theta = 5.0 - 1.6448536269514722
    assert abs(plausibility_point(GAUSS, default_prs(), 5.0, theta) - 0.10) < 1e-9


def test_exponential_point_plausibility_closed_form():
    for theta in [0.5, 2.0, 5.0 / math.log(2.0), 9.0, 40.0]:
        got = plausibility_point(EXPO, default_prs(), 5.0, theta)
        want = 1.0 - abs(2.0 * (1.0 - math.exp(-5.0 / theta)) - 1.0)
        assert abs(got - want) < 1e-12


# ---------------------------------------------------------------------------
# Monte Carlo path agrees with the exact path
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "assoc,x",
    [(GAUSS, 5.0), (POIS, 5), (EXPO, 5.0)],
)
def test_mc_agrees_with_closed_form(assoc, x):
    prs = default_prs()
    n = 100_000
    assertions = [
        Assertion.point(4.0),
        Assertion.left_ray(4.5),
        Assertion.interval(3.0, 7.0),
        Assertion.not_point(6.0),
    ]
    from iminfer.belief import _belief_mc

    for k, assertion in enumerate(assertions):
        exact = belief(assoc, prs, x, assertion)
        assert exact.replicates == 0
        mc = _belief_mc(assoc, prs, x, assertion, n, K.RandomStream(9000 + k, 0))
        for got, want, se in [
            (mc.belief, exact.belief, mc.mc_se_belief),
            (mc.plausibility, exact.plausibility, mc.mc_se_plausibility),
        ]:
            assert abs(got - want) <= 3 * max(se, 1e-4)


def test_mc_complement_identity_exact():
    from iminfer.belief import _belief_mc

    a = Assertion.interval(3.0, 7.0)
    stream1 = K.RandomStream(314, 0)
    stream2 = K.RandomStream(314, 0)
    res = _belief_mc(GAUSS, default_prs(), 5.0, a, 20_000, stream1)
    res_c = _belief_mc(GAUSS, default_prs(), 5.0, a.complement(), 20_000, stream2)
    assert res.plausibility == 1.0 - res_c.belief


def test_mc_requires_stream():
    a = Assertion.from_predicate(lambda t: t > 0)
    with pytest.raises(K.DomainError):
        belief(GAUSS, default_prs(), 5.0, a)


def test_h_nested_prs_runs_through_mc_path():
    prs = h_nested_prs(lambda u: abs(u - 0.5))
    res = belief(GAUSS, prs, 5.0, Assertion.point(4.0), n_rep=4000, stream=K.RandomStream(42, 0))
    exact = plausibility_point(GAUSS, default_prs(), 5.0, 4.0)
    assert res.replicates == 4000
    assert abs(res.plausibility - exact) <= 3 * max(res.mc_se_plausibility, 1e-3)


@given(st.floats(min_value=0.5, max_value=9.5), st.floats(min_value=0.2, max_value=4.0))
@settings(max_examples=60, deadline=None)
def test_subadditivity_closed_form(a, width):
    assertion = Assertion.interval(a, a + width)
    for assoc, x in [(GAUSS, 5.0), (POIS, 5), (EXPO, 5.0)]:
        res = belief(assoc, default_prs(), x, assertion)
        res_c = belief(assoc, default_prs(), x, assertion.complement())
        assert res.belief + res_c.belief <= 1.0 + 1e-12
        assert res.belief <= res.plausibility + 1e-12


# ---------------------------------------------------------------------------
# plausibility regions
# ---------------------------------------------------------------------------


def test_gaussian_region_matches_z_interval():
    region = plausibility_region(GAUSS, default_prs(), 5.0, 0.1)
    assert len(region.intervals) == 1
    lo, hi = region.intervals[0]
    assert abs(lo - (5.0 - 1.6448536269514722)) < 1e-4
    assert abs(hi - (5.0 + 1.6448536269514722)) < 1e-4


def test_poisson_region_matches_published_interval():
    region = plausibility_region(POIS, default_prs(), 5, 0.1)
    assert len(region.intervals) == 1
    lo, hi = region.intervals[0]
    assert abs(lo - 1.9701495680595302) < 0.01
    assert abs(hi - 10.513034908741535) < 0.01


def test_poisson_zero_count_region_touches_boundary():
    region = plausibility_region(POIS, default_prs(), 0, 0.1)
    (lo, hi), = region.intervals
    assert lo == 0.0
    # pl_0(theta) = 2 exp(-theta) beyond the plateau; pl = 0.1 at -log(0.05)
    assert abs(hi - (-math.log(0.05))) < 1e-4


def test_region_monotone_in_alpha():
    r10 = plausibility_region(GAUSS, default_prs(), 5.0, 0.1)
    r50 = plausibility_region(GAUSS, default_prs(), 5.0, 0.5)
    assert r50.total_length() < r10.total_length()
    # smaller alpha keeps every theta that survives the bigger alpha
    for lo, hi in r50.intervals:
        assert r10.contains(lo) and r10.contains(hi)


def test_region_point_consistency_grid():
    region = plausibility_region(POIS, default_prs(), 5, 0.1)
    for theta in np.linspace(0.2, 20.0, 101):
        inside = region.contains(theta)
        pl = plausibility_point(POIS, default_prs(), 5, theta)
        if abs(pl - 0.1) > 1e-4:  # skip knife-edge grid points
            assert inside == (pl > 0.1)


def test_region_empty_warns():
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        region = plausibility_region(
            GAUSS, default_prs(), 5.0, 0.5, search=RegionSearch(bracket=(20.0, 30.0))
        )
    assert region.is_empty
    assert any("empty" in str(x.message) for x in w)


# ---------------------------------------------------------------------------
# tests and efficiency
# ---------------------------------------------------------------------------


def test_gaussian_one_sided_test_matches_textbook_rule():
    # H0: theta >= theta0 rejected iff x <= theta0 - z_{1-alpha}
    theta0, alpha = 2.0, 0.05
    prs = one_sided_prs("upper")  # matched to the decreasing endpoint map
    cut = theta0 - K.norm_quantile(1 - alpha)
    for x in np.linspace(theta0 - 4, theta0 + 2, 41):
        dec = im_test(GAUSS, prs, float(x), Assertion.right_ray(theta0), alpha)
        assert dec.reject == (x <= cut + 1e-12)


def test_poisson_one_sided_test_matches_exact_test():
    # H0: theta >= theta0; exact p-value is the left tail F_theta0(x)
    theta0, alpha = 6.0, 0.05
    prs = one_sided_prs("lower")
    for x in range(0, 15):
        dec = im_test(POIS, prs, x, Assertion.right_ray(theta0), alpha)
        p_exact = 1.0 - K.gamma_cdf(theta0, x + 1)  # = P{X <= x} at theta0
        assert dec.reject == (p_exact <= alpha)
        assert abs(dec.plausibility - p_exact) < 1e-12


def test_retain_when_plausibility_is_one():
    dec = im_test(POIS, default_prs(), 5, Assertion.point(5.0), 0.5)
    assert not dec.reject and dec.plausibility == 1.0


def test_theorem_like_efficiency_of_matched_one_sided_sets():
    for theta0 in np.linspace(2.0, 9.0, 20):
        r = relative_efficiency(GAUSS, one_sided_prs("upper"), 5.0, Assertion.left_ray(theta0))
        assert abs(r - 1.0) < 1e-12
        r = relative_efficiency(POIS, one_sided_prs("lower"), 5, Assertion.left_ray(theta0))
        assert abs(r - 1.0) < 1e-12


def test_default_prs_efficiency_below_one():
    for x in [3.0, 4.0, 4.9]:
        r = relative_efficiency(GAUSS, default_prs(), x, Assertion.left_ray(5.0))
        assert 0.0 < r <= 1.0


def test_efficiency_requires_positive_fiducial_belief():
    with pytest.raises(K.DomainError):
        relative_efficiency(GAUSS, default_prs(), 5.0, Assertion.point(5.0))


def test_proposition_style_dominance_closed_form():
    rng = np.random.default_rng(7)
    for _ in range(100):
        x = float(rng.uniform(1.0, 9.0))
        a = float(rng.uniform(0.0, x))
        b = a + float(rng.uniform(0.5, 8.0))
        assertion = Assertion.interval(a, b)
        for assoc, obs in [(GAUSS, x), (EXPO, x), (POIS, int(round(x)))]:
            fid = belief(assoc, singleton_prs(), obs, assertion).belief
            got = belief(assoc, default_prs(), obs, assertion).belief
            assert got <= fid + 1e-12


def test_dempster_values():
    assert abs(dempster_r(5, 5.0) - 0.17546736976785068) < 5e-4
    assert abs(dempster_r(0, 2.0) - math.exp(-2.0)) < 1e-14
    assert abs(dempster_r(5, 1.0) - math.exp(-1) / 120.0) < 1e-12
    with pytest.raises(K.DomainError):
        dempster_r(5, 0.0)


def test_belief_result_validation():
    with pytest.raises(K.DomainError):
        BeliefResult(belief=0.9, plausibility=0.3)
