"""Belief and plausibility computation: the combination step.

Given an association, a predictive random set, the observed data, and an
assertion about the parameter, this module computes the probability that the
data-dependent random set of candidate parameters lands inside the assertion
(belief) or meets it (plausibility). For the built-in interval families and
interval-like assertions everything reduces to comparisons of the auxiliary
crossing maps, so the values are exact; a Monte Carlo fallback covers
sublevel-set families and predicate assertions. Plausibility regions, tests,
and the relative-efficiency ratio against the fiducial (singleton) answer are
derived on top.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .association import Assertion, Association
from .kernel import DomainError, NumericError, RandomStream, poisson_pmf
from .prs import PredictiveRandomSet, singleton_prs

_NESTED_TAGS = ("default", "lower", "upper")


class EmptyFocalError(NumericError):
    """A realized solution set was empty: the association violates the
    non-emptiness condition required to drop conditioning."""


@dataclass(frozen=True)
class BeliefResult:
    belief: float
    plausibility: float
    mc_se_belief: float = 0.0
    mc_se_plausibility: float = 0.0
    replicates: int = 0  # 0 means closed form

    def __post_init__(self):
        if not (-1e-12 <= self.belief <= 1 + 1e-12):
            raise DomainError("belief outside [0, 1]")
        if self.belief > self.plausibility + 1e-12:
            raise DomainError("belief exceeds plausibility")


@dataclass(frozen=True)
class PlausibilityRegion:
    alpha: float
    intervals: tuple

    def contains(self, theta: float) -> bool:
        return any(lo <= theta <= hi for lo, hi in self.intervals)

    def total_length(self) -> float:
        return sum(hi - lo for lo, hi in self.intervals)

    @property
    def is_empty(self) -> bool:
        return len(self.intervals) == 0


@dataclass(frozen=True)
class TestDecision:
    reject: bool
    plausibility: float
    alpha: float

    @property
    def decision(self) -> str:
        return "reject" if self.reject else "retain"


# ---------------------------------------------------------------------------
# closed-form engine
#
# The nested families are parameterized by t ~ Unif(0,1) so that the realized
# u-interval [a(t), b(t)] grows with t. The candidate-parameter interval
# [L(t), R(t)] then has L non-increasing and R non-decreasing, so every
# containment event is a t-interval whose length is read off the crossing maps.
# ---------------------------------------------------------------------------


def _beta_alpha(tag: str, c, use_beta: bool):
    # measure{t: b(t) < c} (beta) and measure{t: a(t) > c} (alpha) for the
    # realized u-interval [a(t), b(t)] of each family
    c = np.asarray(c, dtype=float)
    if tag == "default":
        val = 2.0 * c - 1.0 if use_beta else 1.0 - 2.0 * c
    elif tag == "lower":
        val = c if use_beta else np.zeros_like(c)
    elif tag == "upper":
        val = np.zeros_like(c) if use_beta else 1.0 - c
    else:  # pragma: no cover
        raise DomainError(f"no closed form for family {tag!r}")
    return np.clip(val, 0.0, 1.0)


def _tau_R(assoc: Association, tag: str, x, theta):
    """measure{t : sup of the candidate interval < theta}."""
    inc = assoc.focal_direction == "increasing"
    return _beta_alpha(tag, assoc.aux_of_upper(x, theta), use_beta=inc)


def _tau_L(assoc: Association, tag: str, x, theta):
    """measure{t : inf of the candidate interval > theta}."""
    inc = assoc.focal_direction == "increasing"
    return _beta_alpha(tag, assoc.aux_of_lower(x, theta), use_beta=not inc)


def _belief_closed(assoc: Association, tag: str, x, assertion: Assertion):
    """Exact belief for nested/singleton families; vectorized over x."""
    kind = assertion.kind
    inc = assoc.focal_direction == "increasing"

    if tag in _NESTED_TAGS:
        if kind == "point":
            return np.zeros_like(np.asarray(x, dtype=float))
        if kind == "left_ray":
            return _tau_R(assoc, tag, x, assertion.theta0)
        if kind == "right_ray":
            return _tau_L(assoc, tag, x, assertion.theta0)
        if kind == "not_point":
            return np.maximum(
                _tau_R(assoc, tag, x, assertion.theta0),
                _tau_L(assoc, tag, x, assertion.theta0),
            )
        if kind == "interval":
            a, b = assertion.bounds
            return np.minimum(_tau_L(assoc, tag, x, a), _tau_R(assoc, tag, x, b))
        if kind == "outside_interval":
            a, b = assertion.bounds
            return np.maximum(_tau_R(assoc, tag, x, a), _tau_L(assoc, tag, x, b))

    if tag == "singleton":
        w_l = lambda t: np.asarray(assoc.aux_of_lower(x, t), dtype=float)
        w_u = lambda t: np.asarray(assoc.aux_of_upper(x, t), dtype=float)
        m_R = lambda t: w_u(t) if inc else 1.0 - w_u(t)
        m_L = lambda t: 1.0 - w_l(t) if inc else w_l(t)
        if kind == "point":
            return np.zeros_like(np.asarray(x, dtype=float))
        if kind == "left_ray":
            return m_R(assertion.theta0)
        if kind == "right_ray":
            return m_L(assertion.theta0)
        if kind == "not_point":
            return np.clip(m_R(assertion.theta0) + m_L(assertion.theta0), 0.0, 1.0)
        if kind == "interval":
            a, b = assertion.bounds
            val = w_u(b) - w_l(a) if inc else w_l(a) - w_u(b)
            return np.clip(val, 0.0, 1.0)
        if kind == "outside_interval":
            a, b = assertion.bounds
            return np.clip(m_R(a) + m_L(b), 0.0, 1.0)

    raise DomainError(f"no closed form for family {tag!r} / assertion {kind!r}")


def closed_form_available(
    assoc: Association, prs: PredictiveRandomSet, assertion: Assertion
) -> bool:
    return (
        prs.family_tag in (*_NESTED_TAGS, "singleton")
        and assertion.kind != "predicate"
        and assoc.aux_of_lower is not None
        and assoc.aux_of_upper is not None
    )


def belief_values(assoc, prs, x, assertion):
    """Vectorized exact (belief, plausibility) arrays over observations x."""
    bel = _belief_closed(assoc, prs.family_tag, x, assertion)
    bel_c = _belief_closed(assoc, prs.family_tag, x, assertion.complement())
    return bel, 1.0 - bel_c


# ---------------------------------------------------------------------------
# Monte Carlo engine
# ---------------------------------------------------------------------------


def _draw_union_endpoints(assoc: Association, tag: str, x, u):
    """Candidate-interval endpoints for interval families, vectorized."""
    if tag == "default":
        half = np.abs(u - 0.5)
        u_lo, u_hi = 0.5 - half, 0.5 + half
    elif tag == "lower":
        u_lo, u_hi = np.zeros_like(u), u
    elif tag == "upper":
        u_lo, u_hi = u, np.ones_like(u)
    elif tag == "singleton":
        u_lo = u_hi = u
    else:  # pragma: no cover
        raise DomainError(f"not an interval family: {tag!r}")
    fl_lo = assoc.focal_lower(x, u_lo)
    fl_hi = assoc.focal_lower(x, u_hi)
    fu_lo = assoc.focal_upper(x, u_lo)
    fu_hi = assoc.focal_upper(x, u_hi)
    if np.any(fl_lo > fu_lo) or np.any(fl_hi > fu_hi):
        raise EmptyFocalError(
            "empty solution set encountered; the non-emptiness condition fails"
        )
    L = np.minimum(fl_lo, fl_hi)
    R = np.maximum(fu_lo, fu_hi)
    return L, R


def _belief_mc(assoc, prs, x, assertion, n_rep, stream):
    if n_rep < 1 or stream is None:
        raise DomainError(
            "Monte Carlo belief evaluation requires n_rep >= 1 and a RandomStream"
        )
    tag = prs.family_tag
    if tag in (*_NESTED_TAGS, "singleton"):
        u = stream.uniform(n_rep)
        L, R = _draw_union_endpoints(assoc, tag, x, u)
        contained = assertion.contains_interval(L, R)
        meets = assertion.intersects_interval(L, R)
    else:
        contained = np.empty(n_rep, dtype=bool)
        meets = np.empty(n_rep, dtype=bool)
        for i in range(n_rep):
            realized = prs.draw(stream)
            pieces = realized.intervals()
            ok_all, ok_any = True, False
            for u_lo, u_hi in pieces:
                fl = (assoc.focal_lower(x, u_lo), assoc.focal_lower(x, u_hi))
                fu = (assoc.focal_upper(x, u_lo), assoc.focal_upper(x, u_hi))
                if fl[0] > fu[0] or fl[1] > fu[1]:
                    raise EmptyFocalError(
                        "empty solution set encountered; the non-emptiness condition fails"
                    )
                L, R = min(fl), max(fu)
                ok_all = ok_all and bool(assertion.contains_interval(L, R))
                ok_any = ok_any or bool(assertion.intersects_interval(L, R))
            contained[i] = ok_all and len(pieces) > 0
            meets[i] = ok_any
    bel = float(np.mean(contained))
    pl = float(np.mean(meets))
    se = lambda p: math.sqrt(p * (1.0 - p) / n_rep)
    return BeliefResult(bel, pl, se(bel), se(pl), n_rep)


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------


def belief(
    assoc: Association,
    prs: PredictiveRandomSet,
    x,
    assertion: Assertion,
    n_rep: int = 0,
    stream: RandomStream | None = None,
) -> BeliefResult:
    """Belief and plausibility in the assertion given the observed x.

    Uses the exact path whenever the family and assertion admit one (then
    ``replicates`` is 0 and the standard errors vanish); otherwise Monte Carlo
    with ``n_rep`` draws from ``stream``. Belief and plausibility always come
    from the same draws, so the complement identity holds exactly.
    """
    if closed_form_available(assoc, prs, assertion):
        bel, pl = belief_values(assoc, prs, x, assertion)
        return BeliefResult(float(bel), float(pl))
    return _belief_mc(assoc, prs, x, assertion, n_rep, stream)


def plausibility_point(assoc, prs, x, theta, n_rep: int = 0, stream=None) -> float:
    """Plausibility of the singleton assertion {theta}."""
    return belief(assoc, prs, x, Assertion.point(theta), n_rep, stream).plausibility


def _pl_point_values(assoc, prs, x, thetas):
    """pl_x(theta) on an array of theta values (exact path only)."""
    tag = prs.family_tag
    out = np.empty(len(thetas), dtype=float)
    for i, t in enumerate(thetas):
        bel_c = _belief_closed(assoc, tag, x, Assertion.not_point(float(t)))
        out[i] = 1.0 - float(bel_c)
    return out


@dataclass(frozen=True)
class RegionSearch:
    """Grid/bisection controls for plausibility-region extraction."""

    grid_points: int = 512
    tol: float = 1e-6
    bracket: tuple | None = None  # explicit (lo, hi) overrides expansion


def plausibility_region(
    assoc: Association,
    prs: PredictiveRandomSet,
    x,
    alpha: float,
    search: RegionSearch | None = None,
    n_rep: int = 0,
    stream: RandomStream | None = None,
) -> PlausibilityRegion:
    """All theta with pl_x(theta) > alpha, as a union of disjoint intervals.

    The parameter axis is bracketed automatically (expanding away from a
    model-specific center until the plausibility falls below alpha/2 or a
    parameter-space boundary is hit), scanned on a grid, and interval
    endpoints are refined by bisection.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    search = search or RegionSearch()

    if closed_form_available(assoc, prs, Assertion.point(0.0)):
        pl_vec = lambda ts: _pl_point_values(assoc, prs, x, np.asarray(ts, dtype=float))
    else:
        pl_vec = lambda ts: np.array(
            [plausibility_point(assoc, prs, x, t, n_rep, stream) for t in ts]
        )

    lo_bound, hi_bound = assoc.param_space
    if search.bracket is not None:
        lo, hi = search.bracket
        lo_clamped = hi_clamped = False
    else:
        center = assoc.theta_center(x)
        lo, lo_clamped = _expand_down(pl_vec, center, lo_bound, alpha)
        hi, hi_clamped = _expand_up(pl_vec, center, hi_bound, alpha)

    # keep the scan strictly inside an open parameter space; clamped region
    # endpoints are still reported at the boundary itself
    grid_lo = lo + (hi - lo) * 1e-9 if lo_clamped and math.isfinite(lo) else lo
    grid_hi = hi - (hi - lo) * 1e-9 if hi_clamped and math.isfinite(hi) else hi
    grid = np.linspace(grid_lo, grid_hi, search.grid_points)
    pls = pl_vec(grid)
    inside = pls > alpha
    if not inside.any():
        warnings.warn("plausibility region is empty at this alpha", stacklevel=2)
        return PlausibilityRegion(alpha, tuple())

    intervals = []
    i, n = 0, len(grid)
    while i < n:
        if not inside[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and inside[j + 1]:
            j += 1
        if i == 0:
            left = lo_bound if lo_clamped else grid[0]
        else:
            left = _bisect_crossing(pl_vec, grid[i - 1], grid[i], alpha, search.tol)
        if j == n - 1:
            right = hi_bound if hi_clamped else grid[-1]
        else:
            right = _bisect_crossing(pl_vec, grid[j + 1], grid[j], alpha, search.tol)
        intervals.append((float(left), float(right)))
        i = j + 1
    return PlausibilityRegion(alpha, tuple(intervals))


def _expand_down(pl_vec, center, lo_bound, alpha):
    theta = center
    if math.isfinite(lo_bound):
        for _ in range(200):
            theta = lo_bound + (theta - lo_bound) / 2.0
            if pl_vec([theta])[0] < alpha / 2.0:
                return theta, False
        return lo_bound, True  # plausibility stays high all the way down
    step = max(1.0, abs(center))
    for _ in range(60):
        theta = theta - step
        if pl_vec([theta])[0] < alpha / 2.0:
            return theta, False
        step *= 2.0
    return theta, True


def _expand_up(pl_vec, center, hi_bound, alpha):
    theta = center
    if math.isfinite(hi_bound):
        for _ in range(200):
            theta = hi_bound - (hi_bound - theta) / 2.0
            if pl_vec([theta])[0] < alpha / 2.0:
                return theta, False
        return hi_bound, True
    step = max(1.0, abs(center))
    for _ in range(60):
        theta = theta + step
        if pl_vec([theta])[0] < alpha / 2.0:
            return theta, False
        step *= 2.0
    return theta, True


def _bisect_crossing(pl_vec, outside, inside, alpha, tol):
    # pl(outside) <= alpha < pl(inside); refine the boundary between them
    while abs(inside - outside) > tol:
        mid = 0.5 * (outside + inside)
        if pl_vec([mid])[0] > alpha:
            inside = mid
        else:
            outside = mid
    return 0.5 * (outside + inside)


def im_test(
    assoc: Association,
    prs: PredictiveRandomSet,
    x,
    assertion: Assertion,
    alpha: float,
    n_rep: int = 0,
    stream: RandomStream | None = None,
) -> TestDecision:
    """Reject the hypothesis theta in A exactly when pl_x(A) <= alpha."""
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    pl = belief(assoc, prs, x, assertion, n_rep, stream).plausibility
    return TestDecision(reject=pl <= alpha, plausibility=pl, alpha=alpha)


def relative_efficiency(
    assoc: Association,
    prs: PredictiveRandomSet,
    x,
    assertion: Assertion,
    n_rep: int = 0,
    stream: RandomStream | None = None,
) -> float:
    """Belief under ``prs`` divided by the fiducial (singleton-set) belief.

    Bounded by 1 for any valid predictive random set; raises when the
    fiducial belief vanishes.
    """
    fid = belief(assoc, singleton_prs(), x, assertion).belief
    if fid <= 0.0:
        raise DomainError("fiducial belief is zero; relative efficiency undefined")
    num = belief(assoc, prs, x, assertion, n_rep, stream).belief
    return num / fid


def dempster_r(x: int, theta) -> float:
    """The Poisson mass function viewed as a plausibility in theta.

    This is the comparison value produced by the singleton-set analysis of the
    count model; it is not calibrated the way the interval families are.
    """
    return poisson_pmf(x, theta)
