"""Score-balanced two-sided inference for one-parameter continuous models.

The two-sided belief in "theta differs from theta0" is driven by a nested
family of score intervals B_t = (xi_minus(t), xi_plus(t)) chosen so that the
score, restricted to each interval, has zero expectation under theta0. For a
symmetric score distribution the intervals are symmetric and everything is
classical; in general the endpoints must be solved numerically. All solves
are performed in observation space, where the score is monotone for the
built-in models, so no nested inversions are needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator

from .kernel import (
    BracketError,
    DomainError,
    QuadratureSpec,
    find_root,
    integrate,
)

_QUAD = QuadratureSpec(abs_tol=1e-10, rel_tol=1e-10, max_subdivisions=200)
_TAIL = 5e-5  # one-sided tail mass left outside the tabulation grid


@dataclass(frozen=True)
class ScoreModel:
    """Density, score, and score-derivative curvature of a continuous model.

    ``score`` is the theta-derivative of the log density; ``curvature`` is
    score squared plus the theta-derivative of the score, so both have zero
    expectation under the model. ``score_range`` maps theta to the image of
    the support under the score.
    """

    name: str
    support: tuple[float, float]
    param_space: tuple[float, float]
    density: Callable
    score: Callable
    curvature: Callable
    score_range: Callable

    def in_support(self, x) -> bool:
        lo, hi = self.support
        return lo < x < hi


def gaussian_mean_score_model() -> ScoreModel:
    """Unit-variance Gaussian location model."""
    return ScoreModel(
        name="gaussian",
        support=(-np.inf, np.inf),
        param_space=(-np.inf, np.inf),
        density=lambda x, th: math.exp(-0.5 * (x - th) ** 2) / math.sqrt(2 * math.pi),
        score=lambda x, th: x - th,
        curvature=lambda x, th: (x - th) ** 2 - 1.0,
        score_range=lambda th: (-np.inf, np.inf),
    )


def exponential_mean_score_model() -> ScoreModel:
    """Exponential model parameterized by its mean."""

    def density(x, th):
        return math.exp(-x / th) / th if x > 0 else 0.0

    return ScoreModel(
        name="exponential",
        support=(0.0, np.inf),
        param_space=(0.0, np.inf),
        density=density,
        score=lambda x, th: (x - th) / th**2,
        curvature=lambda x, th: ((x - th) / th**2) ** 2 + (th - 2.0 * x) / th**3,
        score_range=lambda th: (-1.0 / th, np.inf),
    )


_BUILTIN = {
    "gaussian": gaussian_mean_score_model,
    "exponential": exponential_mean_score_model,
}


def score_model_by_name(name: str) -> ScoreModel:
    try:
        return _BUILTIN[name]()
    except KeyError:
        raise DomainError(
            f"no score model named {name!r}; choose from {sorted(_BUILTIN)}"
        ) from None


# ---------------------------------------------------------------------------
# observation-space machinery
# ---------------------------------------------------------------------------


def _support_inset(model: ScoreModel, frac_step: int):
    lo, hi = model.support
    if math.isfinite(lo):
        return lo + 2.0 ** (-frac_step)
    return None


def _expand_toward(model: ScoreModel, start: float, downward: bool):
    """Yield trial points marching toward one end of the support."""
    lo, hi = model.support
    if downward:
        if math.isfinite(lo):
            gap = start - lo
            for k in range(1, 200):
                yield lo + gap * 2.0 ** (-k)
        else:
            step = 1.0
            x = start
            for _ in range(200):
                x -= step
                step *= 2.0
                yield x
    else:
        if math.isfinite(hi):
            gap = hi - start
            for k in range(1, 200):
                yield hi - gap * 2.0 ** (-k)
        else:
            step = 1.0
            x = start
            for _ in range(200):
                x += step
                step *= 2.0
                yield x


def _score_zero(model: ScoreModel, theta0: float) -> float:
    """The x with zero score, bracketed by marching out from mid-support."""
    lo, hi = model.support
    if math.isfinite(lo) and math.isfinite(hi):
        anchor = 0.5 * (lo + hi)
    elif math.isfinite(lo):
        anchor = lo + max(1.0, abs(theta0))
    elif math.isfinite(hi):
        anchor = hi - max(1.0, abs(theta0))
    else:
        anchor = theta0
    f = lambda x: model.score(x, theta0)
    a = b = anchor
    fa = f(anchor)
    if fa == 0.0:
        return anchor
    if fa > 0:
        for x in _expand_toward(model, anchor, downward=(f(anchor + 1e-9) < fa)):
            if f(x) < 0:
                a = min(a, x)
                b = max(b, x)
                break
            a, b = min(a, x), max(b, x)
    else:
        for x in _expand_toward(model, anchor, downward=(f(anchor + 1e-9) < fa)):
            if f(x) > 0:
                a = min(a, x)
                b = max(b, x)
                break
            a, b = min(a, x), max(b, x)
    return find_root(f, a, b, tol=1e-13)


@dataclass(frozen=True)
class _Frame:
    """Cached per-(model, theta0) quantities for the balance solves."""

    model: ScoreModel
    theta0: float
    x0: float  # score zero
    increasing: bool  # direction of the score in x

    def score(self, x):
        return self.model.score(x, self.theta0)

    def x_of_t(self, t: float) -> float:
        """Invert the score at theta0; the score is monotone in x."""
        f = lambda x: self.score(x) - t
        g0 = f(self.x0)
        if g0 == 0.0:
            return self.x0
        want_larger_x = (t > 0) == self.increasing
        b = self.x0
        for x in _expand_toward(self.model, self.x0, downward=not want_larger_x):
            if f(x) == 0.0:
                return x
            if (f(x) > 0) != (g0 > 0):
                return find_root(f, min(b, x), max(b, x), tol=1e-13)
            b = x
        raise BracketError(f"score never reaches t={t} inside the support")

    def cdf(self, x: float) -> float:
        lo, hi = self.model.support
        x = min(max(x, lo), hi)
        f = lambda s: self.model.density(s, self.theta0)
        if x == lo:
            return 0.0
        if x == hi:
            return 1.0
        # integrate the shorter tail for better conditioning
        left = integrate(f, lo, x, _QUAD)
        if left <= 0.6:
            return min(1.0, max(0.0, left))
        return min(1.0, max(0.0, 1.0 - integrate(f, x, hi, _QUAD)))

    def x_quantile(self, p: float) -> float:
        f = lambda x: self.cdf(x) - p
        g0 = f(self.x0)
        if g0 == 0.0:
            return self.x0
        b = self.x0
        for x in _expand_toward(self.model, self.x0, downward=(g0 > 0)):
            if (f(x) > 0) != (g0 > 0):
                return find_root(f, min(b, x), max(b, x), tol=1e-12)
            b = x
        raise BracketError(f"quantile {p} not reachable inside the support")

    def weighted_score_mass(self, xa: float, xb: float) -> float:
        """Integral of score * density over (xa, xb)."""
        f = lambda x: self.score(x) * self.model.density(x, self.theta0)
        return integrate(f, xa, xb, _QUAD)

    def balance_partner(self, x_t: float) -> float:
        """The x on the other side of the score zero balancing (x_t, x0).

        Solves integral of score * density = 0 over the interval between the
        returned point and x_t; exists whenever the score has finite mean.
        """
        if x_t == self.x0:
            return self.x0
        go_down = x_t > self.x0
        g = (
            (lambda xo: self.weighted_score_mass(xo, x_t))
            if go_down
            else (lambda xo: self.weighted_score_mass(x_t, xo))
        )
        prev = self.x0
        g_prev = g(prev)
        if g_prev == 0.0:
            return prev
        for x in _expand_toward(self.model, self.x0, downward=go_down):
            g_x = g(x)
            if (g_x > 0) != (g_prev > 0):
                return find_root(g, min(prev, x), max(prev, x), tol=1e-12)
            prev, g_prev = x, g_x
        raise BracketError(
            "score balance has no solution; the model violates the regularity "
            "assumptions (finite score moments)"
        )


def _frame(model: ScoreModel, theta0: float) -> _Frame:
    lo, hi = model.param_space
    if not lo < theta0 < hi:
        raise DomainError(f"theta0={theta0} outside the parameter space")
    x0 = _score_zero(model, theta0)
    eps = 1e-6 * max(1.0, abs(x0))
    increasing = model.score(x0 + eps, theta0) > model.score(x0 - eps, theta0) \
        if model.in_support(x0 - eps) else True
    return _Frame(model, theta0, x0, increasing)


def balanced_interval(model: ScoreModel, theta0: float, t: float):
    """Exact (xi_minus, xi_plus) for a single score value t.

    For t >= 0 the upper endpoint is t itself and the lower endpoint solves
    the zero-mean constraint; for t < 0 the roles are mirrored.
    """
    fr = _frame(model, theta0)
    return _balanced_interval_frame(fr, t)


def _balanced_interval_frame(fr: _Frame, t: float):
    if t == 0.0:
        return 0.0, 0.0
    x_t = fr.x_of_t(t)
    x_o = fr.balance_partner(x_t)
    s = fr.score(x_o)
    return (s, t) if t > 0 else (t, s)


@dataclass(frozen=True)
class BalancedFamily:
    """Tabulated score-balanced interval family at a reference theta0.

    Nodes pair each tabulated t >= 0 with its solved lower endpoint and the
    corresponding observation-space points; monotone interpolation fills the
    gaps and the family extends beyond the grid by its last solution.
    """

    model: ScoreModel
    theta0: float
    ts: np.ndarray  # tabulated t >= 0, increasing, ts[0] == 0
    xis: np.ndarray  # xi_minus at the tabulated t
    x_upper: np.ndarray  # x with score == t
    x_lower: np.ndarray  # balance partner of x_upper
    _xi_interp: object
    _xi_inv_interp: object

    def xi_minus(self, t):
        t = np.asarray(t, dtype=float)
        below = np.clip(t, None, 0.0)
        tabbed = np.clip(t, 0.0, self.ts[-1])
        out = np.where(t < 0.0, below, self._xi_interp(tabbed))
        out = np.where(t > self.ts[-1], self.xis[-1], out)
        return float(out) if out.ndim == 0 else out

    def xi_plus(self, t):
        t = np.asarray(t, dtype=float)
        above = np.clip(t, 0.0, None)
        tabbed = np.clip(t, self.xis[-1], 0.0)
        out = np.where(t >= 0.0, above, self._xi_inv_interp(tabbed))
        out = np.where(t < self.xis[-1], self.ts[-1], out)
        return float(out) if out.ndim == 0 else out

    def interval_width(self, t):
        return self.xi_plus(t) - self.xi_minus(t)


def build_balanced_family(
    model: ScoreModel, theta0: float, tol: float = 1e-8, grid_size: int = 64
) -> BalancedFamily:
    """Solve the balance constraint on a geometric grid of score values.

    The grid spans the central 99.99% of the score distribution under theta0
    with 64 nodes by default. Every node is solved by bracketed root finding
    on the zero-mean constraint; residuals are of the order of the quadrature
    tolerance, far below ``tol``.
    """
    fr = _frame(model, theta0)
    x_hi = fr.x_quantile(1.0 - _TAIL) if fr.increasing else fr.x_quantile(_TAIL)
    t_max = fr.score(x_hi)
    if t_max <= 0:
        raise DomainError("degenerate score distribution: no positive tail")
    ts_pos = np.geomspace(t_max * 1e-3, t_max, grid_size - 1)
    ts = np.concatenate([[0.0], ts_pos])
    xis = np.empty_like(ts)
    xu = np.empty_like(ts)
    xl = np.empty_like(ts)
    xis[0] = 0.0
    xu[0] = xl[0] = fr.x0
    for i, t in enumerate(ts[1:], start=1):
        x_t = fr.x_of_t(float(t))
        x_o = fr.balance_partner(x_t)
        xu[i], xl[i] = x_t, x_o
        xis[i] = fr.score(x_o)
    # xi_minus decreases in t; enforce strict monotonicity for interpolation
    xis = np.minimum.accumulate(xis)
    xi_interp = PchipInterpolator(ts, xis, extrapolate=False)
    xi_inv_interp = PchipInterpolator(xis[::-1], ts[::-1], extrapolate=False)
    return BalancedFamily(
        model=model,
        theta0=theta0,
        ts=ts,
        xis=xis,
        x_upper=xu,
        x_lower=xl,
        _xi_interp=xi_interp,
        _xi_inv_interp=xi_inv_interp,
    )


def two_sided_belief(model: ScoreModel, family: BalancedFamily, x: float) -> float:
    """Belief in {theta0}^c at the observed x, via the balanced family.

    Computed as the model probability of the balanced score interval at the
    observed score; uniform on (0,1) when x is drawn from the theta0 model.
    """
    if not model.in_support(x):
        raise DomainError(f"x={x} outside the model support")
    fr = _frame(model, family.theta0)
    t_x = fr.score(x)
    if t_x == 0.0:
        return 0.0
    # solve the partner exactly; the family tabulation serves batch callers
    xi_m, xi_p = _balanced_interval_frame(fr, t_x)
    x_a = fr.x_of_t(xi_m) if xi_m != t_x else x
    x_b = fr.x_of_t(xi_p) if xi_p != t_x else x
    lo, hi = (x_a, x_b) if fr.increasing else (x_b, x_a)
    bel = fr.cdf(hi) - fr.cdf(lo)
    return min(1.0, max(0.0, bel))


def two_sided_belief_batch(
    model: ScoreModel, family: BalancedFamily, xs, cdf_grid: int = 4001
):
    """Vectorized belief values from the family's tabulation.

    Interpolation error is far below Monte Carlo resolution, which is what
    batch callers (calibration checks) care about; use ``two_sided_belief``
    when single-point accuracy matters.
    """
    fr = _frame(model, family.theta0)
    xs = np.asarray(xs, dtype=float)
    # partner maps in observation space, both directions
    up_to_down = PchipInterpolator(family.x_upper, family.x_lower[::-1][::-1], extrapolate=False)
    order = np.argsort(family.x_lower)
    down_to_up = PchipInterpolator(family.x_lower[order], family.x_upper[order], extrapolate=False)
    # model CDF table over the union of tabulated ranges, padded by quantiles
    lo_grid = min(family.x_lower.min(), fr.x_quantile(_TAIL / 10))
    hi_grid = max(family.x_upper.max(), fr.x_quantile(1 - _TAIL / 10))
    grid = np.linspace(lo_grid, hi_grid, cdf_grid)
    dens = np.array([model.density(g, family.theta0) for g in grid])
    cdf_vals = np.concatenate([[0.0], np.cumsum((dens[1:] + dens[:-1]) * 0.5 * np.diff(grid))])
    base = fr.cdf(lo_grid)
    cdf_vals = np.clip(cdf_vals + base, 0.0, 1.0)
    cdf_tab = PchipInterpolator(grid, cdf_vals, extrapolate=False)

    def cdf_clamped(v):
        v = np.clip(v, grid[0], grid[-1])
        return cdf_tab(v)

    above = xs >= fr.x0
    partner = np.where(
        above,
        up_to_down(np.clip(xs, fr.x0, family.x_upper.max())),
        down_to_up(np.clip(xs, family.x_lower.min(), fr.x0)),
    )
    # clamp beyond the grid: the family extends by its last solution
    partner = np.where(xs > family.x_upper.max(), family.x_lower[-1], partner)
    partner = np.where(xs < family.x_lower.min(), family.x_upper[-1], partner)
    hi = np.maximum(xs, partner)
    lo = np.minimum(xs, partner)
    bel = cdf_clamped(hi) - cdf_clamped(lo)
    return np.clip(bel, 0.0, 1.0)


@dataclass(frozen=True)
class UnimodalReport:
    holds: bool
    argmin_t: float
    v_at_zero: float
    flat: bool = False


def check_unimodal_condition(
    model: ScoreModel, theta0: float, grid=None
) -> UnimodalReport:
    """Check whether the curvature, as a function of the score, dips at zero.

    When it does (and is negative there), the balanced intervals are the
    optimal two-sided choice; when the minimum sits elsewhere the intervals
    remain usable but are no longer exactly optimal.
    """
    fr = _frame(model, theta0)
    if grid is None:
        x_lo = fr.x_quantile(5e-4)
        x_hi = fr.x_quantile(1 - 5e-4)
        xs = np.linspace(x_lo, x_hi, 2001)
        grid = np.array([fr.score(x) for x in xs])
    else:
        grid = np.asarray(grid, dtype=float)
        xs = np.array([fr.x_of_t(t) for t in grid])
    vs = np.array([model.curvature(x, theta0) for x in xs])
    v0 = model.curvature(fr.x0, theta0)
    spread = vs.max() - vs.min()
    if spread < 1e-12 * (1.0 + abs(vs.mean())):
        return UnimodalReport(holds=False, argmin_t=float("nan"), v_at_zero=v0, flat=True)
    k = int(np.argmin(vs))
    # local parabolic refinement around the best grid node
    if 0 < k < len(grid) - 1:
        t1, t2, t3 = grid[k - 1], grid[k], grid[k + 1]
        v1, v2, v3 = vs[k - 1], vs[k], vs[k + 1]
        denom = (t1 - t2) * (t1 - t3) * (t2 - t3)
        if denom != 0:
            a = (t3 * (v2 - v1) + t2 * (v1 - v3) + t1 * (v3 - v2)) / denom
            b = (t3**2 * (v1 - v2) + t2**2 * (v3 - v1) + t1**2 * (v2 - v3)) / denom
            argmin = -b / (2 * a) if a > 0 else grid[k]
        else:  # pragma: no cover
            argmin = grid[k]
    else:
        argmin = grid[k]
    t_scale = max(abs(grid[0]), abs(grid[-1]))
    holds = bool(abs(argmin) <= 1e-3 * t_scale and v0 < 0.0)
    return UnimodalReport(holds=holds, argmin_t=float(argmin), v_at_zero=float(v0))


def score_balanced_pl_point(model: ScoreModel, x: float, theta: float) -> float:
    """pl_x(theta) under the score-balanced family rebuilt at theta."""
    fr = _frame(model, theta)
    t_x = fr.score(x)
    if t_x == 0.0:
        return 1.0
    xi_m, xi_p = _balanced_interval_frame(fr, t_x)
    x_a = fr.x_of_t(xi_m) if xi_m != t_x else x
    x_b = fr.x_of_t(xi_p) if xi_p != t_x else x
    lo, hi = (x_a, x_b) if fr.increasing else (x_b, x_a)
    bel = min(1.0, max(0.0, fr.cdf(hi) - fr.cdf(lo)))
    return 1.0 - bel


def score_balanced_pl_curve(model: ScoreModel, theta_grid, x: float):
    """pl_x(theta) across a grid, the family re-solved at each theta."""
    return np.array([score_balanced_pl_point(model, x, float(t)) for t in theta_grid])


def score_balanced_region(model: ScoreModel, x: float, alpha: float, tol: float = 1e-6):
    """The theta interval where the score-balanced plausibility exceeds alpha.

    The plausibility peaks at the theta solving a zero score at the observed x
    and decays on both sides for the models in the catalog.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    lo_b, hi_b = model.param_space
    peak = _theta_with_zero_score(model, x)
    pl = lambda th: score_balanced_pl_point(model, x, th)

    # downward
    th = peak
    left = None
    if math.isfinite(lo_b):
        gap = peak - lo_b
        for k in range(1, 120):
            cand = lo_b + gap * 2.0 ** (-k)
            if pl(cand) < alpha:
                left = cand
                break
        lo_edge = lo_b if left is None else None
    else:
        step = max(1.0, abs(peak))
        cand = peak
        for _ in range(80):
            cand -= step
            step *= 2
            if pl(cand) < alpha:
                left = cand
                break
        lo_edge = -np.inf if left is None else None
    left_end = lo_edge if left is None else _bisect(pl, left, peak, alpha, tol)

    # upward
    right = None
    if math.isfinite(hi_b):
        gap = hi_b - peak
        for k in range(1, 120):
            cand = hi_b - gap * 2.0 ** (-k)
            if pl(cand) < alpha:
                right = cand
                break
        hi_edge = hi_b if right is None else None
    else:
        step = max(1.0, abs(peak))
        cand = peak
        for _ in range(80):
            cand += step
            step *= 2
            if pl(cand) < alpha:
                right = cand
                break
        hi_edge = np.inf if right is None else None
    right_end = hi_edge if right is None else _bisect(pl, right, peak, alpha, tol)
    return float(left_end), float(right_end)


def _bisect(pl, outside, inside, alpha, tol):
    while abs(inside - outside) > tol:
        mid = 0.5 * (outside + inside)
        if pl(mid) > alpha:
            inside = mid
        else:
            outside = mid
    return 0.5 * (outside + inside)


def _theta_with_zero_score(model: ScoreModel, x: float) -> float:
    lo, hi = model.param_space
    f = lambda th: model.score(x, th)
    if math.isfinite(lo):
        anchor = lo + max(1.0, abs(x))
    else:
        anchor = x
    a = b = anchor
    fa = f(anchor)
    if fa == 0.0:
        return anchor
    # march each way until the sign flips
    for direction in (-1, 1):
        step = max(1.0, abs(anchor)) * 0.5
        cand = anchor
        for _ in range(120):
            if direction < 0 and math.isfinite(lo):
                cand = lo + (cand - lo) / 2.0
            else:
                cand = cand + direction * step
                step *= 2.0
            if math.isfinite(hi) and cand >= hi:
                break
            fc = f(cand)
            if (fc > 0) != (fa > 0):
                return find_root(f, min(cand, anchor), max(cand, anchor), tol=1e-12)
    raise BracketError("no parameter value gives zero score at this observation")
