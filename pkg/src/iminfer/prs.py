"""Predictive random sets on the unit interval.

A predictive random set predicts the unobserved auxiliary draw with a random
subset rather than a point. All built-in families are nested, which is what
delivers the calibration guarantee: the miss probability Q(u) = P{S not
containing u}, evaluated at a fresh uniform draw, is stochastically no larger
than Unif(0,1).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .kernel import DomainError, RandomStream

_H_CALIBRATION_SEED = 0x1D5B2F  # fixed seed for the cached miss-probability table
_H_CALIBRATION_DRAWS = 100_000


@dataclass(frozen=True)
class IntervalSet:
    """A realized set of the form [lo, hi] inside [0, 1]."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (0.0 <= self.lo <= self.hi <= 1.0):
            raise DomainError("interval realized set requires 0 <= lo <= hi <= 1")

    def contains(self, u) -> bool:
        return bool(self.lo <= u <= self.hi)

    def intervals(self):
        return [(self.lo, self.hi)]


@dataclass(frozen=True)
class SublevelSet:
    """A realized set {u : h(u) <= threshold} for a supplied h."""

    h: Callable
    threshold: float
    grid_points: int = 2049

    def contains(self, u) -> bool:
        return bool(self.h(u) <= self.threshold)

    def intervals(self):
        """Decompose into maximal closed u-intervals on a fine grid.

        Crossing points are refined by bisection; adequate for continuous h
        with finitely many sign changes of h - threshold.
        """
        us = np.linspace(0.0, 1.0, self.grid_points)
        inside = np.array([self.h(u) <= self.threshold for u in us])
        if not inside.any():
            return []
        pieces = []
        i = 0
        n = len(us)
        while i < n:
            if not inside[i]:
                i += 1
                continue
            j = i
            while j + 1 < n and inside[j + 1]:
                j += 1
            lo = us[i] if i == 0 else self._bisect(us[i - 1], us[i])
            hi = us[j] if j == n - 1 else self._bisect(us[j + 1], us[j])
            pieces.append((lo, hi))
            i = j + 1
        return pieces

    def _bisect(self, outside: float, inside: float) -> float:
        for _ in range(40):
            mid = 0.5 * (outside + inside)
            if self.h(mid) <= self.threshold:
                inside = mid
            else:
                outside = mid
        return 0.5 * (outside + inside)


@dataclass(frozen=True)
class PredictiveRandomSet:
    """A nested random subset of [0, 1] with an explicit miss probability.

    ``draw`` realizes a set from an explicit stream; ``miss_prob`` is the map
    u -> P{S does not contain u}, vectorized over u.
    """

    family_tag: str
    draw: Callable[[RandomStream], object]
    miss_prob: Callable

    def __repr__(self):  # pragma: no cover
        return f"PredictiveRandomSet({self.family_tag})"


def default_prs() -> PredictiveRandomSet:
    """Symmetric-about-0.5 intervals: S(u) = {u': |u'-0.5| < |u-0.5|}."""

    def draw(stream: RandomStream) -> IntervalSet:
        half = abs(stream.uniform() - 0.5)
        return IntervalSet(0.5 - half, 0.5 + half)

    def miss_prob(u):
        return np.abs(2.0 * np.asarray(u, dtype=float) - 1.0)

    return PredictiveRandomSet("default", draw, miss_prob)


def one_sided_prs(side: str) -> PredictiveRandomSet:
    """[0, U] for side="lower", [U, 1] for side="upper"."""
    if side == "lower":

        def draw(stream: RandomStream) -> IntervalSet:
            return IntervalSet(0.0, stream.uniform())

        def miss_prob(u):
            # P{U < u} for S = [0, U]
            return np.asarray(u, dtype=float) + 0.0

    elif side == "upper":

        def draw(stream: RandomStream) -> IntervalSet:
            return IntervalSet(stream.uniform(), 1.0)

        def miss_prob(u):
            return 1.0 - np.asarray(u, dtype=float)

    else:
        raise DomainError("one_sided_prs side must be 'lower' or 'upper'")
    return PredictiveRandomSet(side, draw, miss_prob)


def singleton_prs() -> PredictiveRandomSet:
    """The degenerate set {U}: reproduces fiducial answers, fails validity."""

    def draw(stream: RandomStream) -> IntervalSet:
        u = stream.uniform()
        return IntervalSet(u, u)

    def miss_prob(u):
        return np.ones_like(np.asarray(u, dtype=float))

    return PredictiveRandomSet("singleton", draw, miss_prob)


def h_nested_prs(h: Callable, miss_prob: Callable | None = None) -> PredictiveRandomSet:
    """Sublevel-set family S = {u : h(u) < h(U)} for a measurable h.

    Valid for any h; efficient when h is continuous and constant only on null
    sets. When no analytic ``miss_prob`` is supplied it is estimated once from
    a cached table of h values at 10^5 fixed-seed uniform draws.
    """

    def draw(stream: RandomStream) -> SublevelSet:
        return SublevelSet(h, float(h(stream.uniform())))

    if miss_prob is None:
        table = np.sort(
            np.asarray(
                [h(u) for u in RandomStream(_H_CALIBRATION_SEED).uniform(_H_CALIBRATION_DRAWS)]
            )
        )

        def miss_prob(u):
            # P{h(U) <= h(u)} from the cached sample
            hu = np.asarray([h(v) for v in np.atleast_1d(np.asarray(u, dtype=float))])
            est = np.searchsorted(table, hu, side="right") / len(table)
            return est[0] if np.isscalar(u) else est

    return PredictiveRandomSet("h_nested", draw, miss_prob)


_BUILTIN = {
    "default": default_prs,
    "lower": lambda: one_sided_prs("lower"),
    "upper": lambda: one_sided_prs("upper"),
    "singleton": singleton_prs,
}


def prs_by_name(name: str) -> PredictiveRandomSet:
    """Look up a built-in family by its CLI identifier.

    "score-balanced" is intentionally absent here: that family lives with the
    score models and is dispatched by the CLI directly.
    """
    try:
        return _BUILTIN[name]()
    except KeyError:
        raise DomainError(
            f"unknown predictive random set {name!r}; choose from {sorted(_BUILTIN)}"
        ) from None
