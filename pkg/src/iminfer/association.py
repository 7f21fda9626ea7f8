"""Associations: the sampling recipe x = a(theta, u) and its solution sets.

Each built-in model canonicalizes the auxiliary variable to Unif(0,1) and
represents the solution set for scalar theta by a pair of endpoint maps
(focal_lower, focal_upper), monotone in u. Continuous models have singleton
solution sets (lower == upper); the count model has a genuine interval.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np
from scipy import special as _sp_special

from .kernel import DomainError, RandomStream

FocalDirection = Literal["increasing", "decreasing"]


@dataclass(frozen=True)
class Association:
    """A scalar-parameter association with interval solution sets.

    ``focal_lower``/``focal_upper`` map (x, u) to the endpoints of the set of
    parameter values solving x = a(theta, u); both are monotone in u in the
    direction recorded by ``focal_direction``. ``aux_of_lower``/``aux_of_upper``
    are the closed-form crossing maps: aux_of_lower(x, theta) is the u at which
    focal_lower(x, u) passes theta (a CDF-like quantity clipped to [0, 1]).
    They power the exact belief computations and vectorize over x and theta.
    """

    name: str
    param_space: tuple[float, float]
    aux_space: tuple[float, float] = field(default=(0.0, 1.0))
    focal_lower: Callable = None
    focal_upper: Callable = None
    simulate: Callable = None
    aux_of_lower: Callable = None
    aux_of_upper: Callable = None
    focal_direction: FocalDirection = "increasing"
    theta_center: Callable = None

    def focal_interval(self, x, u):
        """Solution-set endpoints (lower, upper) at the observed x and aux u."""
        lo = self.focal_lower(x, u)
        hi = self.focal_upper(x, u)
        return lo, hi


def focal_interval(assoc: Association, x, u):
    return assoc.focal_interval(x, u)


# ---------------------------------------------------------------------------
# Assertions
# ---------------------------------------------------------------------------

_KINDS = (
    "point",
    "not_point",
    "left_ray",
    "right_ray",
    "interval",
    "outside_interval",
    "predicate",
)


@dataclass(frozen=True)
class Assertion:
    """A subset of the parameter space playing the role of a hypothesis.

    Open/closed endpoint distinctions are ignored numerically: they are null
    events under every continuous auxiliary distribution used here.
    """

    kind: str
    theta0: float | None = None
    bounds: tuple[float, float] | None = None
    predicate: Callable | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise DomainError(f"unknown assertion kind {self.kind!r}")
        if self.kind in ("interval", "outside_interval"):
            a, b = self.bounds
            if not a < b:
                raise DomainError("assertion interval requires bounds[0] < bounds[1]")

    # -- constructors --------------------------------------------------------

    @staticmethod
    def point(theta0: float) -> "Assertion":
        return Assertion("point", theta0=float(theta0))

    @staticmethod
    def not_point(theta0: float) -> "Assertion":
        """The two-sided assertion: everything except theta0."""
        return Assertion("not_point", theta0=float(theta0))

    @staticmethod
    def left_ray(theta0: float) -> "Assertion":
        """(-inf, theta0)."""
        return Assertion("left_ray", theta0=float(theta0))

    @staticmethod
    def right_ray(theta0: float) -> "Assertion":
        """(theta0, +inf)."""
        return Assertion("right_ray", theta0=float(theta0))

    @staticmethod
    def interval(a: float, b: float) -> "Assertion":
        return Assertion("interval", bounds=(float(a), float(b)))

    @staticmethod
    def outside_interval(a: float, b: float) -> "Assertion":
        return Assertion("outside_interval", bounds=(float(a), float(b)))

    @staticmethod
    def from_predicate(fn: Callable) -> "Assertion":
        return Assertion("predicate", predicate=fn)

    # -- set algebra ---------------------------------------------------------

    def complement(self) -> "Assertion":
        if self.kind == "point":
            return Assertion.not_point(self.theta0)
        if self.kind == "not_point":
            return Assertion.point(self.theta0)
        if self.kind == "left_ray":
            return Assertion.right_ray(self.theta0)
        if self.kind == "right_ray":
            return Assertion.left_ray(self.theta0)
        if self.kind == "interval":
            return Assertion.outside_interval(*self.bounds)
        if self.kind == "outside_interval":
            return Assertion.interval(*self.bounds)
        fn = self.predicate
        return Assertion.from_predicate(lambda t: not fn(t))

    # -- interval checks (vectorized over lo, hi arrays) ----------------------

    def contains_interval(self, lo, hi):
        """Is the parameter interval [lo, hi] a subset of this assertion?"""
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if self.kind == "point":
            return (lo == self.theta0) & (hi == self.theta0)
        if self.kind == "not_point":
            return ~((lo <= self.theta0) & (self.theta0 <= hi))
        if self.kind == "left_ray":
            return hi < self.theta0
        if self.kind == "right_ray":
            return lo > self.theta0
        if self.kind == "interval":
            a, b = self.bounds
            return (lo > a) & (hi < b)
        if self.kind == "outside_interval":
            a, b = self.bounds
            return (hi < a) | (lo > b)
        return self._predicate_on_grid(lo, hi, require_all=True)

    def intersects_interval(self, lo, hi):
        """Does the parameter interval [lo, hi] meet this assertion?"""
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if self.kind == "point":
            return (lo <= self.theta0) & (self.theta0 <= hi)
        if self.kind == "not_point":
            return ~((lo == self.theta0) & (hi == self.theta0))
        if self.kind == "left_ray":
            return lo < self.theta0
        if self.kind == "right_ray":
            return hi > self.theta0
        if self.kind == "interval":
            a, b = self.bounds
            return (hi > a) & (lo < b)
        if self.kind == "outside_interval":
            a, b = self.bounds
            return (lo < a) | (hi > b)
        return self._predicate_on_grid(lo, hi, require_all=False)

    def _predicate_on_grid(self, lo, hi, require_all: bool, n_grid: int = 33):
        # predicate assertions are checked pointwise on a grid within [lo, hi];
        # approximate for pathological predicates, exact for interval-like ones
        scalar = lo.ndim == 0
        lo2 = np.atleast_1d(lo)
        hi2 = np.atleast_1d(hi)
        out = np.empty(lo2.shape, dtype=bool)
        for i, (a, b) in enumerate(zip(lo2, hi2)):
            if not np.isfinite(a) or not np.isfinite(b):
                span = np.linspace(max(a, -1e12), min(b, 1e12), n_grid)
            else:
                span = np.linspace(a, b, n_grid) if b > a else np.array([a])
            vals = [bool(self.predicate(t)) for t in span]
            out[i] = all(vals) if require_all else any(vals)
        return bool(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# Built-in models
# ---------------------------------------------------------------------------


def _norm_quantile_extended(u):
    # quantile on the closed unit interval, +-inf at the endpoints
    with np.errstate(divide="ignore"):
        return _sp_special.ndtri(np.asarray(u, dtype=float))


def gaussian_mean_assoc() -> Association:
    """Unit-variance Gaussian location model: x = theta + Phi^{-1}(u)."""

    def lower(x, u):
        return x - _norm_quantile_extended(u)

    def simulate(theta, stream: RandomStream, size=None):
        # uniform() never returns exactly 0 or 1, so the quantile is finite
        return theta + _sp_special.ndtri(stream.uniform(size))

    def aux_cross(x, theta):
        return _sp_special.ndtr(np.asarray(x, dtype=float) - np.asarray(theta, dtype=float))

    return Association(
        name="gaussian",
        param_space=(-np.inf, np.inf),
        focal_lower=lower,
        focal_upper=lower,
        simulate=simulate,
        aux_of_lower=aux_cross,
        aux_of_upper=aux_cross,
        focal_direction="decreasing",
        theta_center=lambda x: float(x),
    )


def _gamma_quantile_shape(shape: float, u):
    """Gamma(shape,1) quantile extended to the closed unit interval.

    The shape-zero member is the point mass at 0, so its quantile is
    identically 0; this keeps the count model's solution sets total at x = 0.
    """
    u = np.asarray(u, dtype=float)
    if shape == 0:
        return np.zeros_like(u)
    out = np.where(u >= 1.0, np.inf, _sp_special.gammaincinv(shape, np.clip(u, 0.0, 1.0 - 1e-16)))
    out = np.where(u <= 0.0, 0.0, out)
    return out


def poisson_mean_assoc() -> Association:
    """Poisson mean model via the quantile-inversion association.

    The solution set at observed count x is the interval
    (G_x^{-1}(u), G_{x+1}^{-1}(u)] in terms of Gamma(., 1) quantiles, with the
    shape-0 quantile taken identically 0.
    """

    def check_x(x):
        if x < 0 or float(x) != int(x):
            raise DomainError("poisson observation must be a non-negative integer")
        return int(x)

    def lower(x, u):
        return _gamma_quantile_shape(check_x(x), u)

    def upper(x, u):
        return _gamma_quantile_shape(check_x(x) + 1, u)

    def simulate(theta, stream: RandomStream, size=None):
        # invert F_theta(x-1) <= 1-u < F_theta(x); a.s. unique
        from scipy import stats as _st

        u = stream.uniform(size)
        return _st.poisson.ppf(1.0 - u, theta).astype(int)

    def check_x_array(x):
        x_arr = np.asarray(x, dtype=float)
        if np.any(x_arr < 0) or not np.all(np.equal(np.mod(x_arr, 1), 0)):
            raise DomainError("poisson observation must be a non-negative integer")
        return x_arr

    def aux_lower(x, theta):
        # gammainc(0, theta) == 1 handles the x = 0 boundary convention
        return _sp_special.gammainc(check_x_array(x), np.asarray(theta, dtype=float))

    def aux_upper(x, theta):
        return _sp_special.gammainc(check_x_array(x) + 1, np.asarray(theta, dtype=float))

    return Association(
        name="poisson",
        param_space=(0.0, np.inf),
        focal_lower=lower,
        focal_upper=upper,
        simulate=simulate,
        aux_of_lower=aux_lower,
        aux_of_upper=aux_upper,
        focal_direction="increasing",
        theta_center=lambda x: float(x) + 0.5,
    )


def exponential_mean_assoc() -> Association:
    """Exponential model with mean theta: x = theta * (-log(1-u))."""

    def lower(x, u):
        if np.any(np.asarray(x) <= 0):
            raise DomainError("exponential observation must be positive")
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore"):
            denom = -np.log1p(-np.clip(u, 0.0, 1.0))
            out = np.where(u >= 1.0, 0.0, np.where(u <= 0.0, np.inf, x / denom))
        return out

    def simulate(theta, stream: RandomStream, size=None):
        return theta * stream.standard_exponential(size)

    def aux_cross(x, theta):
        # x / (-log(1-u)) = theta  <=>  u = 1 - exp(-x/theta)
        x = np.asarray(x, dtype=float)
        theta = np.asarray(theta, dtype=float)
        return -np.expm1(-x / theta)

    return Association(
        name="exponential",
        param_space=(0.0, np.inf),
        focal_lower=lower,
        focal_upper=lower,
        simulate=simulate,
        aux_of_lower=aux_cross,
        aux_of_upper=aux_cross,
        focal_direction="decreasing",
        theta_center=lambda x: float(x) / np.log(2.0),
    )


_BUILTIN = {
    "gaussian": gaussian_mean_assoc,
    "poisson": poisson_mean_assoc,
    "exponential": exponential_mean_assoc,
}


def association_by_name(name: str) -> Association:
    """Look up a built-in model by its CLI identifier."""
    try:
        return _BUILTIN[name]()
    except KeyError:
        raise DomainError(
            f"unknown model {name!r}; choose from {sorted(_BUILTIN)}"
        ) from None
