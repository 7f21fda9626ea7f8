"""Numerical kernel: special functions, seeded random streams, quadrature, roots.

Everything downstream (associations, random sets, calibration studies) is built
on this module, so the contracts here are deliberately strict: domain errors
are raised eagerly, quadrature failures are never silent, and random streams
are reproducible bit-for-bit from their (master_seed, stream_index) pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate as _sp_integrate
from scipy import optimize as _sp_optimize
from scipy import special as _sp_special


class NumericError(Exception):
    """Base class for numeric failures in this package."""


class DomainError(NumericError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class QuadratureError(NumericError):
    """Adaptive quadrature failed to meet the requested tolerance."""


class BracketError(NumericError):
    """Root bracketing failed: no sign change on the supplied interval."""


# ---------------------------------------------------------------------------
# Random streams
# ---------------------------------------------------------------------------

_MIX_GAMMA = 0x9E3779B97F4A7C15  # splitmix64 increment


def _splitmix64(z: int) -> int:
    z = (z + _MIX_GAMMA) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return z ^ (z >> 31)


class RandomStream:
    """A reproducible random stream keyed by (master_seed, stream_index).

    Backed by the counter-based Philox generator, so streams with distinct
    indices are statistically independent by construction and a stream's
    output never depends on what other streams have drawn.
    """

    def __init__(self, master_seed: int, stream_index: int = 0):
        if stream_index < 0:
            raise DomainError("stream_index must be non-negative")
        self.master_seed = int(master_seed)
        self.stream_index = int(stream_index)
        seq = np.random.SeedSequence(
            entropy=self.master_seed, spawn_key=(self.stream_index,)
        )
        self.rng = np.random.Generator(np.random.Philox(seq))

    def child(self, index: int) -> "RandomStream":
        """Derive an independent stream; deterministic in (self, index)."""
        mixed = _splitmix64((self.stream_index * _MIX_GAMMA + index + 1) & 0xFFFFFFFFFFFFFFFF)
        return RandomStream(self.master_seed, mixed)

    def uniform(self, size=None):
        return self.rng.random(size)

    def standard_normal(self, size=None):
        return self.rng.standard_normal(size)

    def standard_exponential(self, size=None):
        return self.rng.standard_exponential(size)

    def __repr__(self):  # pragma: no cover
        return f"RandomStream(master_seed={self.master_seed}, stream_index={self.stream_index})"


# ---------------------------------------------------------------------------
# Quadrature / root finding
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-8
    rel_tol: float = 1e-8
    max_subdivisions: int = 200

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise DomainError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be a positive integer")


DEFAULT_QUAD = QuadratureSpec()


def integrate(f, lo: float, hi: float, spec: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Adaptive quadrature of ``f`` over (lo, hi); infinite endpoints allowed.

    Infinite ranges are mapped to a finite interval internally. Raises
    QuadratureError when the requested tolerance cannot be certified.
    """
    out = _sp_integrate.quad(
        f,
        lo,
        hi,
        epsabs=spec.abs_tol,
        epsrel=spec.rel_tol,
        limit=spec.max_subdivisions,
        full_output=True,
    )
    result, abserr = out[0], out[1]
    if len(out) > 3:
        raise QuadratureError(f"quadrature did not converge: {out[3]}")
    if not math.isfinite(result):
        raise QuadratureError("quadrature produced a non-finite result")
    if abserr > spec.abs_tol + spec.rel_tol * abs(result) + 1e-300:
        # quad's own error estimate exceeds the requested tolerance budget
        raise QuadratureError(
            f"quadrature error estimate {abserr:.3e} exceeds tolerance"
        )
    return result


def find_root(f, lo: float, hi: float, tol: float = 1e-12) -> float:
    """Bracketed root of ``f`` on [lo, hi] via Brent's method."""
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise BracketError(
            f"no sign change on [{lo}, {hi}]: f(lo)={flo:.3e}, f(hi)={fhi:.3e}"
        )
    return _sp_optimize.brentq(f, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps)


# ---------------------------------------------------------------------------
# Special functions
# ---------------------------------------------------------------------------


def norm_cdf(z):
    """Standard Gaussian distribution function; vectorized."""
    return _sp_special.ndtr(z)


def norm_quantile(p):
    """Inverse of norm_cdf on (0, 1)."""
    p_arr = np.asarray(p, dtype=float)
    if np.any(p_arr <= 0.0) or np.any(p_arr >= 1.0):
        raise DomainError("norm_quantile requires 0 < p < 1")
    out = _sp_special.ndtri(p_arr)
    return float(out) if np.isscalar(p) or p_arr.ndim == 0 else out


def gamma_cdf(x, shape):
    """CDF of Gamma(shape, 1) at x >= 0; vectorized in both arguments."""
    x_arr = np.asarray(x, dtype=float)
    a_arr = np.asarray(shape, dtype=float)
    if np.any(x_arr < 0):
        raise DomainError("gamma_cdf requires x >= 0")
    if np.any(a_arr <= 0):
        raise DomainError("gamma_cdf requires shape > 0")
    out = _sp_special.gammainc(a_arr, x_arr)
    scalar = np.isscalar(x) and np.isscalar(shape)
    return float(out) if scalar else out


def gamma_quantile(p, shape):
    """Inverse of gamma_cdf in x, for p in (0, 1)."""
    p_arr = np.asarray(p, dtype=float)
    a_arr = np.asarray(shape, dtype=float)
    if np.any(p_arr <= 0.0) or np.any(p_arr >= 1.0):
        raise DomainError("gamma_quantile requires 0 < p < 1")
    if np.any(a_arr <= 0):
        raise DomainError("gamma_quantile requires shape > 0")
    out = _sp_special.gammaincinv(a_arr, p_arr)
    scalar = np.isscalar(p) and np.isscalar(shape)
    return float(out) if scalar else out


def poisson_pmf(k, theta):
    """Poisson(theta) mass at the non-negative integer(s) k."""
    theta_arr = np.asarray(theta, dtype=float)
    if np.any(theta_arr <= 0):
        raise DomainError("poisson_pmf requires theta > 0")
    k_arr = np.asarray(k)
    if np.any(k_arr < 0) or not np.all(np.equal(np.mod(k_arr, 1), 0)):
        raise DomainError("poisson_pmf requires non-negative integer k")
    k_f = np.asarray(k_arr, dtype=float)
    log_pmf = k_f * np.log(theta_arr) - theta_arr - _sp_special.gammaln(k_f + 1.0)
    out = np.exp(log_pmf)
    scalar = np.isscalar(k) and np.isscalar(theta)
    return float(out) if scalar else out


def _chi_over_sqrt_df_logpdf(w: float, df: int) -> float:
    # density of W = sqrt(ChiSq(df)/df) at w > 0
    half = 0.5 * df
    return (
        math.log(2.0)
        + half * math.log(half)
        + (df - 1.0) * math.log(w)
        - half * w * w
        - _sp_special.gammaln(half)
    )


def noncentral_t_cdf(z: float, df: int, ncp: float, spec: QuadratureSpec = DEFAULT_QUAD) -> float:
    """P{(ncp + Z)/W <= z} for Z ~ N(0,1) and W = sqrt(ChiSq(df)/df).

    Evaluated by one-dimensional quadrature over W, conditioning on the chi
    variate; monotone increasing in z and decreasing in ncp.
    """
    if df < 1 or int(df) != df:
        raise DomainError("noncentral_t_cdf requires integer df >= 1")
    df = int(df)

    def integrand(w):
        if w <= 0.0:
            return 0.0
        return norm_cdf(z * w - ncp) * math.exp(_chi_over_sqrt_df_logpdf(w, df))

    # W concentrates near 1 for large df; splitting there helps the subdivision
    left = integrate(integrand, 0.0, 1.0, spec)
    right = integrate(integrand, 1.0, math.inf, spec)
    return min(1.0, max(0.0, left + right))
