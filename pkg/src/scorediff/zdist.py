"""Probability distributions on the integers.

Four families are provided: the Skellam distribution (in rate form and in
mean/variance form), its zero-inflated version, and discretized normal and
Laplace distributions.  Every family exposes ``logpmf``, ``pmf``, ``cdf``,
``quantile`` and ``sample``; evaluation is done in log space wherever the
linear-space value could underflow.

The discrete Laplace scale is the ``b`` of the classical density
``exp(-|x - mu| / b) / (2 b)``, not a variance.

The underscore-prefixed ``*_kernel`` functions at the bottom are vectorized
evaluators (log-pmf, cdf and their derivatives in the mean/scale
parametrization) used by the regression fitting code.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.special import gammaln, log_ndtr, logsumexp, ndtr, ndtri

__all__ = [
    "ParameterError",
    "SkellamParams",
    "Skellam2Params",
    "ZiSkellamParams",
    "DiscNormalParams",
    "DiscLaplaceParams",
    "DistOnZ",
    "log_bessel_i",
    "skellam_log_pmf",
    "skellam2_to_rates",
    "skellam_moments",
    "zi_skellam_log_pmf",
    "disc_normal_log_pmf",
    "disc_laplace_log_pmf",
    "dist_cdf",
    "dist_quantile",
    "dist_sample",
    "support_bounds",
]

TAIL_EPS = 1e-12
# cdf sums use a tighter cut than the public normalization target
_CDF_EPS = 1e-15
_LOG_TERM_CUT = math.log(1e-18)


class ParameterError(ValueError):
    """Raised when distribution parameters violate their constraints."""


# ---------------------------------------------------------------------------
# Bessel function


def log_bessel_i(r, x):
    """Log of the modified Bessel function of the first kind, ``log I_r(x)``.

    Sums the power series ``sum_m (x^2/4)^m / (m! Gamma(r+m+1))`` times
    ``(x/2)^r`` in log space.  Enough terms are taken that the last one is
    below ``1e-18`` of the largest.

    Parameters
    ----------
    r : int or array_like of int
        Non-negative integer order.
    x : float or array_like
        Strictly positive argument.

    Returns
    -------
    float or ndarray
    """
    r_arr = np.asarray(r)
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr <= 0) or np.any(np.isnan(x_arr)):
        raise ParameterError("log_bessel_i requires x > 0")
    if np.any(r_arr < 0) or np.any(np.floor(r_arr) != r_arr):
        raise ParameterError("log_bessel_i requires a non-negative integer order")
    scalar = r_arr.ndim == 0 and x_arr.ndim == 0
    r_b, x_b = np.broadcast_arrays(r_arr.astype(float), x_arr)
    r_f = r_b.ravel()
    x_f = x_b.ravel()
    if r_f.size == 0:
        return np.empty(r_b.shape)

    log_half = np.log(x_f / 2.0)
    # index of the largest series term
    m_peak = 0.5 * (np.sqrt(r_f * r_f + x_f * x_f) - r_f)
    top = float(m_peak.max())
    n_terms = int(math.ceil(top + 12.0 * math.sqrt(top + 1.0) + 25.0))
    while True:
        m = np.arange(n_terms, dtype=float)
        lt = (
            (2.0 * m + r_f[:, None]) * log_half[:, None]
            - gammaln(m + 1.0)
            - gammaln(r_f[:, None] + m + 1.0)
        )
        lmax = lt.max(axis=1)
        if np.all(lt[:, -1] - lmax < _LOG_TERM_CUT):
            break
        n_terms *= 2
    out = logsumexp(lt, axis=1).reshape(r_b.shape)
    return float(out) if scalar else out


# ---------------------------------------------------------------------------
# Parameter types / distributions


def _poisson_upper_cut(theta, eps):
    """Smallest k >= 0 with P(Poisson(theta) > k) <= eps (Chernoff bound)."""
    theta = np.asarray(theta, dtype=float)
    flat = np.atleast_1d(theta).ravel()
    out = np.empty(flat.shape, dtype=np.int64)
    log_eps = math.log(eps)
    for i, t in enumerate(flat):
        # P(X >= a) <= exp(-t) (e t / a)^a  for a > t
        a = max(int(math.floor(t)) + 1, 1)
        while True:
            bound = -t + a * (1.0 + math.log(t) - math.log(a)) if t > 0 else -np.inf
            if bound <= log_eps:
                break
            a += 1
        out[i] = a - 1
    return out.reshape(theta.shape) if theta.ndim else int(out[0])


@dataclass(frozen=True)
class SkellamParams:
    """Skellam distribution of ``X1 - X2`` with ``Xi ~ Poisson(theta_i)``."""

    theta1: float
    theta2: float

    def __post_init__(self):
        if not (self.theta1 > 0 and self.theta2 > 0):
            raise ParameterError(
                f"Skellam rates must be positive, got ({self.theta1}, {self.theta2})"
            )
        if not (math.isfinite(self.theta1) and math.isfinite(self.theta2)):
            raise ParameterError("Skellam rates must be finite")

    @property
    def rates(self):
        return self.theta1, self.theta2

    def mean(self):
        return self.theta1 - self.theta2

    def var(self):
        return self.theta1 + self.theta2

    def logpmf(self, z):
        return skellam_log_pmf(z, self)

    def pmf(self, z):
        return np.exp(self.logpmf(z))

    def support(self, eps=TAIL_EPS):
        lo = -_poisson_upper_cut(self.theta2, eps / 2)
        hi = _poisson_upper_cut(self.theta1, eps / 2)
        return int(lo), int(hi)

    def cdf(self, z):
        return _grid_cdf(self, z)

    def quantile(self, u):
        return _grid_quantile(self, u)

    def sample(self, rng, size=None):
        return rng.poisson(self.theta1, size) - rng.poisson(self.theta2, size)


@dataclass(frozen=True)
class Skellam2Params:
    """Skellam distribution parametrized by mean ``mu`` and variance ``sigma2``."""

    mu: float
    sigma2: float

    def __post_init__(self):
        if not (math.isfinite(self.mu) and math.isfinite(self.sigma2)):
            raise ParameterError("Skellam2 parameters must be finite")
        if not self.sigma2 > abs(self.mu):
            raise ParameterError(
                f"Skellam2 requires sigma2 > |mu|, got mu={self.mu}, sigma2={self.sigma2}"
            )

    def to_rates(self):
        return skellam2_to_rates(self)

    def mean(self):
        return self.mu

    def var(self):
        return self.sigma2

    def logpmf(self, z):
        return skellam_log_pmf(z, self.to_rates())

    def pmf(self, z):
        return np.exp(self.logpmf(z))

    def support(self, eps=TAIL_EPS):
        return self.to_rates().support(eps)

    def cdf(self, z):
        return self.to_rates().cdf(z)

    def quantile(self, u):
        return self.to_rates().quantile(u)

    def sample(self, rng, size=None):
        return self.to_rates().sample(rng, size)


@dataclass(frozen=True)
class ZiSkellamParams:
    """Skellam2 base with an extra point mass ``p`` at zero."""

    base: Skellam2Params
    p: float

    def __post_init__(self):
        if not isinstance(self.base, Skellam2Params):
            raise ParameterError("zero-inflated base must be Skellam2Params")
        if not (0.0 <= self.p < 1.0):
            raise ParameterError(f"inflation probability must lie in [0, 1), got {self.p}")

    def mean(self):
        return (1.0 - self.p) * self.base.mu

    def var(self):
        m = self.base.mu
        return (1.0 - self.p) * (self.base.sigma2 + m * m) - self.mean() ** 2

    def logpmf(self, z):
        return zi_skellam_log_pmf(z, self)

    def pmf(self, z):
        return np.exp(self.logpmf(z))

    def support(self, eps=TAIL_EPS):
        return self.base.support(eps)

    def cdf(self, z):
        z = np.asarray(z)
        out = (1.0 - self.p) * self.base.cdf(z) + self.p * (z >= 0)
        return float(out) if out.ndim == 0 else out

    def quantile(self, u):
        return _grid_quantile(self, u)

    def sample(self, rng, size=None):
        gate = rng.random(size) < self.p
        draw = self.base.sample(rng, size)
        return np.where(gate, 0, draw) if size is not None else (0 if gate else int(draw))


@dataclass(frozen=True)
class DiscNormalParams:
    """Normal(mu, sigma2) discretized onto unit cells centred at the integers."""

    mu: float
    sigma2: float

    def __post_init__(self):
        if not (math.isfinite(self.mu) and self.sigma2 > 0 and math.isfinite(self.sigma2)):
            raise ParameterError(f"invalid discrete normal parameters ({self.mu}, {self.sigma2})")

    @property
    def sigma(self):
        return math.sqrt(self.sigma2)

    def mean(self):
        # cells are symmetric around mu only for integer or half-integer mu
        zs = np.arange(*self._range())
        return float(np.sum(zs * self.pmf(zs)))

    def var(self):
        zs = np.arange(*self._range())
        pm = self.pmf(zs)
        m = np.sum(zs * pm)
        return float(np.sum((zs - m) ** 2 * pm))

    def _range(self):
        lo, hi = self.support(1e-16)
        return lo, hi + 1

    def logpmf(self, z):
        return disc_normal_log_pmf(z, self)

    def pmf(self, z):
        return np.exp(self.logpmf(z))

    def support(self, eps=TAIL_EPS):
        k = -ndtri(eps / 2) * self.sigma
        return int(math.floor(self.mu - k - 0.5)), int(math.ceil(self.mu + k + 0.5))

    def cdf(self, z):
        z = np.asarray(z, dtype=float)
        out = ndtr((z + 0.5 - self.mu) / self.sigma)
        return float(out) if out.ndim == 0 else out

    def quantile(self, u):
        u = _check_u(u)
        z = np.ceil(self.mu + self.sigma * ndtri(u) - 0.5)
        return _fix_quantile(self, z, u)

    def sample(self, rng, size=None):
        return self.quantile(_uniform_open(rng, size))


@dataclass(frozen=True)
class DiscLaplaceParams:
    """Laplace(mu, scale) discretized onto unit cells centred at the integers."""

    mu: float
    scale: float

    def __post_init__(self):
        if not (math.isfinite(self.mu) and self.scale > 0 and math.isfinite(self.scale)):
            raise ParameterError(f"invalid discrete Laplace parameters ({self.mu}, {self.scale})")

    def mean(self):
        zs = np.arange(*self._range())
        return float(np.sum(zs * self.pmf(zs)))

    def var(self):
        zs = np.arange(*self._range())
        pm = self.pmf(zs)
        m = np.sum(zs * pm)
        return float(np.sum((zs - m) ** 2 * pm))

    def _range(self):
        lo, hi = self.support(1e-16)
        return lo, hi + 1

    def logpmf(self, z):
        return disc_laplace_log_pmf(z, self)

    def pmf(self, z):
        return np.exp(self.logpmf(z))

    def support(self, eps=TAIL_EPS):
        # each tail of the continuous Laplace beyond distance d is exp(-d/b)/2
        d = -self.scale * math.log(eps)
        return int(math.floor(self.mu - d - 0.5)), int(math.ceil(self.mu + d + 0.5))

    def cdf(self, z):
        z = np.asarray(z, dtype=float)
        out = _laplace_cdf(z + 0.5, self.mu, self.scale)
        return float(out) if out.ndim == 0 else out

    def quantile(self, u):
        u = _check_u(u)
        # inverse of the continuous Laplace cdf
        x = np.where(
            u < 0.5,
            self.mu + self.scale * np.log(2.0 * u),
            self.mu - self.scale * np.log(2.0 * (1.0 - u)),
        )
        return _fix_quantile(self, np.ceil(x - 0.5), u)

    def sample(self, rng, size=None):
        return self.quantile(_uniform_open(rng, size))


DistOnZ = Union[SkellamParams, Skellam2Params, ZiSkellamParams, DiscNormalParams, DiscLaplaceParams]


# ---------------------------------------------------------------------------
# Skellam pieces


def skellam2_to_rates(params):
    """Convert mean/variance form to the two Poisson rates."""
    mu, s2 = float(params.mu), float(params.sigma2)
    if not s2 > abs(mu):
        raise ParameterError(f"sigma2 must exceed |mu| (mu={mu}, sigma2={s2})")
    return SkellamParams((s2 + mu) / 2.0, (s2 - mu) / 2.0)


def skellam_moments(params):
    """Return ``(mean, variance, skewness)`` of a Skellam distribution."""
    t1, t2 = params.theta1, params.theta2
    var = t1 + t2
    return t1 - t2, var, (t1 - t2) / var**1.5


def _skellam_logpmf_arrays(z, t1, t2):
    z = np.asarray(z)
    t1 = np.asarray(t1, dtype=float)
    t2 = np.asarray(t2, dtype=float)
    x = 2.0 * np.sqrt(t1 * t2)
    return -(t1 + t2) + 0.5 * z * (np.log(t1) - np.log(t2)) + log_bessel_i(np.abs(z), x)


def skellam_log_pmf(z, params):
    """Log probability of ``z`` under ``Skellam(theta1, theta2)``.

    ``params`` may also be a :class:`Skellam2Params`.
    """
    if isinstance(params, Skellam2Params):
        params = params.to_rates()
    z_arr = np.asarray(z)
    if not np.issubdtype(z_arr.dtype, np.integer):
        if np.any(np.floor(z_arr) != z_arr):
            raise ParameterError("Skellam support is the integers")
        z_arr = z_arr.astype(np.int64)
    out = _skellam_logpmf_arrays(z_arr, params.theta1, params.theta2)
    return float(out) if np.ndim(out) == 0 else out


def skellam_log_pmf_grid(theta1, theta2, lo, hi):
    """Log pmf of many Skellam laws on the common integer range ``[lo, hi]``.

    Uses the three-term recurrence ``z p(z) = theta1 p(z-1) - theta2 p(z+1)``
    run towards zero from both ends, which is the numerically stable
    direction; the two starting values at each end come from the series.

    Parameters
    ----------
    theta1, theta2 : array_like, shape (n,)
    lo, hi : int

    Returns
    -------
    ndarray, shape (n, hi - lo + 1)
    """
    t1 = np.atleast_1d(np.asarray(theta1, dtype=float))
    t2 = np.atleast_1d(np.asarray(theta2, dtype=float))
    t1, t2 = np.broadcast_arrays(t1, t2)
    n = t1.shape[0]
    width = hi - lo + 1
    out = np.empty((n, width))
    if width <= 0:
        return out

    if hi >= 0:
        start = max(lo, 0)
        if hi - start < 2:
            zs = np.arange(start, hi + 1)
            out[:, start - lo:] = _skellam_logpmf_arrays(zs[None, :], t1[:, None], t2[:, None])
        else:
            _recur_down(out, lo, start, hi, t1, t2)
    if lo < 0:
        stop = min(hi, -1)
        if stop - lo < 2:
            zs = np.arange(lo, stop + 1)
            out[:, : stop - lo + 1] = _skellam_logpmf_arrays(zs[None, :], t1[:, None], t2[:, None])
        else:
            # p(-z; t1, t2) = p(z; t2, t1): reuse the downward pass with swapped rates
            mirror = np.empty((n, stop - lo + 1))
            _recur_down(mirror, -stop, -stop, -lo, t2, t1)
            out[:, : stop - lo + 1] = mirror[:, ::-1]
    return out


def _recur_down(out, lo, start, hi, t1, t2):
    """Fill log p(z) for z in [start, hi] (start >= 0) into ``out[:, z - lo]``."""
    top = _skellam_logpmf_arrays(np.array([hi, hi - 1])[None, :], t1[:, None], t2[:, None])
    log_ref = top[:, 0].copy()
    nxt = np.ones_like(t1)                # p(hi) / ref
    cur = np.exp(top[:, 1] - log_ref)      # p(hi-1) / ref
    out[:, hi - lo] = log_ref
    out[:, hi - 1 - lo] = np.log(cur) + log_ref
    for z in range(hi - 1, start, -1):
        # p(z-1) = (z p(z) + theta2 p(z+1)) / theta1
        prev = (z * cur + t2 * nxt) / t1
        nxt, cur = cur, prev
        big = cur > 1e250
        if np.any(big):
            shift = np.where(big, np.log(cur), 0.0)
            f = np.exp(-shift)
            cur = cur * f
            nxt = nxt * f
            log_ref = log_ref + shift
        out[:, z - 1 - lo] = np.log(cur) + log_ref


def zi_skellam_log_pmf(z, params):
    """Log pmf of the zero-inflated Skellam mixture."""
    base = skellam_log_pmf(z, params.base)
    p = params.p
    z_arr = np.asarray(z)
    if p == 0.0:
        return base
    nonzero = np.log1p(-p) + np.asarray(base)
    zero = np.logaddexp(math.log(p), nonzero)
    out = np.where(z_arr == 0, zero, nonzero)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Discretized continuous families


def _log_diff_ndtr(a, b):
    """log(Phi(b) - Phi(a)) for a < b, accurate in both tails."""
    a, b = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float))
    upper = a > 0
    lower = b < 0
    out = np.empty(a.shape)
    mid = ~(upper | lower)
    # right tail: Phi(-a) - Phi(-b)
    la, lb = log_ndtr(-a[upper]), log_ndtr(-b[upper])
    out[upper] = la + np.log1p(-np.exp(lb - la))
    la, lb = log_ndtr(a[lower]), log_ndtr(b[lower])
    out[lower] = lb + np.log1p(-np.exp(la - lb))
    out[mid] = np.log(ndtr(b[mid]) - ndtr(a[mid]))
    return out


def disc_normal_log_pmf(z, params):
    """Log pmf ``log(Phi(z + 0.5) - Phi(z - 0.5))`` for ``N(mu, sigma2)``."""
    z = np.asarray(z, dtype=float)
    s = math.sqrt(params.sigma2)
    out = _log_diff_ndtr((z - 0.5 - params.mu) / s, (z + 0.5 - params.mu) / s)
    return float(out) if z.ndim == 0 else out


def _laplace_cdf(x, mu, b):
    d = (np.asarray(x, dtype=float) - mu) / b
    return np.where(d < 0, 0.5 * np.exp(np.minimum(d, 0.0)), 1.0 - 0.5 * np.exp(-np.maximum(d, 0.0)))


def _disc_laplace_logpmf_arrays(z, mu, b):
    z = np.asarray(z, dtype=float)
    lo = z - 0.5 - mu
    hi = z + 0.5 - mu
    log_cell = math.log(0.5) + np.log(-np.expm1(-1.0 / b))
    right = lo >= 0
    left = hi <= 0
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(
            right,
            log_cell - lo / b,
            np.where(
                left,
                log_cell + hi / b,
                np.log(1.0 - 0.5 * np.exp(-np.abs(hi) / b) - 0.5 * np.exp(-np.abs(lo) / b)),
            ),
        )
    return out


def disc_laplace_log_pmf(z, params):
    """Log pmf ``log(F(z + 0.5) - F(z - 0.5))`` for a Laplace cdf ``F``."""
    out = _disc_laplace_logpmf_arrays(z, params.mu, params.scale)
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# Generic cdf / quantile / sampling


def support_bounds(d, eps=TAIL_EPS):
    """Integer range ``(lo, hi)`` outside of which ``d`` has mass below ``eps``."""
    return d.support(eps)


def _grid_cdf(d, z):
    z = np.asarray(z)
    lo, hi = d.support(_CDF_EPS)
    zmin = int(np.min(z)) if z.size else lo
    zmax = int(np.max(z)) if z.size else hi
    a, b = min(lo, max(zmin, lo - 400)), max(hi, min(zmax, hi + 400))
    zs = np.arange(a, b + 1)
    pm = np.exp(d.logpmf(zs))
    low = np.cumsum(pm)
    # upper tail by summing from the right keeps precision near 1
    high = 1.0 - (np.cumsum(pm[::-1])[::-1] - pm)
    mode = zs[np.argmax(pm)]
    cdf_vals = np.where(zs < mode, low, high)
    cdf_vals = np.clip(cdf_vals, 0.0, 1.0)
    idx = np.clip(z - a, -1, zs.size - 1)
    out = np.where(idx < 0, 0.0, cdf_vals[np.maximum(idx, 0)])
    out = np.where(z > b, 1.0, out)
    return float(out) if out.ndim == 0 else out


def _check_u(u):
    u = np.asarray(u, dtype=float)
    if np.any((u <= 0) | (u >= 1)):
        raise ParameterError("quantile level must lie strictly inside (0, 1)")
    return u


def _fix_quantile(d, z, u):
    # guard against rounding at cell edges: enforce cdf(z) >= u > cdf(z-1)
    z = np.asarray(z, dtype=float)
    z = np.where(d.cdf(z) < u, z + 1, z)
    z = np.where(d.cdf(z - 1) >= u, z - 1, z)
    out = z.astype(np.int64)
    return int(out) if out.ndim == 0 else out


def _grid_quantile(d, u):
    u = _check_u(u)
    lo, hi = d.support(_CDF_EPS)
    zs = np.arange(lo, hi + 1)
    cdf_vals = d.cdf(zs)
    idx = np.searchsorted(cdf_vals, u, side="left")
    out = np.asarray(zs[np.minimum(idx, zs.size - 1)])
    # levels above cdf(hi): walk outward
    over = idx >= zs.size
    if np.any(over):
        flat = np.atleast_1d(out).copy()
        u_flat = np.atleast_1d(u)
        for i in np.flatnonzero(np.atleast_1d(over)):
            k = hi
            while d.cdf(k) < u_flat[i]:
                k += 1
            flat[i] = k
        out = flat.reshape(out.shape)
    return int(out) if out.ndim == 0 else out


def _uniform_open(rng, size):
    u = rng.random(size)
    # Generator.random is on [0, 1); map an exact 0 into the open interval
    return np.where(u == 0.0, np.nextafter(0.0, 1.0), u)


def dist_cdf(z, d):
    """``P(Z <= z)`` for any distribution in :data:`DistOnZ`."""
    return d.cdf(z)


def dist_quantile(u, d):
    """Smallest integer ``z`` with ``cdf(z) >= u``."""
    return d.quantile(u)


def dist_sample(d, rng, size=None):
    """Draw from ``d`` using the caller's ``numpy.random.Generator``."""
    return d.sample(rng, size)


# ---------------------------------------------------------------------------
# Vectorized kernels for regression fitting.
#
# Each family is evaluated at arrays (y, mu, scale), where scale is sigma2 for
# the Skellam and discrete normal and the Laplace b otherwise.  Returned
# derivatives are with respect to mu and scale.


def skellam_kernel_valid(mu, sigma2):
    return bool(np.all(sigma2 > np.abs(mu)))


def skellam_logpmf_kernel(y, mu, sigma2):
    """Log pmf and its (mu, sigma2) derivatives for Skellam2 observations."""
    t1 = 0.5 * (sigma2 + mu)
    t2 = 0.5 * (sigma2 - mu)
    lp = _skellam_logpmf_arrays(y, t1, t2)
    r_dn = np.exp(_skellam_logpmf_arrays(y - 1, t1, t2) - lp)  # p(y-1)/p(y)
    r_up = np.exp(_skellam_logpmf_arrays(y + 1, t1, t2) - lp)  # p(y+1)/p(y)
    # dp(z)/dtheta1 = p(z-1) - p(z);  dp(z)/dtheta2 = p(z+1) - p(z)
    d_mu = 0.5 * (r_dn - r_up)
    d_s2 = 0.5 * (r_dn + r_up) - 1.0
    return lp, d_mu, d_s2


def skellam_cdf_kernel(y, mu, sigma2):
    """cdf at ``y`` and ``y - 1`` with (mu, sigma2) derivatives.

    Returns ``(F(y), F(y-1), dF(y)/dmu, dF(y)/ds2, dF(y-1)/dmu, dF(y-1)/ds2)``.
    """
    y = np.asarray(y, dtype=np.int64)
    t1 = 0.5 * (sigma2 + mu)
    t2 = 0.5 * (sigma2 - mu)
    # the Chernoff cut is monotone in the rate, so the largest rate bounds all rows
    lo = -_poisson_upper_cut(float(np.max(t2)), _CDF_EPS)
    hi = max(_poisson_upper_cut(float(np.max(t1)), _CDF_EPS), int(y.max()) + 2)
    lo = min(lo, int(y.min()) - 2)
    grid = np.exp(skellam_log_pmf_grid(t1, t2, lo, hi))
    csum = np.cumsum(grid, axis=1)
    rows = np.arange(y.shape[0])
    j = y - lo
    p_m1 = grid[rows, j - 1]
    p_0 = grid[rows, j]
    p_p1 = grid[rows, j + 1]
    f_hi = np.minimum(csum[rows, j], 1.0)
    f_lo = np.minimum(csum[rows, j - 1], 1.0)
    # dF(z)/dtheta1 = -p(z);  dF(z)/dtheta2 = p(z+1)
    dhi_mu = -0.5 * (p_0 + p_p1)
    dhi_s2 = 0.5 * (p_p1 - p_0)
    dlo_mu = -0.5 * (p_m1 + p_0)
    dlo_s2 = 0.5 * (p_0 - p_m1)
    return f_hi, f_lo, dhi_mu, dhi_s2, dlo_mu, dlo_s2


def normal_logpmf_kernel(y, mu, sigma2):
    s = np.sqrt(sigma2)
    a = (y - 0.5 - mu) / s
    b = (y + 0.5 - mu) / s
    lp = _log_diff_ndtr(a, b)
    # dPhi(t)/dt = phi(t); derivative ratios via exp(log phi - lp)
    lphi_a = -0.5 * a * a - 0.5 * math.log(2 * math.pi)
    lphi_b = -0.5 * b * b - 0.5 * math.log(2 * math.pi)
    ea = np.exp(lphi_a - lp)
    eb = np.exp(lphi_b - lp)
    d_mu = (ea - eb) / s
    d_s2 = (a * ea - b * eb) / (2.0 * sigma2)
    return lp, d_mu, d_s2


def normal_cdf_kernel(y, mu, sigma2):
    s = np.sqrt(sigma2)
    b = (y + 0.5 - mu) / s
    a = (y - 0.5 - mu) / s
    phi_b = np.exp(-0.5 * b * b) / math.sqrt(2 * math.pi)
    phi_a = np.exp(-0.5 * a * a) / math.sqrt(2 * math.pi)
    return (
        ndtr(b), ndtr(a),
        -phi_b / s, -phi_b * b / (2.0 * sigma2),
        -phi_a / s, -phi_a * a / (2.0 * sigma2),
    )


def laplace_logpmf_kernel(y, mu, b):
    lp = _disc_laplace_logpmf_arrays(y, mu, b)
    lo = y - 0.5 - mu
    hi = y + 0.5 - mu
    # F'(x) = exp(-|x - mu| / b) / (2 b);  dF/dmu = -f(x);  dF/db = -f(x) (x - mu) / b
    f_hi = np.exp(-np.abs(hi) / b - lp) / (2.0 * b)
    f_lo = np.exp(-np.abs(lo) / b - lp) / (2.0 * b)
    d_mu = f_lo - f_hi
    d_b = (f_lo * lo - f_hi * hi) / b
    return lp, d_mu, d_b


def laplace_cdf_kernel(y, mu, b):
    hi = y + 0.5 - mu
    lo = y - 0.5 - mu
    f_hi = np.exp(-np.abs(hi) / b) / (2.0 * b)
    f_lo = np.exp(-np.abs(lo) / b) / (2.0 * b)
    return (
        _laplace_cdf(y + 0.5, mu, b), _laplace_cdf(y - 0.5, mu, b),
        -f_hi, -f_hi * hi / b,
        -f_lo, -f_lo * lo / b,
    )
