"""Frank and Gumbel copulas coupling two integer-valued marginals.

The joint pmf of two discrete variables is the copula measure of the
rectangle ``(F(y1-1), F(y1)] x (G(y2-1), G(y2)]``.  Conditioning on the first
variable (the half-time difference) gives the distribution of the second
and hence win/draw/loss probabilities for the whole match.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .zdist import ParameterError

__all__ = [
    "CopulaFamily",
    "CopulaSpec",
    "BivariateZ",
    "NumericalIntegrityError",
    "NegligibleMassError",
    "copula_cdf",
    "copula_partials",
    "rectangle_probability",
    "joint_pmf",
    "joint_pmf_grid",
    "conditional_pmf",
    "conditional_distribution",
    "win_probability",
    "outcome_probabilities",
    "joint_sample",
]

NEG_TOL = 1e-9
_FRANK_SMALL = 1e-5


class NumericalIntegrityError(ArithmeticError):
    """A rectangle probability came out clearly negative."""


class NegligibleMassError(ZeroDivisionError):
    """Conditioning event has (numerically) zero probability."""


class CopulaFamily(str, enum.Enum):
    INDEPENDENCE = "independence"
    FRANK = "frank"
    GUMBEL = "gumbel"


@dataclass(frozen=True)
class CopulaSpec:
    family: CopulaFamily
    theta: float = 0.0

    def __post_init__(self):
        fam = CopulaFamily(self.family)
        object.__setattr__(self, "family", fam)
        if not math.isfinite(self.theta):
            raise ParameterError("copula parameter must be finite")
        if fam is CopulaFamily.FRANK and self.theta == 0.0:
            raise ParameterError("Frank theta = 0 is the independence copula; use INDEPENDENCE")
        if fam is CopulaFamily.GUMBEL and self.theta < 1.0:
            raise ParameterError(f"Gumbel theta must be >= 1, got {self.theta}")


INDEPENDENCE = CopulaSpec(CopulaFamily.INDEPENDENCE)


@dataclass(frozen=True)
class BivariateZ:
    """Two integer marginals (half-time, second-half) joined by a copula."""

    marginal1: object
    marginal2: object
    copula: CopulaSpec


# ---------------------------------------------------------------------------
# Copula functions


def _frank(u, v, theta):
    if abs(theta) < _FRANK_SMALL:
        return u * v * (1.0 + 0.5 * theta * (1.0 - u) * (1.0 - v))
    a = np.expm1(-theta * u)
    b = np.expm1(-theta * v)
    c = math.expm1(-theta)
    return -np.log1p(a * b / c) / theta


def _gumbel(u, v, theta):
    with np.errstate(divide="ignore"):
        x = -np.log(u)
        y = -np.log(v)
    return np.exp(-((x**theta + y**theta) ** (1.0 / theta)))


def copula_cdf(u, v, c):
    """Evaluate ``C(u, v)``; boundary values are returned exactly."""
    u_arr, v_arr = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    if np.any((u_arr < 0) | (u_arr > 1) | (v_arr < 0) | (v_arr > 1)):
        raise ParameterError("copula arguments must lie in [0, 1]")
    out = np.empty(u_arr.shape)
    edge_u = (u_arr == 0) | (v_arr == 0)
    edge_1 = ~edge_u & ((u_arr == 1) | (v_arr == 1))
    inner = ~(edge_u | edge_1)
    out[edge_u] = 0.0
    out[edge_1] = np.minimum(u_arr[edge_1], v_arr[edge_1])
    ui, vi = u_arr[inner], v_arr[inner]
    if c.family is CopulaFamily.INDEPENDENCE:
        out[inner] = ui * vi
    elif c.family is CopulaFamily.FRANK:
        out[inner] = _frank(ui, vi, c.theta)
    else:
        out[inner] = _gumbel(ui, vi, c.theta)
    np.clip(out, 0.0, 1.0, out=out)
    return float(out) if out.ndim == 0 else out


def copula_partials(u, v, c):
    """``C``, ``dC/du``, ``dC/dv`` and ``dC/dtheta`` on arrays in [0, 1].

    Used by the likelihood gradients; no boundary short-cuts beyond what keeps
    the expressions finite.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if c.family is CopulaFamily.INDEPENDENCE:
        return u * v, v + 0 * u, u + 0 * v, np.zeros(np.broadcast(u, v).shape)
    if c.family is CopulaFamily.FRANK:
        return _frank_partials(u, v, c.theta)
    return _gumbel_partials(u, v, c.theta)


def _frank_partials(u, v, th):
    if abs(th) < _FRANK_SMALL:
        g = (1.0 - u) * (1.0 - v)
        cval = u * v * (1.0 + 0.5 * th * g)
        cu = v * (1.0 + 0.5 * th * (1.0 - v) * (1.0 - 2.0 * u))
        cv = u * (1.0 + 0.5 * th * (1.0 - u) * (1.0 - 2.0 * v))
        ct = 0.5 * u * v * g
        return cval, cu, cv, ct
    a = np.expm1(-th * u)
    b = np.expm1(-th * v)
    eu = a + 1.0
    ev = b + 1.0
    c = math.expm1(-th)
    denom = c + a * b
    log_d = np.log1p(a * b / c)
    cval = -log_d / th
    cu = eu * b / denom
    cv = ev * a / denom
    # dD/dtheta with D = 1 + a b / c
    dd = ((-u * eu) * b + a * (-v * ev)) / c + a * b * math.exp(-th) / (c * c)
    ct = log_d / (th * th) - dd / (th * (1.0 + a * b / c))
    return cval, cu, cv, ct


def _gumbel_partials(u, v, th):
    tiny = 1e-300
    u = np.clip(u, tiny, 1.0)
    v = np.clip(v, tiny, 1.0)
    x = -np.log(u)
    y = -np.log(v)
    xt = x**th
    yt = y**th
    s = xt + yt
    with np.errstate(divide="ignore", invalid="ignore"):
        s_inv = s ** (1.0 / th)
        cval = np.exp(-s_inv)
        common = cval * s ** (1.0 / th - 1.0)
        cu = common * x ** (th - 1.0) / u
        cv = common * y ** (th - 1.0) / v
        xlx = np.where(x > 0, xt * np.log(np.where(x > 0, x, 1.0)), 0.0)
        yly = np.where(y > 0, yt * np.log(np.where(y > 0, y, 1.0)), 0.0)
        ds = xlx + yly
        ct = -cval * s_inv * (ds / (th * s) - np.log(s) / (th * th))
    # corners where x = y = 0 (u = v = 1) give 0 * inf
    cu = np.where(np.isfinite(cu), cu, np.where(x == 0, 1.0, 0.0))
    cv = np.where(np.isfinite(cv), cv, np.where(y == 0, 1.0, 0.0))
    ct = np.where(np.isfinite(ct), ct, 0.0)
    return cval, cu, cv, ct


# ---------------------------------------------------------------------------
# Accurate rectangle probabilities
#
# A rectangle far in a tail is a tiny difference of four O(1) copula values.
# Rewriting C in terms of K = u - C, L = v - C or S = 1 - u - v + C makes the
# linear parts cancel exactly, so the rectangle becomes a signed sum of four
# small, accurately computed terms.


def _independence_pieces(u, v):
    ub, vb = 1.0 - u, 1.0 - v
    zero = np.zeros(np.broadcast(u, v).shape)
    return dict(C=u * v, K=u * vb, L=ub * v, S=ub * vb, Cu=v + zero, Cu_bar=vb + zero,
                Cv=u + zero, Cv_bar=ub + zero, Ct=zero)


def _frank_pieces(u, v, th):
    ub, vb = 1.0 - u, 1.0 - v
    if abs(th) < _FRANK_SMALL:
        h = 0.5 * th
        return dict(
            C=u * v * (1.0 + h * ub * vb), K=u * vb * (1.0 - h * v * ub),
            L=ub * v * (1.0 - h * u * vb), S=ub * vb * (1.0 + h * u * v),
            Cu=v * (1.0 + h * vb * (1.0 - 2.0 * u)), Cu_bar=vb * (1.0 - h * v * (1.0 - 2.0 * u)),
            Cv=u * (1.0 + h * ub * (1.0 - 2.0 * v)), Cv_bar=ub * (1.0 - h * u * (1.0 - 2.0 * v)),
            Ct=0.5 * u * v * ub * vb,
        )
    em = np.expm1
    a = em(-th * u)
    b = em(-th * v)
    c = math.expm1(-th)
    eu = np.exp(-th * u)
    ev = np.exp(-th * v)
    denom = c + a * b
    cval, cu, cv, ct = _frank_partials(u, v, th)
    return dict(
        C=cval,
        K=np.log1p(em(th * u) * ev * em(-th * vb) / c) / th,
        L=np.log1p(em(th * v) * eu * em(-th * ub) / c) / th,
        S=-np.log1p(em(-th * ub) * em(-th * vb) / c) / th,
        Cu=cu, Cu_bar=ev * em(-th * vb) / denom,
        Cv=cv, Cv_bar=eu * em(-th * ub) / denom,
        Ct=ct,
    )


def _gumbel_pieces(u, v, th):
    u = np.clip(u, 1e-300, 1.0)
    v = np.clip(v, 1e-300, 1.0)
    x = -np.log(u)
    y = -np.log(v)
    m = np.maximum(x, y)
    n = np.minimum(x, y)
    pos = m > 0
    safe_m = np.where(pos, m, 1.0)
    r = np.where(pos, (n / safe_m) ** th, 0.0)
    t = np.log1p(r) / th
    a_m = m * np.expm1(t)           # A - max(x, y)
    big_a = m + a_m
    a_x = a_m + (m - x)             # A - x
    a_y = a_m + (m - y)             # A - y
    cval = np.exp(-big_a)
    with np.errstate(divide="ignore", invalid="ignore"):
        ex = -a_x - (th - 1.0) * np.log1p(a_x / x)
        ey = -a_y - (th - 1.0) * np.log1p(a_y / y)
        lr = np.where(n > 0, np.log(np.where(n > 0, n, 1.0) / safe_m), 0.0)
    # at x = 0 (u = 1) the conditional cdf is 0 for theta > 1 unless y = 0 too
    edge_x = x == 0
    edge_y = y == 0
    if th == 1.0:
        ex = np.where(edge_x, np.log(v), ex)
        ey = np.where(edge_y, np.log(u), ey)
    else:
        ex = np.where(edge_x, np.where(edge_y, 0.0, -np.inf), ex)
        ey = np.where(edge_y, np.where(edge_x, 0.0, -np.inf), ey)
    ct = cval * big_a / th * (np.log1p(r) / th - r * lr / (1.0 + r))
    return dict(
        C=cval,
        K=-u * np.expm1(-a_x),
        L=-v * np.expm1(-a_y),
        S=-np.expm1(-x) - np.expm1(-y) + np.expm1(-big_a),
        Cu=np.exp(ex), Cu_bar=-np.expm1(ex),
        Cv=np.exp(ey), Cv_bar=-np.expm1(ey),
        Ct=ct,
    )


def _pieces(u, v, c):
    if c.family is CopulaFamily.INDEPENDENCE:
        return _independence_pieces(u, v)
    if c.family is CopulaFamily.FRANK:
        return _frank_pieces(u, v, c.theta)
    return _gumbel_pieces(u, v, c.theta)


# per orientation: value key, d/du as (key, sign), d/dv as (key, sign), theta sign, corner signs
_ORIENT = {
    0: ("C", ("Cu", 1.0), ("Cv", 1.0), 1.0, 1.0),
    1: ("K", ("Cu_bar", 1.0), ("Cv", -1.0), -1.0, -1.0),
    2: ("L", ("Cu", -1.0), ("Cv_bar", 1.0), -1.0, -1.0),
    3: ("S", ("Cu_bar", -1.0), ("Cv_bar", -1.0), 1.0, 1.0),
}


def rectangle_probability(u0, u1, v0, v1, c, partials=False):
    """Copula mass of ``(u0, u1] x (v0, v1]``, computed without cancellation.

    With ``partials=True`` also returns the derivatives with respect to
    ``u1, u0, v1, v0`` and the copula parameter, as a tuple
    ``(rect, d_u1, d_u0, d_v1, d_v0, d_theta)``.
    """
    u0, u1, v0, v1 = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (u0, u1, v0, v1)))
    # pick the form whose corner terms are smallest; S is charged by its
    # largest ingredient because the Gumbel version subtracts 1 - u and 1 - v
    costs = np.stack([
        np.minimum(u1, v1),
        np.minimum(u1, 1.0 - v0),
        np.minimum(1.0 - u0, v1),
        np.maximum(1.0 - u0, 1.0 - v0),
    ])
    orient = np.argmin(costs, axis=0)
    corners = {
        (1, 1): _pieces(u1, v1, c), (0, 1): _pieces(u0, v1, c),
        (1, 0): _pieces(u1, v0, c), (0, 0): _pieces(u0, v0, c),
    }
    sign_pattern = {(1, 1): 1.0, (0, 1): -1.0, (1, 0): -1.0, (0, 0): 1.0}
    rect = np.zeros(u0.shape)
    d_u = {1: np.zeros(u0.shape), 0: np.zeros(u0.shape)}
    d_v = {1: np.zeros(u0.shape), 0: np.zeros(u0.shape)}
    d_t = np.zeros(u0.shape)
    for code, (key, (ku, su), (kv, sv), st, s0) in _ORIENT.items():
        sel = orient == code
        if not np.any(sel):
            continue
        for (i, j), pc in corners.items():
            s = s0 * sign_pattern[(i, j)]
            rect[sel] += s * pc[key][sel]
            if partials:
                d_u[i][sel] += s * su * pc[ku][sel]
                d_v[j][sel] += s * sv * pc[kv][sel]
                d_t[sel] += s * st * pc["Ct"][sel]
    if not partials:
        return rect
    return rect, d_u[1], d_u[0], d_v[1], d_v[0], d_t


# ---------------------------------------------------------------------------
# Discrete joint distribution


def _rectangle(b, f1_hi, f1_lo, f2_hi, f2_lo):
    return rectangle_probability(f1_lo, f1_hi, f2_lo, f2_hi, b.copula)


def _clamp(raw, cap):
    raw = np.asarray(raw, dtype=float)
    if np.any(raw < -NEG_TOL):
        worst = float(raw.min())
        raise NumericalIntegrityError(f"rectangle probability {worst:.3e} is below -{NEG_TOL}")
    return np.clip(raw, 0.0, cap)


def joint_pmf(y1, y2, b):
    """``P(Y1 = y1, Y2 = y2)`` by copula rectangle differencing."""
    y1 = np.asarray(y1)
    y2 = np.asarray(y2)
    m1, m2 = b.marginal1, b.marginal2
    raw = _rectangle(b, m1.cdf(y1), m1.cdf(y1 - 1), m2.cdf(y2), m2.cdf(y2 - 1))
    cap = np.minimum(m1.pmf(y1), m2.pmf(y2))
    out = _clamp(raw, cap)
    return float(out) if out.ndim == 0 else out


def joint_pmf_grid(b, range1, range2):
    """Joint pmf on ``range1 x range2`` (inclusive integer bounds).

    Returns ``(ys1, ys2, table)`` with ``table[i, j] = P(Y1 = ys1[i], Y2 = ys2[j])``.
    """
    ys1 = np.arange(range1[0], range1[1] + 1)
    ys2 = np.arange(range2[0], range2[1] + 1)
    f1 = b.marginal1.cdf(np.arange(range1[0] - 1, range1[1] + 1))
    f2 = b.marginal2.cdf(np.arange(range2[0] - 1, range2[1] + 1))
    cmat = copula_cdf(f1[:, None], f2[None, :], b.copula)
    raw = np.diff(np.diff(cmat, axis=0), axis=1)
    cap = np.minimum(b.marginal1.pmf(ys1)[:, None], b.marginal2.pmf(ys2)[None, :])
    return ys1, ys2, _clamp(raw, cap)


def _given_x_mass(x, b):
    px = float(b.marginal1.pmf(x))
    if px < 1e-12:
        raise NegligibleMassError(f"P(X = {x}) = {px:.3e} is too small to condition on")
    return px


def _strip(b, x, y_hi):
    """``P(X = x, Y <= y_hi)`` from two copula evaluations."""
    m1, m2 = b.marginal1, b.marginal2
    g = m2.cdf(y_hi)
    return copula_cdf(m1.cdf(x), g, b.copula) - copula_cdf(m1.cdf(x - 1), g, b.copula)


def conditional_pmf(y, given_x, b):
    """``P(Y = y | X = given_x)`` where X is the first marginal."""
    px = _given_x_mass(given_x, b)
    return joint_pmf(given_x, y, b) / px


def _y_range(b):
    m2 = b.marginal2
    mu = float(m2.mean())
    sd = math.sqrt(float(m2.var()))
    lo, hi = m2.support(1e-15)
    return min(lo, int(math.floor(mu - 12 * sd))), max(hi, int(math.ceil(mu + 12 * sd)))


def conditional_distribution(given_x, b):
    """Conditional pmf of Y given X = ``given_x`` over a truncated range.

    Returns ``(ys, probs)``.  The omitted conditional mass is computed from
    the copula and checked to be below ``1e-10``.
    """
    px = _given_x_mass(given_x, b)
    lo, hi = _y_range(b)
    ys = np.arange(lo, hi + 1)
    m1, m2 = b.marginal1, b.marginal2
    g = m2.cdf(np.arange(lo - 1, hi + 1))
    col = copula_cdf(m1.cdf(given_x), g, b.copula) - copula_cdf(m1.cdf(given_x - 1), g, b.copula)
    raw = np.diff(col)
    probs = _clamp(raw, np.minimum(px, m2.pmf(ys))) / px
    omitted = 1.0 - (col[-1] - col[0]) / px
    if abs(omitted) > 1e-10:
        raise NumericalIntegrityError(f"conditional truncation dropped mass {omitted:.3e}")
    return ys, probs


def outcome_probabilities(given_x, b):
    """(win, draw, loss) for the side leading by ``given_x`` at half time.

    The match is won when ``given_x + Y > 0``.
    """
    px = _given_x_mass(given_x, b)
    below_draw = float(_strip(b, given_x, -given_x - 1))
    upto_draw = float(_strip(b, given_x, -given_x))
    loss = max(below_draw, 0.0) / px
    draw = max(upto_draw - below_draw, 0.0) / px
    win = 1.0 - upto_draw / px
    return min(max(win, 0.0), 1.0), draw, loss


def win_probability(given_x, b):
    """``P(Y > -x | X = x)``: probability of finishing ahead."""
    return outcome_probabilities(given_x, b)[0]


# ---------------------------------------------------------------------------
# Sampling


def _gumbel_conditional_inverse(u, w, theta, tol=1e-10):
    lo = np.zeros_like(u)
    hi = np.ones_like(u)
    spec = CopulaSpec(CopulaFamily.GUMBEL, theta)
    n_iter = int(math.ceil(math.log2(1.0 / tol))) + 1
    for _ in range(n_iter):
        mid = 0.5 * (lo + hi)
        h = copula_partials(u, np.maximum(mid, 1e-300), spec)[1]
        go_up = h < w
        lo = np.where(go_up, mid, lo)
        hi = np.where(go_up, hi, mid)
    return 0.5 * (lo + hi)


def copula_sample(c, rng, size=None):
    """Draw ``(U, V)`` from the copula by conditional inversion."""
    n = 1 if size is None else size
    u = rng.random(n)
    w = rng.random(n)
    if c.family is CopulaFamily.INDEPENDENCE:
        v = w
    elif c.family is CopulaFamily.FRANK:
        th = c.theta
        if abs(th) < _FRANK_SMALL:
            v = w
        else:
            e = np.exp(-th * u)
            v = -np.log1p(w * math.expm1(-th) / (w + (1.0 - w) * e)) / th
    else:
        v = _gumbel_conditional_inverse(u, w, c.theta)
    tiny = np.nextafter(0.0, 1.0)
    u = np.clip(u, tiny, 1.0 - 1e-16)
    v = np.clip(v, tiny, 1.0 - 1e-16)
    if size is None:
        return float(u[0]), float(v[0])
    return u, v


def joint_sample(b, rng, size=None):
    """Sample ``(Y1, Y2)`` from the coupled distribution."""
    u, v = copula_sample(b.copula, rng, size)
    return b.marginal1.quantile(u), b.marginal2.quantile(v)
