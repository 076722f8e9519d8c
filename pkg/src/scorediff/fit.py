"""Maximum-likelihood fitting of the univariate and per-half models.

Likelihoods are evaluated on the packed parameter vector described in
:mod:`scorediff.regress`, with analytic gradients.  Optimization is BFGS,
followed by a few Newton steps on a finite-difference Hessian when BFGS stops
short of the gradient tolerance.  Zero-inflated models are fitted by EM.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from . import zdist
from .copula import BivariateZ, CopulaFamily, CopulaSpec, rectangle_probability
from .regress import (
    Design,
    Family,
    InflationSpec,
    Kind,
    ModelParams,
    ModelStructure,
    TeamIndex,
    inflation_prob,
    make_distribution,
    pack_parameters,
    predict_mean,
    unpack_parameters,
)

__all__ = [
    "DegenerateDataError",
    "FitConfig",
    "FitResult",
    "UnivariateLikelihood",
    "BivariateLikelihood",
    "fit_univariate",
    "fit_zi_em",
    "fit_bivariate",
    "information_criteria",
]

log = logging.getLogger(__name__)

_TINY = 1e-300


class DegenerateDataError(ValueError):
    """The data cannot identify the requested model."""


@dataclass(frozen=True)
class FitConfig:
    max_iter: int = 500
    gtol: float = 1e-6
    xtol: float = 1e-10
    em_tol: float = 1e-8
    seed: int = 0
    scale_transform: str = "log"
    newton_steps: int = 10

    def __post_init__(self):
        if min(self.gtol, self.xtol, self.em_tol) <= 0 or self.max_iter <= 0:
            raise ValueError("tolerances and max_iter must be positive")
        if self.scale_transform != "log":
            raise ValueError("only the log scale transform is implemented")


def information_criteria(loglik, n_params, n_obs):
    """Return ``(AIC, BIC)``."""
    if n_obs < 1:
        raise ValueError("n_obs must be >= 1")
    aic = -2.0 * loglik + 2.0 * n_params
    bic = -2.0 * loglik + n_params * math.log(n_obs)
    return aic, bic


# ---------------------------------------------------------------------------
# Family dispatch


_LOGPMF = {
    Family.SKELLAM: zdist.skellam_logpmf_kernel,
    Family.ZI_SKELLAM: zdist.skellam_logpmf_kernel,
    Family.DISC_NORMAL: zdist.normal_logpmf_kernel,
    Family.DISC_LAPLACE: zdist.laplace_logpmf_kernel,
}
_CDF = {
    Family.SKELLAM: zdist.skellam_cdf_kernel,
    Family.DISC_NORMAL: zdist.normal_cdf_kernel,
    Family.DISC_LAPLACE: zdist.laplace_cdf_kernel,
}


def _valid(family, mu, scale):
    if not np.isfinite(scale) or scale <= 0:
        return False
    if family in (Family.SKELLAM, Family.ZI_SKELLAM):
        return bool(np.all(scale > np.abs(mu)))
    return True


def _as_int(a):
    a = np.asarray(a)
    if a.size and np.any(np.floor(a) != a):
        raise ValueError("score differences must be integers")
    return a.astype(np.int64)


# ---------------------------------------------------------------------------
# Likelihoods


class UnivariateLikelihood:
    """Log-likelihood of full-time differences under a univariate structure.

    ``weights`` multiply each observation's log-likelihood (used by the EM
    M-step); ``covariates`` feed the zero-inflation logit.
    """

    def __init__(self, structure, index, homes, aways, diffs, covariates=None, weights=None):
        if structure.kind is not Kind.UNIVARIATE:
            raise ValueError("UnivariateLikelihood needs a univariate structure")
        self.structure = structure
        self.index = index
        self.design = Design.from_pairs(index, homes, aways)
        self.y = _as_int(diffs)
        self.n = self.y.shape[0]
        k = structure.n_inflation_covariates
        if k:
            z = np.asarray(covariates, dtype=float).reshape(self.n, k)
        else:
            z = np.zeros((self.n, 0))
        self.z = z
        self.weights = None if weights is None else np.asarray(weights, dtype=float)
        self.n_params = structure.n_params(len(index))

    def value_and_grad(self, vec):
        vec = np.asarray(vec, dtype=float)
        fam = self.structure.family
        bl = 2 * len(self.index) - 1
        mu = self.design.means(vec[:bl])
        scale = math.exp(vec[bl]) if vec[bl] < 700 else math.inf
        grad = np.zeros_like(vec)
        if not _valid(fam, mu, scale):
            return -math.inf, grad
        lp, d_mu, d_sc = _LOGPMF[fam](self.y, mu, scale)
        if fam is Family.ZI_SKELLAM:
            eta = vec[bl + 1] + self.z @ vec[bl + 2:]
            p = 0.5 * (1.0 + np.tanh(0.5 * eta))
            zero = self.y == 0
            log1mp = -np.logaddexp(0.0, eta)
            ll = log1mp + lp
            g_eta = -p
            if np.any(zero):
                pz, lpz = p[zero], lp[zero]
                base = np.exp(lpz)
                mix = pz + (1.0 - pz) * base
                ll[zero] = np.log(mix)
                g_eta = g_eta.copy()
                g_eta[zero] = pz * (1.0 - pz) * (1.0 - base) / mix
                resp = (1.0 - pz) * base / mix
                d_mu = d_mu.copy()
                d_sc = d_sc.copy()
                d_mu[zero] *= resp
                d_sc[zero] *= resp
        else:
            ll = lp
        w = self.weights
        if w is not None:
            ll = w * ll
            d_mu = w * d_mu
            d_sc = w * d_sc
        total = float(np.sum(ll))
        if not math.isfinite(total):
            return -math.inf, grad
        grad[:bl] = self.design.block_gradient(d_mu)
        grad[bl] = scale * float(np.sum(d_sc))
        if fam is Family.ZI_SKELLAM:
            if w is not None:
                g_eta = w * g_eta
            grad[bl + 1] = float(np.sum(g_eta))
            grad[bl + 2:] = self.z.T @ g_eta
        return total, grad

    def loglik(self, vec):
        return self.value_and_grad(vec)[0]


class BivariateLikelihood:
    """Log-likelihood of per-half differences, coupled through a copula."""

    def __init__(self, structure, index, homes, aways, half1, half2):
        if not structure.bivariate:
            raise ValueError("BivariateLikelihood needs a per-half structure")
        self.structure = structure
        self.index = index
        self.design = Design.from_pairs(index, homes, aways)
        self.y1 = _as_int(half1)
        self.y2 = _as_int(half2)
        self.n = self.y1.shape[0]
        self.n_params = structure.n_params(len(index))
        bl = 2 * len(index) - 1
        if structure.kind is Kind.BIV_B:
            self._blocks = [slice(0, bl), slice(0, bl)]
            self._scales = [bl, bl + 1]
        else:
            self._blocks = [slice(0, bl), slice(bl + 1, 2 * bl + 1)]
            self._scales = [bl, 2 * bl + 1]

    def _copula(self, vec):
        st = self.structure
        if st.has_copula_param:
            raw = float(vec[-1])
            if st.copula is CopulaFamily.FRANK:
                return CopulaSpec(CopulaFamily.FRANK, raw if raw != 0.0 else 1e-12)
            if raw > 700:
                return None
            return CopulaSpec(CopulaFamily.GUMBEL, 1.0 + math.exp(raw))
        return CopulaSpec(CopulaFamily.INDEPENDENCE)

    def value_and_grad(self, vec):
        vec = np.asarray(vec, dtype=float)
        fam = self.structure.family
        grad = np.zeros_like(vec)
        mus, scales = [], []
        for blk, si in zip(self._blocks, self._scales):
            mu = self.design.means(vec[blk])
            sc = math.exp(vec[si]) if vec[si] < 700 else math.inf
            if not _valid(fam, mu, sc):
                return -math.inf, grad
            mus.append(mu)
            scales.append(sc)
        cop = self._copula(vec)
        if cop is None:
            return -math.inf, grad
        ys = (self.y1, self.y2)
        if cop.family is CopulaFamily.INDEPENDENCE:
            total = 0.0
            for h in range(2):
                lp, d_mu, d_sc = _LOGPMF[fam](ys[h], mus[h], scales[h])
                total += float(np.sum(lp))
                grad[self._blocks[h]] += self.design.block_gradient(d_mu)
                grad[self._scales[h]] += scales[h] * float(np.sum(d_sc))
            if not math.isfinite(total):
                return -math.inf, grad
            return total, grad

        u1, u0, du1_m, du1_s, du0_m, du0_s = _CDF[fam](ys[0], mus[0], scales[0])
        v1, v0, dv1_m, dv1_s, dv0_m, dv0_s = _CDF[fam](ys[1], mus[1], scales[1])
        rect, r_u1, r_u0, r_v1, r_v0, r_t = rectangle_probability(u0, u1, v0, v1, cop, partials=True)
        rect = np.maximum(rect, _TINY)
        total = float(np.sum(np.log(rect)))
        if not math.isfinite(total):
            return -math.inf, grad
        inv = 1.0 / rect
        d_u1 = r_u1 * inv
        d_u0 = r_u0 * inv
        d_v1 = r_v1 * inv
        d_v0 = r_v0 * inv
        g_mu1 = d_u1 * du1_m + d_u0 * du0_m
        g_s1 = d_u1 * du1_s + d_u0 * du0_s
        g_mu2 = d_v1 * dv1_m + d_v0 * dv0_m
        g_s2 = d_v1 * dv1_s + d_v0 * dv0_s
        grad[self._blocks[0]] += self.design.block_gradient(g_mu1)
        grad[self._blocks[1]] += self.design.block_gradient(g_mu2)
        grad[self._scales[0]] += scales[0] * float(np.sum(g_s1))
        grad[self._scales[1]] += scales[1] * float(np.sum(g_s2))
        g_theta = float(np.sum(r_t * inv))
        if self.structure.copula is CopulaFamily.GUMBEL:
            g_theta *= cop.theta - 1.0
        grad[-1] = g_theta
        return total, grad

    def loglik(self, vec):
        return self.value_and_grad(vec)[0]


# ---------------------------------------------------------------------------
# Optimizer


def _gnorm(g):
    return float(np.max(np.abs(g))) if g.size else 0.0


def _maximize(lik, x0, config):
    """BFGS on the negative log-likelihood, then Newton polishing if needed.

    Returns ``(x, loglik, grad, n_iter)``.
    """
    def neg(x):
        f, g = lik.value_and_grad(x)
        if not math.isfinite(f):
            return math.inf, np.zeros_like(x)
        return -f, -g

    res = minimize(neg, x0, jac=True, method="BFGS",
                   options={"gtol": config.gtol, "maxiter": config.max_iter, "xrtol": config.xtol})
    x = res.x
    f, g = lik.value_and_grad(x)
    n_iter = int(res.nit)
    if f < lik.loglik(x0):
        x = np.asarray(x0, dtype=float)
        f, g = lik.value_and_grad(x)
    step = 0
    while _gnorm(g) >= config.gtol and step < config.newton_steps and math.isfinite(f):
        x_new, f_new, g_new = _newton_step(lik, x, f, g)
        step += 1
        n_iter += 1
        if x_new is None:
            break
        x, f, g = x_new, f_new, g_new
    return x, f, g, n_iter


def _numeric_hessian(lik, x, h=1e-5):
    n = x.size
    hess = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = h * max(1.0, abs(x[j]))
        gp = lik.value_and_grad(x + e)[1]
        gm = lik.value_and_grad(x - e)[1]
        hess[:, j] = (gp - gm) / (2.0 * e[j])
    return 0.5 * (hess + hess.T)


def _newton_step(lik, x, f, g):
    hess = _numeric_hessian(lik, x)
    # ascent on loglik: -H is (near) positive definite at a maximum
    neg_h = -hess
    w, v = np.linalg.eigh(neg_h)
    w = np.maximum(w, 1e-8 * max(1.0, float(np.max(np.abs(w)))))
    step = v @ ((v.T @ g) / w)
    t = 1.0
    for _ in range(30):
        x_new = x + t * step
        f_new, g_new = lik.value_and_grad(x_new)
        if math.isfinite(f_new) and f_new >= f - 1e-12 * abs(f):
            if f_new >= f or _gnorm(g_new) < _gnorm(g):
                return x_new, f_new, g_new
        t *= 0.5
    return None, f, g


# ---------------------------------------------------------------------------
# Results


@dataclass
class FitResult:
    structure: ModelStructure
    index: TeamIndex
    estimates: ModelParams
    vector: np.ndarray
    loglik: float
    n_params: int
    n_obs: int
    aic: float
    bic: float
    converged: bool
    n_iter: int
    gradient_norm: float
    diagnostics: list = field(default_factory=list)
    loglik_trace: list = field(default_factory=list)

    def _scale(self, half):
        return self.estimates.scales[0 if half is None else half]

    def mean(self, home, away, half=None):
        spec = self.estimates.ability_for_half(0 if half is None else half)
        return predict_mean(home, away, spec)

    def distribution(self, home, away, half=None, covariates=None):
        """Predictive distribution of one fixture's difference.

        For per-half structures ``half`` (0 or 1) selects the marginal.
        Zero-inflated models with inflation covariates need ``covariates``.
        """
        if self.structure.bivariate and half is None:
            raise ValueError("per-half models need half=0 or half=1; use bivariate() for both")
        mu = self.mean(home, away, half)
        p = 0.0
        if self.structure.family is Family.ZI_SKELLAM:
            infl = self.estimates.inflation
            if covariates is None and infl.coeffs:
                raise ValueError("this model needs inflation covariates for each fixture")
            z = np.zeros(0) if covariates is None else np.asarray(covariates, dtype=float)
            p = 0.0 if infl.intercept == -math.inf else inflation_prob(z, infl)
        return make_distribution(self.structure.family, mu, self._scale(half), p)

    def bivariate(self, home, away):
        if not self.structure.bivariate:
            raise ValueError("bivariate() needs a per-half model")
        cop = self.estimates.copula or CopulaSpec(CopulaFamily.INDEPENDENCE)
        return BivariateZ(self.distribution(home, away, 0), self.distribution(home, away, 1), cop)

    def to_dict(self):
        """JSON-safe dict; non-finite numbers become ``"inf"``/``"-inf"``/``"nan"``."""
        return _json_safe({
            "structure": self.structure.to_dict(),
            "index": self.index.to_dict(),
            "estimates": self.estimates.to_dict(),
            "vector": [float(v) for v in self.vector],
            "loglik": self.loglik,
            "n_params": self.n_params,
            "n_obs": self.n_obs,
            "aic": self.aic,
            "bic": self.bic,
            "converged": self.converged,
            "n_iter": self.n_iter,
            "gradient_norm": self.gradient_norm,
            "diagnostics": list(self.diagnostics),
            "loglik_trace": [float(v) for v in self.loglik_trace],
        })

    @classmethod
    def from_dict(cls, d):
        return cls(
            ModelStructure.from_dict(d["structure"]),
            TeamIndex.from_dict(d["index"]),
            ModelParams.from_dict(d["estimates"]),
            np.asarray(d["vector"], dtype=float),
            float(d["loglik"]), int(d["n_params"]), int(d["n_obs"]),
            float(d["aic"]), float(d["bic"]), bool(d["converged"]), int(d["n_iter"]),
            float(d["gradient_norm"]), list(d.get("diagnostics", [])),
            [float(v) for v in d.get("loglik_trace", [])],
        )

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True, allow_nan=False)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def _json_safe(obj):
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def _result(structure, index, vec, loglik, grad, n_obs, n_iter, config, diagnostics, trace=()):
    k = structure.n_params(len(index))
    aic, bic = information_criteria(loglik, k, n_obs)
    gn = _gnorm(grad)
    return FitResult(
        structure, index, unpack_parameters(vec, structure, index), np.asarray(vec, dtype=float),
        float(loglik), k, n_obs, aic, bic, bool(gn < config.gtol), n_iter, gn,
        list(diagnostics), list(trace),
    )


# ---------------------------------------------------------------------------
# Data handling and starting values


def _split_rows(data, width):
    rows = list(data)
    if not rows:
        raise DegenerateDataError("no observations")
    cols = list(zip(*rows))
    if len(cols) != width:
        raise ValueError(f"expected rows of {width} fields")
    return cols


def _check_identifiable(index, design):
    x = design.matrix()
    rank = np.linalg.matrix_rank(x)
    if len(index) < 2:
        raise DegenerateDataError("need at least two distinct teams")
    if rank < x.shape[1]:
        raise DegenerateDataError(
            f"team abilities are not identifiable from these fixtures (rank {rank} < {x.shape[1]})"
        )


def _ols_block(design, y):
    x = design.matrix()
    coef, *_ = np.linalg.lstsq(x, y.astype(float), rcond=None)
    return coef


def _initial_block(design, y, family):
    """Least-squares abilities and a feasible starting scale."""
    coef = _ols_block(design, y)
    mu = design.means(coef)
    resid = y - mu
    var = float(np.mean(resid**2)) if y.size > 1 else 1.0
    diags = []
    if np.all(y == y[0]):
        diags.append("all score differences are identical; scale is at its boundary")
    var = max(var, 0.25)
    if family in (Family.SKELLAM, Family.ZI_SKELLAM):
        var = max(var, 1.5 * float(np.max(np.abs(mu))) + 1.0)
        scale = var
    elif family is Family.DISC_LAPLACE:
        scale = math.sqrt(var / 2.0)
    else:
        scale = var
    return coef, math.log(scale), diags


def _index_for(pairs, index, baseline):
    if index is None:
        return TeamIndex.from_matches(pairs, baseline=baseline)
    for h, a in pairs:
        index.position(h)
        index.position(a)
    return index


# ---------------------------------------------------------------------------
# Univariate fitting


def fit_univariate(data, structure=None, config=None, covariates=None, index=None, baseline=None):
    """Fit a full-time difference model.

    Parameters
    ----------
    data : iterable of (home, away, diff)
    structure : ModelStructure, optional
        Univariate structure; defaults to a plain Skellam regression.
    covariates : array_like, optional
        Zero-inflation covariates, one row per observation.
    index, baseline : optional
        Team ordering / baseline override.
    """
    structure = structure or ModelStructure()
    config = config or FitConfig()
    if structure.family is Family.ZI_SKELLAM:
        return fit_zi_em(data, structure, config, covariates=covariates, index=index, baseline=baseline)
    homes, aways, diffs = _split_rows(data, 3)
    index = _index_for(zip(homes, aways), index, baseline)
    lik = UnivariateLikelihood(structure, index, homes, aways, diffs)
    _check_identifiable(index, lik.design)
    block, log_scale, diags = _initial_block(lik.design, lik.y, structure.family)
    x0 = np.concatenate([block, [log_scale]])
    x, f, g, nit = _maximize(lik, x0, config)
    return _result(structure, index, x, f, g, lik.n, nit, config, diags)


def _zi_loglik_parts(lik_base, base_vec, p, y):
    """Per-observation base log pmf and the ZI log-likelihood total."""
    fam_kernel = zdist.skellam_logpmf_kernel
    bl = base_vec.size - 1
    mu = lik_base.design.means(base_vec[:bl])
    lp = fam_kernel(y, mu, math.exp(base_vec[bl]))[0]
    zero = y == 0
    with np.errstate(divide="ignore"):
        ll = np.log1p(-p) + lp
        ll[zero] = np.log(p[zero] + (1.0 - p[zero]) * np.exp(lp[zero]))
    return lp, float(np.sum(ll))


def fit_zi_em(data, structure=None, config=None, covariates=None, index=None, baseline=None):
    """Fit the zero-inflated Skellam regression by EM.

    The E-step computes, for each zero difference, the posterior probability
    that it came from the inflation component.  The M-step sets the
    inflation parameters from those responsibilities and refits the Skellam
    regression with zero observations down-weighted by ``1 - w``.  Iteration
    stops once the log-likelihood gains less than ``config.em_tol``.
    """
    structure = structure or ModelStructure(family=Family.ZI_SKELLAM)
    config = config or FitConfig()
    if structure.family is not Family.ZI_SKELLAM or structure.bivariate:
        raise ValueError("fit_zi_em needs the univariate zero-inflated structure")
    homes, aways, diffs = _split_rows(data, 3)
    index = _index_for(zip(homes, aways), index, baseline)
    base_structure = ModelStructure(Kind.UNIVARIATE, Family.SKELLAM)
    k = structure.n_inflation_covariates
    n = len(diffs)
    z = np.zeros((n, 0)) if k == 0 else np.asarray(covariates, dtype=float).reshape(n, k)

    base_lik = UnivariateLikelihood(base_structure, index, homes, aways, diffs)
    _check_identifiable(index, base_lik.design)
    y = base_lik.y
    zero = y == 0
    block, log_scale, diags = _initial_block(base_lik.design, y, Family.SKELLAM)
    base_vec, _, _, n_iter = _maximize(base_lik, np.concatenate([block, [log_scale]]), config)

    infl = np.zeros(1 + k)
    if zero.any():
        infl[0] = math.log(0.1 / 0.9)
        p = inflation_prob(z, InflationSpec(infl[0], tuple(infl[1:]))) * np.ones(n)
    else:
        infl[0] = -math.inf
        p = np.zeros(n)
    _, ll = _zi_loglik_parts(base_lik, base_vec, p, y)
    trace = [ll]
    em_converged = False
    for _ in range(config.max_iter):
        # E-step
        lp, _ = _zi_loglik_parts(base_lik, base_vec, p, y)
        w = np.zeros(n)
        if zero.any():
            base0 = np.exp(lp[zero])
            w[zero] = p[zero] / (p[zero] + (1.0 - p[zero]) * base0)
        # M-step: inflation
        if k == 0:
            p_hat = float(w.mean())
            infl[0] = -math.inf if p_hat <= 0 else math.log(p_hat) - math.log1p(-p_hat)
            p = np.full(n, p_hat)
        else:
            infl = _weighted_logistic(z, w, infl, config)
            p = inflation_prob(z, InflationSpec(infl[0], tuple(infl[1:])))
        # M-step: base regression
        weighted = UnivariateLikelihood(base_structure, index, homes, aways, diffs, weights=1.0 - w)
        base_vec, _, _, nit = _maximize(weighted, base_vec, config)
        n_iter += 1
        _, ll_new = _zi_loglik_parts(base_lik, base_vec, p, y)
        trace.append(ll_new)
        gain = ll_new - ll
        ll = ll_new
        if gain < config.em_tol:
            em_converged = True
            break

    if not em_converged:
        diags.append("EM reached max_iter before the log-likelihood gain fell below em_tol")
    vec = np.concatenate([base_vec, infl])
    full = UnivariateLikelihood(structure, index, homes, aways, diffs, covariates=z)
    if math.isfinite(infl[0]):
        f, g = full.value_and_grad(vec)
        if _gnorm(g) >= config.gtol:
            vec, f, g, extra = _maximize(full, vec, config)
            n_iter += extra
            if f > trace[-1]:
                trace.append(f)
    else:
        # p = 0 sits on the boundary; only the base coordinates need to be stationary
        diags.append("inflation probability at boundary p = 0")
        f, g_base = base_lik.value_and_grad(base_vec)
        g = np.concatenate([g_base, np.zeros(1 + k)])
    result = _result(structure, index, vec, f, g, n, n_iter, config, diags, trace)
    result.converged = result.converged and (em_converged or result.gradient_norm < config.gtol)
    return result


def _weighted_logistic(z, w, start, config):
    n, k = z.shape
    x = np.column_stack([np.ones(n), z])

    def neg(beta):
        eta = x @ beta
        ll = w * (-np.logaddexp(0.0, -eta)) + (1.0 - w) * (-np.logaddexp(0.0, eta))
        p = 0.5 * (1.0 + np.tanh(0.5 * eta))
        return -float(ll.sum()), -(x.T @ (w - p))

    x0 = np.where(np.isfinite(start), start, 0.0)
    res = minimize(neg, x0, jac=True, method="BFGS", options={"gtol": config.gtol * 1e-2})
    return res.x


# ---------------------------------------------------------------------------
# Bivariate fitting


_COPULA_BOUNDS = {CopulaFamily.FRANK: (-40.0, 40.0), CopulaFamily.GUMBEL: (-12.0, 4.0)}


def fit_bivariate(data, structure, config=None, index=None, baseline=None):
    """Fit a per-half model (Model A, B or C).

    ``data`` rows are ``(home, away, first_half_diff, second_half_diff)``.
    Copula models start from inference-functions-for-margins: marginals
    fitted under independence, then the copula parameter alone, then a
    joint refinement of everything.
    """
    config = config or FitConfig()
    if not structure.bivariate:
        raise ValueError("fit_bivariate needs a per-half structure")
    homes, aways, h1, h2 = _split_rows(data, 4)
    if any(v is None for v in h1) or any(v is None for v in h2):
        raise DegenerateDataError("half-time differences are required for every row")
    index = _index_for(zip(homes, aways), index, baseline)
    indep = ModelStructure(structure.kind, structure.family,
                           CopulaFamily.INDEPENDENCE if structure.kind is not Kind.BIV_A else None)
    lik0 = BivariateLikelihood(indep, index, homes, aways, h1, h2)
    _check_identifiable(index, lik0.design)

    blk1, ls1, d1 = _initial_block(lik0.design, lik0.y1, structure.family)
    blk2, ls2, d2 = _initial_block(lik0.design, lik0.y2, structure.family)
    diags = d1 + d2
    if structure.kind is Kind.BIV_B:
        ys = np.concatenate([lik0.y1, lik0.y2])
        design2 = Design(np.concatenate([lik0.design.home] * 2), np.concatenate([lik0.design.away] * 2),
                         lik0.design.n_teams, lik0.design.baseline)
        shared = _ols_block(design2, ys)
        x0 = np.concatenate([shared, [ls1, ls2]])
    else:
        x0 = np.concatenate([blk1, [ls1], blk2, [ls2]])

    x_m, f_m, g_m, n_iter = _maximize(lik0, x0, config)
    if not structure.has_copula_param:
        if structure.kind is Kind.BIV_A or structure.copula is CopulaFamily.INDEPENDENCE:
            return _result(structure, index, x_m, f_m, g_m, lik0.n, n_iter, config, diags)

    lik = BivariateLikelihood(structure, index, homes, aways, h1, h2)
    lo, hi = _COPULA_BOUNDS[structure.copula]

    def neg_theta(raw):
        f = lik.loglik(np.concatenate([x_m, [raw]]))
        return -f if math.isfinite(f) else 1e300

    res = minimize_scalar(neg_theta, bounds=(lo, hi), method="bounded", options={"xatol": 1e-6})
    x_ifm = np.concatenate([x_m, [res.x]])
    f_ifm = lik.loglik(x_ifm)
    x, f, g, nit = _maximize(lik, x_ifm, config)
    n_iter += nit
    diags.append(f"IFM start log-likelihood {f_ifm:.6f}")
    raw = x[-1]
    if raw <= lo + 1e-3 or raw >= hi - 1e-3:
        diags.append(f"copula parameter at its search boundary (raw value {raw:.4g})")
    return _result(structure, index, x, f, g, lik.n, n_iter, config, diags, [f_ifm, f])
