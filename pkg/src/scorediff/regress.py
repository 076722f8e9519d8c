"""Team-ability regression structure.

The expected score difference of a fixture is ``alpha + beta[home] +
gamma[away]`` with the baseline team's ``beta`` and ``gamma`` fixed at zero.
Bivariate (per-half) models either share one ability block across halves
(Model B) or carry one block per half (Models A and C).

Packed parameter layout
-----------------------
Per ability block of ``T`` teams: ``[alpha, beta_1..beta_{T-1},
gamma_1..gamma_{T-1}]`` over the non-baseline teams in index order.  Scale
parameters (Skellam/normal variance, Laplace scale) are stored as logs.

* univariate: ``[block, log_scale, (inflation intercept, coefs...)]``
* Model A:    ``[block1, log_scale1, block2, log_scale2]``
* Model B:    ``[block, log_scale1, log_scale2, copula]``
* Model C:    ``[block1, log_scale1, block2, log_scale2, copula]``

The copula entry is Frank ``theta`` itself or ``log(theta - 1)`` for Gumbel.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .copula import CopulaFamily, CopulaSpec
from .zdist import (
    DiscLaplaceParams,
    DiscNormalParams,
    Skellam2Params,
    ZiSkellamParams,
)

__all__ = [
    "UnknownTeamError",
    "TeamIndex",
    "AbilitySpec",
    "Kind",
    "Family",
    "ModelStructure",
    "InflationSpec",
    "ModelParams",
    "predict_mean",
    "home_advantage",
    "inflation_prob",
    "odds_strength_covariate",
    "make_distribution",
    "pack_parameters",
    "unpack_parameters",
]


class UnknownTeamError(KeyError):
    pass


class TeamIndex:
    """Ordered team list with a baseline whose abilities are pinned to zero."""

    def __init__(self, teams, baseline=None, sort=True):
        teams = list(teams)
        if len(set(teams)) != len(teams):
            raise ValueError("team names must be unique")
        if not teams:
            raise ValueError("team index is empty")
        self.teams = sorted(teams) if sort else teams
        self.baseline = self.teams[0] if baseline is None else baseline
        if self.baseline not in self.teams:
            raise ValueError(f"baseline team {self.baseline!r} is not in the index")
        self._pos = {t: i for i, t in enumerate(self.teams)}
        self.free = [t for t in self.teams if t != self.baseline]

    @classmethod
    def from_matches(cls, pairs, baseline=None):
        names = set()
        for home, away in pairs:
            names.add(home)
            names.add(away)
        return cls(names, baseline=baseline)

    def __len__(self):
        return len(self.teams)

    def __contains__(self, team):
        return team in self._pos

    def position(self, team):
        try:
            return self._pos[team]
        except KeyError:
            raise UnknownTeamError(team) from None

    def positions(self, teams):
        return np.array([self.position(t) for t in teams], dtype=np.int64)

    def to_dict(self):
        return {"teams": list(self.teams), "baseline": self.baseline}

    @classmethod
    def from_dict(cls, d):
        return cls(d["teams"], baseline=d["baseline"], sort=False)


@dataclass(frozen=True)
class AbilitySpec:
    alpha: float
    beta: dict
    gamma: dict
    baseline: str

    def __post_init__(self):
        if self.beta.get(self.baseline, 0.0) != 0.0 or self.gamma.get(self.baseline, 0.0) != 0.0:
            raise ValueError("baseline team abilities must be zero")
        if set(self.beta) != set(self.gamma):
            raise ValueError("home and away abilities must cover the same teams")

    @property
    def teams(self):
        return sorted(self.beta)

    def to_dict(self):
        return {"alpha": self.alpha, "beta": dict(self.beta), "gamma": dict(self.gamma),
                "baseline": self.baseline}

    @classmethod
    def from_dict(cls, d):
        return cls(float(d["alpha"]), {k: float(v) for k, v in d["beta"].items()},
                   {k: float(v) for k, v in d["gamma"].items()}, d["baseline"])


def predict_mean(home, away, spec):
    """Expected score difference ``alpha + beta[home] + gamma[away]``."""
    for t in (home, away):
        if t not in spec.beta:
            raise UnknownTeamError(t)
    return spec.alpha + spec.beta[home] + spec.gamma[away]


def home_advantage(team, spec):
    """``beta[team] - gamma[team]``."""
    if team not in spec.beta:
        raise UnknownTeamError(team)
    return spec.beta[team] - spec.gamma[team]


@dataclass(frozen=True)
class InflationSpec:
    """Logit-linear zero-inflation probability.

    ``p = logistic(intercept + coeffs . z)``; ``coeffs`` is empty for a
    constant inflation probability.
    """

    intercept: float
    coeffs: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        if not (math.isfinite(self.intercept) or self.intercept == -math.inf):
            raise ValueError("inflation intercept must be finite or -inf")
        if not all(math.isfinite(c) for c in self.coeffs):
            raise ValueError("inflation coefficients must be finite")

    @classmethod
    def constant(cls, p):
        if p <= 0.0:
            return cls(-math.inf)
        return cls(math.log(p) - math.log1p(-p))


def inflation_prob(covariates, spec):
    """Logistic of ``intercept + coeffs . covariates`` (vectorized over rows)."""
    z = np.asarray(covariates, dtype=float)
    k = len(spec.coeffs)
    if z.shape[-1:] != (k,) and not (k == 0 and z.size == 0):
        raise ValueError(f"expected {k} inflation covariates, got shape {z.shape}")
    eta = spec.intercept + (z @ np.asarray(spec.coeffs) if k else 0.0)
    out = 0.5 * (1.0 + np.tanh(0.5 * np.asarray(eta, dtype=float)))
    return float(out) if np.ndim(out) == 0 else out


def odds_strength_covariate(odds_1, odds_x, odds_2):
    """``|logit(p_home) - logit(p_away)|`` from bookmaker odds (equal vig)."""
    inv = np.array([1.0 / odds_1, 1.0 / odds_x, 1.0 / odds_2], dtype=float)
    p = inv / inv.sum(axis=0)
    logit = np.log(p) - np.log1p(-p)
    return np.abs(logit[0] - logit[2])


class Kind(str, enum.Enum):
    UNIVARIATE = "univariate"
    BIV_A = "A"
    BIV_B = "B"
    BIV_C = "C"


class Family(str, enum.Enum):
    SKELLAM = "skellam"
    ZI_SKELLAM = "zi_skellam"
    DISC_NORMAL = "disc_normal"
    DISC_LAPLACE = "disc_laplace"


@dataclass(frozen=True)
class ModelStructure:
    kind: Kind = Kind.UNIVARIATE
    family: Family = Family.SKELLAM
    copula: CopulaFamily | None = None
    n_inflation_covariates: int = 0

    def __post_init__(self):
        kind = Kind(self.kind)
        fam = Family(self.family)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "family", fam)
        cop = self.copula
        if kind in (Kind.BIV_B, Kind.BIV_C):
            cop = CopulaFamily(cop if cop is not None else CopulaFamily.FRANK)
        elif kind is Kind.BIV_A:
            if cop not in (None, CopulaFamily.INDEPENDENCE, "independence"):
                raise ValueError("Model A has independent halves")
            cop = None
        elif cop is not None:
            raise ValueError("univariate models take no copula")
        object.__setattr__(self, "copula", cop)
        if kind is not Kind.UNIVARIATE and fam is Family.ZI_SKELLAM:
            raise ValueError("zero inflation is only available for univariate models")
        if self.n_inflation_covariates and fam is not Family.ZI_SKELLAM:
            raise ValueError("inflation covariates need the zero-inflated family")

    @property
    def bivariate(self):
        return self.kind is not Kind.UNIVARIATE

    @property
    def has_copula_param(self):
        return self.copula in (CopulaFamily.FRANK, CopulaFamily.GUMBEL)

    @property
    def n_blocks(self):
        return 2 if self.kind in (Kind.BIV_A, Kind.BIV_C) else 1

    @property
    def n_scales(self):
        return 1 if self.kind is Kind.UNIVARIATE else 2

    def n_params(self, n_teams):
        n = self.n_blocks * (2 * n_teams - 1) + self.n_scales
        if self.family is Family.ZI_SKELLAM:
            n += 1 + self.n_inflation_covariates
        if self.has_copula_param:
            n += 1
        return n

    @property
    def label(self):
        parts = [self.kind.value, self.family.value]
        if self.copula is not None:
            parts.append(self.copula.value)
        return "-".join(parts)

    def to_dict(self):
        return {
            "kind": self.kind.value,
            "family": self.family.value,
            "copula": None if self.copula is None else self.copula.value,
            "n_inflation_covariates": self.n_inflation_covariates,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(Kind(d["kind"]), Family(d["family"]),
                   None if d.get("copula") is None else CopulaFamily(d["copula"]),
                   int(d.get("n_inflation_covariates", 0)))


@dataclass(frozen=True)
class ModelParams:
    """Unpacked parameters: ability blocks, scales, inflation and copula."""

    abilities: tuple
    scales: tuple
    inflation: InflationSpec | None = None
    copula: CopulaSpec | None = None

    def ability_for_half(self, half):
        return self.abilities[min(half, len(self.abilities) - 1)]

    def to_dict(self):
        return {
            "abilities": [a.to_dict() for a in self.abilities],
            "scales": list(self.scales),
            "inflation": None if self.inflation is None else {
                "intercept": self.inflation.intercept, "coeffs": list(self.inflation.coeffs)},
            "copula": None if self.copula is None else {
                "family": self.copula.family.value, "theta": self.copula.theta},
        }

    @classmethod
    def from_dict(cls, d):
        infl = d.get("inflation")
        cop = d.get("copula")
        return cls(
            tuple(AbilitySpec.from_dict(a) for a in d["abilities"]),
            tuple(float(s) for s in d["scales"]),
            None if infl is None else InflationSpec(float(infl["intercept"]), tuple(infl["coeffs"])),
            None if cop is None else CopulaSpec(CopulaFamily(cop["family"]), float(cop["theta"])),
        )


def make_distribution(family, mu, scale, p=0.0):
    """Build the :mod:`zdist` distribution for one fixture."""
    family = Family(family)
    if family is Family.SKELLAM:
        return Skellam2Params(mu, scale)
    if family is Family.ZI_SKELLAM:
        return ZiSkellamParams(Skellam2Params(mu, scale), p)
    if family is Family.DISC_NORMAL:
        return DiscNormalParams(mu, scale)
    return DiscLaplaceParams(mu, scale)


# ---------------------------------------------------------------------------
# Packing


def _block_len(n_teams):
    return 2 * n_teams - 1


def _pack_block(spec, index):
    free = index.free
    return [spec.alpha] + [spec.beta[t] for t in free] + [spec.gamma[t] for t in free]


def _unpack_block(vec, index):
    k = len(index.free)
    beta = {index.baseline: 0.0}
    gamma = {index.baseline: 0.0}
    for i, t in enumerate(index.free):
        beta[t] = float(vec[1 + i])
        gamma[t] = float(vec[1 + k + i])
    return AbilitySpec(float(vec[0]), beta, gamma, index.baseline)


def _copula_to_raw(c):
    if c.family is CopulaFamily.FRANK:
        return c.theta
    # Gumbel theta >= 1
    return math.log(c.theta - 1.0) if c.theta > 1.0 else -math.inf


def _copula_from_raw(family, raw):
    if family is CopulaFamily.FRANK:
        if raw == 0.0:
            raw = 1e-12
        return CopulaSpec(family, float(raw))
    return CopulaSpec(family, 1.0 + math.exp(raw))


def pack_parameters(structure, params, index):
    """Flatten :class:`ModelParams` into the optimizer vector."""
    out = []
    logs = [math.log(s) for s in params.scales]
    if len(params.abilities) != structure.n_blocks or len(logs) != structure.n_scales:
        raise ValueError("parameters do not match the model structure")
    if structure.kind is Kind.BIV_B:
        out += _pack_block(params.abilities[0], index) + logs
    else:
        for blk, ls in zip(params.abilities, logs):
            out += _pack_block(blk, index) + [ls]
    if structure.family is Family.ZI_SKELLAM:
        infl = params.inflation or InflationSpec(-math.inf)
        if len(infl.coeffs) != structure.n_inflation_covariates:
            raise ValueError("inflation coefficient count does not match the structure")
        out += [infl.intercept, *infl.coeffs]
    if structure.has_copula_param:
        out.append(_copula_to_raw(params.copula))
    return np.asarray(out, dtype=float)


def unpack_parameters(vec, structure, index):
    """Inverse of :func:`pack_parameters`."""
    vec = np.asarray(vec, dtype=float)
    n_teams = len(index)
    if vec.shape != (structure.n_params(n_teams),):
        raise ValueError(
            f"expected {structure.n_params(n_teams)} parameters for {structure.label}, got {vec.shape}"
        )
    bl = _block_len(n_teams)
    pos = 0
    abilities = []
    logs = []
    if structure.kind is Kind.BIV_B:
        abilities.append(_unpack_block(vec[:bl], index))
        logs += [vec[bl], vec[bl + 1]]
        pos = bl + 2
    else:
        for _ in range(structure.n_blocks):
            abilities.append(_unpack_block(vec[pos:pos + bl], index))
            logs.append(vec[pos + bl])
            pos += bl + 1
    inflation = None
    if structure.family is Family.ZI_SKELLAM:
        k = structure.n_inflation_covariates
        inflation = InflationSpec(float(vec[pos]), tuple(vec[pos + 1:pos + 1 + k]))
        pos += 1 + k
    copula = None
    if structure.has_copula_param:
        copula = _copula_from_raw(structure.copula, float(vec[pos]))
    elif structure.copula is CopulaFamily.INDEPENDENCE:
        copula = CopulaSpec(CopulaFamily.INDEPENDENCE)
    return ModelParams(tuple(abilities), tuple(float(np.exp(s)) for s in logs), inflation, copula)


@dataclass
class Design:
    """Integer-coded fixtures for vectorized mean evaluation."""

    home: np.ndarray
    away: np.ndarray
    n_teams: int
    baseline: int = field(default=0)

    @classmethod
    def from_pairs(cls, index, homes, aways):
        return cls(index.positions(homes), index.positions(aways), len(index),
                   index.position(index.baseline))

    def _full(self, free_vals):
        full = np.zeros(self.n_teams)
        mask = np.ones(self.n_teams, dtype=bool)
        mask[self.baseline] = False
        full[mask] = free_vals
        return full

    def means(self, block):
        """Vector of ``mu_i`` for a packed ability block."""
        k = self.n_teams - 1
        beta = self._full(block[1:1 + k])
        gamma = self._full(block[1 + k:1 + 2 * k])
        return block[0] + beta[self.home] + gamma[self.away]

    def block_gradient(self, g_mu):
        """Pull back d(loglik)/d(mu_i) onto the packed ability block."""
        mask = np.ones(self.n_teams, dtype=bool)
        mask[self.baseline] = False
        gb = np.bincount(self.home, weights=g_mu, minlength=self.n_teams)[mask]
        gg = np.bincount(self.away, weights=g_mu, minlength=self.n_teams)[mask]
        return np.concatenate([[g_mu.sum()], gb, gg])

    def matrix(self):
        """Dense design matrix (rows = fixtures) for identifiability checks."""
        n = self.home.shape[0]
        k = self.n_teams - 1
        mask = np.ones(self.n_teams, dtype=bool)
        mask[self.baseline] = False
        col = np.cumsum(mask) - 1
        x = np.zeros((n, 1 + 2 * k))
        x[:, 0] = 1.0
        rows = np.arange(n)
        hb = mask[self.home]
        x[rows[hb], 1 + col[self.home[hb]]] = 1.0
        ab = mask[self.away]
        x[rows[ab], 1 + k + col[self.away[ab]]] = 1.0
        return x
