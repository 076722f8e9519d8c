"""Match data, standings and Monte Carlo season simulation.

CSV schema (UTF-8, comma separated, header required)::

    season,round,home,away,ft_home,ft_away,ht_home,ht_away,odds_1,odds_x,odds_2

``season``, ``home``, ``away``, ``ft_home`` and ``ft_away`` are required;
the others may be absent or left empty.  Odds are decimal and must be given
for all three outcomes or for none.
"""
from __future__ import annotations

import csv
import logging
import math
import warnings
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .copula import CopulaFamily, copula_sample
from .regress import Family, odds_strength_covariate

__all__ = [
    "CSV_COLUMNS",
    "RecordError",
    "MatchRecord",
    "ingest_csv",
    "read_fixtures",
    "describe",
    "odds_to_probs",
    "TeamLine",
    "SeasonTable",
    "season_table",
    "outcome_probs",
    "expected_outcomes",
    "outcome_table",
    "odds_covariates",
    "FixtureSampler",
    "SimulationSummary",
    "simulate_season",
    "complete_season",
    "EcdfBand",
    "ecdf_band",
]

log = logging.getLogger(__name__)

CSV_COLUMNS = ["season", "round", "home", "away", "ft_home", "ft_away",
               "ht_home", "ht_away", "odds_1", "odds_x", "odds_2"]
_REQUIRED = ["season", "home", "away", "ft_home", "ft_away"]
DEFAULT_POINTS = (2, 1, 0)


class RecordError(ValueError):
    def __init__(self, row, message):
        super().__init__(f"row {row}: {message}")
        self.row = row


@dataclass(frozen=True)
class MatchRecord:
    season: str
    home: str
    away: str
    ft_home: int
    ft_away: int
    round: int | None = None
    ht_home: int | None = None
    ht_away: int | None = None
    odds_1: float | None = None
    odds_x: float | None = None
    odds_2: float | None = None

    def __post_init__(self):
        if self.home == self.away:
            raise ValueError("a team cannot play itself")
        if self.ft_home < 0 or self.ft_away < 0:
            raise ValueError("goals must be non-negative")
        halves = (self.ht_home, self.ht_away)
        if (halves[0] is None) != (halves[1] is None):
            raise ValueError("half-time goals must be given for both teams")
        if self.ht_home is not None:
            if self.ht_home < 0 or self.ht_away < 0:
                raise ValueError("goals must be non-negative")
            if self.ht_home > self.ft_home or self.ht_away > self.ft_away:
                raise ValueError("half-time goals exceed full-time goals")
        odds = (self.odds_1, self.odds_x, self.odds_2)
        present = [o is not None for o in odds]
        if any(present) and not all(present):
            raise ValueError("odds must be given for all three outcomes or none")
        if all(present) and min(odds) <= 1.0:
            raise ValueError("decimal odds must exceed 1")

    @property
    def diff(self):
        return self.ft_home - self.ft_away

    @property
    def has_halves(self):
        return self.ht_home is not None

    @property
    def half1_diff(self):
        return None if self.ht_home is None else self.ht_home - self.ht_away

    @property
    def half2_diff(self):
        if self.ht_home is None:
            return None
        return (self.ft_home - self.ht_home) - (self.ft_away - self.ht_away)

    @property
    def has_odds(self):
        return self.odds_1 is not None


def _opt(cast, raw):
    raw = (raw or "").strip()
    return None if raw == "" else cast(raw)


def _goal(raw):
    v = float(raw)
    if v != int(v):
        raise ValueError(f"goal count {raw!r} is not an integer")
    return int(v)


def ingest_csv(path, rejected=None):
    """Read and validate a match CSV.

    Rows that parse but break a record invariant (for example half-time
    goals above full-time goals) are skipped with a warning and, when a
    ``rejected`` list is passed, appended to it as ``(row_number, message)``.
    Unparseable rows raise :class:`RecordError`.
    """
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            warnings.warn(f"{path} is empty", stacklevel=2)
            return records
        header = [h.strip() for h in reader.fieldnames]
        missing = [c for c in _REQUIRED if c not in header]
        if missing:
            raise RecordError(1, f"missing required columns {missing}")
        unknown = [c for c in header if c not in CSV_COLUMNS]
        if unknown:
            raise RecordError(1, f"unknown columns {unknown}")
        for rownum, raw in enumerate(reader, start=2):
            row = {k.strip(): (v if v is not None else "") for k, v in raw.items() if k is not None}
            try:
                fields = dict(
                    season=row["season"].strip(),
                    home=row["home"].strip(),
                    away=row["away"].strip(),
                    ft_home=_goal(row["ft_home"]),
                    ft_away=_goal(row["ft_away"]),
                    round=_opt(_goal, row.get("round")),
                    ht_home=_opt(_goal, row.get("ht_home")),
                    ht_away=_opt(_goal, row.get("ht_away")),
                    odds_1=_opt(float, row.get("odds_1")),
                    odds_x=_opt(float, row.get("odds_x")),
                    odds_2=_opt(float, row.get("odds_2")),
                )
            except (ValueError, TypeError) as exc:
                raise RecordError(rownum, f"cannot parse: {exc}") from exc
            if not fields["home"] or not fields["away"]:
                raise RecordError(rownum, "team names must be non-empty")
            try:
                records.append(MatchRecord(**fields))
            except ValueError as exc:
                msg = str(exc)
                warnings.warn(f"{path} row {rownum} rejected: {msg}", stacklevel=2)
                if rejected is not None:
                    rejected.append((rownum, msg))
    if not records:
        warnings.warn(f"{path} contains no match rows", stacklevel=2)
    return records


def read_fixtures(path):
    """Read a ``home,away`` fixture list (extra columns are ignored)."""
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"home", "away"} <= {h.strip() for h in reader.fieldnames}:
            raise RecordError(1, "fixture file needs 'home' and 'away' columns")
        for rownum, row in enumerate(reader, start=2):
            row = {k.strip(): v for k, v in row.items() if k is not None}
            h, a = row["home"].strip(), row["away"].strip()
            if not h or not a or h == a:
                raise RecordError(rownum, "invalid fixture")
            out.append((h, a))
    return out


def _skew(x):
    x = np.asarray(x, dtype=float)
    m2 = np.mean((x - x.mean()) ** 2)
    if m2 == 0:
        return 0.0
    return float(np.mean((x - x.mean()) ** 3) / m2**1.5)


def describe(records):
    """Per-season summaries of score differences and goals.

    SD uses the ``n - 1`` denominator; skewness is the moment ratio
    ``m3 / m2^1.5``.
    """
    seasons = {}
    for r in records:
        seasons.setdefault(r.season, []).append(r)
    out = []
    for season in sorted(seasons):
        rows = seasons[season]
        d = np.array([r.diff for r in rows], dtype=float)
        hg = np.array([r.ft_home for r in rows], dtype=float)
        ag = np.array([r.ft_away for r in rows], dtype=float)
        n = d.size
        corr = float(np.corrcoef(hg, ag)[0, 1]) if n > 1 and hg.std() > 0 and ag.std() > 0 else float("nan")
        out.append({
            "season": season,
            "n_matches": n,
            "mean": float(d.mean()),
            "sd": float(d.std(ddof=1)) if n > 1 else float("nan"),
            "skewness": _skew(d),
            "home_mean": float(hg.mean()),
            "home_var": float(hg.var(ddof=1)) if n > 1 else float("nan"),
            "away_mean": float(ag.mean()),
            "away_var": float(ag.var(ddof=1)) if n > 1 else float("nan"),
            "home_away_corr": corr,
            "draws": int(np.sum(d == 0)),
        })
    return out


def odds_to_probs(odds_1, odds_x, odds_2):
    """Implied (home, draw, away) probabilities, margin removed proportionally."""
    odds = np.array([odds_1, odds_x, odds_2], dtype=float)
    if np.any(~(odds > 1.0)):
        raise ValueError("decimal odds must all exceed 1")
    inv = 1.0 / odds
    p = inv / inv.sum(axis=0)
    return tuple(float(v) for v in p) if p.ndim == 1 else p


# ---------------------------------------------------------------------------
# Standings


@dataclass
class TeamLine:
    team: str
    played: int = 0
    wins: int = 0
    draws: int = 0
    losses: int = 0
    goal_diff: int = 0
    points: int = 0


@dataclass
class SeasonTable:
    lines: dict
    points_scheme: tuple = DEFAULT_POINTS

    def ordered(self):
        return sorted(self.lines.values(), key=lambda l: (-l.points, -l.goal_diff, l.team))

    def to_rows(self):
        return [
            {"rank": i + 1, "team": l.team, "played": l.played, "wins": l.wins, "draws": l.draws,
             "losses": l.losses, "goal_diff": l.goal_diff, "points": l.points}
            for i, l in enumerate(self.ordered())
        ]


def season_table(results, teams=(), points=DEFAULT_POINTS):
    """Table from ``(home, away, diff)`` triples or :class:`MatchRecord` objects."""
    lines = {t: TeamLine(t) for t in teams}
    win, draw, loss = points
    for r in results:
        if isinstance(r, MatchRecord):
            h, a, d = r.home, r.away, r.diff
        else:
            h, a, d = r
        for t in (h, a):
            lines.setdefault(t, TeamLine(t))
        lh, la = lines[h], lines[a]
        lh.played += 1
        la.played += 1
        lh.goal_diff += d
        la.goal_diff -= d
        if d > 0:
            lh.wins += 1
            la.losses += 1
            lh.points += win
            la.points += loss
        elif d < 0:
            la.wins += 1
            lh.losses += 1
            la.points += win
            lh.points += loss
        else:
            lh.draws += 1
            la.draws += 1
            lh.points += draw
            la.points += draw
    return SeasonTable(lines, tuple(points))


# ---------------------------------------------------------------------------
# Predictive outcome probabilities


def _fulltime_grid(model, home, away):
    """Support and pmf of the full-time difference for any fitted model."""
    if not model.structure.bivariate:
        d = model.distribution(home, away)
        lo, hi = d.support(1e-15)
        zs = np.arange(lo, hi + 1)
        return zs, d.pmf(zs)
    from .copula import joint_pmf_grid

    b = model.bivariate(home, away)
    r1 = b.marginal1.support(1e-15)
    r2 = b.marginal2.support(1e-15)
    ys1, ys2, table = joint_pmf_grid(b, r1, r2)
    zs = np.arange(ys1[0] + ys2[0], ys1[-1] + ys2[-1] + 1)
    pm = np.zeros(zs.size)
    idx = (ys1[:, None] + ys2[None, :]) - zs[0]
    np.add.at(pm, idx.ravel(), table.ravel())
    return zs, pm


def outcome_probs(model, home, away, covariates=None):
    """(home win, draw, away win) probabilities for one fixture."""
    if not model.structure.bivariate:
        d = model.distribution(home, away, covariates=covariates)
        p_away = float(d.cdf(-1))
        p_draw = float(d.pmf(0))
        return 1.0 - p_away - p_draw, p_draw, p_away
    zs, pm = _fulltime_grid(model, home, away)
    pm = pm / pm.sum()
    return float(pm[zs > 0].sum()), float(pm[zs == 0].sum()), float(pm[zs < 0].sum())


def expected_outcomes(matches, model, covariates=None):
    """Expected numbers of home wins, draws and away wins over ``matches``.

    ``covariates`` holds one row of inflation covariates per match when the
    model needs them.
    """
    tot = np.zeros(3)
    for i, m in enumerate(matches):
        h, a = (m.home, m.away) if isinstance(m, MatchRecord) else (m[0], m[1])
        tot += outcome_probs(model, h, a, None if covariates is None else covariates[i])
    return tuple(float(v) for v in tot)


def outcome_table(matches, models):
    """Observed, bookmaker-implied and model-expected outcome counts.

    ``models`` maps a label to a fitted model.  The bookmaker row is only
    present when every match carries odds.  Models with inflation covariates
    use the odds-strength covariate of each match.
    """
    d = np.array([m.diff for m in matches])
    rows = [{"source": "observed", "home_wins": float(np.sum(d > 0)),
             "draws": float(np.sum(d == 0)), "away_wins": float(np.sum(d < 0))}]
    if matches and all(m.has_odds for m in matches):
        probs = odds_to_probs(np.array([m.odds_1 for m in matches]),
                              np.array([m.odds_x for m in matches]),
                              np.array([m.odds_2 for m in matches]))
        s = np.asarray(probs).sum(axis=1)
        rows.append({"source": "bets_implied", "home_wins": float(s[0]),
                     "draws": float(s[1]), "away_wins": float(s[2])})
    for label, model in models.items():
        e = expected_outcomes(matches, model, odds_covariates(matches, model))
        rows.append({"source": label, "home_wins": e[0], "draws": e[1], "away_wins": e[2]})
    return rows


def odds_covariates(matches, model):
    """Odds-strength covariate rows for ``matches``, or None if ``model`` needs none."""
    k = model.structure.n_inflation_covariates
    if k == 0:
        return None
    if k != 1 or not all(isinstance(m, MatchRecord) and m.has_odds for m in matches):
        raise ValueError("this model needs the odds covariate, so every match must carry odds")
    return np.array([[odds_strength_covariate(m.odds_1, m.odds_x, m.odds_2)] for m in matches])


# ---------------------------------------------------------------------------
# Simulation


class FixtureSampler:
    """Draws one full-time difference per fixture from a fitted model.

    ``covariates`` (one row per fixture) is only used by zero-inflated
    models with inflation covariates.
    """

    def __init__(self, model, fixtures, covariates=None):
        self.fixtures = list(fixtures)
        self.model = model
        n = len(self.fixtures)
        st = model.structure
        self._mode = None
        if n == 0:
            self._mode = "empty"
            return
        # distinct pairs share one predictive distribution
        pairs = sorted(set(self.fixtures))
        where = {f: i for i, f in enumerate(pairs)}
        self._inv = np.array([where[f] for f in self.fixtures], dtype=np.int64)
        for h, a in pairs:
            model.index.position(h)
            model.index.position(a)
        if st.n_inflation_covariates:
            if covariates is None or len(covariates) != n:
                raise ValueError("this model needs one row of inflation covariates per fixture")
            first = {f: i for i, f in reversed(list(enumerate(self.fixtures)))}
            pair_cov = [covariates[first[f]] for f in pairs]
        else:
            pair_cov = [None] * len(pairs)
        if not st.bivariate:
            dists = [model.distribution(h, a, covariates=c) for (h, a), c in zip(pairs, pair_cov)]
            if st.family in (Family.SKELLAM, Family.ZI_SKELLAM):
                self._mode = "skellam"
                base = [d.base if st.family is Family.ZI_SKELLAM else d for d in dists]
                rates = np.array([b.to_rates().rates for b in base])[self._inv]
                self._t1, self._t2 = rates[:, 0], rates[:, 1]
                p = [d.p if st.family is Family.ZI_SKELLAM else 0.0 for d in dists]
                self._p = np.array(p)[self._inv]
                if st.n_inflation_covariates:
                    self._p = np.array([model.distribution(h, a, covariates=c).p
                                        for (h, a), c in zip(self.fixtures, covariates)])
            else:
                self._mode = "grid"
                self._grid1 = _cdf_table(dists)
        else:
            self._mode = "copula"
            bivs = [model.bivariate(h, a) for h, a in pairs]
            self._copula = bivs[0].copula
            self._grid1 = _cdf_table([b.marginal1 for b in bivs])
            self._grid2 = _cdf_table([b.marginal2 for b in bivs])

    def draw(self, rng):
        n = len(self.fixtures)
        if self._mode == "empty":
            return np.zeros(0, dtype=np.int64)
        if self._mode == "skellam":
            d = rng.poisson(self._t1) - rng.poisson(self._t2)
            if np.any(self._p > 0):
                gate = rng.random(n) < self._p
                d = np.where(gate, 0, d)
            return d
        if self._mode == "grid":
            return _table_quantile(self._grid1, self._inv, rng.random(n))
        if self._copula.family is CopulaFamily.INDEPENDENCE:
            u, v = rng.random(n), rng.random(n)
        else:
            u, v = copula_sample(self._copula, rng, n)
        return (_table_quantile(self._grid1, self._inv, u)
                + _table_quantile(self._grid2, self._inv, v))


def _cdf_table(dists):
    lo = min(d.support(1e-15)[0] for d in dists)
    hi = max(d.support(1e-15)[1] for d in dists)
    zs = np.arange(lo, hi + 1)
    cdf = np.vstack([d.cdf(zs) for d in dists])
    cdf[:, -1] = 1.0
    return zs, cdf


def _table_quantile(table, rows, u):
    zs, cdf = table
    idx = np.argmax(cdf[rows] >= u[:, None], axis=1)
    return zs[idx]


def _rep_rng(seed, i):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i,)))


@dataclass
class SimulationSummary:
    teams: list
    expected_points: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    champion_prob: np.ndarray
    relegation_prob: np.ndarray
    expected_goal_diff: np.ndarray
    current_points: np.ndarray
    n_sims: int
    seed: int
    n_matches: int
    points_scheme: tuple = DEFAULT_POINTS
    n_relegated: int = 2
    points: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self):
        order = np.lexsort((np.array(self.teams), -self.expected_points))
        return {
            "n_sims": self.n_sims,
            "seed": self.seed,
            "n_simulated_matches": self.n_matches,
            "points_scheme": list(self.points_scheme),
            "n_relegated": self.n_relegated,
            "teams": [
                {
                    "team": self.teams[i],
                    "current_points": float(self.current_points[i]),
                    "expected_points": float(self.expected_points[i]),
                    "ci_low": float(self.ci_low[i]),
                    "ci_high": float(self.ci_high[i]),
                    "champion_prob": float(self.champion_prob[i]),
                    "relegation_prob": float(self.relegation_prob[i]),
                    "expected_goal_diff": float(self.expected_goal_diff[i]),
                }
                for i in order
            ],
        }

    def standings_rows(self):
        return self.to_dict()["teams"]


def _slot_share(key, n_slots, top):
    """Share of ``n_slots`` top (or bottom) places per team, ties split equally.

    ``key`` has shape (n_sims, n_teams); larger is better.
    """
    a = key[:, :, None]
    b = key[:, None, :]
    ahead = np.sum(b > a, axis=2) if top else np.sum(b < a, axis=2)
    tied = np.sum(b == a, axis=2)
    covered = np.clip(n_slots - ahead, 0, tied)
    return (covered / tied).mean(axis=0)


def _simulate(sampler, team_pos, n_teams, n_sims, seed, points, n_jobs):
    fixtures = sampler.fixtures
    hi = np.array([team_pos[h] for h, _ in fixtures], dtype=np.int64)
    ai = np.array([team_pos[a] for _, a in fixtures], dtype=np.int64)
    win, draw, loss = points
    pts = np.zeros((n_sims, n_teams))
    gd = np.zeros((n_sims, n_teams))

    def run(chunk):
        for i in chunk:
            d = sampler.draw(_rep_rng(seed, i))
            hp = np.where(d > 0, win, np.where(d == 0, draw, loss))
            ap = np.where(d < 0, win, np.where(d == 0, draw, loss))
            pts[i] = np.bincount(hi, hp, n_teams) + np.bincount(ai, ap, n_teams)
            gd[i] = np.bincount(hi, d, n_teams) - np.bincount(ai, d, n_teams)

    reps = range(n_sims)
    if n_jobs <= 1:
        run(reps)
    else:
        chunks = [reps[k::n_jobs] for k in range(n_jobs)]
        with ThreadPoolExecutor(max_workers=n_jobs) as ex:
            list(ex.map(run, chunks))
    return pts, gd


def _summarize(teams, pts, gd, base_pts, n_sims, seed, n_matches, points, n_relegated):
    total = pts + base_pts[None, :]
    # points dominate; goal difference breaks ties; remaining ties split credit
    key = total * 1_000_000 + gd
    return SimulationSummary(
        teams=list(teams),
        expected_points=total.mean(axis=0),
        ci_low=np.percentile(total, 2.5, axis=0),
        ci_high=np.percentile(total, 97.5, axis=0),
        champion_prob=_slot_share(key, 1, top=True),
        relegation_prob=_slot_share(key, n_relegated, top=False),
        expected_goal_diff=gd.mean(axis=0),
        current_points=base_pts.astype(float),
        n_sims=n_sims,
        seed=seed,
        n_matches=n_matches,
        points_scheme=tuple(points),
        n_relegated=n_relegated,
        points=total,
    )


def simulate_season(fixtures, model, n_sims=10_000, seed=None, points=DEFAULT_POINTS,
                    n_relegated=2, n_jobs=1, covariates=None):
    """Simulate every fixture ``n_sims`` times and summarize the tables.

    Replication ``i`` uses its own generator seeded from ``(seed, i)``, so
    the result does not depend on ``n_jobs``.
    """
    if seed is None:
        raise ValueError("a seed is required")
    fixtures = list(fixtures)
    if not fixtures:
        raise ValueError("fixture list is empty")
    teams = sorted({t for f in fixtures for t in f})
    pos = {t: i for i, t in enumerate(teams)}
    sampler = FixtureSampler(model, fixtures, covariates)
    pts, gd = _simulate(sampler, pos, len(teams), n_sims, seed, points, n_jobs)
    return _summarize(teams, pts, gd, np.zeros(len(teams)), n_sims, seed, len(fixtures),
                      points, n_relegated)


def complete_season(played, remaining, model, n_sims=10_000, seed=None, points=DEFAULT_POINTS,
                    n_relegated=2, n_jobs=1, legs=1, covariates=None):
    """Current table from ``played`` plus simulated ``remaining`` fixtures.

    ``played`` holds :class:`MatchRecord` objects or ``(home, away, diff)``
    triples; ``model`` should have been fitted on them.  Each ordered pair
    may occur at most ``legs`` times across played and remaining matches.
    """
    if seed is None:
        raise ValueError("a seed is required")
    played = list(played)
    remaining = list(remaining)
    table = season_table(played, points=points)
    uses = Counter((r.home, r.away) if isinstance(r, MatchRecord) else (r[0], r[1]) for r in played)
    uses.update(tuple(f) for f in remaining)
    clash = sorted(f for f, k in uses.items() if k > legs)
    if clash:
        raise ValueError(f"fixtures scheduled more than {legs} time(s): {clash[:3]}")
    for h, a in remaining:
        for t in (h, a):
            if t not in model.index:
                raise ValueError(f"team {t!r} has no training data")
    teams = sorted(set(table.lines) | {t for f in remaining for t in f})
    pos = {t: i for i, t in enumerate(teams)}
    base = np.array([table.lines[t].points if t in table.lines else 0 for t in teams], dtype=float)
    base_gd = np.array([table.lines[t].goal_diff if t in table.lines else 0 for t in teams], dtype=float)
    sampler = FixtureSampler(model, remaining, covariates)
    pts, gd = _simulate(sampler, pos, len(teams), n_sims, seed, points, n_jobs)
    gd = gd + base_gd[None, :]
    return _summarize(teams, pts, gd, base, n_sims, seed, len(remaining), points, n_relegated)


# ---------------------------------------------------------------------------
# ECDF band


@dataclass
class EcdfBand:
    z: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    observed: np.ndarray
    n_reps: int
    seed: int
    level: float

    def at(self, z):
        """Band ``(lower, upper)`` at any integer, constant outside the grid."""
        if z < self.z[0]:
            return 0.0, 0.0
        if z > self.z[-1]:
            return 1.0, 1.0
        i = int(z - self.z[0])
        return float(self.lower[i]), float(self.upper[i])

    def coverage(self, support_only=True):
        """Fraction of grid points where the observed ECDF lies in the band."""
        inside = (self.observed >= self.lower - 1e-12) & (self.observed <= self.upper + 1e-12)
        if support_only:
            mask = (self.observed > 0) & (self.observed < 1)
            mask |= np.r_[False, np.diff(self.observed) > 0]
            inside = inside[mask]
        return float(inside.mean()) if inside.size else 1.0

    def to_dict(self):
        return {
            "n_reps": self.n_reps, "seed": self.seed, "level": self.level,
            "points": [
                {"z": int(z), "lower": float(lo), "upper": float(up), "observed": float(ob)}
                for z, lo, up, ob in zip(self.z, self.lower, self.upper, self.observed)
            ],
        }


def ecdf_band(observed, fixtures, model, n_reps=10_000, seed=None, level=0.95, n_jobs=1,
              covariates=None):
    """Pointwise percentile band for the ECDF of the score differences.

    Replicate datasets of the same fixtures are drawn from ``model``; at each
    integer ``z`` the band is the central ``level`` range of the replicate
    ECDFs.
    """
    if seed is None:
        raise ValueError("a seed is required")
    if n_reps < 100:
        raise ValueError("n_reps must be at least 100")
    obs = np.asarray(observed, dtype=np.int64)
    fixtures = list(fixtures)
    if obs.size != len(fixtures):
        raise ValueError("observed differences and fixtures must align")
    sampler = FixtureSampler(model, fixtures, covariates)
    sims = np.empty((n_reps, len(fixtures)), dtype=np.int64)

    def run(chunk):
        for i in chunk:
            sims[i] = sampler.draw(_rep_rng(seed, i))

    reps = range(n_reps)
    if n_jobs <= 1:
        run(reps)
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as ex:
            list(ex.map(run, [reps[k::n_jobs] for k in range(n_jobs)]))
    lo = int(min(obs.min(), sims.min())) - 1
    hi = int(max(obs.max(), sims.max())) + 1
    z = np.arange(lo, hi + 1)
    sims.sort(axis=1)
    n = len(fixtures)
    ecdfs = np.vstack([np.searchsorted(s, z, side="right") for s in sims]) / n
    alpha = (1.0 - level) / 2.0
    lower = np.percentile(ecdfs, 100 * alpha, axis=0)
    upper = np.percentile(ecdfs, 100 * (1 - alpha), axis=0)
    observed_ecdf = np.searchsorted(np.sort(obs), z, side="right") / n
    return EcdfBand(z, lower, upper, observed_ecdf, n_reps, seed, level)
