"""Acceptance suite: one test and one printed PASS/FAIL line per criterion."""
import math
import time

import numpy as np
import pytest
from scipy.special import logsumexp
from scipy.stats import poisson

from scorediff.copula import BivariateZ, CopulaSpec, joint_pmf_grid, outcome_probabilities, win_probability
from scorediff.fit import fit_bivariate, fit_zi_em, information_criteria
from scorediff.league import simulate_season
from scorediff.regress import Kind, ModelStructure, inflation_prob
from scorediff.zdist import (
    DiscLaplaceParams,
    DiscNormalParams,
    Skellam2Params,
    SkellamParams,
    ZiSkellamParams,
    skellam_log_pmf,
    support_bounds,
)

from gradcheck import GRAD_STRUCTURES, build_likelihood, gradient_relative_error, random_interior_point
from synth import fixed_model, half_time_league, random_abilities, round_robin, team_names, zi_league


def convolution_logpmf(z, t1, t2):
    """``log sum_k P(X1 = z + k) P(X2 = k)`` truncated where the tail is below 1e-14."""
    k_hi = int(poisson.isf(1e-16, max(t1, t2))) + 10
    k = np.arange(max(0, -z), k_hi + max(0, -z) + 1)
    assert poisson.sf(k[-1], t2) < 1e-14
    return logsumexp(poisson.logpmf(z + k, t1) + poisson.logpmf(k, t2))


def test_c1_skellam_oracle(criterion):
    thetas = [0.1, 1.0, 7.5, 25.0]
    zs = np.arange(-30, 31)
    worst = 0.0
    elapsed = 0.0
    for t1 in thetas:
        for t2 in thetas:
            start = time.perf_counter()
            got = skellam_log_pmf(zs, SkellamParams(t1, t2))
            elapsed += time.perf_counter() - start
            ref = np.array([convolution_logpmf(int(z), t1, t2) for z in zs])
            worst = max(worst, float(np.max(np.abs(got - ref) / np.abs(ref))))
    ok = worst <= 1e-9 and elapsed < 5.0
    criterion(1, "Skellam log-pmf vs Poisson convolution", ok,
              f"max rel err {worst:.2e} (<= 1e-9), evaluation {elapsed:.3f} s (< 5 s)")
    assert ok


def test_c2_normalization(criterion):
    mu, s1, s2 = 0.5, 15.0, 14.0
    laplace_b = math.sqrt(s1 / 2)
    univariate = {
        "skellam": Skellam2Params(mu, s1),
        "zi_skellam": ZiSkellamParams(Skellam2Params(mu, s1), 0.1),
        "disc_normal": DiscNormalParams(mu, s1),
        "disc_laplace": DiscLaplaceParams(mu, laplace_b),
    }
    errors = {}
    for name, d in univariate.items():
        lo, hi = support_bounds(d)
        errors[name] = abs(float(np.sum(d.pmf(np.arange(lo, hi + 1)))) - 1.0)
    cops = [("frank", t) for t in (10, 3, -3, -10)] + [("gumbel", t) for t in (1, 2, 3, 5)]
    for fam, t in cops:
        b = BivariateZ(Skellam2Params(mu, s1), Skellam2Params(mu, s2), CopulaSpec(fam, float(t)))
        _, _, table = joint_pmf_grid(b, support_bounds(b.marginal1), support_bounds(b.marginal2))
        errors[f"{fam}({t})"] = abs(float(table.sum()) - 1.0)
    worst = max(errors, key=errors.get)
    ok = errors[worst] <= 1e-8
    criterion(2, "normalization", ok, f"{len(errors)} models, worst |sum - 1| = {errors[worst]:.1e} ({worst})")
    assert ok


def test_c3_aic_arithmetic(criterion):
    cases = [(-1590.047, 72, 3324.09), (-1601.736, 38, 3279.47), (-1586.922, 73, 3319.84)]
    diffs = [abs(information_criteria(ll, k, 306)[0] - ref) for ll, k, ref in cases]
    ok = max(diffs) <= 0.01
    criterion(3, "AIC arithmetic", ok, f"max |AIC - reference| = {max(diffs):.4f} (<= 0.01)")
    assert ok


def test_c4_parameter_recovery(criterion):
    start = time.perf_counter()
    n_reps = 50
    b_close, thetas = 0, []
    for rep in range(n_reps):
        rows, _ = half_time_league(10_000 + rep, n_teams=18, theta=2.0, sigma2=(14.0, 15.0))
        fits = {k: fit_bivariate(rows, ModelStructure(k)) for k in (Kind.BIV_A, Kind.BIV_B, Kind.BIV_C)}
        best = min(f.aic for f in fits.values())
        b_close += fits[Kind.BIV_B].aic - best <= 2.0
        thetas.append(fits[Kind.BIV_B].estimates.copula.theta)
    share = b_close / n_reps
    theta_mean = float(np.mean(thetas))
    p_hats = []
    for rep in range(10):
        rows, _ = zi_league(20_000 + rep, n_matches=1000, n_teams=18, p=0.1)
        p_hats.append(inflation_prob([], fit_zi_em(rows).estimates.inflation))
    p_mean = float(np.mean(p_hats))
    elapsed = time.perf_counter() - start
    ok = share >= 0.8 and abs(theta_mean - 2.0) <= 0.5 and abs(p_mean - 0.1) <= 0.05 and elapsed < 600
    criterion(4, "parameter recovery", ok,
              f"B within 2 of min AIC in {share:.0%} of {n_reps} (>= 80%); mean theta {theta_mean:.3f} "
              f"(2 +/- 0.5); mean p {p_mean:.4f} over 10 ZI fits (0.1 +/- 0.05); {elapsed:.0f} s (< 600 s)")
    assert ok


def test_c5_em_monotone(criterion):
    violations, worst = 0, 0.0
    for seed in range(20):
        p = [0.05, 0.1, 0.2, 0.3][seed % 4]
        rows, _ = zi_league(30_000 + seed, n_matches=300, n_teams=6, p=p)
        drops = -np.diff(fit_zi_em(rows).loglik_trace)
        worst = max(worst, float(drops.max(initial=0.0)))
        violations += int(np.sum(drops > 1e-10))
    ok = violations == 0
    criterion(5, "EM monotonicity", ok, f"{violations} decreases over 20 datasets (largest drop {worst:.1e})")
    assert ok


def test_c6_gradients(criterion):
    rng = np.random.default_rng(6)
    worst = {}
    for st in GRAD_STRUCTURES:
        lik = build_likelihood(st, seed=4)
        worst[st.label] = max(gradient_relative_error(lik, random_interior_point(st, 6, rng))
                              for _ in range(20))
    label = max(worst, key=worst.get)
    ok = worst[label] < 1e-4
    criterion(6, "gradient check", ok,
              f"{len(worst)} structures x 20 points, worst rel err {worst[label]:.1e} ({label}) (< 1e-4)")
    assert ok


def test_c7_simulation_conservation(criterion):
    teams = team_names(10)
    spec = random_abilities(np.random.default_rng(7), teams)
    fixtures = round_robin(teams)
    models = [fixed_model(spec, 12.0),
              fixed_model(spec, 7.0, structure=ModelStructure(Kind.BIV_B), copula=CopulaSpec("frank", 2.0))]
    bad_tables, champ_err, identical = 0, 0.0, True
    for m in models:
        serial = simulate_season(fixtures, m, n_sims=2000, seed=77)
        parallel = simulate_season(fixtures, m, n_sims=2000, seed=77, n_jobs=4)
        bad_tables += int(np.sum(serial.points.sum(axis=1) != 2 * len(fixtures)))
        champ_err = max(champ_err, abs(serial.champion_prob.sum() - 1.0))
        identical &= np.array_equal(serial.points, parallel.points) and serial.to_dict() == parallel.to_dict()
    ok = bad_tables == 0 and champ_err <= 1e-12 and identical
    criterion(7, "simulation conservation", ok,
              f"{bad_tables} tables break sum = 2n; |sum champion - 1| = {champ_err:.1e}; "
              f"serial == parallel: {identical}")
    assert ok


@pytest.fixture(scope="module")
def fitted_b():
    rows, _ = half_time_league(8, n_teams=18)
    return fit_bivariate(rows, ModelStructure(Kind.BIV_B))


def test_c8_conditional_coherence(fitted_b, criterion):
    sum_err, monotone = 0.0, True
    for h, a in [("T01", "T02"), ("T05", "T00"), ("T17", "T09")]:
        b = fitted_b.bivariate(h, a)
        wins = []
        for x in range(-10, 11):
            w, d, l = outcome_probabilities(x, b)
            sum_err = max(sum_err, abs(w + d + l - 1.0))
            wins.append(win_probability(x, b))
        monotone &= bool(np.all(np.diff(wins) >= 0))
    ok = sum_err <= 1e-10 and monotone
    criterion(8, "conditional coherence", ok,
              f"max |W + D + L - 1| = {sum_err:.1e} (<= 1e-10); win probability non-decreasing: {monotone}")
    assert ok


def test_c9_ecdf_self_consistency(criterion):
    from scorediff.fit import fit_univariate
    from scorediff.league import FixtureSampler, ecdf_band

    teams = team_names(18)
    truth = fixed_model(random_abilities(np.random.default_rng(9), teams), 14.0)
    fixtures = round_robin(teams)
    obs = FixtureSampler(truth, fixtures).draw(np.random.default_rng(90))
    model = fit_univariate([(h, a, int(z)) for (h, a), z in zip(fixtures, obs)])
    cover = []
    for trial in range(20):
        data = FixtureSampler(model, fixtures).draw(np.random.default_rng(900 + trial))
        cover.append(ecdf_band(data, fixtures, model, n_reps=1000, seed=trial).coverage())
    mean = float(np.mean(cover))
    ok = mean >= 0.9
    criterion(9, "ECDF band self-consistency", ok,
              f"mean coverage {mean:.3f} over 20 trials (>= 0.90), min trial {min(cover):.3f}")
    assert ok
